#include <gtest/gtest.h>

#include <random>

#include "odekit/matrix.hpp"
#include "test_util.hpp"

using namespace odekit;
using test::random_values;

namespace {

DenseMatrix identity(index_t n) {
    DenseMatrix a(n, n);
    for (index_t i = 0; i < n; ++i) a(i, i) = 1.0;
    return a;
}

DenseMatrix random_matrix(std::mt19937& rng, index_t m, index_t n) {
    DenseMatrix a(m, n);
    auto vals = random_values(rng, static_cast<std::size_t>(m * n));
    for (index_t i = 0; i < m; ++i)
        for (index_t j = 0; j < n; ++j) a(i, j) = vals[static_cast<std::size_t>(i * n + j)];
    return a;
}

} // namespace

TEST(DenseMatrix, CloneKeepsShapeAndKind) {
    DenseMatrix a(2, 2);
    a(0, 1) = 5.0;
    auto c = a.clone();
    EXPECT_EQ(c->rows(), 2);
    EXPECT_EQ(c->cols(), 2);
    EXPECT_EQ(c->kind(), MatrixKind::Dense);
    EXPECT_EQ(a(0, 1), 5.0); // source untouched
}

TEST(DenseMatrix, CopySemantics) {
    auto a = identity(2);
    DenseMatrix b(2, 2);
    a.copy_to(b);
    EXPECT_EQ(b(0, 0), 1.0);
    EXPECT_EQ(b(0, 1), 0.0);

    a(0, 0) = 9.0; // perturbing A leaves B fixed
    EXPECT_EQ(b(0, 0), 1.0);

    std::mt19937 rng(5);
    auto r = random_matrix(rng, 3, 3);
    DenseMatrix s(3, 3);
    r.copy_to(s);
    for (index_t i = 0; i < 3; ++i)
        for (index_t j = 0; j < 3; ++j) EXPECT_EQ(r(i, j), s(i, j));

    DenseMatrix wrong(2, 3);
    EXPECT_THROW(r.copy_to(wrong), shape_error);
}

TEST(DenseMatrix, CopyCloneRoundTripBitExact) {
    std::mt19937 rng(17);
    auto a = random_matrix(rng, 4, 4);
    auto c = a.clone();
    a.copy_to(*c);
    const auto* d = dynamic_cast<const DenseMatrix*>(c.get());
    for (index_t i = 0; i < 4; ++i)
        for (index_t j = 0; j < 4; ++j) EXPECT_EQ(a(i, j), (*d)(i, j));
}

TEST(DenseMatrix, ScaleAddIdentity) {
    auto a = identity(2);
    a.scale_add_identity(2.0); // 2I + I = 3I
    EXPECT_EQ(a(0, 0), 3.0);
    EXPECT_EQ(a(1, 1), 3.0);
    EXPECT_EQ(a(0, 1), 0.0);

    DenseMatrix b(2, 2);
    b(0, 1) = 1.0;
    b.scale_add_identity(1.0);
    EXPECT_EQ(b(0, 0), 1.0);
    EXPECT_EQ(b(0, 1), 1.0);
    EXPECT_EQ(b(1, 0), 0.0);
    EXPECT_EQ(b(1, 1), 1.0);

    std::mt19937 rng(2);
    auto c = random_matrix(rng, 3, 3);
    c.scale_add_identity(0.0);
    for (index_t i = 0; i < 3; ++i)
        for (index_t j = 0; j < 3; ++j) EXPECT_EQ(c(i, j), i == j ? 1.0 : 0.0);

    DenseMatrix rect(2, 3);
    EXPECT_THROW(rect.scale_add_identity(1.0), shape_error);
}

TEST(DenseMatrix, ScaleAddIdentityDiagAffineExact) {
    DenseMatrix a(3, 3);
    a(0, 0) = 0.25;
    a(1, 1) = -2.0;
    a(2, 2) = 8.0;
    const double c = 0.5;
    a.scale_add_identity(c);
    EXPECT_EQ(a(0, 0), c * 0.25 + 1.0);
    EXPECT_EQ(a(1, 1), c * -2.0 + 1.0);
    EXPECT_EQ(a(2, 2), c * 8.0 + 1.0);
}

TEST(DenseMatrix, MatvecExamples) {
    auto I = identity(3);
    SerialVector x{1.0, -2.0, 3.0}, z(3);
    I.matvec(x, z);
    for (index_t i = 0; i < 3; ++i) EXPECT_EQ(z[i], x[i]);

    DenseMatrix d(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = 2.0;
    SerialVector ones{1.0, 1.0}, z2(2);
    d.matvec(ones, z2);
    EXPECT_EQ(z2[0], 1.0);
    EXPECT_EQ(z2[1], 2.0);
}

// DERIVED oracle: naive triple-loop product.
TEST(DenseMatrix, MatvecAgainstNaiveLoop) {
    std::mt19937 rng(29);
    auto a = random_matrix(rng, 4, 4);
    auto xv = random_values(rng, 4);
    SerialVector x(xv), z(4);
    a.matvec(x, z);
    for (index_t i = 0; i < 4; ++i) {
        double s = 0.0;
        for (index_t j = 0; j < 4; ++j) s += a(i, j) * xv[static_cast<std::size_t>(j)];
        EXPECT_DOUBLE_EQ(z[i], s);
    }
}

TEST(DenseMatrix, MatvecLinearity) {
    std::mt19937 rng(31);
    auto a = random_matrix(rng, 5, 5);
    auto x = SerialVector(random_values(rng, 5));
    auto y = SerialVector(random_values(rng, 5));
    const double al = 1.7, be = -0.3;

    SerialVector combo(5), lhs(5), ax(5), ay(5), rhs(5);
    combo.linear_sum(al, x, be, y);
    a.matvec(combo, lhs);
    a.matvec(x, ax);
    a.matvec(y, ay);
    rhs.linear_sum(al, ax, be, ay);
    for (index_t i = 0; i < 5; ++i)
        EXPECT_LE(test::rel_diff(lhs[i], rhs[i]), 1e-14);
}

TEST(DenseMatrix, SetZero) {
    std::mt19937 rng(37);
    auto a = random_matrix(rng, 3, 3);
    a.set_zero();
    for (index_t i = 0; i < 3; ++i)
        for (index_t j = 0; j < 3; ++j) EXPECT_EQ(a(i, j), 0.0);
}
