#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "odekit/vector.hpp"
#include "test_util.hpp"

using namespace odekit;
using test::random_serial;
using test::random_values;

TEST(SerialVector, CloneKeepsStructureAndCapabilities) {
    SerialVector v(4);
    v.set_op_enabled(VecOp::dot_prod_multi, false);
    auto c = v.clone();
    EXPECT_EQ(c->length(), 4);
    EXPECT_FALSE(c->provides(VecOp::dot_prod_multi));
    EXPECT_TRUE(c->provides(VecOp::linear_combination));
}

TEST(SerialVector, LinearSumExamples) {
    SerialVector x{1.0, 2.0}, y{3.0, 4.0}, z(2);
    z.linear_sum(1.0, x, 0.0, y);
    EXPECT_EQ(z[0], 1.0);
    EXPECT_EQ(z[1], 2.0);
    z.linear_sum(1.0, x, 1.0, y);
    EXPECT_EQ(z[0], 4.0);
    EXPECT_EQ(z[1], 6.0);

    SerialVector x3{1.0, 1.0, 1.0}, y3{1.0, 2.0, 3.0}, z3(3);
    z3.linear_sum(2.0, x3, -1.0, y3); // element-wise hand computation
    EXPECT_EQ(z3[0], 1.0);
    EXPECT_EQ(z3[1], 0.0);
    EXPECT_EQ(z3[2], -1.0);
}

TEST(SerialVector, CoreKernels) {
    SerialVector x{1.0, 2.0, 3.0}, ones{1.0, 1.0, 1.0};
    EXPECT_EQ(x.dot(ones), 6.0);

    SerialVector m{-3.0, 2.0};
    EXPECT_EQ(m.max_norm(), 3.0);
    EXPECT_EQ(m.min(), -3.0);

    SerialVector xi{2.0, 4.0}, zi(2);
    zi.inv(xi);
    EXPECT_EQ(zi[0], 0.5);
    EXPECT_EQ(zi[1], 0.25);

    SerialVector a{2.0, 3.0}, b{4.0, 5.0}, z(2);
    z.prod(a, b);
    EXPECT_EQ(z[0], 8.0);
    EXPECT_EQ(z[1], 15.0);
    z.div(a, b);
    EXPECT_EQ(z[0], 0.5);
    EXPECT_EQ(z[1], 0.6);
    z.abs(m);
    EXPECT_EQ(z[0], 3.0);
    EXPECT_EQ(z[1], 2.0);
    z.add_const(a, 1.5);
    EXPECT_EQ(z[0], 3.5);
    EXPECT_EQ(z[1], 4.5);
    z.const_fill(7.0);
    EXPECT_EQ(z[0], 7.0);
    z.scale(2.0, a);
    EXPECT_EQ(z[0], 4.0);
}

TEST(SerialVector, DivisionByZeroIsReported) {
    SerialVector x{1.0, 1.0}, y{1.0, 0.0}, z(2);
    EXPECT_THROW(z.div(x, y), numeric_error);
    EXPECT_THROW(z.inv(y), numeric_error);
}

TEST(SerialVector, ShapeMismatchIsAProgrammingError) {
    SerialVector x{1.0, 2.0}, y{1.0, 2.0, 3.0}, z(2);
    EXPECT_THROW(z.linear_sum(1.0, x, 1.0, y), shape_error);
    EXPECT_THROW(x.dot(y), shape_error);
    EXPECT_THROW(SerialVector(0), shape_error);
}

TEST(SerialVector, WrmsNormExamples) {
    SerialVector x{1.0, 2.0}, w{1.0, 0.5};
    EXPECT_DOUBLE_EQ(x.wrms_norm(w), 1.0); // ((1*1)^2 + (0.5*2)^2)/2 = 1

    SerialVector zero(2);
    zero.const_fill(0.0);
    EXPECT_EQ(zero.wrms_norm(w), 0.0);
}

TEST(SerialVector, WrmsHomogeneity) {
    std::mt19937 rng(42);
    for (int trial = 0; trial < 100; ++trial) {
        auto x = random_serial(rng, 17);
        auto w = random_serial(rng, 17, 0.1, 2.0);
        SerialVector cx(17);
        const double c = -3.75;
        cx.scale(c, x);
        EXPECT_LE(test::rel_diff(cx.wrms_norm(w), std::abs(c) * x.wrms_norm(w)), 1e-14);
    }
}

TEST(SerialVector, WrmsBoundedByWeightedMaxNorm) {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        auto x = random_serial(rng, 9);
        auto w = random_serial(rng, 9, 0.1, 2.0);
        SerialVector wx(9);
        wx.prod(w, x);
        EXPECT_LE(x.wrms_norm(w), wx.max_norm() * (1.0 + 1e-15));
    }
    // equality iff all |w_i x_i| equal
    SerialVector x{2.0, -2.0, 2.0}, w{0.5, 0.5, 0.5};
    SerialVector wx(3);
    wx.prod(w, x);
    EXPECT_DOUBLE_EQ(x.wrms_norm(w), wx.max_norm());
}

TEST(SerialVector, LocalSquaredSum) {
    SerialVector x{1.0, 2.0}, w{1.0, 0.5};
    EXPECT_DOUBLE_EQ(x.local_squared_sum(w), 2.0);

    SerialVector zero(3);
    zero.const_fill(0.0);
    SerialVector wz{1.0, 1.0, 1.0};
    EXPECT_EQ(zero.local_squared_sum(wz), 0.0);

    // kernel present vs absent (wrms reconstruction) agree
    std::mt19937 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        auto a = random_serial(rng, 13);
        auto wv = random_serial(rng, 13, 0.1, 2.0);
        const double native = a.local_squared_sum(wv);
        a.set_op_enabled(VecOp::local_squared_sum, false);
        const double fallback = a.local_squared_sum(wv);
        EXPECT_LE(test::rel_diff(native, fallback), 1e-14);
    }
}

TEST(FusedOps, LinearCombinationExamples) {
    SerialVector x{1.0, 1.0}, z(2);
    const double c1[] = {2.0};
    const Vector* X1[] = {&x};
    z.linear_combination(c1, X1);
    EXPECT_EQ(z[0], 2.0);
    EXPECT_EQ(z[1], 2.0);

    SerialVector e1{1.0, 0.0, 0.0}, e2{0.0, 1.0, 0.0}, e3{0.0, 0.0, 1.0}, z3(3);
    const double c3[] = {1.0, 1.0, 1.0};
    const Vector* X3[] = {&e1, &e2, &e3};
    z3.linear_combination(c3, X3);
    EXPECT_EQ(z3[0], 1.0);
    EXPECT_EQ(z3[1], 1.0);
    EXPECT_EQ(z3[2], 1.0);

    EXPECT_THROW(z.linear_combination({}, {}), shape_error);
}

TEST(FusedOps, ScaleAddMultiExamples) {
    SerialVector x{1.0, 1.0}, y0{5.0, 6.0}, z0(2);
    {
        const double a[] = {0.0};
        const Vector* Y[] = {&y0};
        Vector* Z[] = {&z0};
        x.scale_add_multi(a, Y, Z);
        EXPECT_EQ(z0[0], 5.0);
        EXPECT_EQ(z0[1], 6.0);
    }
    {
        SerialVector ya{0.0, 0.0}, yb{2.0, 2.0}, za(2), zb(2);
        const double a[] = {1.0, -1.0};
        const Vector* Y[] = {&ya, &yb};
        Vector* Z[] = {&za, &zb};
        x.scale_add_multi(a, Y, Z);
        EXPECT_EQ(za[0], 1.0);
        EXPECT_EQ(za[1], 1.0);
        EXPECT_EQ(zb[0], 1.0);
        EXPECT_EQ(zb[1], 1.0);
    }
}

TEST(FusedOps, DotProdMultiExamples) {
    SerialVector x{1.0, 1.0}, y1{1.0, 0.0}, y2{0.0, 2.0};
    const Vector* Y[] = {&y1, &y2};
    double d[2];
    x.dot_prod_multi(Y, d);
    EXPECT_EQ(d[0], 1.0);
    EXPECT_EQ(d[1], 2.0);

    const Vector* Y1[] = {&y2};
    double d1[1];
    x.dot_prod_multi(Y1, d1);
    EXPECT_EQ(d1[0], x.dot(y2));
}

TEST(FusedOps, LinearSumVectorArrayExamples) {
    SerialVector x1{1.0, 2.0}, x2{3.0, 4.0}, y1{5.0, 6.0}, y2{7.0, 8.0};
    SerialVector z1(2), z2(2);
    const Vector* X[] = {&x1, &x2};
    const Vector* Y[] = {&y1, &y2};
    Vector* Z[] = {&z1, &z2};
    linear_sum_vector_array(1.0, X, 0.0, Y, Z);
    EXPECT_EQ(z1[0], 1.0);
    EXPECT_EQ(z2[1], 4.0);

    const Vector* XX[] = {&x1, &x2};
    linear_sum_vector_array(1.0, XX, 1.0, XX, Z);
    EXPECT_EQ(z1[0], 2.0);
    EXPECT_EQ(z2[0], 6.0);
}

// Fused and fallback paths share accumulation order, so they should agree
// exactly; the acceptance suite checks the 1e-14 contract over random data.
TEST(FusedOps, NativeMatchesFallback) {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const index_t n = 24;
        auto x = random_serial(rng, n);
        std::vector<SerialVector> xs;
        for (int i = 0; i < 4; ++i) xs.push_back(random_serial(rng, n));
        auto c = random_values(rng, 4);

        SerialVector fused(n), plain(n);
        std::vector<const Vector*> X;
        for (auto& v : xs) X.push_back(&v);
        fused.linear_combination(c, X);
        plain.set_op_enabled(VecOp::linear_combination, false);
        plain.linear_combination(c, X);
        for (index_t i = 0; i < n; ++i) EXPECT_EQ(fused[i], plain[i]);

        double df[4], dp[4];
        x.dot_prod_multi(X, df);
        x.set_op_enabled(VecOp::dot_prod_multi, false);
        x.dot_prod_multi(X, dp);
        for (int i = 0; i < 4; ++i) EXPECT_EQ(df[i], dp[i]);
    }
}
