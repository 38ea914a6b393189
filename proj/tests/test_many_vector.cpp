#include <gtest/gtest.h>

#include <random>

#include "odekit/many_vector.hpp"
#include "test_util.hpp"

using namespace odekit;
using test::partitioned;
using test::random_partition;
using test::random_values;

TEST(ManyVector, StructureAndAccess) {
    auto mv = partitioned({1.0, 2.0, 3.0, 4.0, 5.0}, {2, 3});
    EXPECT_EQ(mv->length(), 5);
    EXPECT_EQ(mv->num_subvectors(), 2);
    EXPECT_EQ(mv->subvector(0).length(), 2);
    EXPECT_EQ(mv->subvector(1).length(), 3);
    EXPECT_THROW(mv->subvector(2), shape_error);
    EXPECT_THROW(mv->subvector(-1), shape_error);

    auto c = mv->clone();
    auto* cm = dynamic_cast<ManyVector*>(c.get());
    ASSERT_NE(cm, nullptr);
    EXPECT_EQ(cm->num_subvectors(), 2);
    EXPECT_EQ(cm->subvector(0).length(), 2);
    EXPECT_EQ(cm->subvector(1).length(), 3);
}

TEST(ManyVector, PartitionMismatchThrows) {
    auto a = partitioned({1, 2, 3, 4}, {2, 2});
    auto b = partitioned({1, 2, 3, 4}, {1, 3});
    auto z = a->clone();
    EXPECT_THROW(z->linear_sum(1.0, *a, 1.0, *b), shape_error);
    SerialVector flat{1, 2, 3, 4};
    EXPECT_THROW(a->dot(flat), shape_error);
}

TEST(ManyVector, WrmsMatchesFlat) {
    auto x = partitioned({1.0}, {1});
    // spec example: x=[(1),(2)], w=[(1),(0.5)] -> 1.0
    auto xm = partitioned({1.0, 2.0}, {1, 1});
    auto wm = partitioned({1.0, 0.5}, {1, 1});
    EXPECT_DOUBLE_EQ(xm->wrms_norm(*wm), 1.0);
    SerialVector xf{1.0, 2.0}, wf{1.0, 0.5};
    EXPECT_DOUBLE_EQ(xm->wrms_norm(*wm), xf.wrms_norm(wf));
}

// ManyVector transparency: any partition agrees with the flat vector.
TEST(ManyVector, TransparencyUnderRandomPartitions) {
    std::mt19937 rng(19);
    for (int trial = 0; trial < 100; ++trial) {
        const index_t n = 1 + static_cast<index_t>(rng() % 48);
        auto xv = random_values(rng, static_cast<std::size_t>(n));
        auto yv = random_values(rng, static_cast<std::size_t>(n));
        auto wv = random_values(rng, static_cast<std::size_t>(n), 0.1, 2.0);
        auto lens = random_partition(rng, n);

        auto xm = partitioned(xv, lens);
        auto ym = partitioned(yv, lens);
        auto wm = partitioned(wv, lens);
        SerialVector xf(xv), yf(yv), wf(wv);

        // scale the dot comparison by sum |x_i y_i| (cancellation-safe)
        SerialVector ax(n), ay(n);
        ax.abs(xf);
        ay.abs(yf);
        EXPECT_LE(std::abs(xm->dot(*ym) - xf.dot(yf)), 1e-14 * ax.dot(ay));
        EXPECT_LE(test::rel_diff(xm->max_norm(), xf.max_norm()), 1e-14);
        EXPECT_LE(test::rel_diff(xm->min(), xf.min()), 1e-14);
        EXPECT_LE(test::rel_diff(xm->wrms_norm(*wm), xf.wrms_norm(wf)), 1e-14);

        auto zc = xm->clone();
        auto& zm = dynamic_cast<ManyVector&>(*zc);
        zm.linear_sum(2.0, *xm, -0.5, *ym);
        SerialVector zf(n);
        zf.linear_sum(2.0, xf, -0.5, yf);
        for (index_t j = 0, at = 0; j < zm.num_subvectors(); ++j) {
            auto& sub = dynamic_cast<SerialVector&>(zm.subvector(j));
            for (index_t i = 0; i < sub.length(); ++i, ++at)
                EXPECT_EQ(sub[i], zf[at]);
        }
    }
}

// Algorithm-1 equality with mixed local-kernel availability.
TEST(ManyVector, WrmsBothBranchesAgree) {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        const index_t n = 2 + static_cast<index_t>(rng() % 40);
        auto xv = random_values(rng, static_cast<std::size_t>(n));
        auto wv = random_values(rng, static_cast<std::size_t>(n), 0.1, 2.0);
        auto lens = random_partition(rng, n);

        auto with = partitioned(xv, lens);
        auto mixed = partitioned(xv, lens);
        auto wm = partitioned(wv, lens);
        // disable the local kernel on a random subset of subvectors
        for (index_t j = 0; j < mixed->num_subvectors(); ++j)
            if (rng() % 2)
                dynamic_cast<SerialVector&>(mixed->subvector(j))
                    .set_op_enabled(VecOp::local_squared_sum, false);

        EXPECT_LE(test::rel_diff(with->wrms_norm(*wm), mixed->wrms_norm(*wm)), 1e-14);
    }
}

TEST(ManyVector, ReductionCountTracksCombines) {
    auto x = partitioned({1.0, 2.0, 3.0}, {1, 2});
    auto w = partitioned({1.0, 1.0, 1.0}, {1, 2});
    ManyVector::reset_reduction_count();
    (void)x->dot(*w);
    EXPECT_EQ(ManyVector::reduction_count(), 1);
    (void)x->wrms_norm(*w);
    EXPECT_EQ(ManyVector::reduction_count(), 2);
    double d[1];
    const Vector* Y[] = {w.get()};
    x->dot_prod_multi(Y, d);
    EXPECT_EQ(ManyVector::reduction_count(), 3);
    // element-wise work needs no combine
    auto z = x->clone();
    z->linear_sum(1.0, *x, 1.0, *w);
    EXPECT_EQ(ManyVector::reduction_count(), 3);
    ManyVector::reset_reduction_count();
}

TEST(ManyVector, FusedOpsDelegate) {
    auto x1 = partitioned({1.0, 0.0, 0.0}, {1, 2});
    auto x2 = partitioned({0.0, 1.0, 1.0}, {1, 2});
    auto z = x1->clone();
    const double c[] = {2.0, 3.0};
    const Vector* X[] = {x1.get(), x2.get()};
    z->linear_combination(c, X);
    auto& zm = dynamic_cast<ManyVector&>(*z);
    EXPECT_EQ(dynamic_cast<SerialVector&>(zm.subvector(0))[0], 2.0);
    EXPECT_EQ(dynamic_cast<SerialVector&>(zm.subvector(1))[0], 3.0);
    EXPECT_EQ(dynamic_cast<SerialVector&>(zm.subvector(1))[1], 3.0);
}

TEST(ManyVector, NestedComposite) {
    std::vector<std::unique_ptr<Vector>> inner;
    inner.push_back(std::make_unique<SerialVector>(std::vector<double>{1.0, 2.0}));
    inner.push_back(std::make_unique<SerialVector>(std::vector<double>{3.0}));
    std::vector<std::unique_ptr<Vector>> outer;
    outer.push_back(std::make_unique<ManyVector>(std::move(inner)));
    outer.push_back(std::make_unique<SerialVector>(std::vector<double>{4.0}));
    ManyVector nested(std::move(outer));
    EXPECT_EQ(nested.length(), 4);

    SerialVector flat{1.0, 2.0, 3.0, 4.0}, ones{1.0, 1.0, 1.0, 1.0};
    auto wn = nested.clone();
    wn->const_fill(1.0);
    EXPECT_LE(test::rel_diff(nested.wrms_norm(*wn), flat.wrms_norm(ones)), 1e-14);
}
