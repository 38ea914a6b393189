#include <gtest/gtest.h>

#include <cmath>

#include "odekit/ark.hpp"
#include "odekit/dense_lu.hpp"
#include "odekit/newton.hpp"

using namespace odekit;

namespace {

RhsFn decay_rhs(double lambda) {
    return [lambda](double, const Vector& y, Vector& ydot) {
        ydot.scale(lambda, y);
        return CbStatus::ok;
    };
}

struct Rig {
    DenseMatrix jac_template{1, 1};
    DenseLuSolver lu;
    NewtonSolver newton{NewtonConfig{.max_iters = 6}};
    LinearSystemSpec spec() {
        LinearSystemSpec s;
        s.solver = &lu;
        s.jac_template = &jac_template;
        return s;
    }
};

} // namespace

TEST(Butcher, ShippedTablesValidate) {
    for (auto t : {tables::heun_euler(), tables::erk_3_2_4(), tables::sdirk_2_1_2(),
                   tables::esdirk_3_2_4(), tables::forward_euler(),
                   tables::backward_euler()}) {
        EXPECT_NO_THROW(t.validate()) << t.name;
        EXPECT_NO_THROW(t.verify_order_conditions()) << t.name;
    }
    EXPECT_TRUE(tables::heun_euler().is_explicit());
    EXPECT_TRUE(tables::erk_3_2_4().is_explicit());
    EXPECT_TRUE(tables::sdirk_2_1_2().is_diagonally_implicit());
    EXPECT_FALSE(tables::sdirk_2_1_2().is_explicit());
}

// DERIVED: row sums and order conditions up to 3 checked numerically for the
// default third-order additive pair.
TEST(Butcher, ImexPairSatisfiesOrderConditions) {
    auto pair = tables::ark_imex_3_2_4();
    EXPECT_NO_THROW(pair.validate());
    EXPECT_NO_THROW(pair.verify_order_conditions());
    EXPECT_EQ(pair.expl.stages, 4);
    EXPECT_EQ(pair.expl.order, 3);
    EXPECT_EQ(pair.impl.embedding_order, 2);
}

TEST(Butcher, BrokenTablesAreRejected) {
    auto t = tables::heun_euler();
    t.c[1] = 0.5; // row-sum violation
    EXPECT_THROW(t.validate(), config_error);

    auto pair = tables::ark_imex_3_2_4();
    pair.impl.stages = 2; // stage mismatch
    pair.impl.a = {0.0, 0.0, 1.0, 0.0};
    pair.impl.b = {0.5, 0.5};
    pair.impl.c = {0.0, 1.0};
    pair.impl.d = {1.0, 0.0};
    EXPECT_THROW(pair.validate(), config_error);
}

TEST(Ark, ConfigurationErrors) {
    SerialVector y0{1.0};
    // explicit-only problem with a DIRK table
    EXPECT_THROW(ArkIntegrator(decay_rhs(-1.0), RhsFn{}, 0.0, y0, Tolerances{},
                               tables::sdirk_2_1_2(), ButcherTable{}, ArkOptions{}),
                 config_error);
    // implicit problem without a nonlinear solver
    EXPECT_THROW(ArkIntegrator(RhsFn{}, decay_rhs(-1.0), 0.0, y0, Tolerances{},
                               ButcherTable{}, tables::sdirk_2_1_2(), ArkOptions{}),
                 config_error);
    // adaptive run needs an embedding
    EXPECT_THROW(ArkIntegrator(decay_rhs(-1.0), RhsFn{}, 0.0, y0, Tolerances{},
                               tables::forward_euler(), ButcherTable{}, ArkOptions{}),
                 config_error);
}

// TRIVIAL: one forward-Euler step is y0 + h f(t0, y0).
TEST(Ark, ForwardEulerStep) {
    SerialVector y0{2.0};
    ArkOptions opts;
    opts.fixed_step = 0.25;
    ArkIntegrator integ(decay_rhs(-1.0), RhsFn{}, 0.0, y0, Tolerances{},
                        tables::forward_euler(), ButcherTable{}, opts);
    auto [t1, y1] = integ.step();
    EXPECT_DOUBLE_EQ(t1, 0.25);
    EXPECT_DOUBLE_EQ(dynamic_cast<const SerialVector&>(*y1)[0], 2.0 + 0.25 * -2.0);
    EXPECT_EQ(integ.stats().nls_iters, 0); // no implicit stages
}

// TRIVIAL: one backward-Euler step on y' = lambda y is y0 / (1 - h lambda).
TEST(Ark, BackwardEulerStep) {
    const double lambda = -3.0, h = 0.2;
    SerialVector y0{1.0};
    Tolerances tol;
    tol.rtol = 1e-12;
    tol.atol = 1e-14;
    ArkOptions opts;
    opts.fixed_step = h;
    Rig rig;
    ArkIntegrator integ(RhsFn{}, decay_rhs(lambda), 0.0, y0, tol, ButcherTable{},
                        tables::backward_euler(), opts, &rig.newton, rig.spec());
    auto [t1, y1] = integ.step();
    EXPECT_DOUBLE_EQ(t1, h);
    EXPECT_NEAR(dynamic_cast<const SerialVector&>(*y1)[0], 1.0 / (1.0 - h * lambda),
                1e-12);
}

// DERIVED polynomial exactness: a third-order ERK integrates y' = t^2 exactly.
TEST(Ark, Erk3ExactOnQuadraticRhs) {
    auto rhs = [](double t, const Vector&, Vector& ydot) {
        ydot.const_fill(t * t);
        return CbStatus::ok;
    };
    SerialVector y0{0.0};
    ArkOptions opts;
    opts.fixed_step = 0.125;
    ArkIntegrator integ(rhs, RhsFn{}, 0.0, y0, Tolerances{}, tables::erk_3_2_4(),
                        ButcherTable{}, opts);
    for (int k = 0; k < 16; ++k) integ.step();
    const double tf = integ.current_time();
    const double exact = tf * tf * tf / 3.0;
    const double got = dynamic_cast<const SerialVector&>(integ.current_state())[0];
    EXPECT_LE(std::abs(got - exact),
              50.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, exact));
}

TEST(Ark, StageCountAccounting) {
    // ERK: explicit RHS evaluations per step equal the stage count.
    SerialVector y0{1.0};
    ArkOptions opts;
    opts.fixed_step = 0.1;
    ArkIntegrator integ(decay_rhs(-1.0), RhsFn{}, 0.0, y0, Tolerances{},
                        tables::erk_3_2_4(), ButcherTable{}, opts);
    for (int k = 0; k < 5; ++k) integ.step();
    EXPECT_EQ(integ.stats().rhs_evals, 5 * tables::erk_3_2_4().stages);
    EXPECT_EQ(integ.stats().steps, 5);
}

TEST(Ark, EvolveAndInterpolation) {
    SerialVector y0{1.0};
    Tolerances tol;
    tol.rtol = 1e-8;
    tol.atol = 1e-12;
    ArkOptions opts;
    opts.horizon = 2.0;
    ArkIntegrator integ(decay_rhs(-1.0), RhsFn{}, 0.0, y0, tol, tables::erk_3_2_4(),
                        ButcherTable{}, opts);

    // evolve to the current time returns the current state
    SerialVector now(1);
    integ.evolve(0.0, now);
    EXPECT_EQ(now[0], 1.0);
    EXPECT_EQ(integ.stats().steps, 0);

    SerialVector yf(1);
    integ.evolve(1.5, yf);
    EXPECT_NEAR(yf[0], std::exp(-1.5), 1e-6);
    EXPECT_GT(integ.stats().steps, 0);
}

// IMEX splitting of y' = -y into -y/2 (explicit) + -y/2 (implicit) agrees
// with a fully implicit run of the same order.
TEST(Ark, ImexSplittingConsistency) {
    SerialVector y0{1.0};
    Tolerances tol;
    tol.rtol = 1e-6;
    tol.atol = 1e-12;
    ArkOptions opts;
    opts.horizon = 1.0;

    auto pair = tables::ark_imex_3_2_4();
    Rig rig_imex;
    ArkIntegrator imex(decay_rhs(-0.5), decay_rhs(-0.5), 0.0, y0, tol, pair.expl,
                       pair.impl, opts, &rig_imex.newton, rig_imex.spec());
    SerialVector y_imex(1);
    imex.evolve(1.0, y_imex);

    Rig rig_impl;
    ArkIntegrator impl(RhsFn{}, decay_rhs(-1.0), 0.0, y0, tol, ButcherTable{},
                       tables::esdirk_3_2_4(), opts, &rig_impl.newton,
                       rig_impl.spec());
    SerialVector y_impl(1);
    impl.evolve(1.0, y_impl);

    const double local_tol = tol.rtol * std::exp(-1.0) + tol.atol;
    EXPECT_LE(std::abs(y_imex[0] - y_impl[0]), 10.0 * local_tol);
    EXPECT_NEAR(y_imex[0], std::exp(-1.0), 1e-4);
}

// Conservation of affine invariants: for f with sum_k f_k = 0 the ERK update
// preserves sum_k y_k up to roundoff per step.
TEST(Ark, ConservesLinearInvariant) {
    const index_t n = 16;
    // periodic upwind difference: f_k = c (y_{k-1} - y_k) / dx
    auto rhs = [n](double, const Vector& y, Vector& ydot) {
        const auto& ys = dynamic_cast<const SerialVector&>(y);
        auto& d = dynamic_cast<SerialVector&>(ydot);
        const double c_over_dx = 4.0;
        for (index_t k = 0; k < n; ++k) {
            const index_t km1 = k == 0 ? n - 1 : k - 1;
            d[k] = c_over_dx * (ys[km1] - ys[k]);
        }
        return CbStatus::ok;
    };
    SerialVector y0(n), ones(n);
    ones.const_fill(1.0);
    for (index_t k = 0; k < n; ++k) y0[k] = 1.0 + 0.5 * std::sin(2.0 * M_PI * k / n);
    const double sum0 = y0.dot(ones);

    ArkOptions opts;
    opts.fixed_step = 0.01;
    ArkIntegrator integ(rhs, RhsFn{}, 0.0, y0, Tolerances{}, tables::heun_euler(),
                        ButcherTable{}, opts);
    double prev = sum0;
    for (int k = 0; k < 50; ++k) {
        integ.step();
        const double cur = integ.current_state().dot(ones);
        EXPECT_LE(std::abs(cur - prev),
                  static_cast<double>(n) * 100.0 * std::numeric_limits<double>::epsilon() *
                      std::max(1.0, std::abs(prev)));
        prev = cur;
    }
}

TEST(Ark, StatsZeroBeforeFirstStep) {
    SerialVector y0{1.0};
    ArkOptions opts;
    opts.fixed_step = 0.1;
    ArkIntegrator integ(decay_rhs(-1.0), RhsFn{}, 0.0, y0, Tolerances{},
                        tables::heun_euler(), ButcherTable{}, opts);
    EXPECT_EQ(integ.stats().steps, 0);
    EXPECT_EQ(integ.stats().rhs_evals, 0);
    EXPECT_EQ(integ.stats().nls_iters, 0);
}

// Embedded error control keeps accepted estimates at or below one.
TEST(Ark, ErrorTestContract) {
    SerialVector y0{0.0};
    auto rhs = [](double t, const Vector& y, Vector& ydot) {
        ydot.scale(-10.0, y); // y' = -10(y - sin t) + cos t
        const auto& ys = dynamic_cast<const SerialVector&>(y);
        auto& d = dynamic_cast<SerialVector&>(ydot);
        d[0] = -10.0 * (ys[0] - std::sin(t)) + std::cos(t);
        return CbStatus::ok;
    };
    Tolerances tol;
    tol.rtol = 1e-6;
    tol.atol = 1e-10;
    ArkOptions opts;
    opts.horizon = 3.0;
    ArkIntegrator integ(rhs, RhsFn{}, 0.0, y0, tol, tables::erk_3_2_4(),
                        ButcherTable{}, opts);
    long accepted = 0, rejected = 0;
    integ.set_step_monitor([&](const StepRecord& r) {
        if (r.accepted) {
            ++accepted;
            EXPECT_LE(r.error_estimate, 1.0);
        } else {
            ++rejected;
        }
    });
    SerialVector yf(1);
    integ.evolve(3.0, yf);
    EXPECT_EQ(integ.stats().steps, accepted);
    EXPECT_EQ(integ.stats().step_fails, rejected);
    EXPECT_NEAR(yf[0], std::sin(3.0), 1e-4);
}
