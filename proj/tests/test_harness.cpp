#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "odekit/harness/runner.hpp"

using namespace odekit;
using namespace odekit::harness;

namespace {

std::string csv_without_wall(const RunReport& r) {
    std::string row = format_csv_row(r);
    return row.substr(0, row.rfind(','));
}

} // namespace

TEST(Config, DefaultsResolve) {
    RunConfig cfg;
    auto r = resolve(cfg);
    EXPECT_EQ(r.method, "bdf");
    EXPECT_EQ(r.nx, 64);
    EXPECT_EQ(r.ny, 64);
    EXPECT_DOUBLE_EQ(r.tf, 1.0);

    RunConfig bruss;
    bruss.problem = "bruss1d";
    bruss.integrator = "ark";
    auto rb = resolve(bruss);
    EXPECT_EQ(rb.method, "imex");
    EXPECT_EQ(rb.nx, 1000);
    EXPECT_DOUBLE_EQ(rb.tf, 10.0);
}

TEST(Config, InvalidCombinationsRejected) {
    RunConfig cfg;
    cfg.problem = "heat3d";
    EXPECT_THROW(resolve(cfg), config_error);

    RunConfig m;
    m.integrator = "lmm";
    m.method = "erk";
    EXPECT_THROW(resolve(m), config_error);

    RunConfig bl;
    bl.nls = "blocklocal"; // needs bruss1d + ark/imex
    EXPECT_THROW(resolve(bl), config_error);

    RunConfig dense;
    dense.linsol = "dense";
    dense.nx = 64; // O(N^3) guard
    EXPECT_THROW(resolve(dense), config_error);

    RunConfig dense_bruss;
    dense_bruss.problem = "bruss1d";
    dense_bruss.linsol = "dense";
    EXPECT_THROW(resolve(dense_bruss), config_error);

    RunConfig badtol;
    badtol.rtol = 0.0;
    badtol.atol = 0.0;
    EXPECT_THROW(resolve(badtol), config_error);
}

TEST(Config, DryRunTakesNoSteps) {
    RunConfig cfg;
    cfg.dry_run = true;
    auto rep = run(cfg);
    EXPECT_TRUE(rep.solved);
    EXPECT_EQ(rep.counters.steps, 0);
    EXPECT_EQ(rep.counters.rhs_evals, 0);
    const auto text = format_dry_run(rep.config);
    EXPECT_NE(text.find("problem    = heat2d"), std::string::npos);
    EXPECT_NE(text.find("method     = bdf"), std::string::npos);
}

TEST(Report, CsvColumnsExact) {
    EXPECT_STREQ(csv_header(),
                 "steps,step_fails,rhs_evals,nls_iters,ls_iters,max_error,wall_seconds");
    RunReport rep;
    rep.counters = {10, 2, 30, 12, 40, 0};
    rep.max_error = 0.5;
    rep.wall_seconds = 1.25;
    EXPECT_EQ(format_csv_row(rep), "10,2,30,12,40,0.5,1.250000");
}

// Heat2D RHS applied to the analytic initial data reproduces du/dt(0) with
// second-order spatial truncation, measured by Richardson ratios.
TEST(Heat2D, RhsRichardsonSecondOrder) {
    double err[3];
    int level = 0;
    for (index_t n : {32, 64, 128}) {
        Heat2DProblem prob(n, n);
        SerialVector u0 = prob.initial_state();
        SerialVector f(prob.size());
        prob.rhs(0.0, u0, f);
        // du/dt(0, x, y) = 0, so the RHS itself is the truncation error
        err[level++] = f.max_norm();
    }
    const double r1 = err[0] / err[1];
    const double r2 = err[1] / err[2];
    EXPECT_GT(r1, 3.0);
    EXPECT_LT(r1, 5.0);
    EXPECT_GT(r2, 3.0);
    EXPECT_LT(r2, 5.0);
}

TEST(Bruss1D, InitialConditionFormula) {
    Bruss1DProblem prob(100, 3);
    auto y0 = prob.initial_state();
    Bruss1DProblem::View v(prob, *y0);
    const double L = prob.domain_length();
    for (index_t i : {index_t{0}, index_t{50}, index_t{99}}) {
        const double x = prob.x_of(i);
        const double s = 2.0 * x / L - 1.0;
        const double p = 0.1 * std::exp(-2.0 * s * s);
        EXPECT_DOUBLE_EQ(v.at(i, 0), 1.0 + p);        // u = A + p
        EXPECT_DOUBLE_EQ(v.at(i, 1), 3.5 / 1.0 + p);  // v = B/A + p
        EXPECT_DOUBLE_EQ(v.at(i, 2), 3.0 + p);
    }
    EXPECT_EQ(y0->length(), 300);
    EXPECT_EQ(y0->num_subvectors(), 3);
}

TEST(Bruss1D, AdvectionConservesTotal) {
    Bruss1DProblem prob(64, 4);
    auto y0 = prob.initial_state();
    auto f = y0->clone();
    prob.advection_rhs(0.0, *y0, *f);
    auto ones = y0->clone();
    ones->const_fill(1.0);
    EXPECT_LE(std::abs(f->dot(*ones)), 1e-10); // periodic upwind sums to zero
}

TEST(Bruss1D, ReactionJvMatchesDifferenceQuotient) {
    Bruss1DProblem prob(16, 2);
    auto y = prob.initial_state();
    auto v = y->clone();
    auto jv = y->clone();
    auto fy = y->clone();
    auto fp = y->clone();
    auto yp = y->clone();
    v->const_fill(0.5);
    prob.reaction_jv(*v, *jv, *y);

    const double sigma = 1e-7;
    prob.reaction_rhs(0.0, *y, *fy);
    yp->linear_sum(1.0, *y, sigma, *v);
    prob.reaction_rhs(0.0, *yp, *fp);
    fp->linear_sum(1.0 / sigma, *fp, -1.0 / sigma, *fy);

    fp->linear_sum(1.0, *fp, -1.0, *jv);
    // relative to the large 1/eps entries in the Jacobian
    EXPECT_LE(fp->max_norm(), 1e-2 * std::max(1.0, jv->max_norm()));
}

TEST(Run, CompareIdenticalConfigsGivesIdenticalCounters) {
    RunConfig cfg;
    cfg.nx = 24;
    cfg.ny = 24;
    auto cr = compare(cfg, cfg);
    ASSERT_TRUE(cr.a.solved);
    EXPECT_EQ(cr.a.counters.steps, cr.b.counters.steps);
    EXPECT_EQ(cr.a.counters.rhs_evals, cr.b.counters.rhs_evals);
    EXPECT_EQ(cr.a.counters.nls_iters, cr.b.counters.nls_iters);
    EXPECT_EQ(cr.wrms_diff, 0.0);
}

TEST(Run, FusedToggleDoesNotChangeResults) {
    RunConfig on;
    on.nx = 24;
    on.ny = 24;
    RunConfig off = on;
    off.fused = false;
    auto ra = run(on);
    auto rb = run(off);
    ASSERT_TRUE(ra.solved);
    ASSERT_TRUE(rb.solved);
    EXPECT_EQ(ra.counters.steps, rb.counters.steps);
    EXPECT_EQ(ra.max_error, rb.max_error); // bit-identical accumulation order
}

TEST(Run, DeterministicCsvRows) {
    RunConfig cfg;
    cfg.nx = 24;
    cfg.ny = 24;
    cfg.stats = "csv";
    auto r1 = run(cfg);
    auto r2 = run(cfg);
    EXPECT_EQ(csv_without_wall(r1), csv_without_wall(r2));
}

TEST(Run, BlockLocalSolverCountsOneCombinePerSolve) {
    RunConfig cfg;
    cfg.problem = "bruss1d";
    cfg.integrator = "ark";
    cfg.method = "imex";
    cfg.nls = "blocklocal";
    cfg.nx = 120;
    cfg.blocks = 4;
    cfg.rtol = 1e-6;
    cfg.atol = 1e-11;
    cfg.tf = 1.0;
    auto rep = run(cfg);
    ASSERT_TRUE(rep.solved);
    EXPECT_GT(rep.nls_solves, 0);
    EXPECT_EQ(rep.cross_block_reductions, rep.nls_solves);
    EXPECT_EQ(rep.counters.ls_iters, 0); // no global Krylov work
}

TEST(Run, SolverFailureIsReportedNotThrown) {
    RunConfig cfg;
    cfg.problem = "bruss1d";
    cfg.integrator = "ark";
    cfg.method = "erk"; // explicit on the stiff reaction: certain failure
    cfg.nx = 60;
    cfg.tf = 5.0;
    auto rep = run(cfg);
    EXPECT_FALSE(rep.solved);
    EXPECT_FALSE(rep.failure.empty());
}

TEST(Report, JsonRoundTrips) {
    RunConfig cfg;
    cfg.nx = 16;
    cfg.ny = 16;
    cfg.stats = "json";
    cfg.linsol = "dense"; // exercise the direct path within the size guard
    auto rep = run(cfg);
    ASSERT_TRUE(rep.solved);
    auto j = nlohmann::json::parse(format_json(rep));
    EXPECT_EQ(j["config"]["problem"], "heat2d");
    EXPECT_EQ(j["stats"]["steps"].get<long>(), rep.counters.steps);
    EXPECT_EQ(j["stats"]["ls_iters"].get<long>(), 0); // direct solves do not iterate
}
