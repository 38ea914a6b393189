#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <sstream>
#include <string>

#include "json.hpp"

#include "odekit/ark.hpp"
#include "odekit/cg.hpp"
#include "odekit/dense_lu.hpp"
#include "odekit/fixed_point.hpp"
#include "odekit/gmres.hpp"
#include "odekit/harness/block_local_newton.hpp"
#include "odekit/harness/bruss1d.hpp"
#include "odekit/harness/heat2d.hpp"
#include "odekit/lmm.hpp"
#include "odekit/newton.hpp"

namespace odekit::harness {

struct RunConfig {
    std::string problem = "heat2d";  // heat2d | bruss1d
    std::string integrator = "lmm";  // lmm | ark
    std::string method;              // bdf | adams | erk | dirk | imex
    std::string nls = "newton";      // newton | fixedpoint | blocklocal
    std::string linsol = "gmres";    // dense | gmres | cg
    std::string jv = "analytic";     // analytic | dq
    index_t nx = 0;                  // 0 = problem default
    index_t ny = 0;                  // heat2d only; 0 = nx
    int blocks = 4;                  // bruss1d only
    double rtol = 1e-5;
    double atol = 1e-10;
    double tf = 0.0; // 0 = problem default
    int maxl = 5;
    bool fused = true;
    std::string stats = "table"; // table | csv | json
    long seed = 0;               // reserved for randomized property drivers
    bool dry_run = false;
};

struct RunReport {
    RunConfig config; // resolved
    IntegratorCounters counters;
    double max_error = std::numeric_limits<double>::quiet_NaN();
    double wall_seconds = 0.0;
    bool solved = false;
    std::string failure;
    std::unique_ptr<Vector> final_state;
    long cross_block_reductions = -1; // blocklocal runs only
    long nls_solves = -1;             // blocklocal runs only
};

/// Fills defaults and rejects invalid combinations (throws config_error).
inline RunConfig resolve(RunConfig cfg) {
    auto one_of = [](const std::string& v, std::initializer_list<const char*> opts,
                     const char* what) {
        for (const char* o : opts)
            if (v == o) return;
        throw config_error(std::string("invalid ") + what + ": '" + v + "'");
    };
    one_of(cfg.problem, {"heat2d", "bruss1d"}, "--problem");
    one_of(cfg.integrator, {"lmm", "ark"}, "--integrator");
    one_of(cfg.nls, {"newton", "fixedpoint", "blocklocal"}, "--nls");
    one_of(cfg.linsol, {"dense", "gmres", "cg"}, "--linsol");
    one_of(cfg.jv, {"analytic", "dq"}, "--jv");
    one_of(cfg.stats, {"table", "csv", "json"}, "--stats");

    if (cfg.method.empty())
        cfg.method = cfg.integrator == "lmm"
                         ? "bdf"
                         : (cfg.problem == "bruss1d" ? "imex" : "dirk");
    if (cfg.integrator == "lmm")
        one_of(cfg.method, {"bdf", "adams"}, "--method (lmm)");
    else
        one_of(cfg.method, {"erk", "dirk", "imex"}, "--method (ark)");

    if (cfg.nx == 0) cfg.nx = cfg.problem == "heat2d" ? 64 : 1000;
    if (cfg.ny == 0) cfg.ny = cfg.nx;
    if (cfg.tf == 0.0) cfg.tf = cfg.problem == "heat2d" ? 1.0 : 10.0;
    if (cfg.nx < 2 || cfg.ny < 2) throw config_error("grid too small");
    if (cfg.rtol < 0.0 || cfg.atol < 0.0 || (cfg.rtol == 0.0 && cfg.atol == 0.0))
        throw config_error("invalid tolerances");
    if (cfg.maxl < 1) throw config_error("--maxl must be >= 1");
    if (cfg.tf <= 0.0) throw config_error("--tf must be > 0");

    if (cfg.nls == "blocklocal") {
        if (cfg.problem != "bruss1d" || cfg.integrator != "ark" || cfg.method != "imex")
            throw config_error("--nls blocklocal requires bruss1d with ark/imex");
    }
    if (cfg.linsol == "dense") {
        if (cfg.problem != "heat2d")
            throw config_error("--linsol dense is only wired for heat2d");
        if (cfg.nx > 16 || cfg.ny > 16)
            throw config_error("--linsol dense requires nx, ny <= 16 (O(N^3) guard)");
    }
    if (cfg.problem == "bruss1d" && cfg.blocks < 1)
        throw config_error("--blocks must be >= 1");
    return cfg;
}

namespace detail {

struct SolverStack {
    std::unique_ptr<LinearSolver> linear;
    std::unique_ptr<Matrix> jac_template;
    std::unique_ptr<NonlinearSolver> nonlinear;
    BlockLocalNewton* blocklocal = nullptr;
    LinearSystemSpec spec;
};

inline void apply_fused_setting(Vector& v, bool fused) {
    if (auto* s = dynamic_cast<SerialVector*>(&v)) {
        s->set_fused_enabled(fused);
        return;
    }
    if (auto* m = dynamic_cast<ManyVector*>(&v))
        for (index_t j = 0; j < m->num_subvectors(); ++j)
            apply_fused_setting(m->subvector(j), fused);
}

inline std::unique_ptr<LinearSolver> make_iterative(const RunConfig& cfg) {
    if (cfg.linsol == "gmres")
        return std::make_unique<GmresSolver>(OperatorForm::matrix_free, cfg.maxl);
    return std::make_unique<CgSolver>(OperatorForm::matrix_free);
}

} // namespace detail

inline RunReport run(const RunConfig& raw) {
    RunReport rep;
    rep.config = resolve(raw);
    const RunConfig& cfg = rep.config;
    if (cfg.dry_run) {
        rep.solved = true;
        return rep;
    }

    const auto t_start = std::chrono::steady_clock::now();
    try {
        Tolerances tol;
        tol.rtol = cfg.rtol;
        tol.atol = cfg.atol;

        if (cfg.problem == "heat2d") {
            Heat2DProblem prob(cfg.nx, cfg.ny);
            SerialVector y0 = prob.initial_state();
            detail::apply_fused_setting(y0, cfg.fused);

            RhsFn full = [&prob](double t, const Vector& y, Vector& yd) {
                return prob.rhs(t, y, yd);
            };

            detail::SolverStack st;
            if (cfg.nls == "fixedpoint") {
                st.nonlinear = std::make_unique<FixedPointSolver>();
            } else {
                st.nonlinear = std::make_unique<NewtonSolver>();
                if (cfg.linsol == "dense") {
                    st.linear = std::make_unique<DenseLuSolver>();
                    st.jac_template = std::make_unique<DenseMatrix>(prob.size(), prob.size());
                    st.spec.jac_template = st.jac_template.get();
                    if (cfg.jv == "analytic")
                        st.spec.jac = [&prob](double, const Vector&, const Vector&,
                                              DenseMatrix& j) {
                            prob.dense_jacobian(j);
                            return CbStatus::ok;
                        };
                } else {
                    st.linear = detail::make_iterative(cfg);
                    if (cfg.jv == "analytic")
                        st.spec.jv = [&prob](const Vector& v, Vector& jv, double,
                                             const Vector&, const Vector&) {
                            prob.jv(v, jv);
                            return CbStatus::ok;
                        };
                }
                st.spec.solver = st.linear.get();
            }

            std::unique_ptr<Vector> yf = y0.clone();
            if (cfg.integrator == "lmm") {
                LmmOptions opts;
                opts.method = cfg.method == "bdf" ? LmmMethod::BDF : LmmMethod::Adams;
                opts.horizon = cfg.tf;
                LmmIntegrator g(full, 0.0, y0, tol, opts, st.nonlinear.get(), st.spec);
                g.evolve(cfg.tf, *yf);
                rep.counters = g.stats();
            } else {
                ArkOptions opts;
                opts.horizon = cfg.tf;
                RhsFn fe, fi;
                ButcherTable te, ti;
                if (cfg.method == "erk") {
                    fe = full;
                    te = tables::erk_3_2_4();
                } else if (cfg.method == "dirk") {
                    fi = full;
                    ti = tables::esdirk_3_2_4(); // third-order default
                } else { // imex: forcing explicit, diffusion implicit
                    fe = [&prob](double t, const Vector&, Vector& yd) {
                        auto& d = dynamic_cast<SerialVector&>(yd);
                        for (index_t j = 0; j < prob.ny(); ++j)
                            for (index_t i = 0; i < prob.nx(); ++i) {
                                const index_t k = j * prob.nx() + i;
                                const bool bd = i == 0 || j == 0 || i == prob.nx() - 1 ||
                                                j == prob.ny() - 1;
                                d[k] = bd ? 0.0
                                          : prob.forcing(t, prob.x_of(i), prob.y_of(j));
                            }
                        return CbStatus::ok;
                    };
                    fi = [&prob](double, const Vector& y, Vector& yd) {
                        prob.jv(y, yd); // diffusion operator is linear
                        return CbStatus::ok;
                    };
                    auto pair = tables::ark_imex_3_2_4();
                    te = pair.expl;
                    ti = pair.impl;
                }
                ArkIntegrator g(fe, fi, 0.0, y0, tol, te, ti, opts,
                                st.nonlinear.get(), st.spec);
                g.evolve(cfg.tf, *yf);
                rep.counters = g.stats();
            }
            rep.max_error = prob.max_error(cfg.tf, *yf);
            rep.final_state = std::move(yf);
            rep.solved = true;
        } else {
            Bruss1DProblem prob(cfg.nx, cfg.blocks);
            auto y0 = prob.initial_state();
            detail::apply_fused_setting(*y0, cfg.fused);

            RhsFn full = [&prob](double t, const Vector& y, Vector& yd) {
                return prob.full_rhs(t, y, yd);
            };

            detail::SolverStack st;
            const bool imex = cfg.integrator == "ark" && cfg.method == "imex";
            if (cfg.nls == "blocklocal") {
                auto bl = std::make_unique<BlockLocalNewton>(prob);
                st.blocklocal = bl.get();
                st.nonlinear = std::move(bl);
            } else if (cfg.nls == "fixedpoint") {
                st.nonlinear = std::make_unique<FixedPointSolver>();
            } else {
                st.nonlinear = std::make_unique<NewtonSolver>();
                st.linear = detail::make_iterative(cfg);
                st.spec.solver = st.linear.get();
                if (cfg.jv == "analytic") {
                    if (imex)
                        st.spec.jv = [&prob](const Vector& v, Vector& jv, double,
                                             const Vector& y, const Vector&) {
                            prob.reaction_jv(v, jv, y);
                            return CbStatus::ok;
                        };
                    else
                        st.spec.jv = [&prob](const Vector& v, Vector& jv, double,
                                             const Vector& y, const Vector&) {
                            prob.full_jv(v, jv, y);
                            return CbStatus::ok;
                        };
                }
            }

            std::unique_ptr<Vector> yf = y0->clone();
            if (cfg.integrator == "lmm") {
                LmmOptions opts;
                opts.method = cfg.method == "bdf" ? LmmMethod::BDF : LmmMethod::Adams;
                opts.horizon = cfg.tf;
                LmmIntegrator g(full, 0.0, *y0, tol, opts, st.nonlinear.get(), st.spec);
                g.evolve(cfg.tf, *yf);
                rep.counters = g.stats();
            } else {
                ArkOptions opts;
                opts.horizon = cfg.tf;
                RhsFn fe, fi;
                ButcherTable te, ti;
                if (cfg.method == "erk") {
                    fe = full;
                    te = tables::erk_3_2_4();
                } else if (cfg.method == "dirk") {
                    fi = full;
                    ti = tables::esdirk_3_2_4();
                } else {
                    fe = [&prob](double t, const Vector& y, Vector& yd) {
                        return prob.advection_rhs(t, y, yd);
                    };
                    fi = [&prob](double t, const Vector& y, Vector& yd) {
                        return prob.reaction_rhs(t, y, yd);
                    };
                    auto pair = tables::ark_imex_3_2_4();
                    te = pair.expl;
                    ti = pair.impl;
                }
                ArkIntegrator g(fe, fi, 0.0, *y0, tol, te, ti, opts,
                                st.nonlinear.get(), st.spec);
                g.evolve(cfg.tf, *yf);
                rep.counters = g.stats();
                if (st.blocklocal) {
                    rep.cross_block_reductions = st.blocklocal->cross_block_reductions();
                    rep.nls_solves = st.blocklocal->num_solves();
                }
            }
            rep.final_state = std::move(yf);
            rep.solved = true;
        }
    } catch (const integration_error& err) {
        rep.solved = false;
        rep.failure = err.what();
    } catch (const numeric_error& err) {
        rep.solved = false;
        rep.failure = err.what();
    }
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    return rep;
}

struct CompareReport {
    RunReport a, b;
    double wrms_diff = std::numeric_limits<double>::quiet_NaN();
};

/// Runs both configurations and computes the WRMS difference of the final
/// states with weights 1/(|yA_i| + atol).
inline CompareReport compare(const RunConfig& ca, const RunConfig& cb) {
    const RunConfig ra = resolve(ca), rb = resolve(cb);
    if (ra.problem != rb.problem || ra.nx != rb.nx || ra.ny != rb.ny ||
        ra.blocks != rb.blocks)
        throw config_error("compare: configurations must share the problem layout");
    CompareReport cr;
    cr.a = run(ra);
    cr.b = run(rb);
    if (cr.a.solved && cr.b.solved && cr.a.final_state && cr.b.final_state) {
        auto w = cr.a.final_state->clone();
        w->abs(*cr.a.final_state);
        w->add_const(*w, ra.atol);
        w->inv(*w);
        auto diff = cr.a.final_state->clone();
        diff->linear_sum(1.0, *cr.a.final_state, -1.0, *cr.b.final_state);
        cr.wrms_diff = diff->wrms_norm(*w);
    }
    return cr;
}

// --- report formatting ---

inline const char* csv_header() {
    return "steps,step_fails,rhs_evals,nls_iters,ls_iters,max_error,wall_seconds";
}

inline std::string format_csv_row(const RunReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%ld,%ld,%ld,%ld,%ld,%.17g,%.6f",
                  r.counters.steps, r.counters.step_fails, r.counters.rhs_evals,
                  r.counters.nls_iters, r.counters.ls_iters, r.max_error,
                  r.wall_seconds);
    return buf;
}

inline std::string describe(const RunConfig& c) {
    std::ostringstream os;
    os << c.problem << " " << c.integrator << "/" << c.method << " nls=" << c.nls
       << " linsol=" << c.linsol << " jv=" << c.jv << " nx=" << c.nx;
    if (c.problem == "heat2d") os << " ny=" << c.ny;
    if (c.problem == "bruss1d") os << " blocks=" << c.blocks;
    os << " rtol=" << c.rtol << " atol=" << c.atol << " tf=" << c.tf
       << " maxl=" << c.maxl << " fused=" << (c.fused ? "on" : "off");
    return os.str();
}

inline std::string format_table(const RunReport& r) {
    std::ostringstream os;
    os << "# " << describe(r.config) << "\n";
    if (!r.solved) os << "status        FAILED: " << r.failure << "\n";
    char line[128];
    auto row = [&](const char* k, long v) {
        std::snprintf(line, sizeof line, "%-13s %ld\n", k, v);
        os << line;
    };
    row("Steps", r.counters.steps);
    row("Step fails", r.counters.step_fails);
    row("RHS evals", r.counters.rhs_evals);
    row("NLS iters", r.counters.nls_iters);
    row("LS iters", r.counters.ls_iters);
    row("NLS fails", r.counters.nls_conv_fails);
    std::snprintf(line, sizeof line, "%-13s %.6e\n", "Max error", r.max_error);
    os << line;
    std::snprintf(line, sizeof line, "%-13s %.3f\n", "Run time (s)", r.wall_seconds);
    os << line;
    if (r.cross_block_reductions >= 0) {
        std::snprintf(line, sizeof line, "%-13s %ld\n", "Block combines",
                      r.cross_block_reductions);
        os << line;
    }
    return os.str();
}

inline std::string format_json(const RunReport& r) {
    nlohmann::json j;
    j["config"] = {{"problem", r.config.problem},
                   {"integrator", r.config.integrator},
                   {"method", r.config.method},
                   {"nls", r.config.nls},
                   {"linsol", r.config.linsol},
                   {"jv", r.config.jv},
                   {"nx", r.config.nx},
                   {"ny", r.config.ny},
                   {"blocks", r.config.blocks},
                   {"rtol", r.config.rtol},
                   {"atol", r.config.atol},
                   {"tf", r.config.tf},
                   {"maxl", r.config.maxl},
                   {"fused", r.config.fused},
                   {"seed", r.config.seed}};
    j["solved"] = r.solved;
    if (!r.solved) j["failure"] = r.failure;
    j["stats"] = {{"steps", r.counters.steps},
                  {"step_fails", r.counters.step_fails},
                  {"rhs_evals", r.counters.rhs_evals},
                  {"nls_iters", r.counters.nls_iters},
                  {"ls_iters", r.counters.ls_iters},
                  {"nls_conv_fails", r.counters.nls_conv_fails}};
    j["max_error"] = r.max_error;
    j["wall_seconds"] = r.wall_seconds;
    if (r.cross_block_reductions >= 0)
        j["cross_block_reductions"] = r.cross_block_reductions;
    return j.dump(2);
}

inline std::string format_report(const RunReport& r) {
    if (r.config.stats == "csv")
        return std::string(csv_header()) + "\n" + format_csv_row(r) + "\n";
    if (r.config.stats == "json") return format_json(r) + "\n";
    return format_table(r);
}

inline std::string format_compare(const CompareReport& cr) {
    const RunConfig& a = cr.a.config;
    if (a.stats == "csv") {
        std::ostringstream os;
        os << csv_header() << "\n"
           << format_csv_row(cr.a) << "\n"
           << format_csv_row(cr.b) << "\n";
        char buf[64];
        std::snprintf(buf, sizeof buf, "wrms_diff,%.17g", cr.wrms_diff);
        os << buf << "\n";
        return os.str();
    }
    if (a.stats == "json") {
        nlohmann::json j;
        j["a"] = nlohmann::json::parse(format_json(cr.a));
        j["b"] = nlohmann::json::parse(format_json(cr.b));
        j["wrms_diff"] = cr.wrms_diff;
        return j.dump(2) + "\n";
    }
    std::ostringstream os;
    os << "# A: " << describe(cr.a.config) << "\n";
    os << "# B: " << describe(cr.b.config) << "\n";
    os << "# tolerances: rtol=" << a.rtol << " atol=" << a.atol << "\n";
    char line[160];
    auto row = [&](const char* k, long va, long vb) {
        std::snprintf(line, sizeof line, "%-13s %12ld %12ld\n", k, va, vb);
        os << line;
    };
    std::snprintf(line, sizeof line, "%-13s %12s %12s\n", "", "A", "B");
    os << line;
    row("Steps", cr.a.counters.steps, cr.b.counters.steps);
    row("Step fails", cr.a.counters.step_fails, cr.b.counters.step_fails);
    row("RHS evals", cr.a.counters.rhs_evals, cr.b.counters.rhs_evals);
    row("NLS iters", cr.a.counters.nls_iters, cr.b.counters.nls_iters);
    row("LS iters", cr.a.counters.ls_iters, cr.b.counters.ls_iters);
    std::snprintf(line, sizeof line, "%-13s %12.3e %12.3e\n", "Max error",
                  cr.a.max_error, cr.b.max_error);
    os << line;
    std::snprintf(line, sizeof line, "%-13s %12.3f %12.3f\n", "Run time (s)",
                  cr.a.wall_seconds, cr.b.wall_seconds);
    os << line;
    std::snprintf(line, sizeof line, "%-13s %.6e\n", "WRMS diff", cr.wrms_diff);
    os << line;
    return os.str();
}

inline std::string format_dry_run(const RunConfig& c) {
    std::ostringstream os;
    os << "resolved configuration (no steps taken):\n";
    os << "  problem    = " << c.problem << "\n";
    os << "  integrator = " << c.integrator << "\n";
    os << "  method     = " << c.method << "\n";
    os << "  nls        = " << c.nls << "\n";
    os << "  linsol     = " << c.linsol << "\n";
    os << "  jv         = " << c.jv << "\n";
    os << "  nx         = " << c.nx << "\n";
    os << "  ny         = " << c.ny << "\n";
    os << "  blocks     = " << c.blocks << "\n";
    os << "  rtol       = " << c.rtol << "\n";
    os << "  atol       = " << c.atol << "\n";
    os << "  tf         = " << c.tf << "\n";
    os << "  maxl       = " << c.maxl << "\n";
    os << "  fused      = " << (c.fused ? "on" : "off") << "\n";
    os << "  stats      = " << c.stats << "\n";
    os << "  seed       = " << c.seed << "\n";
    return os.str();
}

} // namespace odekit::harness
