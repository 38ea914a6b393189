#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "odekit/butcher.hpp"
#include "odekit/ode_common.hpp"
#include "odekit/ode_linsys.hpp"

namespace odekit {

struct ArkOptions {
    double horizon = 1.0;
    double fixed_step = 0.0; // > 0 disables adaptivity and the error test
    double nls_coef = 0.1;   // WRMS tolerance passed to the stage solves
    int max_step_halvings = 10;
    int max_error_failures = 10;
    long max_steps_per_evolve = 100000;
    double gamma_refresh = 0.2; // lsetup when |gamma/gamma_last - 1| exceeds this
    int max_steps_between_lsetup = 20;
};

/// Context handle exposed to external nonlinear solvers during a stage
/// solve (via NlsSolveRequest::context).
struct ArkStageContext {
    double t = 0.0;         // stage time
    double gamma = 0.0;     // h * A^I_ii
    const Vector* known_data = nullptr; // a_i of the stage system
    const Vector* predictor = nullptr;  // stage initial guess (y_{n-1})
    const RhsFn* implicit_rhs = nullptr;
};

/// Additive Runge-Kutta integrator: explicit, diagonally implicit, and IMEX
/// tables with embedded-error step control. Implicit stage systems
/// z - h A^I_ii f^I(t, z) - a_i = 0 are delegated to the attached nonlinear
/// solver in correction form with the trivial predictor z0 = y_{n-1}.
class ArkIntegrator {
public:
    ArkIntegrator(RhsFn fe, RhsFn fi, double t0, const Vector& y0, Tolerances tol,
                  ButcherTable table_e, ButcherTable table_i, ArkOptions opts,
                  NonlinearSolver* nls = nullptr, LinearSystemSpec lspec = {})
        : tol_(tol), opts_(opts), te_(std::move(table_e)), ti_(std::move(table_i)),
          nls_(nls) {
        tol_.validate();
        has_fe_ = static_cast<bool>(fe);
        has_fi_ = static_cast<bool>(fi);
        if (!has_fe_ && !has_fi_)
            throw config_error("ArkIntegrator: need at least one partition");

        if (has_fe_ && !has_fi_) {
            if (te_.empty()) throw config_error("ArkIntegrator: missing explicit table");
            te_.validate();
            if (!te_.is_explicit())
                throw config_error("ArkIntegrator: explicit-only problem needs an "
                                   "explicit table");
            stages_ = te_.stages;
        } else if (!has_fe_ && has_fi_) {
            if (ti_.empty()) throw config_error("ArkIntegrator: missing implicit table");
            ti_.validate();
            if (!ti_.is_diagonally_implicit())
                throw config_error("ArkIntegrator: implicit-only problem needs a "
                                   "diagonally implicit table");
            stages_ = ti_.stages;
        } else {
            ImexTables pair{te_, ti_};
            pair.validate();
            stages_ = te_.stages;
        }
        order_ = has_fi_ ? ti_.order : te_.order;
        embedding_order_ = has_fi_ ? ti_.embedding_order : te_.embedding_order;
        if (opts_.fixed_step <= 0.0) {
            const auto& d = has_fi_ ? ti_.d : te_.d;
            if (d.empty())
                throw config_error("ArkIntegrator: adaptive stepping needs an embedding");
        }

        if (has_fi_) {
            if (!nls_)
                throw config_error("ArkIntegrator: implicit stages need a nonlinear solver");
            if (nls_->type() == NonlinearSolverType::RootFind && !lspec.solver &&
                !nls_->linear_solve_ready())
                throw config_error("ArkIntegrator: a RootFind nonlinear solver needs an "
                                   "attached linear solver or its own lsolve");
        }

        if (fe)
            fe_ = [this, user = std::move(fe)](double t, const Vector& y, Vector& yd) {
                ++counters_.rhs_evals;
                return user(t, y, yd);
            };
        if (fi)
            fi_ = [this, user = std::move(fi)](double t, const Vector& y, Vector& yd) {
                ++counters_.rhs_evals;
                return user(t, y, yd);
            };

        ewt_ = y0.clone();
        zpred_ = y0.clone();
        zcor_ = y0.clone();
        dvec_ = y0.clone();
        zcur_ = y0.clone();
        ficur_ = y0.clone();
        scratch_ = y0.clone();
        ynew_ = y0.clone();
        yprev_ = y0.clone();
        stage_fe_.resize(static_cast<std::size_t>(stages_));
        stage_fi_.resize(static_cast<std::size_t>(stages_));
        for (auto& v : stage_fe_) v = y0.clone();
        for (auto& v : stage_fi_) v = y0.clone();

        ctx_.y = zcur_.get();
        ctx_.fy = ficur_.get();
        ctx_.weights = ewt_.get();

        if (has_fi_ && nls_ && nls_->type() == NonlinearSolverType::RootFind &&
            lspec.solver) {
            linsys_ = std::make_unique<OdeLinearSystem>(lspec, tol_, fi_, ctx_);
            nls_->set_lsetup_fn([this](bool jbad, bool& jcur, void*) {
                return linsys_->lsetup(jbad, jcur);
            });
            nls_->set_lsolve_fn([this](Vector& b, void*) { return linsys_->lsolve(b); });
        }
        if (has_fi_ && nls_) {
            nls_->set_sys_fn([this](const Vector& zcor, Vector& out, void*) {
                zcur_->linear_sum(1.0, *zpred_, 1.0, zcor);
                const CbStatus flag = fi_(ctx_.t, *zcur_, *ficur_);
                if (flag != CbStatus::ok) return flag;
                if (nls_->type() == NonlinearSolverType::RootFind) {
                    out.linear_sum(1.0, zcor, -ctx_.gamma, *ficur_);
                    out.linear_sum(1.0, out, 1.0, *dvec_);
                } else {
                    out.linear_sum(ctx_.gamma, *ficur_, -1.0, *dvec_);
                }
                return CbStatus::ok;
            });
        }

        t_ = t0;
        ynew_->scale(1.0, y0); // current state lives in ynew_
    }

    double current_time() const { return t_; }
    const Vector& current_state() const { return *ynew_; }
    int method_order() const { return order_; }

    IntegratorCounters stats() const {
        IntegratorCounters c = counters_;
        if (linsys_) c.ls_iters = linsys_->ls_iters();
        return c;
    }

    void set_step_monitor(std::function<void(const StepRecord&)> mon) {
        monitor_ = std::move(mon);
    }

    double initial_step() {
        ensure_started();
        return h0_;
    }

    /// Takes one accepted step and returns (t_n, y_n).
    std::pair<double, const Vector*> step() {
        ensure_started();
        build_error_weights(tol_, *ynew_, *ewt_);
        yprev_->scale(1.0, *ynew_);
        t_prev_ = t_;
        int halvings = 0;
        int err_fails = 0;
        bool had_failure = false;

        for (;;) {
            const double h = h_;
            check_step_floor(h);
            const double t_new = t_ + h;

            if (!attempt_stages(h)) {
                ++counters_.nls_conv_fails;
                ++counters_.step_fails;
                force_setup_ = true;
                had_failure = true;
                if (opts_.fixed_step > 0.0)
                    throw integration_error(
                        "ArkIntegrator: stage solve failed in fixed-step mode");
                if (++halvings > opts_.max_step_halvings)
                    throw integration_error(
                        "ArkIntegrator: repeated stage solve failures");
                h_ *= 0.5;
                continue;
            }

            // y_n = y_{n-1} + h sum b_i f_i; error = h sum (b_i - d_i) f_i
            assemble_solution(h);
            double err = 0.0;
            if (opts_.fixed_step <= 0.0) {
                assemble_error_vector(h);
                err = scratch_->wrms_norm(*ewt_);
            }
            const bool accept = opts_.fixed_step > 0.0 || err <= 1.0;
            if (monitor_) monitor_({t_new, h, order_, err, accept});

            if (!accept) {
                ++counters_.step_fails;
                ++err_fails;
                had_failure = true;
                if (err_fails >= opts_.max_error_failures)
                    throw integration_error("ArkIntegrator: repeated error-test failures");
                h_ *= step_eta_reject(err, control_order());
                continue;
            }

            t_ = t_new;
            ++counters_.steps;
            ++steps_since_setup_;
            if (linsys_) linsys_->on_step_accepted();
            if (opts_.fixed_step <= 0.0) {
                double eta = step_eta_accept(err, control_order());
                // no growth right after a troubled step
                if (had_failure) eta = std::min(eta, 1.0);
                h_ = h * eta;
            }
            have_prev_ = true;
            return {t_, ynew_.get()};
        }
    }

    /// Steps past t_out, then evaluates the cubic Hermite interpolant over
    /// the last step (endpoint states and full right-hand sides).
    void evolve(double t_out, Vector& y_out) {
        const double now_eps =
            10.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t_));
        if (t_out < t_ - now_eps)
            throw config_error("evolve: t_out is behind the current time");
        if (t_out <= t_ + now_eps) {
            y_out.scale(1.0, *ynew_);
            return;
        }
        long taken = 0;
        while (t_ < t_out) {
            if (++taken > opts_.max_steps_per_evolve)
                throw integration_error("evolve: step budget exhausted");
            step();
        }
        interpolate(t_out, y_out);
    }

    void interpolate(double t_eval, Vector& y_out) {
        if (!have_prev_ || t_eval >= t_) {
            y_out.scale(1.0, *ynew_);
            return;
        }
        // cubic Hermite on (y_{n-1}, f_{n-1}, y_n, f_n)
        auto f_prev = ynew_->clone();
        auto f_now = ynew_->clone();
        total_rhs(t_prev_, *yprev_, *f_prev);
        total_rhs(t_, *ynew_, *f_now);
        const double dt = t_ - t_prev_;
        const double th = (t_eval - t_prev_) / dt;
        const double th2 = th * th, th3 = th2 * th;
        const double cy0 = 2.0 * th3 - 3.0 * th2 + 1.0;
        const double cf0 = (th3 - 2.0 * th2 + th) * dt;
        const double cy1 = -2.0 * th3 + 3.0 * th2;
        const double cf1 = (th3 - th2) * dt;
        const double coef[] = {cy0, cf0, cy1, cf1};
        const Vector* vals[] = {yprev_.get(), f_prev.get(), ynew_.get(), f_now.get()};
        y_out.linear_combination(coef, vals);
    }

private:
    void ensure_started() {
        if (started_) return;
        started_ = true;
        build_error_weights(tol_, *ynew_, *ewt_);
        if (opts_.fixed_step > 0.0) {
            h_ = opts_.fixed_step;
        } else {
            total_rhs(t_, *ynew_, *scratch_);
            RhsFn total = [this](double t, const Vector& y, Vector& yd) {
                return total_rhs(t, y, yd);
            };
            h_ = initial_step_size(total, t_, *ynew_, *scratch_, *ewt_, opts_.horizon);
        }
        h0_ = h_;
    }

    CbStatus total_rhs(double t, const Vector& y, Vector& yd) {
        if (has_fe_ && has_fi_) {
            const CbStatus f1 = fe_(t, y, yd);
            if (f1 != CbStatus::ok) return f1;
            const CbStatus f2 = fi_(t, y, *scratch2());
            if (f2 != CbStatus::ok) return f2;
            yd.linear_sum(1.0, yd, 1.0, *scratch2());
            return CbStatus::ok;
        }
        return has_fe_ ? fe_(t, y, yd) : fi_(t, y, yd);
    }

    Vector* scratch2() {
        if (!scratch2_) scratch2_ = ynew_->clone();
        return scratch2_.get();
    }

    void check_step_floor(double h) const {
        const double floor = 10.0 * std::numeric_limits<double>::epsilon() *
                             std::max(std::abs(t_), std::abs(t_ + h));
        if (h < floor) throw integration_error("ArkIntegrator: step size underflow");
    }

    int control_order() const {
        return embedding_order_ > 0 ? std::min(order_, embedding_order_) : order_;
    }

    /// Computes all stages for step size h; false = recoverable failure.
    bool attempt_stages(double h) {
        for (int i = 0; i < stages_; ++i) {
            const double ci = has_fi_ ? ti_.c[static_cast<std::size_t>(i)]
                                      : te_.c[static_cast<std::size_t>(i)];
            const double t_stage = t_ + ci * h;

            // a_i = y_{n-1} + h sum_{j<i} (A^E_ij fe_j + A^I_ij fi_j)
            std::vector<double> coef{1.0};
            std::vector<const Vector*> vals{yprev_.get()};
            for (int j = 0; j < i; ++j) {
                if (has_fe_ && te_.A(i, j) != 0.0) {
                    coef.push_back(h * te_.A(i, j));
                    vals.push_back(stage_fe_[static_cast<std::size_t>(j)].get());
                }
                if (has_fi_ && ti_.A(i, j) != 0.0) {
                    coef.push_back(h * ti_.A(i, j));
                    vals.push_back(stage_fi_[static_cast<std::size_t>(j)].get());
                }
            }
            scratch_->linear_combination(coef, vals); // a_i

            const double gamma = has_fi_ ? h * ti_.A(i, i) : 0.0;
            if (gamma == 0.0) {
                zcur_->scale(1.0, *scratch_);
            } else {
                // solve z - gamma f^I(t, z) - a_i = 0 with predictor y_{n-1}
                zpred_->scale(1.0, *yprev_);
                dvec_->linear_sum(1.0, *zpred_, -1.0, *scratch_);
                ctx_.t = t_stage;
                ctx_.gamma = gamma;
                ctx_.nls_tol = opts_.nls_coef;

                stage_ctx_.t = t_stage;
                stage_ctx_.gamma = gamma;
                stage_ctx_.known_data = scratch_.get();
                stage_ctx_.predictor = zpred_.get();
                stage_ctx_.implicit_rhs = &fi_;

                zcor_->const_fill(0.0);
                NlsSolveRequest req;
                req.y0 = zpred_.get();
                req.ycor = zcor_.get();
                req.w = ewt_.get();
                req.tol = ctx_.nls_tol;
                req.call_lsetup = decide_lsetup(gamma);
                req.context = &stage_ctx_;
                const NlsOutcome out = nls_->solve(req);
                counters_.nls_iters += out.iterations;
                if (req.call_lsetup) {
                    gamma_at_setup_ = gamma;
                    steps_since_setup_ = 0;
                }
                if (out.status != NlsStatus::ok) {
                    if (!nls_status_recoverable(out.status))
                        throw integration_error(
                            "ArkIntegrator: unrecoverable stage solve failure");
                    return false;
                }
                zcur_->linear_sum(1.0, *zpred_, 1.0, *zcor_);
            }

            // stage right-hand sides (fresh evaluations; nothing is deduced)
            if (has_fe_) {
                const double t_e = t_ + te_.c[static_cast<std::size_t>(i)] * h;
                if (fe_(t_e, *zcur_, *stage_fe_[static_cast<std::size_t>(i)]) !=
                    CbStatus::ok)
                    return false;
            }
            if (has_fi_) {
                if (fi_(t_stage, *zcur_, *stage_fi_[static_cast<std::size_t>(i)]) !=
                    CbStatus::ok)
                    return false;
            }
        }
        return true;
    }

    bool decide_lsetup(double gamma) {
        if (!linsys_) return false;
        const bool drift =
            gamma_at_setup_ == 0.0 ||
            std::abs(gamma / gamma_at_setup_ - 1.0) > opts_.gamma_refresh;
        const bool need = force_setup_ || drift ||
                          steps_since_setup_ >= opts_.max_steps_between_lsetup;
        force_setup_ = false;
        return need;
    }

    void assemble_solution(double h) {
        std::vector<double> coef{1.0};
        std::vector<const Vector*> vals{yprev_.get()};
        for (int i = 0; i < stages_; ++i) {
            if (has_fe_ && te_.b[static_cast<std::size_t>(i)] != 0.0) {
                coef.push_back(h * te_.b[static_cast<std::size_t>(i)]);
                vals.push_back(stage_fe_[static_cast<std::size_t>(i)].get());
            }
            if (has_fi_ && ti_.b[static_cast<std::size_t>(i)] != 0.0) {
                coef.push_back(h * ti_.b[static_cast<std::size_t>(i)]);
                vals.push_back(stage_fi_[static_cast<std::size_t>(i)].get());
            }
        }
        ynew_->linear_combination(coef, vals);
    }

    void assemble_error_vector(double h) {
        std::vector<double> coef;
        std::vector<const Vector*> vals;
        for (int i = 0; i < stages_; ++i) {
            if (has_fe_) {
                const double w = h * (te_.b[static_cast<std::size_t>(i)] -
                                      te_.d[static_cast<std::size_t>(i)]);
                if (w != 0.0) {
                    coef.push_back(w);
                    vals.push_back(stage_fe_[static_cast<std::size_t>(i)].get());
                }
            }
            if (has_fi_) {
                const double w = h * (ti_.b[static_cast<std::size_t>(i)] -
                                      ti_.d[static_cast<std::size_t>(i)]);
                if (w != 0.0) {
                    coef.push_back(w);
                    vals.push_back(stage_fi_[static_cast<std::size_t>(i)].get());
                }
            }
        }
        if (coef.empty()) {
            scratch_->const_fill(0.0);
            return;
        }
        scratch_->linear_combination(coef, vals);
    }

    Tolerances tol_;
    ArkOptions opts_;
    ButcherTable te_, ti_;
    NonlinearSolver* nls_;
    std::unique_ptr<OdeLinearSystem> linsys_;
    RhsFn fe_, fi_;
    bool has_fe_ = false, has_fi_ = false;
    int stages_ = 0, order_ = 0, embedding_order_ = 0;

    OdeSolveContext ctx_;
    ArkStageContext stage_ctx_;
    IntegratorCounters counters_;

    double t_ = 0.0, t_prev_ = 0.0;
    double h_ = 0.0, h0_ = 0.0;
    bool started_ = false;
    bool have_prev_ = false;

    std::unique_ptr<Vector> ewt_, zpred_, zcor_, dvec_, zcur_, ficur_, scratch_,
        scratch2_, ynew_, yprev_;
    std::vector<std::unique_ptr<Vector>> stage_fe_, stage_fi_;

    bool force_setup_ = true;
    double gamma_at_setup_ = 0.0;
    long steps_since_setup_ = 0;

    std::function<void(const StepRecord&)> monitor_;
};

} // namespace odekit
