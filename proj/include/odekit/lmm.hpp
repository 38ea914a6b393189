#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "odekit/multistep_coeffs.hpp"
#include "odekit/ode_common.hpp"
#include "odekit/ode_linsys.hpp"

namespace odekit {

enum class LmmMethod { BDF, Adams };

struct LmmOptions {
    LmmMethod method = LmmMethod::BDF;
    int max_order = 0;    // 0 = family default (BDF 5, Adams 12)
    double horizon = 1.0; // expected integration span; caps the initial step
    double fixed_step = 0.0; // > 0 disables step/order adaptation and the error test
    int fixed_order = 0;     // > 0 holds the order (after the startup ramp)
    double nls_coef = 0.1;   // nonlinear tolerance = nls_coef / error-test coefficient
    int max_step_halvings = 10;    // nonlinear-failure retry budget per step
    int max_error_failures = 10;   // error-test rejection budget per step
    long max_steps_per_evolve = 100000;
};

/// Variable-order, variable-step linear multistep integrator (BDF 1-5,
/// Adams-Moulton 1-12) in fixed-leading-coefficient form.
///
/// The solution history is kept as past (t, y) values (plus f values for the
/// Adams family and startup predictors). Each step interpolates the history
/// onto a uniform grid with the current step size and applies the
/// constant-step formula there, so the Newton-system coefficient
/// gamma = h * beta0 depends only on the order and step size. Local error is
/// estimated from the predictor-corrector difference with a coefficient
/// assembled from the actual step-size history.
class LmmIntegrator {
public:
    LmmIntegrator(RhsFn f, double t0, const Vector& y0, Tolerances tol,
                  LmmOptions opts, NonlinearSolver* nls,
                  LinearSystemSpec lspec = {})
        : tol_(tol), opts_(opts), nls_(nls) {
        tol_.validate();
        if (!f) throw config_error("LmmIntegrator: missing right-hand side");
        if (!nls_) throw config_error("LmmIntegrator: missing nonlinear solver");
        maxord_ = opts_.method == LmmMethod::BDF ? 5 : 12;
        if (opts_.max_order > 0) maxord_ = std::min(maxord_, opts_.max_order);
        if (opts_.fixed_order > maxord_)
            throw config_error("LmmIntegrator: fixed_order exceeds the family maximum");

        rhs_ = [this, user = std::move(f)](double t, const Vector& y, Vector& ydot) {
            ++counters_.rhs_evals;
            return user(t, y, ydot);
        };

        // workspaces
        ewt_ = y0.clone();
        ypred_ = y0.clone();
        ycor_ = y0.clone();
        dvec_ = y0.clone();
        ycur_ = y0.clone();
        fcur_ = y0.clone();
        scratch_ = y0.clone();

        ctx_.y = ycur_.get();
        ctx_.fy = fcur_.get();
        ctx_.weights = ewt_.get();

        if (nls_->type() == NonlinearSolverType::RootFind) {
            if (!lspec.solver && !nls_->linear_solve_ready())
                throw config_error("LmmIntegrator: a RootFind nonlinear solver needs an "
                                   "attached linear solver or its own lsolve");
            if (lspec.solver) {
                linsys_ = std::make_unique<OdeLinearSystem>(lspec, tol_, rhs_, ctx_);
                nls_->set_lsetup_fn([this](bool jbad, bool& jcur, void*) {
                    return linsys_->lsetup(jbad, jcur);
                });
                nls_->set_lsolve_fn(
                    [this](Vector& b, void*) { return linsys_->lsolve(b); });
            }
        }

        nls_->set_sys_fn([this](const Vector& ycor, Vector& out, void*) {
            ycur_->linear_sum(1.0, *ypred_, 1.0, ycor);
            const CbStatus flag = rhs_(ctx_.t, *ycur_, *fcur_);
            if (flag != CbStatus::ok) return flag;
            if (nls_->type() == NonlinearSolverType::RootFind) {
                // F(ycor) = ycor + (ypred - a_n) - gamma f
                out.linear_sum(1.0, ycor, -ctx_.gamma, *fcur_);
                out.linear_sum(1.0, out, 1.0, *dvec_);
            } else {
                // G(ycor) = gamma f + a_n - ypred
                out.linear_sum(ctx_.gamma, *fcur_, -1.0, *dvec_);
            }
            return CbStatus::ok;
        });

        t_ = t0;
        push_state(t0, y0);
    }

    LmmMethod method() const { return opts_.method; }
    double current_time() const { return t_; }
    const Vector& current_state() const { return *ys_.front(); }
    int current_order() const { return q_; }
    double current_step_size() const { return h_; }
    double initial_step() {
        ensure_started();
        return h0_;
    }

    IntegratorCounters stats() const {
        IntegratorCounters c = counters_;
        if (linsys_) c.ls_iters = linsys_->ls_iters();
        return c;
    }

    void set_step_monitor(std::function<void(const StepRecord&)> mon) {
        monitor_ = std::move(mon);
    }

    /// Coefficients of the most recent accepted step, collapsed onto the
    /// stored history: y_n = sum_k yw[k]*y_hist[k] + sum_k fw[k]*f_hist[k]
    /// + gamma * f(t_n, y_n), where the history indices are relative to the
    /// state just before the step (now shifted one slot back).
    struct LastStepCoeffs {
        std::vector<double> y_weights;
        std::vector<double> f_weights;
        double gamma = 0.0;
        double nls_tol = 0.0;
    };
    const LastStepCoeffs& last_step_coeffs() const { return last_coeffs_; }

    /// Replaces the history with externally supplied states at strictly
    /// increasing times (the last entry becomes the current state). The RHS
    /// is evaluated at each point to seed the derivative history.
    void warm_start(std::span<const double> times,
                    std::span<const Vector* const> states) {
        if (times.empty() || times.size() != states.size())
            throw config_error("warm_start: need matching non-empty times/states");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (times[i] <= times[i - 1])
                throw config_error("warm_start: times must be strictly increasing");
        ts_.clear();
        ys_.clear();
        fs_.clear();
        for (std::size_t i = 0; i < times.size(); ++i) {
            push_state(times[i], *states[i]);
            if (rhs_(times[i], *states[i], *fcur_) != CbStatus::ok)
                throw integration_error("warm_start: RHS failed at a seed state");
            push_f(*fcur_);
        }
        t_ = times.back();
        q_ = 1;
        steps_at_order_ = 0;
        build_error_weights(tol_, *ys_.front(), *ewt_);
        h_ = opts_.fixed_step > 0.0
                 ? opts_.fixed_step
                 : initial_step_size(rhs_, t_, *ys_.front(), *fs_.front(), *ewt_,
                                     opts_.horizon);
        h0_ = h_;
        started_ = true;
    }

    /// Takes one accepted step and returns (t_n, y_n).
    std::pair<double, const Vector*> step() {
        ensure_started();
        build_error_weights(tol_, *ys_.front(), *ewt_);
        int halvings = 0;
        int err_fails = 0;
        had_failure_ = false;

        for (;;) {
            const int q = effective_order();
            const double h = h_;
            check_step_floor(h);
            const double t_new = t_ + h;

            const double kappa = prepare_attempt(q, h, t_new);
            ctx_.t = t_new;
            ctx_.nls_tol = opts_.nls_coef / kappa;

            const bool call_lsetup = decide_lsetup();
            ycor_->const_fill(0.0);
            NlsSolveRequest req;
            req.y0 = ypred_.get();
            req.ycor = ycor_.get();
            req.w = ewt_.get();
            req.tol = ctx_.nls_tol;
            req.call_lsetup = call_lsetup;
            const NlsOutcome out = nls_->solve(req);
            counters_.nls_iters += out.iterations;
            if (call_lsetup) {
                gamma_at_setup_ = ctx_.gamma;
                steps_since_setup_ = 0;
            }

            if (out.status != NlsStatus::ok) {
                if (!nls_status_recoverable(out.status))
                    throw integration_error("LmmIntegrator: unrecoverable nonlinear failure");
                ++counters_.nls_conv_fails;
                ++counters_.step_fails;
                force_setup_ = true;
                had_failure_ = true;
                if (opts_.fixed_step > 0.0)
                    throw integration_error(
                        "LmmIntegrator: nonlinear solve failed in fixed-step mode");
                if (++halvings > opts_.max_step_halvings)
                    throw integration_error(
                        "LmmIntegrator: repeated nonlinear convergence failures");
                h_ *= 0.5;
                continue;
            }

            // local error estimate from the correction
            const double err = kappa * ycor_->wrms_norm(*ewt_);
            if (monitor_) monitor_({t_new, h, q, err, opts_.fixed_step > 0.0 || err <= 1.0});

            if (opts_.fixed_step <= 0.0 && err > 1.0) {
                ++counters_.step_fails;
                ++err_fails;
                had_failure_ = true;
                if (err_fails >= opts_.max_error_failures)
                    throw integration_error("LmmIntegrator: repeated error-test failures");
                double eta = step_eta_reject(err, q);
                if (err_fails >= 3) {
                    eta = std::min(eta, 0.1);
                    q_ = 1;
                    steps_at_order_ = 0;
                }
                h_ *= eta;
                continue;
            }

            accept_step(t_new, q, h, err);
            return {t_, ys_.front().get()};
        }
    }

    /// Steps past t_out and returns the dense-output interpolant there.
    void evolve(double t_out, Vector& y_out) {
        const double now_eps =
            10.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t_));
        if (t_out < t_ - now_eps)
            throw config_error("evolve: t_out is behind the current time");
        if (t_out <= t_ + now_eps) {
            y_out.scale(1.0, *ys_.front());
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

    /// Dense output: polynomial through the stored history, degree matching
    /// the current order.
    void interpolate(double t_eval, Vector& y_out) const {
        const std::size_t npts =
            std::min(ys_.size(), static_cast<std::size_t>(q_) + 1);
        std::vector<double> nodes(ts_.begin(), ts_.begin() + static_cast<std::ptrdiff_t>(npts));
        const auto w = multistep::lagrange_weights(nodes, t_eval);
        std::vector<const Vector*> vals(npts);
        for (std::size_t k = 0; k < npts; ++k) vals[k] = ys_[k].get();
        y_out.linear_combination(w, vals);
    }

private:
    /// Deferred startup: evaluates the initial derivative and chooses h0 so
    /// that a freshly constructed integrator reports all-zero statistics.
    void ensure_started() {
        if (started_) return;
        started_ = true;
        build_error_weights(tol_, *ys_.front(), *ewt_);
        if (rhs_(t_, *ys_.front(), *fcur_) != CbStatus::ok)
            throw integration_error("LmmIntegrator: RHS failed at the initial state");
        push_f(*fcur_);
        h_ = opts_.fixed_step > 0.0
                 ? opts_.fixed_step
                 : initial_step_size(rhs_, t_, *ys_.front(), *fcur_, *ewt_,
                                     opts_.horizon);
        h0_ = h_;
    }

    int effective_order() const {
        const int target = opts_.fixed_order > 0 ? opts_.fixed_order : q_;
        const int hist = static_cast<int>(ys_.size());
        if (opts_.method == LmmMethod::BDF) return std::min(target, hist);
        return std::min(target, static_cast<int>(fs_.size()) + 1);
    }

    void check_step_floor(double h) const {
        const double floor = 10.0 * std::numeric_limits<double>::epsilon() *
                             std::max(std::abs(t_), std::abs(t_ + h));
        if (h < floor) throw integration_error("LmmIntegrator: step size underflow");
    }

    bool decide_lsetup() {
        if (!linsys_) return false;
        const double ratio = gamma_at_setup_ != 0.0 ? ctx_.gamma / gamma_at_setup_ : 0.0;
        const bool need = force_setup_ || steps_since_setup_ >= 20 || ratio < 0.3 ||
                          ratio > 3.0;
        force_setup_ = false;
        return need;
    }

    /// Builds predictor, known data, gamma, and the error coefficient for a
    /// step of order q and size h; returns the error coefficient kappa.
    double prepare_attempt(int q, double h, double t_new) {
        return opts_.method == LmmMethod::BDF ? prepare_bdf(q, h, t_new)
                                              : prepare_adams(q, h, t_new);
    }

    double prepare_bdf(int q, double h, double t_new) {
        const auto cs = multistep::bdf(q);
        ctx_.gamma = h * cs.beta0;
        last_coeffs_.gamma = ctx_.gamma;
        last_coeffs_.f_weights.clear();

        const std::size_t hist = ys_.size();
        if (q == 1 && hist == 1) {
            // startup: forward-Euler predictor against backward Euler
            ypred_->linear_sum(1.0, *ys_[0], h, *fs_[0]);
            dvec_->linear_sum(1.0, *ypred_, -1.0, *ys_[0]); // ypred - a_n
            last_coeffs_.y_weights = {1.0};
            return 0.5;
        }

        const std::size_t npts = std::min(hist, static_cast<std::size_t>(q) + 1);
        std::vector<double> nodes(ts_.begin(), ts_.begin() + static_cast<std::ptrdiff_t>(npts));
        std::vector<const Vector*> vals(npts);
        for (std::size_t k = 0; k < npts; ++k) vals[k] = ys_[k].get();

        // collapse the uniform-grid formula onto the stored history
        std::vector<double> an_w(npts, 0.0);
        double prod_sum = 0.0; // sum_j a_j prod_i (tau_j - t_i)
        for (int j = 1; j <= q; ++j) {
            const double tau = t_new - j * h;
            const auto wj = multistep::lagrange_weights(nodes, tau);
            const double aj = cs.a[static_cast<std::size_t>(j - 1)];
            for (std::size_t k = 0; k < npts; ++k) an_w[k] += aj * wj[k];
            double prod = 1.0;
            for (double ti : nodes) prod *= tau - ti;
            prod_sum += aj * prod;
        }
        scratch_->linear_combination(an_w, vals); // a_n
        const auto wp = multistep::lagrange_weights(nodes, t_new);
        ypred_->linear_combination(wp, vals);
        dvec_->linear_sum(1.0, *ypred_, -1.0, *scratch_);
        last_coeffs_.y_weights = an_w;

        // error coefficient: LTE = Mtil*Y, correction = (Mtil + Pi)*Y
        double m = cs.error_const * h;
        double pi = t_new - nodes[0];
        for (std::size_t i = 1; i < npts; ++i) {
            m *= h * static_cast<double>(i + 1); // C * (q+1)! * h^(q+1)
            pi *= t_new - nodes[i];
        }
        const double mtil = m - prod_sum;
        return std::max(std::abs(mtil), 0.1 * m) /
               std::max(std::abs(mtil + pi), 0.1 * pi);
    }

    double prepare_adams(int q, double h, double t_new) {
        const auto am = multistep::adams_moulton(q);
        ctx_.gamma = h * am.beta[0];
        last_coeffs_.gamma = ctx_.gamma;

        const std::size_t nf = std::min(fs_.size(), static_cast<std::size_t>(q));
        const int qp = std::min(q, static_cast<int>(nf)); // predictor order
        const auto ab = multistep::adams_bashforth(qp);

        std::vector<double> fnodes(ts_.begin(), ts_.begin() + static_cast<std::ptrdiff_t>(nf));
        std::vector<const Vector*> fvals(nf);
        for (std::size_t k = 0; k < nf; ++k) fvals[k] = fs_[k].get();

        std::vector<double> an_w(nf, 0.0), pr_w(nf, 0.0);
        double e_am = 0.0, e_ab = 0.0; // interpolation-error corrections
        double qfact = 1.0;
        for (std::size_t i = 1; i <= nf; ++i) qfact *= static_cast<double>(i);
        const int jmax = std::max(q - 1, qp);
        for (int j = 1; j <= jmax; ++j) {
            const double tau = t_new - j * h;
            const auto wj = multistep::lagrange_weights(fnodes, tau);
            double prod = 1.0;
            for (double ti : fnodes) prod *= tau - ti;
            if (j <= q - 1) {
                const double bj = am.beta[static_cast<std::size_t>(j)];
                for (std::size_t k = 0; k < nf; ++k) an_w[k] += h * bj * wj[k];
                e_am += h * bj * prod / qfact;
            }
            if (j <= qp) {
                const double bj = ab.beta[static_cast<std::size_t>(j - 1)];
                for (std::size_t k = 0; k < nf; ++k) pr_w[k] += h * bj * wj[k];
                e_ab += h * bj * prod / qfact;
            }
        }

        // a_n = y_{n-1} + collapsed f terms; predictor likewise
        if (nf > 0) {
            scratch_->linear_combination(an_w, fvals);
            scratch_->linear_sum(1.0, *ys_[0], 1.0, *scratch_);
        } else {
            scratch_->scale(1.0, *ys_[0]);
        }
        std::swap(scratch_, dvec_); // dvec temporarily holds a_n
        if (nf > 0) {
            scratch_->linear_combination(pr_w, fvals);
            ypred_->linear_sum(1.0, *ys_[0], 1.0, *scratch_);
        } else {
            ypred_->scale(1.0, *ys_[0]);
        }
        scratch_->scale(1.0, *dvec_); // a_n
        dvec_->linear_sum(1.0, *ypred_, -1.0, *scratch_);
        last_coeffs_.y_weights = {1.0};
        last_coeffs_.f_weights = an_w;

        // Milne-style coefficient with nonuniform-history corrections; the
        // corrections vanish when the interpolation degree drops (startup)
        double hq1 = h;
        for (int i = 0; i < q; ++i) hq1 *= h;
        const bool full = nf == static_cast<std::size_t>(q) && qp == q;
        const double ec = am.defect_const * hq1 + (full ? e_am : 0.0);
        const double ab_const = multistep::adams_bashforth(qp).defect_const;
        double hp1 = h;
        for (int i = 0; i < qp; ++i) hp1 *= h;
        const double ep = ab_const * hp1 + (full ? e_ab : 0.0);
        const double denom_floor = 0.1 * std::abs(ab_const * hp1 - am.defect_const * hq1);
        return std::abs(ec) / std::max(std::abs(ep - ec), denom_floor);
    }

    void accept_step(double t_new, int q, double h, double err) {
        ycur_->linear_sum(1.0, *ypred_, 1.0, *ycor_); // y_n
        push_state(t_new, *ycur_);
        if (opts_.method == LmmMethod::Adams) {
            // fresh derivative for the f history
            if (rhs_(t_new, *ys_.front(), *fcur_) != CbStatus::ok)
                throw integration_error("LmmIntegrator: RHS failed after an accepted step");
            push_f(*fcur_);
        } else {
            push_f(*fcur_); // last residual evaluation, accurate to the NLS tolerance
        }
        last_coeffs_.nls_tol = ctx_.nls_tol;

        t_ = t_new;
        ++counters_.steps;
        ++steps_at_order_;
        ++steps_since_setup_;
        if (linsys_) linsys_->on_step_accepted();

        if (opts_.fixed_step > 0.0) return;

        q_ = q;
        double eta = step_eta_accept(err, q);
        if (opts_.fixed_order == 0 && steps_at_order_ >= q + 1)
            consider_order_change(q, h, eta);
        // no growth right after a troubled step
        if (had_failure_) eta = std::min(eta, 1.0);
        h_ = h * eta;
    }

    /// Order selection: pick the order in {q-1, q, q+1} whose error estimate
    /// permits the largest next step.
    void consider_order_change(int q, double h, double& eta) {
        int best_q = q;
        double best_eta = eta;

        if (q > 1) {
            const double errd = dd_error_estimate(q - 1, h);
            const double etad = step_eta_accept(errd, q - 1);
            if (etad > best_eta) {
                best_eta = etad;
                best_q = q - 1;
            }
        }
        if (q < maxord_ && ys_.size() >= static_cast<std::size_t>(q) + 3) {
            const double erru = dd_error_estimate(q + 1, h);
            const double etau = step_eta_accept(erru, q + 1);
            if (etau > best_eta) {
                best_eta = etau;
                best_q = q + 1;
            }
        }
        if (best_q != q_) {
            q_ = best_q;
            steps_at_order_ = 0;
        }
        eta = best_eta;
    }

    /// Divided-difference estimate of the local error at order k, using the
    /// k+2 newest history values (the new step included).
    double dd_error_estimate(int k, double h) {
        const std::size_t npts = static_cast<std::size_t>(k) + 2;
        if (ys_.size() < npts) return std::numeric_limits<double>::infinity();
        std::vector<double> nodes(ts_.begin(), ts_.begin() + static_cast<std::ptrdiff_t>(npts));
        const auto w = multistep::divided_difference_weights(nodes);
        std::vector<const Vector*> vals(npts);
        for (std::size_t i = 0; i < npts; ++i) vals[i] = ys_[i].get();
        scratch_->linear_combination(w, vals);
        // |C_k| (k+1)! h^(k+1) * ||y^(k+1)/(k+1)!|| in the WRMS norm
        double hk1 = h;
        for (int i = 0; i < k; ++i) hk1 *= h;
        const double c = opts_.method == LmmMethod::BDF
                             ? multistep::bdf(k).error_const
                             : std::abs(multistep::adams_moulton(k).defect_const);
        return c * hk1 * scratch_->wrms_norm(*ewt_);
    }

    void push_state(double t, const Vector& y) {
        std::unique_ptr<Vector> slot;
        if (static_cast<int>(ys_.size()) >= maxord_ + 3) {
            slot = std::move(ys_.back());
            ys_.pop_back();
            ts_.pop_back();
        } else {
            slot = y.clone();
        }
        slot->scale(1.0, y);
        ys_.push_front(std::move(slot));
        ts_.push_front(t);
    }

    void push_f(const Vector& f) {
        std::unique_ptr<Vector> slot;
        if (static_cast<int>(fs_.size()) >= maxord_ + 3) {
            slot = std::move(fs_.back());
            fs_.pop_back();
        } else {
            slot = f.clone();
        }
        slot->scale(1.0, f);
        fs_.push_front(std::move(slot));
    }

    Tolerances tol_;
    LmmOptions opts_;
    NonlinearSolver* nls_;
    std::unique_ptr<OdeLinearSystem> linsys_;
    RhsFn rhs_;
    OdeSolveContext ctx_;
    IntegratorCounters counters_;

    double t_ = 0.0;
    double h_ = 0.0;
    double h0_ = 0.0;
    bool started_ = false;
    int q_ = 1;
    int maxord_ = 5;
    int steps_at_order_ = 0;

    std::deque<double> ts_; // newest first
    std::deque<std::unique_ptr<Vector>> ys_, fs_;

    std::unique_ptr<Vector> ewt_, ypred_, ycor_, dvec_, ycur_, fcur_, scratch_;

    bool force_setup_ = true;
    bool had_failure_ = false;
    double gamma_at_setup_ = 0.0;
    long steps_since_setup_ = 0;

    LastStepCoeffs last_coeffs_;
    std::function<void(const StepRecord&)> monitor_;
};

} // namespace odekit
