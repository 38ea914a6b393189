#pragma once

#include <algorithm>
#include <cmath>

#include "odekit/nonlinear_solver.hpp"

namespace odekit {

/// Newton iteration constants. conv_coef is the coefficient callers use to
/// derive the solve tolerance from their own error-control target.
struct NewtonConfig {
    int max_iters = 4; // per solve attempt; multistep callers keep this small
    double conv_coef = 0.1;
    double crdown = 0.3; // damping for the convergence-rate estimate
    double rdiv = 2.0;   // update-norm growth declaring divergence

    void validate() const {
        if (max_iters < 1) throw config_error("NewtonConfig: max_iters must be >= 1");
        if (rdiv <= 1.0) throw config_error("NewtonConfig: rdiv must be > 1");
    }
};

/// Modified/inexact Newton for F(ycor) = 0. The linear setup is performed at
/// most once per solve attempt (gated by call_lsetup) and the Jacobian data
/// is reused until the iteration stagnates, at which point one retry with a
/// forced fresh setup is made.
///
/// Default convergence test: with update norm del = ||delta||_wrms(w) and
/// rate estimate R = max(crdown*R, del/del_prev), stop when
/// min(1, R) * del <= tol; declare divergence when del > rdiv * del_prev.
///
/// Counter relation: each iteration performs exactly one system evaluation,
/// so sys-fn evaluations equal iterations plus one extra evaluation per
/// fresh-setup retry attempt.
class NewtonSolver final : public NonlinearSolver {
public:
    explicit NewtonSolver(NewtonConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

    NonlinearSolverType type() const override { return NonlinearSolverType::RootFind; }

    void set_sys_fn(SysFn fn) override { sys_ = std::move(fn); }
    void set_lsetup_fn(LSetupFn fn) override { lsetup_ = std::move(fn); }
    void set_lsolve_fn(LSolveFn fn) override { lsolve_ = std::move(fn); }
    void set_convtest_fn(ConvTestFn fn, void* ctx) override {
        convtest_ = std::move(fn);
        convtest_ctx_ = ctx;
    }

    bool linear_solve_ready() const override { return static_cast<bool>(lsolve_); }

    const NewtonConfig& config() const { return cfg_; }

    NlsOutcome solve(const NlsSolveRequest& req) override {
        if (!sys_) throw config_error("NewtonSolver: system function not set");
        if (!lsolve_) throw config_error("NewtonSolver: lsolve function not set");
        if (!req.y0 || !req.ycor || !req.w)
            throw config_error("NewtonSolver: incomplete solve request");

        if (!delta_ || delta_->length() != req.ycor->length())
            delta_ = req.ycor->clone();

        NlsOutcome out;
        bool call_lsetup = req.call_lsetup && static_cast<bool>(lsetup_);
        bool jbad = false;
        bool jcur = false;

        for (;;) { // setup attempts
            CbStatus flag = sys_(*req.ycor, *delta_, req.context);
            if (flag != CbStatus::ok) return finish(out, map_sys(flag));

            if (call_lsetup) {
                jcur = false;
                flag = lsetup_(jbad, jcur, req.context);
                if (flag != CbStatus::ok)
                    return finish(out, flag == CbStatus::recoverable
                                           ? NlsStatus::setup_recoverable
                                           : NlsStatus::fatal);
            }

            crate_ = 1.0;
            delp_ = 0.0;
            int m = 0;
            NlsStatus attempt = NlsStatus::ok;

            for (;;) { // Newton iteration
                ++niters_;
                ++out.iterations;
                delta_->scale(-1.0, *delta_);
                flag = lsolve_(*delta_, req.context);
                if (flag != CbStatus::ok) {
                    attempt = flag == CbStatus::recoverable ? NlsStatus::solve_recoverable
                                                            : NlsStatus::fatal;
                    break;
                }
                req.ycor->linear_sum(1.0, *req.ycor, 1.0, *delta_);

                const ConvTest ct = run_convtest(*req.ycor, *delta_, req.tol, *req.w, m);
                if (ct == ConvTest::converged) return finish(out, NlsStatus::ok);
                if (ct == ConvTest::recover) {
                    attempt = NlsStatus::diverged;
                    break;
                }

                ++m;
                if (m >= cfg_.max_iters) {
                    attempt = NlsStatus::max_iterations;
                    break;
                }
                flag = sys_(*req.ycor, *delta_, req.context);
                if (flag != CbStatus::ok) {
                    attempt = map_sys(flag);
                    break;
                }
            }

            if (attempt == NlsStatus::fatal) return finish(out, attempt);
            ++nconvfails_;
            // retry once with a forced fresh setup if the data was stale
            if (jcur || !lsetup_) return finish(out, attempt);
            jbad = true;
            call_lsetup = true;
        }
    }

    long num_iters() const override { return niters_; }
    long num_conv_fails() const override { return nconvfails_; }

private:
    static NlsStatus map_sys(CbStatus f) {
        return f == CbStatus::recoverable ? NlsStatus::sys_recoverable : NlsStatus::fatal;
    }

    ConvTest run_convtest(const Vector& ycor, const Vector& delta, double tol,
                          const Vector& w, int m) {
        if (convtest_) return convtest_(ycor, delta, tol, w, convtest_ctx_);
        const double del = delta.wrms_norm(w);
        if (m > 0) crate_ = std::max(cfg_.crdown * crate_, del / delp_);
        const double dcon = del * std::min(1.0, crate_) / tol;
        if (dcon <= 1.0) return ConvTest::converged;
        if (m >= 1 && del > cfg_.rdiv * delp_) return ConvTest::recover;
        delp_ = del;
        return ConvTest::keep_iterating;
    }

    NlsOutcome finish(NlsOutcome out, NlsStatus s) {
        out.status = s;
        return out;
    }

    NewtonConfig cfg_;
    SysFn sys_;
    LSetupFn lsetup_;
    LSolveFn lsolve_;
    ConvTestFn convtest_;
    void* convtest_ctx_ = nullptr;

    std::unique_ptr<Vector> delta_;
    double crate_ = 1.0;
    double delp_ = 0.0;
    long niters_ = 0;
    long nconvfails_ = 0;
};

} // namespace odekit
