#pragma once

#include <algorithm>
#include <cmath>
#include <deque>

#include "odekit/dense_lu.hpp"
#include "odekit/matrix.hpp"
#include "odekit/nonlinear_solver.hpp"

namespace odekit {

struct AndersonConfig {
    int depth = 2;      // acceleration window m; 0 is plain fixed-point iteration
    int max_iters = 10; // per solve

    void validate() const {
        if (depth < 0) throw config_error("AndersonConfig: depth must be >= 0");
        if (max_iters < 1) throw config_error("AndersonConfig: max_iters must be >= 1");
    }
};

/// Fixed-point iteration for G(ycor) = ycor, optionally Anderson-accelerated
/// over the last m residuals. The first iterate is always a plain step; the
/// mixing coefficients solve the unconstrained least-squares problem on the
/// residual-difference matrix via its normal equations (no damping). A
/// rank-deficient system restarts the history.
///
/// Default convergence test: ||ycor_{k+1} - ycor_k||_wrms(w) < tol.
/// Counter relation: sys-fn evaluations equal iterations exactly.
class FixedPointSolver final : public NonlinearSolver {
public:
    explicit FixedPointSolver(AndersonConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

    NonlinearSolverType type() const override { return NonlinearSolverType::FixedPoint; }

    void set_sys_fn(SysFn fn) override { sys_ = std::move(fn); }
    void set_convtest_fn(ConvTestFn fn, void* ctx) override {
        convtest_ = std::move(fn);
        convtest_ctx_ = ctx;
    }

    const AndersonConfig& config() const { return cfg_; }

    NlsOutcome solve(const NlsSolveRequest& req) override {
        if (!sys_) throw config_error("FixedPointSolver: system function not set");
        if (!req.y0 || !req.ycor || !req.w)
            throw config_error("FixedPointSolver: incomplete solve request");

        ensure_workspace(*req.ycor);
        df_.clear();
        dg_.clear();

        NlsOutcome out;
        Vector& x = *req.ycor;
        bool have_prev = false;

        for (int k = 0; k < cfg_.max_iters; ++k) {
            const CbStatus flag = sys_(x, *gval_, req.context);
            if (flag != CbStatus::ok) {
                out.status = flag == CbStatus::recoverable ? NlsStatus::sys_recoverable
                                                           : NlsStatus::fatal;
                return out;
            }
            fval_->linear_sum(1.0, *gval_, -1.0, x); // f = g - x

            if (have_prev && cfg_.depth > 0) {
                push_difference(df_, *fval_, *fprev_);
                push_difference(dg_, *gval_, *gprev_);
            }
            fprev_->scale(1.0, *fval_);
            gprev_->scale(1.0, *gval_);
            have_prev = true;

            if (df_.empty()) {
                xnew_->scale(1.0, *gval_);
            } else {
                mix(*xnew_);
            }

            delta_->linear_sum(1.0, *xnew_, -1.0, x);
            x.scale(1.0, *xnew_);
            ++niters_;
            ++out.iterations;

            const ConvTest ct =
                convtest_ ? convtest_(x, *delta_, req.tol, *req.w, convtest_ctx_)
                          : (delta_->wrms_norm(*req.w) < req.tol ? ConvTest::converged
                                                                 : ConvTest::keep_iterating);
            if (ct == ConvTest::converged) {
                out.status = NlsStatus::ok;
                return out;
            }
            if (ct == ConvTest::recover) {
                ++nconvfails_;
                out.status = NlsStatus::diverged;
                return out;
            }
        }
        ++nconvfails_;
        out.status = NlsStatus::max_iterations;
        return out;
    }

    long num_iters() const override { return niters_; }
    long num_conv_fails() const override { return nconvfails_; }

private:
    void ensure_workspace(const Vector& proto) {
        if (gval_ && gval_->length() == proto.length()) return;
        gval_ = proto.clone();
        fval_ = proto.clone();
        fprev_ = proto.clone();
        gprev_ = proto.clone();
        xnew_ = proto.clone();
        delta_ = proto.clone();
        df_.clear();
        dg_.clear();
    }

    void push_difference(std::deque<std::unique_ptr<Vector>>& hist, const Vector& cur,
                         const Vector& prev) {
        std::unique_ptr<Vector> col;
        if (static_cast<int>(hist.size()) >= cfg_.depth) {
            col = std::move(hist.front());
            hist.pop_front();
        } else {
            col = cur.clone();
        }
        col->linear_sum(1.0, cur, -1.0, prev);
        hist.push_back(std::move(col));
    }

    /// xnew = g_k - DG * gamma with gamma from the normal equations
    /// (DF^T DF) gamma = DF^T f_k.
    void mix(Vector& xnew) {
        const int mk = static_cast<int>(df_.size());
        DenseMatrix ata(mk, mk);
        SerialVector rhs(mk), gamma(mk);
        std::vector<const Vector*> cols(df_.size());
        for (int i = 0; i < mk; ++i) cols[static_cast<std::size_t>(i)] = df_[static_cast<std::size_t>(i)].get();
        std::vector<double> dots(df_.size());
        for (int i = 0; i < mk; ++i) {
            df_[static_cast<std::size_t>(i)]->dot_prod_multi(cols, dots);
            for (int j = 0; j < mk; ++j) ata(i, j) = dots[static_cast<std::size_t>(j)];
            rhs[i] = df_[static_cast<std::size_t>(i)]->dot(*fval_);
        }

        DenseLuSolver lu;
        if (lu.setup(&ata) != LinStatus::ok) {
            // rank deficient: restart the acceleration history
            df_.clear();
            dg_.clear();
            xnew.scale(1.0, *gval_);
            return;
        }
        lu.solve(nullptr, gamma, rhs, 0.0);

        std::vector<double> coeff(static_cast<std::size_t>(mk) + 1);
        std::vector<const Vector*> terms(static_cast<std::size_t>(mk) + 1);
        coeff[0] = 1.0;
        terms[0] = gval_.get();
        for (int i = 0; i < mk; ++i) {
            coeff[static_cast<std::size_t>(i) + 1] = -gamma[i];
            terms[static_cast<std::size_t>(i) + 1] = dg_[static_cast<std::size_t>(i)].get();
        }
        xnew.linear_combination(coeff, terms);
    }

    AndersonConfig cfg_;
    SysFn sys_;
    ConvTestFn convtest_;
    void* convtest_ctx_ = nullptr;

    std::unique_ptr<Vector> gval_, fval_, fprev_, gprev_, xnew_, delta_;
    std::deque<std::unique_ptr<Vector>> df_, dg_;

    long niters_ = 0;
    long nconvfails_ = 0;
};

} // namespace odekit
