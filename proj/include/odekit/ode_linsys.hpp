#pragma once

#include <cmath>
#include <limits>

#include "odekit/linear_solver.hpp"
#include "odekit/ode_common.hpp"

namespace odekit {

/// Dense Jacobian callback: J = df/dy at (t, y), fy = f(t, y).
using JacFn = std::function<CbStatus(double t, const Vector& y, const Vector& fy,
                                     DenseMatrix& jac)>;

/// Jacobian-vector product callback: jv = df/dy(t, y) * v.
using JvFn = std::function<CbStatus(const Vector& v, Vector& jv, double t,
                                    const Vector& y, const Vector& fy)>;

/// How an integrator attaches linear algebra for its Newton systems.
struct LinearSystemSpec {
    LinearSolver* solver = nullptr;
    const Matrix* jac_template = nullptr; // non-null selects the matrix-based path
    JacFn jac; // analytic Jacobian (matrix path); difference quotients otherwise
    JvFn jv;   // analytic product (matrix-free path); difference quotients otherwise
};

/// Live solve context shared between an integrator and its linear-system
/// interface. The integrator's residual evaluations keep y/fy current.
struct OdeSolveContext {
    double t = 0.0;
    double gamma = 0.0;          // h * leading coefficient of the Newton matrix
    const Vector* y = nullptr;   // current iterate in state space
    const Vector* fy = nullptr;  // f(t, y) at the same point
    const Vector* weights = nullptr;
    double nls_tol = 0.0;
};

struct OdeLinsysPolicy {
    int max_steps_between_jac = 20;
    double gamma_ratio_min = 0.3;
    double gamma_ratio_max = 3.0;
    double lin_tol_factor = 0.05; // linear tolerance relative to the NLS tolerance
};

/// Newton-system interface shared by the multistep and multistage
/// integrators: forms M = I - gamma*J (explicitly or as a product routine),
/// amortizes Jacobian construction across steps, and adapts the linear solve
/// tolerance when the attached solver lacks scaling support.
class OdeLinearSystem {
public:
    using Policy = OdeLinsysPolicy;

    OdeLinearSystem(const LinearSystemSpec& spec, const Tolerances& tol,
                    RhsFn counted_rhs, OdeSolveContext& ctx,
                    Policy policy = OdeLinsysPolicy{})
        : spec_(spec), tol_(tol), rhs_(std::move(counted_rhs)), ctx_(&ctx),
          policy_(policy) {
        if (!spec_.solver) throw config_error("OdeLinearSystem: no linear solver");
        matrix_based_ = spec_.jac_template != nullptr;
        if (matrix_based_) {
            if (spec_.solver->type() == LinearSolverType::MatrixFreeIterative)
                throw config_error(
                    "OdeLinearSystem: matrix template attached to a matrix-free solver");
            jac_ = spec_.jac_template->clone();
            newton_mat_ = spec_.jac_template->clone();
        } else {
            if (spec_.solver->type() == LinearSolverType::MatrixDirect)
                throw config_error(
                    "OdeLinearSystem: direct solver requires a matrix template");
            spec_.solver->set_atimes([this](const Vector& v, Vector& z) {
                // z = (I - gamma J) v
                if (jv_apply(v, z) != CbStatus::ok) return false;
                z.linear_sum(1.0, v, -ctx_->gamma, z);
                return true;
            });
        }
    }

    bool matrix_based() const { return matrix_based_; }
    long ls_iters() const { return ls_iters_; }
    long last_solve_iters() const { return last_solve_iters_; }

    void on_step_accepted() { ++jac_age_; }
    void force_jac_refresh() { have_jac_ = false; }

    /// lsetup hook for the nonlinear solver. Refreshes the Jacobian when it
    /// is stale (age, gamma drift, or explicitly flagged bad), then reforms
    /// and refactors M = I - gamma*J.
    CbStatus lsetup(bool jbad, bool& jcur) {
        jcur = false;
        if (matrix_based_) {
            const double ratio = gamma_at_jac_ != 0.0 ? ctx_->gamma / gamma_at_jac_ : 0.0;
            const bool stale = !have_jac_ || jbad ||
                               jac_age_ >= policy_.max_steps_between_jac ||
                               ratio < policy_.gamma_ratio_min ||
                               ratio > policy_.gamma_ratio_max;
            if (stale) {
                const CbStatus flag = build_jacobian();
                if (flag != CbStatus::ok) return flag;
                have_jac_ = true;
                jcur = true;
                jac_age_ = 0;
                gamma_at_jac_ = ctx_->gamma;
            }
            jac_->copy_to(*newton_mat_);
            newton_mat_->scale_add_identity(-ctx_->gamma); // M = I - gamma J
            const LinStatus s = spec_.solver->setup(newton_mat_.get());
            if (s == LinStatus::ok) return CbStatus::ok;
            return lin_status_recoverable(s) ? CbStatus::recoverable : CbStatus::fatal;
        }
        // matrix-free: nothing to factor; refresh preconditioner data if any
        jcur = true;
        const LinStatus s = spec_.solver->setup(nullptr);
        if (s == LinStatus::ok) return CbStatus::ok;
        return lin_status_recoverable(s) ? CbStatus::recoverable : CbStatus::fatal;
    }

    /// lsolve hook: solves M x = b in place to the context tolerance.
    CbStatus lsolve(Vector& b) {
        LinearSolver& ls = *spec_.solver;
        double tol2 = policy_.lin_tol_factor * ctx_->nls_tol *
                      std::sqrt(static_cast<double>(b.length()));
        if (ls.supports_scaling()) {
            ls.set_scaling_vectors(*ctx_->weights, *ctx_->weights);
        } else {
            tol2 = effective_tolerance(tol2, ctx_->weights);
        }

        if (!x_ || x_->length() != b.length()) x_ = b.clone();
        x_->const_fill(0.0); // integrators always start from a zero guess
        const LinSolveReport rep =
            ls.solve(matrix_based_ ? newton_mat_.get() : nullptr, *x_, b, tol2);
        ls_iters_ += rep.iterations;
        last_solve_iters_ = rep.iterations;
        if (rep.status == LinStatus::ok || rep.status == LinStatus::max_iterations) {
            // accept the last iterate on a tolerance miss; the nonlinear
            // test decides whether the step survives
            b.scale(1.0, *x_);
            return rep.converged ? CbStatus::ok : CbStatus::recoverable;
        }
        return lin_status_recoverable(rep.status) ? CbStatus::recoverable
                                                  : CbStatus::fatal;
    }

private:
    CbStatus build_jacobian() {
        if (spec_.jac) return spec_.jac(ctx_->t, *ctx_->y, *ctx_->fy,
                                        dynamic_cast<DenseMatrix&>(*jac_));
        return dq_jacobian();
    }

    /// Forward-difference dense Jacobian, column by column. Increments are
    /// sqrt(eps) * max(|y_j|, typ_j) with typ_j = atol_j / rtol.
    CbStatus dq_jacobian() {
        const auto* ys = dynamic_cast<const SerialVector*>(ctx_->y);
        auto* jd = dynamic_cast<DenseMatrix*>(jac_.get());
        if (!ys || !jd)
            throw config_error("OdeLinearSystem: difference-quotient Jacobian needs "
                               "serial state and a dense matrix");
        const index_t n = ys->length();
        if (!dq_y_ || dq_y_->length() != n) {
            dq_y_ = ctx_->y->clone();
            dq_f_ = ctx_->y->clone();
        }
        auto& yp = dynamic_cast<SerialVector&>(*dq_y_);
        const auto& fy = dynamic_cast<const SerialVector&>(*ctx_->fy);
        const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
        for (index_t j = 0; j < n; ++j) {
            yp.scale(1.0, *ys);
            const double typ = tol_.rtol > 0.0 ? scalar_atol(j) / tol_.rtol : scalar_atol(j);
            double sigma = sqrt_eps * std::max(std::abs((*ys)[j]), typ);
            if (sigma == 0.0) sigma = sqrt_eps;
            yp[j] += sigma;
            const CbStatus flag = rhs_(ctx_->t, yp, *dq_f_);
            if (flag != CbStatus::ok) return flag;
            const auto& fp = dynamic_cast<const SerialVector&>(*dq_f_);
            for (index_t i = 0; i < n; ++i) (*jd)(i, j) = (fp[i] - fy[i]) / sigma;
        }
        return CbStatus::ok;
    }

    double scalar_atol(index_t j) const {
        if (!tol_.atol_vec) return tol_.atol;
        return dynamic_cast<const SerialVector&>(*tol_.atol_vec)[j];
    }

    /// jv = J v, analytic when provided, else a one-sided difference quotient
    /// with increment 1/||v||_wrms.
    CbStatus jv_apply(const Vector& v, Vector& jv) {
        if (spec_.jv) return spec_.jv(v, jv, ctx_->t, *ctx_->y, *ctx_->fy);
        const double vnorm = v.wrms_norm(*ctx_->weights);
        if (vnorm == 0.0) {
            jv.const_fill(0.0);
            return CbStatus::ok;
        }
        const double sigma = 1.0 / vnorm;
        if (!dq_y_ || dq_y_->length() != v.length()) {
            dq_y_ = v.clone();
            dq_f_ = v.clone();
        }
        dq_y_->linear_sum(1.0, *ctx_->y, sigma, v);
        const CbStatus flag = rhs_(ctx_->t, *dq_y_, *dq_f_);
        if (flag != CbStatus::ok) return flag;
        jv.linear_sum(1.0 / sigma, *dq_f_, -1.0 / sigma, *ctx_->fy);
        return CbStatus::ok;
    }

    LinearSystemSpec spec_;
    Tolerances tol_;
    RhsFn rhs_;
    OdeSolveContext* ctx_;
    Policy policy_;

    bool matrix_based_ = false;
    std::unique_ptr<Matrix> jac_, newton_mat_;
    std::unique_ptr<Vector> x_, dq_y_, dq_f_;

    bool have_jac_ = false;
    int jac_age_ = 0;
    double gamma_at_jac_ = 0.0;
    long ls_iters_ = 0;
    long last_solve_iters_ = 0;
};

} // namespace odekit
