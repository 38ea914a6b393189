#pragma once

#include <cmath>

#include "odekit/gmres.hpp" // OperatorForm
#include "odekit/linear_solver.hpp"

namespace odekit {

/// Preconditioned conjugate gradients. Requires a symmetric positive
/// definite operator (and a symmetric preconditioner); this precondition is
/// not checked. Scaling is supported in the restricted form s1 == s2 that
/// preserves symmetry; only s1 is read. No restarts; the iteration budget is
/// max_iters.
class CgSolver final : public LinearSolver {
public:
    explicit CgSolver(OperatorForm form = OperatorForm::matrix_free,
                      int max_iters = 100)
        : form_(form), max_iters_(max_iters) {
        if (max_iters < 1) throw config_error("CgSolver: max_iters must be >= 1");
    }

    LinearSolverType type() const override {
        return form_ == OperatorForm::matrix_based
                   ? LinearSolverType::MatrixIterative
                   : LinearSolverType::MatrixFreeIterative;
    }

    LinStatus setup(const Matrix* A) override {
        if (form_ == OperatorForm::matrix_based) {
            if (!A) throw config_error("CgSolver::setup: matrix-based solver needs A");
            bound_ = A;
        }
        if (prec_.psetup && !prec_.psetup()) return LinStatus::callback_recoverable;
        return LinStatus::ok;
    }

    bool set_atimes(ATimesFn fn) override {
        atimes_ = std::move(fn);
        return true;
    }
    bool set_preconditioner(PreconditionerHooks hooks) override {
        prec_ = std::move(hooks);
        return true;
    }
    bool set_scaling_vectors(const Vector& s1, const Vector& /*s2*/) override {
        auto c = s1.clone();
        c->scale(1.0, s1);
        s1_ = std::move(c);
        return true;
    }
    bool supports_scaling() const override { return true; }

    LinSolveReport solve(const Matrix* A, Vector& x, const Vector& b,
                         double tol) override {
        const Matrix* mat = A ? A : bound_;
        if (form_ == OperatorForm::matrix_based && !mat)
            throw config_error("CgSolver::solve: no matrix attached");
        if (form_ == OperatorForm::matrix_free && !atimes_)
            throw config_error("CgSolver::solve: ATimes not set");

        LinSolveReport rep;
        auto r = b.clone();
        auto z = b.clone();
        auto p = b.clone();
        auto ap = b.clone();

        if (x.max_norm() == 0.0) {
            r->scale(1.0, b);
        } else {
            if (!apply_op(mat, x, *ap)) return fail(rep, LinStatus::callback_fatal);
            r->linear_sum(1.0, b, -1.0, *ap);
        }
        if (!precondition(*r, *z)) return fail(rep, LinStatus::callback_fatal);
        rep.res_norm = scaled_norm(*z);
        if (rep.res_norm < tol) {
            rep.converged = true;
            last_ = rep;
            return rep;
        }
        p->scale(1.0, *z);
        double rz = r->dot(*z);

        for (int k = 0; k < max_iters_; ++k) {
            if (!apply_op(mat, *p, *ap)) return fail(rep, LinStatus::callback_fatal);
            const double pap = p->dot(*ap);
            if (pap <= 0.0) return fail(rep, LinStatus::breakdown);
            const double alpha = rz / pap;
            x.linear_sum(1.0, x, alpha, *p);
            r->linear_sum(1.0, *r, -alpha, *ap);
            if (!precondition(*r, *z)) return fail(rep, LinStatus::callback_fatal);
            ++rep.iterations;
            rep.res_norm = scaled_norm(*z);
            if (rep.res_norm < tol) {
                rep.converged = true;
                last_ = rep;
                return rep;
            }
            const double rz_new = r->dot(*z);
            p->linear_sum(1.0, *z, rz_new / rz, *p);
            rz = rz_new;
        }
        rep.status = LinStatus::max_iterations;
        last_ = rep;
        return rep;
    }

    int num_iters() const override { return last_.iterations; }
    double res_norm() const override { return last_.res_norm; }

private:
    bool apply_op(const Matrix* mat, const Vector& in, Vector& out) {
        if (atimes_) return atimes_(in, out);
        mat->matvec(in, out);
        return true;
    }

    bool precondition(const Vector& r, Vector& z) {
        if (prec_.psolve) return prec_.psolve(PrecSide::left, r, z);
        z.scale(1.0, r);
        return true;
    }

    double scaled_norm(const Vector& z) {
        if (!s1_) return std::sqrt(z.dot(z));
        if (!ws_) ws_ = z.clone();
        ws_->prod(z, *s1_);
        return std::sqrt(ws_->dot(*ws_));
    }

    LinSolveReport fail(LinSolveReport& rep, LinStatus s) {
        rep.converged = false;
        rep.status = s;
        last_ = rep;
        return rep;
    }

    OperatorForm form_;
    int max_iters_;
    const Matrix* bound_ = nullptr;
    ATimesFn atimes_;
    PreconditionerHooks prec_;
    std::unique_ptr<Vector> s1_, ws_;
    LinSolveReport last_{};
};

} // namespace odekit
