#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "odekit/linear_solver.hpp"

namespace odekit {

/// Whether an iterative solver reaches the operator through an attached
/// matrix or only through a user-supplied product routine.
enum class OperatorForm { matrix_free, matrix_based };

/// Restarted GMRES with modified Gram-Schmidt orthogonalization.
///
/// Solves the transformed system Atil*xtil = btil with
///   Atil = S1 P1^-1 A S2^-1,  btil = S1 P1^-1 b,  xtil = S2 x,
/// stopping when the 2-norm of the scaled preconditioned residual is below
/// tol. Left preconditioning and both scaling vectors are applied; right
/// preconditioner hooks are accepted but applied as identity.
class GmresSolver final : public LinearSolver {
public:
    explicit GmresSolver(OperatorForm form = OperatorForm::matrix_free,
                         int krylov_dim = 5, int max_restarts = -1)
        : form_(form), maxl_(krylov_dim) {
        if (krylov_dim < 1) throw config_error("GmresSolver: krylov_dim must be >= 1");
        // default restart budget keeps total iterations <= 100
        max_restarts_ = max_restarts >= 0
                            ? max_restarts
                            : std::max(0, 100 / maxl_ - 1);
    }

    LinearSolverType type() const override {
        return form_ == OperatorForm::matrix_based
                   ? LinearSolverType::MatrixIterative
                   : LinearSolverType::MatrixFreeIterative;
    }

    LinStatus setup(const Matrix* A) override {
        if (form_ == OperatorForm::matrix_based) {
            if (!A) throw config_error("GmresSolver::setup: matrix-based solver needs A");
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
    bool set_scaling_vectors(const Vector& s1, const Vector& s2) override {
        s1_ = copy_of(s1);
        s2_ = copy_of(s2);
        return true;
    }
    bool supports_scaling() const override { return true; }

    LinSolveReport solve(const Matrix* A, Vector& x, const Vector& b,
                         double tol) override {
        const Matrix* mat = A ? A : bound_;
        if (form_ == OperatorForm::matrix_based && !mat)
            throw config_error("GmresSolver::solve: no matrix attached");
        if (form_ == OperatorForm::matrix_free && !atimes_)
            throw config_error("GmresSolver::solve: ATimes not set");

        LinSolveReport rep;
        auto r = b.clone();
        auto t = b.clone();
        std::vector<std::unique_ptr<Vector>> v(static_cast<std::size_t>(maxl_) + 1);
        for (auto& vi : v) vi = b.clone();
        std::vector<double> h(static_cast<std::size_t>(maxl_ + 1) * maxl_, 0.0);
        std::vector<double> cs(maxl_), sn(maxl_), g(maxl_ + 1);
        auto H = [&](int i, int j) -> double& {
            return h[static_cast<std::size_t>(i) * maxl_ + j];
        };

        for (int cycle = 0; cycle <= max_restarts_; ++cycle) {
            // (re)compute the transformed residual S1 P1^-1 (b - A x)
            if (cycle == 0 && x.max_norm() == 0.0) {
                r->scale(1.0, b);
            } else {
                if (!apply_op(mat, x, *t)) return fail(rep, LinStatus::callback_fatal);
                r->linear_sum(1.0, b, -1.0, *t);
            }
            if (!transform(*r, *t)) return fail(rep, LinStatus::callback_fatal);

            double beta = l2_norm(*t);
            rep.res_norm = beta;
            if (beta < tol) {
                rep.converged = true;
                rep.status = LinStatus::ok;
                last_ = rep;
                return rep;
            }
            v[0]->scale(1.0 / beta, *t);
            std::fill(g.begin(), g.end(), 0.0);
            g[0] = beta;

            int j = 0;
            bool breakdown = false;
            for (; j < maxl_; ++j) {
                // w = S1 P1^-1 A S2^-1 v_j
                untransform_arg(*v[static_cast<std::size_t>(j)], *r);
                if (!apply_op(mat, *r, *t)) return fail(rep, LinStatus::callback_fatal);
                if (!transform(*t, *r)) return fail(rep, LinStatus::callback_fatal);
                ++rep.iterations;

                for (int i = 0; i <= j; ++i) {
                    H(i, j) = r->dot(*v[static_cast<std::size_t>(i)]);
                    r->linear_sum(1.0, *r, -H(i, j), *v[static_cast<std::size_t>(i)]);
                }
                const double hsub = l2_norm(*r);
                H(j + 1, j) = hsub;

                // Givens rotations keep the least-squares residual current.
                for (int i = 0; i < j; ++i) {
                    const double tmp = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
                    H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
                    H(i, j) = tmp;
                }
                const double denom = std::hypot(H(j, j), H(j + 1, j));
                if (denom == 0.0) break; // fully stagnated column; drop it
                cs[j] = H(j, j) / denom;
                sn[j] = H(j + 1, j) / denom;
                H(j, j) = denom;
                H(j + 1, j) = 0.0;
                g[j + 1] = -sn[j] * g[j];
                g[j] = cs[j] * g[j];
                rep.res_norm = std::abs(g[j + 1]);

                if (hsub == 0.0) {
                    breakdown = true; // Krylov space exhausted; solution below is exact
                    ++j;
                    break;
                }
                if (rep.res_norm < tol) {
                    ++j;
                    break;
                }
                if (j + 1 < maxl_)
                    v[static_cast<std::size_t>(j) + 1]->scale(1.0 / hsub, *r);
            }

            // back-substitute y and accumulate x += S2^-1 V y
            std::vector<double> y(static_cast<std::size_t>(j));
            for (int i = j - 1; i >= 0; --i) {
                double s = g[i];
                for (int k = i + 1; k < j; ++k) s -= H(i, k) * y[static_cast<std::size_t>(k)];
                y[static_cast<std::size_t>(i)] = s / H(i, i);
            }
            std::vector<const Vector*> basis(static_cast<std::size_t>(j));
            for (int i = 0; i < j; ++i) basis[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)].get();
            r->linear_combination(std::span<const double>(y), basis);
            untransform_arg(*r, *t);
            x.linear_sum(1.0, x, 1.0, *t);

            if (rep.res_norm < tol || breakdown) {
                rep.converged = rep.res_norm < tol;
                rep.status = rep.converged ? LinStatus::ok : LinStatus::max_iterations;
                last_ = rep;
                return rep;
            }
        }
        rep.converged = false;
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

    /// out = S1 P1^-1 in
    bool transform(const Vector& in, Vector& out) {
        if (prec_.psolve) {
            if (!prec_.psolve(PrecSide::left, in, out)) return false;
        } else {
            out.scale(1.0, in);
        }
        if (s1_) out.prod(out, *s1_);
        return true;
    }

    /// out = S2^-1 in
    void untransform_arg(const Vector& in, Vector& out) {
        if (s2_) out.div(in, *s2_);
        else out.scale(1.0, in);
    }

    static double l2_norm(const Vector& v) { return std::sqrt(v.dot(v)); }

    static std::unique_ptr<Vector> copy_of(const Vector& v) {
        auto c = v.clone();
        c->scale(1.0, v);
        return c;
    }

    LinSolveReport fail(LinSolveReport& rep, LinStatus s) {
        rep.converged = false;
        rep.status = s;
        last_ = rep;
        return rep;
    }

    OperatorForm form_;
    int maxl_;
    int max_restarts_;
    const Matrix* bound_ = nullptr;
    ATimesFn atimes_;
    PreconditionerHooks prec_;
    std::unique_ptr<Vector> s1_, s2_;
    LinSolveReport last_{};
};

} // namespace odekit
