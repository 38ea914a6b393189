#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "odekit/linear_solver.hpp"

namespace odekit {

/// Direct dense solver: LU factorization with partial (row) pivoting cached
/// by setup(), back-substitution in solve(). Singularity is declared when a
/// pivot magnitude falls below eps * ||A||_inf.
class DenseLuSolver final : public LinearSolver {
public:
    LinearSolverType type() const override { return LinearSolverType::MatrixDirect; }

    LinStatus setup(const Matrix* A) override {
        const auto* d = dynamic_cast<const DenseMatrix*>(A);
        if (!d || d->rows() != d->cols())
            throw shape_error("DenseLuSolver::setup: need a square DenseMatrix");
        n_ = d->rows();
        lu_.assign(d->data().begin(), d->data().end());
        piv_.resize(static_cast<std::size_t>(n_));
        factored_ = false;

        double norm_inf = 0.0;
        for (index_t i = 0; i < n_; ++i) {
            double row = 0.0;
            for (index_t j = 0; j < n_; ++j) row += std::abs(at(i, j));
            norm_inf = std::max(norm_inf, row);
        }
        const double pivot_floor =
            std::numeric_limits<double>::epsilon() * norm_inf;

        for (index_t k = 0; k < n_; ++k) {
            index_t p = k;
            for (index_t i = k + 1; i < n_; ++i)
                if (std::abs(at(i, k)) > std::abs(at(p, k))) p = i;
            if (std::abs(at(p, k)) <= pivot_floor) return LinStatus::singular_matrix;
            piv_[static_cast<std::size_t>(k)] = p;
            if (p != k)
                for (index_t j = 0; j < n_; ++j) std::swap(at(k, j), at(p, j));
            const double inv_pivot = 1.0 / at(k, k);
            for (index_t i = k + 1; i < n_; ++i) {
                const double m = at(i, k) * inv_pivot;
                at(i, k) = m;
                for (index_t j = k + 1; j < n_; ++j) at(i, j) -= m * at(k, j);
            }
        }
        factored_ = true;
        return LinStatus::ok;
    }

    LinSolveReport solve(const Matrix* /*A*/, Vector& x, const Vector& b,
                         double /*tol*/) override {
        if (!factored_)
            throw config_error("DenseLuSolver::solve: setup has not succeeded");
        const auto* bs = dynamic_cast<const SerialVector*>(&b);
        auto* xs = dynamic_cast<SerialVector*>(&x);
        if (!bs || !xs || bs->length() != n_ || xs->length() != n_)
            throw shape_error("DenseLuSolver::solve: incompatible vectors");

        for (index_t i = 0; i < n_; ++i) (*xs)[i] = (*bs)[i];
        for (index_t k = 0; k < n_; ++k) {
            const index_t p = piv_[static_cast<std::size_t>(k)];
            if (p != k) std::swap((*xs)[k], (*xs)[p]);
            for (index_t i = k + 1; i < n_; ++i) (*xs)[i] -= at(i, k) * (*xs)[k];
        }
        for (index_t i = n_ - 1; i >= 0; --i) {
            double s = (*xs)[i];
            for (index_t j = i + 1; j < n_; ++j) s -= at(i, j) * (*xs)[j];
            (*xs)[i] = s / at(i, i);
        }
        last_ = LinSolveReport{true, 0, 0.0, LinStatus::ok};
        return last_;
    }

    int num_iters() const override { return last_.iterations; }
    double res_norm() const override { return last_.res_norm; }

private:
    double& at(index_t i, index_t j) { return lu_[static_cast<std::size_t>(i * n_ + j)]; }

    index_t n_ = 0;
    bool factored_ = false;
    std::vector<double> lu_;
    std::vector<index_t> piv_;
    LinSolveReport last_{};
};

} // namespace odekit
