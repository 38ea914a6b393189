#pragma once

#include <memory>
#include <vector>

#include "odekit/vector.hpp"

namespace odekit {

/// Implementation tag; linear solvers check it for compatibility before
/// setup/solve.
enum class MatrixKind { Dense, Custom };

class Matrix {
public:
    virtual ~Matrix() = default;

    virtual MatrixKind kind() const = 0;
    virtual index_t rows() const = 0;
    virtual index_t cols() const = 0;

    /// New matrix with the same kind and shape; entries unspecified.
    virtual std::unique_ptr<Matrix> clone() const = 0;

    /// B = *this. Destination must have the same kind and shape.
    virtual void copy_to(Matrix& B) const = 0;

    /// A <- c*A + I (square matrices).
    virtual void scale_add_identity(double c) = 0;

    virtual void set_zero() = 0;

    /// z = A*x.
    virtual void matvec(const Vector& x, Vector& z) const = 0;
};

/// Row-major dense matrix. In-scope consumers use square systems only, but
/// the storage is general m x n.
class DenseMatrix final : public Matrix {
public:
    DenseMatrix(index_t rows, index_t cols)
        : m_(rows), n_(cols), a_(static_cast<std::size_t>(rows * cols), 0.0) {
        if (rows < 1 || cols < 1)
            throw shape_error("DenseMatrix: dimensions must be >= 1");
    }

    double& operator()(index_t i, index_t j) {
        return a_[static_cast<std::size_t>(i * n_ + j)];
    }
    double operator()(index_t i, index_t j) const {
        return a_[static_cast<std::size_t>(i * n_ + j)];
    }
    std::span<double> data() { return a_; }
    std::span<const double> data() const { return a_; }

    MatrixKind kind() const override { return MatrixKind::Dense; }
    index_t rows() const override { return m_; }
    index_t cols() const override { return n_; }

    std::unique_ptr<Matrix> clone() const override {
        return std::make_unique<DenseMatrix>(m_, n_);
    }

    void copy_to(Matrix& B) const override {
        auto* d = dynamic_cast<DenseMatrix*>(&B);
        if (!d || d->m_ != m_ || d->n_ != n_)
            throw shape_error("DenseMatrix::copy_to: incompatible destination");
        d->a_ = a_;
    }

    void scale_add_identity(double c) override {
        if (m_ != n_)
            throw shape_error("scale_add_identity: matrix must be square");
        for (double& v : a_) v *= c;
        for (index_t i = 0; i < m_; ++i) (*this)(i, i) += 1.0;
    }

    void set_zero() override {
        for (double& v : a_) v = 0.0;
    }

    void matvec(const Vector& x, Vector& z) const override {
        const auto* xs = dynamic_cast<const SerialVector*>(&x);
        auto* zs = dynamic_cast<SerialVector*>(&z);
        if (!xs || !zs || xs->length() != n_ || zs->length() != m_)
            throw shape_error("DenseMatrix::matvec: incompatible vectors");
        for (index_t i = 0; i < m_; ++i) {
            double s = 0.0;
            for (index_t j = 0; j < n_; ++j) s += (*this)(i, j) * (*xs)[j];
            (*zs)[i] = s;
        }
    }

private:
    index_t m_, n_;
    std::vector<double> a_;
};

} // namespace odekit
