#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "odekit/errors.hpp"

namespace odekit {

using index_t = std::int64_t;

/// Optional vector operations. Every implementation answers provides(op);
/// when an operation is not natively provided the base-class fallback runs
/// the documented sequence of required operations instead, so callers never
/// observe absence except through performance.
enum class VecOp {
    linear_combination,
    scale_add_multi,
    dot_prod_multi,
    linear_sum_vector_array,
    local_squared_sum,
};

/// Abstract vector. Implementations supply the required kernels; the fused
/// and local-reduction operations are optional overrides. Destination
/// vectors may alias their inputs in all element-wise kernels.
///
/// Concurrency: concurrent reads of one vector are safe; a vector being
/// written must not be accessed concurrently. No internal locking.
class Vector {
public:
    virtual ~Vector() = default;

    /// New vector of the same kind, length, and capability set.
    /// Contents are unspecified.
    virtual std::unique_ptr<Vector> clone() const = 0;

    /// Global length (for composites, the combined length of all subvectors).
    virtual index_t length() const = 0;

    virtual bool provides(VecOp) const { return false; }

    // --- required element-wise kernels (*this is the destination) ---
    virtual void const_fill(double c) = 0;
    virtual void linear_sum(double a, const Vector& x, double b, const Vector& y) = 0;
    virtual void scale(double c, const Vector& x) = 0;
    virtual void prod(const Vector& x, const Vector& y) = 0;
    virtual void div(const Vector& x, const Vector& y) = 0;
    virtual void abs(const Vector& x) = 0;
    virtual void inv(const Vector& x) = 0;
    virtual void add_const(const Vector& x, double c) = 0;

    // --- required reductions ---
    virtual double dot(const Vector& y) const = 0;
    virtual double max_norm() const = 0;
    virtual double min() const = 0;

    /// sqrt((1/N) sum (w_i x_i)^2) over the global length N.
    virtual double wrms_norm(const Vector& w) const = 0;

    // --- optional local reduction kernel ---

    /// sum (w_i x_i)^2 over this vector's elements only. The default
    /// reconstructs the sum from wrms_norm and the length, which is exactly
    /// the fallback branch composites use when the kernel is absent.
    virtual double local_squared_sum(const Vector& w) const {
        const double nrm = wrms_norm(w);
        return nrm * nrm * static_cast<double>(length());
    }

    // --- optional fused operations with required-op fallbacks ---

    /// *this = sum_i c[i] * X[i]. Fallback: scale by c[0], then a linear_sum
    /// per remaining term. X[i] must not alias *this for i >= 1.
    virtual void linear_combination(std::span<const double> c,
                                    std::span<const Vector* const> X) {
        if (c.empty() || c.size() != X.size())
            throw shape_error("linear_combination: need n >= 1 terms");
        scale(c[0], *X[0]);
        for (std::size_t i = 1; i < X.size(); ++i)
            linear_sum(1.0, *this, c[i], *X[i]);
    }

    /// Z[i] = a[i] * (*this) + Y[i]. Fallback: one linear_sum per pair.
    virtual void scale_add_multi(std::span<const double> a,
                                 std::span<const Vector* const> Y,
                                 std::span<Vector* const> Z) const {
        if (a.empty() || a.size() != Y.size() || a.size() != Z.size())
            throw shape_error("scale_add_multi: need n >= 1 matching arrays");
        for (std::size_t i = 0; i < a.size(); ++i)
            Z[i]->linear_sum(a[i], *this, 1.0, *Y[i]);
    }

    /// d[i] = (*this) . Y[i]. Fallback: one dot per vector.
    virtual void dot_prod_multi(std::span<const Vector* const> Y,
                                std::span<double> d) const {
        if (Y.empty() || Y.size() != d.size())
            throw shape_error("dot_prod_multi: need n >= 1 matching arrays");
        for (std::size_t i = 0; i < Y.size(); ++i)
            d[i] = dot(*Y[i]);
    }

protected:
    /// Fallback body for the vector-array linear sum; see the free function.
    void linear_sum_vector_array_fallback(double a,
                                          std::span<const Vector* const> X,
                                          double b,
                                          std::span<const Vector* const> Y,
                                          std::span<Vector* const> Z) {
        for (std::size_t i = 0; i < X.size(); ++i)
            Z[i]->linear_sum(a, *X[i], b, *Y[i]);
    }

public:
    /// Implementation hook for linear_sum_vector_array; dispatches on X[0].
    virtual void linear_sum_vector_array_impl(double a,
                                              std::span<const Vector* const> X,
                                              double b,
                                              std::span<const Vector* const> Y,
                                              std::span<Vector* const> Z) {
        linear_sum_vector_array_fallback(a, X, b, Y, Z);
    }
};

/// Z[i] = a*X[i] + b*Y[i] for i < n. Fused when X[0]'s implementation
/// provides it, otherwise a loop of linear_sum calls.
inline void linear_sum_vector_array(double a, std::span<const Vector* const> X,
                                    double b, std::span<const Vector* const> Y,
                                    std::span<Vector* const> Z) {
    if (X.empty() || X.size() != Y.size() || X.size() != Z.size())
        throw shape_error("linear_sum_vector_array: need n >= 1 matching arrays");
    Z[0]->linear_sum_vector_array_impl(a, X, b, Y, Z);
}

/// Contiguous in-memory vector. All optional operations have native
/// single-pass implementations that can be enabled or disabled at runtime;
/// the native passes accumulate in the same order as the fallback sequences,
/// so toggling an operation does not change results.
class SerialVector final : public Vector {
public:
    explicit SerialVector(index_t n) : data_(check_len(n)) {}
    explicit SerialVector(std::vector<double> values) : data_(std::move(values)) {
        check_len(static_cast<index_t>(data_.size()));
    }
    SerialVector(std::initializer_list<double> values) : data_(values) {
        check_len(static_cast<index_t>(data_.size()));
    }

    double& operator[](index_t i) { return data_[static_cast<std::size_t>(i)]; }
    double operator[](index_t i) const { return data_[static_cast<std::size_t>(i)]; }
    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    /// Runtime capability toggles (paper-style: optional ops may be enabled
    /// or disabled per instance; clones inherit the setting).
    void set_op_enabled(VecOp op, bool on) { enabled_[idx(op)] = on; }
    void set_fused_enabled(bool on) {
        for (VecOp op : {VecOp::linear_combination, VecOp::scale_add_multi,
                         VecOp::dot_prod_multi, VecOp::linear_sum_vector_array})
            enabled_[idx(op)] = on;
    }

    std::unique_ptr<Vector> clone() const override {
        auto v = std::make_unique<SerialVector>(length());
        v->enabled_ = enabled_;
        return v;
    }

    index_t length() const override { return static_cast<index_t>(data_.size()); }
    bool provides(VecOp op) const override { return enabled_[idx(op)]; }

    void const_fill(double c) override {
        for (double& v : data_) v = c;
    }
    void linear_sum(double a, const Vector& x, double b, const Vector& y) override {
        const auto& xs = peer(x);
        const auto& ys = peer(y);
        for (std::size_t i = 0; i < data_.size(); ++i)
            data_[i] = a * xs.data_[i] + b * ys.data_[i];
    }
    void scale(double c, const Vector& x) override {
        const auto& xs = peer(x);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] = c * xs.data_[i];
    }
    void prod(const Vector& x, const Vector& y) override {
        const auto& xs = peer(x);
        const auto& ys = peer(y);
        for (std::size_t i = 0; i < data_.size(); ++i)
            data_[i] = xs.data_[i] * ys.data_[i];
    }
    void div(const Vector& x, const Vector& y) override {
        const auto& xs = peer(x);
        const auto& ys = peer(y);
        for (std::size_t i = 0; i < data_.size(); ++i) {
            if (ys.data_[i] == 0.0)
                throw numeric_error("div: zero denominator entry");
            data_[i] = xs.data_[i] / ys.data_[i];
        }
    }
    void abs(const Vector& x) override {
        const auto& xs = peer(x);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] = std::abs(xs.data_[i]);
    }
    void inv(const Vector& x) override {
        const auto& xs = peer(x);
        for (std::size_t i = 0; i < data_.size(); ++i) {
            if (xs.data_[i] == 0.0)
                throw numeric_error("inv: zero entry");
            data_[i] = 1.0 / xs.data_[i];
        }
    }
    void add_const(const Vector& x, double c) override {
        const auto& xs = peer(x);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] = xs.data_[i] + c;
    }

    double dot(const Vector& y) const override {
        const auto& ys = peer(y);
        double s = 0.0;
        for (std::size_t i = 0; i < data_.size(); ++i) s += data_[i] * ys.data_[i];
        return s;
    }
    double max_norm() const override {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }
    double min() const override {
        double m = data_[0];
        for (double v : data_) m = std::min(m, v);
        return m;
    }
    double wrms_norm(const Vector& w) const override {
        return std::sqrt(squared_sum(peer(w)) / static_cast<double>(data_.size()));
    }

    double local_squared_sum(const Vector& w) const override {
        if (!provides(VecOp::local_squared_sum))
            return Vector::local_squared_sum(w);
        return squared_sum(peer(w));
    }

    void linear_combination(std::span<const double> c,
                            std::span<const Vector* const> X) override {
        if (!provides(VecOp::linear_combination))
            return Vector::linear_combination(c, X);
        if (c.empty() || c.size() != X.size())
            throw shape_error("linear_combination: need n >= 1 terms");
        std::vector<const SerialVector*> xs(X.size());
        for (std::size_t i = 0; i < X.size(); ++i) xs[i] = &peer(*X[i]);
        for (std::size_t e = 0; e < data_.size(); ++e) {
            double acc = c[0] * xs[0]->data_[e];
            for (std::size_t i = 1; i < xs.size(); ++i) acc += c[i] * xs[i]->data_[e];
            data_[e] = acc;
        }
    }

    void scale_add_multi(std::span<const double> a,
                         std::span<const Vector* const> Y,
                         std::span<Vector* const> Z) const override {
        if (!provides(VecOp::scale_add_multi))
            return Vector::scale_add_multi(a, Y, Z);
        if (a.empty() || a.size() != Y.size() || a.size() != Z.size())
            throw shape_error("scale_add_multi: need n >= 1 matching arrays");
        for (std::size_t i = 0; i < a.size(); ++i) {
            const auto& yi = peer(*Y[i]);
            auto& zi = mutable_peer(*Z[i]);
            for (std::size_t e = 0; e < data_.size(); ++e)
                zi.data_[e] = a[i] * data_[e] + yi.data_[e];
        }
    }

    void dot_prod_multi(std::span<const Vector* const> Y,
                        std::span<double> d) const override {
        if (!provides(VecOp::dot_prod_multi))
            return Vector::dot_prod_multi(Y, d);
        if (Y.empty() || Y.size() != d.size())
            throw shape_error("dot_prod_multi: need n >= 1 matching arrays");
        std::vector<const SerialVector*> ys(Y.size());
        for (std::size_t i = 0; i < Y.size(); ++i) ys[i] = &peer(*Y[i]);
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = 0.0;
        // single pass over the data, combining all n reductions
        for (std::size_t i = 0; i < ys.size(); ++i)
            for (std::size_t e = 0; e < data_.size(); ++e)
                d[i] += data_[e] * ys[i]->data_[e];
    }

    void linear_sum_vector_array_impl(double a, std::span<const Vector* const> X,
                                      double b, std::span<const Vector* const> Y,
                                      std::span<Vector* const> Z) override {
        if (!provides(VecOp::linear_sum_vector_array))
            return linear_sum_vector_array_fallback(a, X, b, Y, Z);
        for (std::size_t i = 0; i < X.size(); ++i)
            Z[i]->linear_sum(a, *X[i], b, *Y[i]);
    }

private:
    static index_t check_len(index_t n) {
        if (n < 1) throw shape_error("SerialVector: length must be >= 1");
        return n;
    }

    const SerialVector& peer(const Vector& v) const {
        const auto* s = dynamic_cast<const SerialVector*>(&v);
        if (!s) throw shape_error("SerialVector op: operand is not a SerialVector");
        if (s->data_.size() != data_.size())
            throw shape_error("SerialVector op: length mismatch");
        return *s;
    }
    SerialVector& mutable_peer(Vector& v) const {
        return const_cast<SerialVector&>(peer(v));
    }

    double squared_sum(const SerialVector& w) const {
        double s = 0.0;
        for (std::size_t i = 0; i < data_.size(); ++i) {
            const double wx = w.data_[i] * data_[i];
            s += wx * wx;
        }
        return s;
    }

    std::vector<double> data_;
    std::array<bool, 5> enabled_{true, true, true, true, true};

    static constexpr std::size_t idx(VecOp op) { return static_cast<std::size_t>(op); }
};

} // namespace odekit
