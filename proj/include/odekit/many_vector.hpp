#pragma once

#include <atomic>
#include <cmath>
#include <memory>
#include <vector>

#include "odekit/vector.hpp"

namespace odekit {

/// Composite vector over an ordered list of subvectors. Never touches raw
/// data: every operation is delegated to the subvectors, and norm-like
/// reductions are assembled from per-subvector local results with a single
/// cross-subvector combine (counted, see reduction_count).
class ManyVector final : public Vector {
public:
    explicit ManyVector(std::vector<std::unique_ptr<Vector>> subvectors)
        : subs_(std::move(subvectors)) {
        if (subs_.empty())
            throw shape_error("ManyVector: need at least one subvector");
        total_ = 0;
        for (const auto& s : subs_) {
            if (!s) throw shape_error("ManyVector: null subvector");
            total_ += s->length();
        }
    }

    index_t num_subvectors() const { return static_cast<index_t>(subs_.size()); }

    Vector& subvector(index_t j) {
        if (j < 0 || j >= num_subvectors())
            throw shape_error("ManyVector: subvector index out of range");
        return *subs_[static_cast<std::size_t>(j)];
    }
    const Vector& subvector(index_t j) const {
        return const_cast<ManyVector*>(this)->subvector(j);
    }

    /// Count of cross-subvector reduction combines performed by any
    /// ManyVector since the last reset. Stand-in for the global reductions a
    /// distributed composite would issue.
    static long reduction_count() { return reductions_.load(); }
    static void reset_reduction_count() { reductions_.store(0); }

    std::unique_ptr<Vector> clone() const override {
        std::vector<std::unique_ptr<Vector>> subs;
        subs.reserve(subs_.size());
        for (const auto& s : subs_) subs.push_back(s->clone());
        return std::make_unique<ManyVector>(std::move(subs));
    }

    index_t length() const override { return total_; }

    bool provides(VecOp) const override { return true; }

    void const_fill(double c) override {
        for (auto& s : subs_) s->const_fill(c);
    }
    void linear_sum(double a, const Vector& x, double b, const Vector& y) override {
        const auto& xm = peer(x);
        const auto& ym = peer(y);
        for (std::size_t j = 0; j < subs_.size(); ++j)
            subs_[j]->linear_sum(a, *xm.subs_[j], b, *ym.subs_[j]);
    }
    void scale(double c, const Vector& x) override {
        const auto& xm = peer(x);
        for (std::size_t j = 0; j < subs_.size(); ++j)
            subs_[j]->scale(c, *xm.subs_[j]);
    }
    void prod(const Vector& x, const Vector& y) override {
        const auto& xm = peer(x);
        const auto& ym = peer(y);
        for (std::size_t j = 0; j < subs_.size(); ++j)
            subs_[j]->prod(*xm.subs_[j], *ym.subs_[j]);
    }
    void div(const Vector& x, const Vector& y) override {
        const auto& xm = peer(x);
        const auto& ym = peer(y);
        for (std::size_t j = 0; j < subs_.size(); ++j)
            subs_[j]->div(*xm.subs_[j], *ym.subs_[j]);
    }
    void abs(const Vector& x) override {
        const auto& xm = peer(x);
        for (std::size_t j = 0; j < subs_.size(); ++j) subs_[j]->abs(*xm.subs_[j]);
    }
    void inv(const Vector& x) override {
        const auto& xm = peer(x);
        for (std::size_t j = 0; j < subs_.size(); ++j) subs_[j]->inv(*xm.subs_[j]);
    }
    void add_const(const Vector& x, double c) override {
        const auto& xm = peer(x);
        for (std::size_t j = 0; j < subs_.size(); ++j)
            subs_[j]->add_const(*xm.subs_[j], c);
    }

    double dot(const Vector& y) const override {
        const auto& ym = peer(y);
        double s = 0.0;
        for (std::size_t j = 0; j < subs_.size(); ++j)
            s += subs_[j]->dot(*ym.subs_[j]);
        ++reductions_;
        return s;
    }
    double max_norm() const override {
        double m = 0.0;
        for (const auto& s : subs_) m = std::max(m, s->max_norm());
        ++reductions_;
        return m;
    }
    double min() const override {
        double m = subs_[0]->min();
        for (const auto& s : subs_) m = std::min(m, s->min());
        ++reductions_;
        return m;
    }

    /// Two-level WRMS norm: per-subvector local squared sums where the
    /// subvector provides the local kernel, otherwise reconstructed from its
    /// WRMS norm and length; one combine at the end.
    double wrms_norm(const Vector& w) const override {
        const double s = local_squared_sum_nocount(w);
        ++reductions_;
        return std::sqrt(s / static_cast<double>(total_));
    }

    double local_squared_sum(const Vector& w) const override {
        const double s = local_squared_sum_nocount(w);
        ++reductions_;
        return s;
    }

    void linear_combination(std::span<const double> c,
                            std::span<const Vector* const> X) override {
        if (c.empty() || c.size() != X.size())
            throw shape_error("linear_combination: need n >= 1 terms");
        std::vector<const ManyVector*> xs(X.size());
        for (std::size_t i = 0; i < X.size(); ++i) xs[i] = &peer(*X[i]);
        std::vector<const Vector*> slice(X.size());
        for (std::size_t j = 0; j < subs_.size(); ++j) {
            for (std::size_t i = 0; i < X.size(); ++i)
                slice[i] = xs[i]->subs_[j].get();
            subs_[j]->linear_combination(c, slice);
        }
    }

    void scale_add_multi(std::span<const double> a,
                         std::span<const Vector* const> Y,
                         std::span<Vector* const> Z) const override {
        if (a.empty() || a.size() != Y.size() || a.size() != Z.size())
            throw shape_error("scale_add_multi: need n >= 1 matching arrays");
        std::vector<const ManyVector*> ys(Y.size());
        std::vector<ManyVector*> zs(Z.size());
        for (std::size_t i = 0; i < Y.size(); ++i) {
            ys[i] = &peer(*Y[i]);
            zs[i] = &const_cast<ManyVector&>(peer(*Z[i]));
        }
        std::vector<const Vector*> yslice(Y.size());
        std::vector<Vector*> zslice(Z.size());
        for (std::size_t j = 0; j < subs_.size(); ++j) {
            for (std::size_t i = 0; i < Y.size(); ++i) {
                yslice[i] = ys[i]->subs_[j].get();
                zslice[i] = zs[i]->subs_[j].get();
            }
            subs_[j]->scale_add_multi(a, yslice, zslice);
        }
    }

    void dot_prod_multi(std::span<const Vector* const> Y,
                        std::span<double> d) const override {
        if (Y.empty() || Y.size() != d.size())
            throw shape_error("dot_prod_multi: need n >= 1 matching arrays");
        std::vector<const ManyVector*> ys(Y.size());
        for (std::size_t i = 0; i < Y.size(); ++i) ys[i] = &peer(*Y[i]);
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = 0.0;
        std::vector<const Vector*> slice(Y.size());
        std::vector<double> part(Y.size());
        for (std::size_t j = 0; j < subs_.size(); ++j) {
            for (std::size_t i = 0; i < Y.size(); ++i)
                slice[i] = ys[i]->subs_[j].get();
            subs_[j]->dot_prod_multi(slice, part);
            for (std::size_t i = 0; i < d.size(); ++i) d[i] += part[i];
        }
        ++reductions_; // all n reductions share one combine
    }

    void linear_sum_vector_array_impl(double a, std::span<const Vector* const> X,
                                      double b, std::span<const Vector* const> Y,
                                      std::span<Vector* const> Z) override {
        for (std::size_t i = 0; i < X.size(); ++i)
            Z[i]->linear_sum(a, *X[i], b, *Y[i]);
    }

private:
    const ManyVector& peer(const Vector& v) const {
        const auto* m = dynamic_cast<const ManyVector*>(&v);
        if (!m) throw shape_error("ManyVector op: operand is not a ManyVector");
        if (m->subs_.size() != subs_.size())
            throw shape_error("ManyVector op: partition mismatch");
        for (std::size_t j = 0; j < subs_.size(); ++j)
            if (m->subs_[j]->length() != subs_[j]->length())
                throw shape_error("ManyVector op: subvector length mismatch");
        return *m;
    }

    double local_squared_sum_nocount(const Vector& w) const {
        const auto& wm = peer(w);
        double local_sum = 0.0;
        for (std::size_t j = 0; j < subs_.size(); ++j) {
            const Vector& xj = *subs_[j];
            const Vector& wj = *wm.subs_[j];
            if (xj.provides(VecOp::local_squared_sum)) {
                local_sum += xj.local_squared_sum(wj);
            } else {
                const double contrib = xj.wrms_norm(wj);
                local_sum += contrib * contrib * static_cast<double>(xj.length());
            }
        }
        return local_sum;
    }

    std::vector<std::unique_ptr<Vector>> subs_;
    index_t total_ = 0;

    static inline std::atomic<long> reductions_{0};
};

} // namespace odekit
