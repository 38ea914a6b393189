#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "odekit/many_vector.hpp"
#include "odekit/ode_common.hpp"

namespace odekit::harness {

/// One-dimensional advection-reaction system (stiff Brusselator variant) on
/// a periodic mesh of nx points over [0, L] with L = nx * 1e-3 (fixed spatial
/// resolution). The state holds (u, v, w) interleaved per point and is
/// stored as a many-vector of per-block serial vectors, one block per
/// simulated task. Advection is first-order upwind (c > 0); reactions couple
/// only within a grid point.
struct BrussParams {
    double c = 0.01;
    double A = 1.0;
    double B = 3.5;
    double eps = 5e-6;
};

class Bruss1DProblem {
public:
    using Params = BrussParams;

    Bruss1DProblem(index_t nx, int blocks, Params params = BrussParams{})
        : nx_(nx), blocks_(blocks), p_(params) {
        if (nx < 2) throw config_error("Bruss1DProblem: need at least 2 mesh points");
        if (blocks < 1 || static_cast<index_t>(blocks) > nx)
            throw config_error("Bruss1DProblem: invalid block count");
        length_ = static_cast<double>(nx_) * 1e-3;
        dx_ = length_ / static_cast<double>(nx_);
        // near-even split of mesh points across blocks
        block_points_.resize(static_cast<std::size_t>(blocks_));
        block_start_.resize(static_cast<std::size_t>(blocks_));
        const index_t base = nx_ / blocks_, extra = nx_ % blocks_;
        index_t at = 0;
        for (int k = 0; k < blocks_; ++k) {
            block_points_[static_cast<std::size_t>(k)] =
                base + (static_cast<index_t>(k) < extra ? 1 : 0);
            block_start_[static_cast<std::size_t>(k)] = at;
            at += block_points_[static_cast<std::size_t>(k)];
        }
    }

    index_t mesh_points() const { return nx_; }
    int blocks() const { return blocks_; }
    index_t block_points(int k) const { return block_points_[static_cast<std::size_t>(k)]; }
    double domain_length() const { return length_; }
    const Params& params() const { return p_; }

    double x_of(index_t i) const { return static_cast<double>(i) * dx_; }

    /// u = A + p(x), v = B/A + p(x), w = 3 + p(x) with a Gaussian bump p.
    std::unique_ptr<ManyVector> initial_state() const {
        auto bump = [this](double x) {
            const double s = 2.0 * x / length_ - 1.0;
            return 0.1 * std::exp(-2.0 * s * s);
        };
        std::vector<std::unique_ptr<Vector>> subs;
        for (int k = 0; k < blocks_; ++k) {
            auto sub = std::make_unique<SerialVector>(3 * block_points(k));
            for (index_t i = 0; i < block_points(k); ++i) {
                const double x = x_of(block_start_[static_cast<std::size_t>(k)] + i);
                (*sub)[3 * i + 0] = p_.A + bump(x);
                (*sub)[3 * i + 1] = p_.B / p_.A + bump(x);
                (*sub)[3 * i + 2] = 3.0 + bump(x);
            }
            subs.push_back(std::move(sub));
        }
        return std::make_unique<ManyVector>(std::move(subs));
    }

    /// Explicit partition: first-order upwind advection, periodic.
    CbStatus advection_rhs(double, const Vector& y, Vector& ydot) const {
        View yin(*this, y);
        View out(*this, ydot);
        const double r = p_.c / dx_;
        for (index_t i = 0; i < nx_; ++i) {
            const index_t im1 = i == 0 ? nx_ - 1 : i - 1;
            for (int s = 0; s < 3; ++s)
                out.at(i, s) = r * (yin.at(im1, s) - yin.at(i, s));
        }
        return CbStatus::ok;
    }

    /// Implicit partition: point-local reaction terms.
    CbStatus reaction_rhs(double, const Vector& y, Vector& ydot) const {
        View yin(*this, y);
        View out(*this, ydot);
        for (index_t i = 0; i < nx_; ++i)
            point_reaction(yin.at(i, 0), yin.at(i, 1), yin.at(i, 2), out.ptr(i));
        return CbStatus::ok;
    }

    CbStatus full_rhs(double t, const Vector& y, Vector& ydot) const {
        View yin(*this, y);
        View out(*this, ydot);
        const double r = p_.c / dx_;
        for (index_t i = 0; i < nx_; ++i) {
            point_reaction(yin.at(i, 0), yin.at(i, 1), yin.at(i, 2), out.ptr(i));
            const index_t im1 = i == 0 ? nx_ - 1 : i - 1;
            for (int s = 0; s < 3; ++s)
                out.at(i, s) += r * (yin.at(im1, s) - yin.at(i, s));
        }
        (void)t;
        return CbStatus::ok;
    }

    /// Reaction residual and 3x3 Jacobian for one grid point.
    void point_reaction(double u, double v, double w, double* out) const {
        out[0] = p_.A - (w + 1.0) * u + v * u * u;
        out[1] = w * u - v * u * u;
        out[2] = (p_.B - w) / p_.eps - w * u;
    }
    void point_jacobian(double u, double v, double w, double jac[3][3]) const {
        jac[0][0] = -(w + 1.0) + 2.0 * u * v;
        jac[0][1] = u * u;
        jac[0][2] = -u;
        jac[1][0] = w - 2.0 * u * v;
        jac[1][1] = -u * u;
        jac[1][2] = u;
        jac[2][0] = -w;
        jac[2][1] = 0.0;
        jac[2][2] = -1.0 / p_.eps - u;
    }

    /// Analytic Jacobian-vector product of the reaction partition.
    void reaction_jv(const Vector& v, Vector& out, const Vector& y) const {
        View yin(*this, y);
        View vin(*this, v);
        View jv(*this, out);
        double jac[3][3];
        for (index_t i = 0; i < nx_; ++i) {
            point_jacobian(yin.at(i, 0), yin.at(i, 1), yin.at(i, 2), jac);
            for (int r = 0; r < 3; ++r)
                jv.at(i, r) = jac[r][0] * vin.at(i, 0) + jac[r][1] * vin.at(i, 1) +
                              jac[r][2] * vin.at(i, 2);
        }
    }

    void advection_jv(const Vector& v, Vector& out) const {
        (void)advection_rhs(0.0, v, out); // linear operator
    }

    void full_jv(const Vector& v, Vector& out, const Vector& y) const {
        reaction_jv(v, out, y);
        View vin(*this, v);
        View jv(*this, out);
        const double r = p_.c / dx_;
        for (index_t i = 0; i < nx_; ++i) {
            const index_t im1 = i == 0 ? nx_ - 1 : i - 1;
            for (int s = 0; s < 3; ++s)
                jv.at(i, s) += r * (vin.at(im1, s) - vin.at(i, s));
        }
    }

    /// Reaction terms restricted to one block (grid indices are block-local).
    CbStatus block_reaction_rhs(int k, const SerialVector& z, SerialVector& out) const {
        for (index_t i = 0; i < block_points(k); ++i)
            point_reaction(z[3 * i], z[3 * i + 1], z[3 * i + 2], &out[3 * i]);
        return CbStatus::ok;
    }

    /// Flat accessor over the block-partitioned state. The problem code owns
    /// the layout; the composite vector itself is never indexed directly.
    class View {
    public:
        View(const Bruss1DProblem& prob, const Vector& v) : prob_(prob) {
            const auto& mv = dynamic_cast<const ManyVector&>(v);
            if (mv.num_subvectors() != prob.blocks_)
                throw shape_error("Bruss1DProblem: block count mismatch");
            subs_.reserve(static_cast<std::size_t>(prob.blocks_));
            for (int k = 0; k < prob.blocks_; ++k)
                subs_.push_back(const_cast<SerialVector*>(
                    &dynamic_cast<const SerialVector&>(mv.subvector(k))));
        }

        double& at(index_t point, int species) const {
            return *(ptr(point) + species);
        }
        double* ptr(index_t point) const {
            const int k = prob_.block_of(point);
            const index_t local = point - prob_.block_start_[static_cast<std::size_t>(k)];
            return &(*subs_[static_cast<std::size_t>(k)])[3 * local];
        }

    private:
        const Bruss1DProblem& prob_;
        std::vector<SerialVector*> subs_;
    };

    int block_of(index_t point) const {
        int k = static_cast<int>((point * blocks_) / nx_);
        while (point < block_start_[static_cast<std::size_t>(k)]) --k;
        while (k + 1 < blocks_ &&
               point >= block_start_[static_cast<std::size_t>(k) + 1])
            ++k;
        return k;
    }

    index_t block_start(int k) const { return block_start_[static_cast<std::size_t>(k)]; }

private:
    friend class View;

    index_t nx_;
    int blocks_;
    Params p_;
    double length_ = 0.0, dx_ = 0.0;
    std::vector<index_t> block_points_, block_start_;
};

} // namespace odekit::harness
