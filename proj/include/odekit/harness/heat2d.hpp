#pragma once

#include <cmath>
#include <numbers>

#include "odekit/matrix.hpp"
#include "odekit/ode_common.hpp"

namespace odekit::harness {

/// Two-dimensional heat equation on the unit square with zero Dirichlet
/// boundary, second-order centered differences on an nx x ny node grid
/// (boundary nodes included; their rows are held at zero), and a forcing
/// chosen so that u = sin^2(pi x) sin^2(pi y) cos^2(pi t) solves the PDE.
class Heat2DProblem {
public:
    Heat2DProblem(index_t nx, index_t ny, double kx = 1.0, double ky = 1.0)
        : nx_(nx), ny_(ny), kx_(kx), ky_(ky) {
        if (nx < 3 || ny < 3)
            throw config_error("Heat2DProblem: grid must be at least 3x3");
        dx_ = 1.0 / static_cast<double>(nx_ - 1);
        dy_ = 1.0 / static_cast<double>(ny_ - 1);
    }

    index_t size() const { return nx_ * ny_; }
    index_t nx() const { return nx_; }
    index_t ny() const { return ny_; }

    double x_of(index_t i) const { return static_cast<double>(i) * dx_; }
    double y_of(index_t j) const { return static_cast<double>(j) * dy_; }

    double exact(double t, double x, double y) const {
        const double sx = std::sin(std::numbers::pi * x);
        const double sy = std::sin(std::numbers::pi * y);
        const double ct = std::cos(std::numbers::pi * t);
        return sx * sx * sy * sy * ct * ct;
    }

    void fill_exact(double t, SerialVector& u) const {
        for (index_t j = 0; j < ny_; ++j)
            for (index_t i = 0; i < nx_; ++i)
                u[idx(i, j)] = exact(t, x_of(i), y_of(j));
    }

    SerialVector initial_state() const {
        SerialVector u(size());
        fill_exact(0.0, u);
        return u;
    }

    /// External forcing from the manufactured solution.
    double forcing(double t, double x, double y) const {
        const double pi = std::numbers::pi;
        const double sx = std::sin(pi * x), cx = std::cos(pi * x);
        const double sy = std::sin(pi * y), cy = std::cos(pi * y);
        const double st = std::sin(pi * t), ct = std::cos(pi * t);
        double b = -2.0 * pi * sx * sx * sy * sy * st * ct;
        b -= kx_ * 2.0 * pi * pi * (cx * cx - sx * sx) * sy * sy * ct * ct;
        b -= ky_ * 2.0 * pi * pi * (cy * cy - sy * sy) * sx * sx * ct * ct;
        return b;
    }

    CbStatus rhs(double t, const Vector& y, Vector& ydot) const {
        const auto& u = dynamic_cast<const SerialVector&>(y);
        auto& d = dynamic_cast<SerialVector&>(ydot);
        const double cx = kx_ / (dx_ * dx_), cy = ky_ / (dy_ * dy_);
        for (index_t j = 0; j < ny_; ++j) {
            for (index_t i = 0; i < nx_; ++i) {
                const index_t k = idx(i, j);
                if (boundary(i, j)) {
                    d[k] = 0.0;
                    continue;
                }
                d[k] = cx * (u[idx(i - 1, j)] - 2.0 * u[k] + u[idx(i + 1, j)]) +
                       cy * (u[idx(i, j - 1)] - 2.0 * u[k] + u[idx(i, j + 1)]) +
                       forcing(t, x_of(i), y_of(j));
            }
        }
        return CbStatus::ok;
    }

    /// The operator is linear, so the Jacobian-vector product is the
    /// diffusion stencil applied to v.
    void jv(const Vector& v, Vector& out) const {
        const auto& vs = dynamic_cast<const SerialVector&>(v);
        auto& d = dynamic_cast<SerialVector&>(out);
        const double cx = kx_ / (dx_ * dx_), cy = ky_ / (dy_ * dy_);
        for (index_t j = 0; j < ny_; ++j) {
            for (index_t i = 0; i < nx_; ++i) {
                const index_t k = idx(i, j);
                if (boundary(i, j)) {
                    d[k] = 0.0;
                    continue;
                }
                d[k] = cx * (vs[idx(i - 1, j)] - 2.0 * vs[k] + vs[idx(i + 1, j)]) +
                       cy * (vs[idx(i, j - 1)] - 2.0 * vs[k] + vs[idx(i, j + 1)]);
            }
        }
    }

    /// Dense Jacobian assembly for the direct-solver path (small grids only).
    void dense_jacobian(DenseMatrix& jac) const {
        jac.set_zero();
        const double cx = kx_ / (dx_ * dx_), cy = ky_ / (dy_ * dy_);
        for (index_t j = 0; j < ny_; ++j) {
            for (index_t i = 0; i < nx_; ++i) {
                const index_t k = idx(i, j);
                if (boundary(i, j)) continue;
                jac(k, k) = -2.0 * (cx + cy);
                jac(k, idx(i - 1, j)) = cx;
                jac(k, idx(i + 1, j)) = cx;
                jac(k, idx(i, j - 1)) = cy;
                jac(k, idx(i, j + 1)) = cy;
            }
        }
    }

    double max_error(double t, const Vector& y) const {
        const auto& u = dynamic_cast<const SerialVector&>(y);
        double m = 0.0;
        for (index_t j = 0; j < ny_; ++j)
            for (index_t i = 0; i < nx_; ++i)
                m = std::max(m, std::abs(u[idx(i, j)] - exact(t, x_of(i), y_of(j))));
        return m;
    }

private:
    index_t idx(index_t i, index_t j) const { return j * nx_ + i; }
    bool boundary(index_t i, index_t j) const {
        return i == 0 || j == 0 || i == nx_ - 1 || j == ny_ - 1;
    }

    index_t nx_, ny_;
    double kx_, ky_;
    double dx_, dy_;
};

} // namespace odekit::harness
