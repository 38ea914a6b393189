#pragma once

#include <span>
#include <vector>

#include "odekit/errors.hpp"

namespace odekit::multistep {

/// Polynomial with ascending coefficients. Degrees stay <= 13 here, so the
/// integer-valued intermediates are exact in double precision.
using Poly = std::vector<double>;

inline Poly poly_mul(const Poly& a, const Poly& b) {
    Poly r(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

inline double poly_integral01(const Poly& p) {
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k)
        s += p[k] / static_cast<double>(k + 1);
    return s;
}

/// Lagrange basis polynomial j over the given nodes, in the node variable.
inline Poly lagrange_poly(std::span<const double> nodes, std::size_t j) {
    Poly p{1.0};
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (i == j) continue;
        const double denom = nodes[j] - nodes[i];
        p = poly_mul(p, Poly{-nodes[i] / denom, 1.0 / denom});
    }
    return p;
}

/// Interpolation weights at point x: p(x) = sum_k w_k f(node_k).
inline std::vector<double> lagrange_weights(std::span<const double> nodes, double x) {
    std::vector<double> w(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        double v = 1.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (i == j) continue;
            v *= (x - nodes[i]) / (nodes[j] - nodes[i]);
        }
        w[j] = v;
    }
    return w;
}

/// Divided-difference weights: f[nodes] = sum_k w_k f(node_k).
inline std::vector<double> divided_difference_weights(std::span<const double> nodes) {
    std::vector<double> w(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        double denom = 1.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (i == j) continue;
            denom *= nodes[j] - nodes[i];
        }
        w[j] = 1.0 / denom;
    }
    return w;
}

/// Uniform-grid Adams weights in the backward variable u = (t_n - t)/h.
/// defect_const is the signed constant in the scheme's defect
/// D = defect_const * h^(q+1) * y^(q+1) on exact data.
struct AdamsCoeffs {
    std::vector<double> beta; // beta[k] weights f at u = first_node + k
    double defect_const = 0.0;
};

namespace detail {

inline AdamsCoeffs adams_on_nodes(int first_node, int q) {
    AdamsCoeffs c;
    std::vector<double> nodes(static_cast<std::size_t>(q));
    for (int i = 0; i < q; ++i)
        nodes[static_cast<std::size_t>(i)] = static_cast<double>(first_node + i);
    c.beta.resize(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j)
        c.beta[j] = poly_integral01(lagrange_poly(nodes, j));
    // quadrature error: (1/q!) int_0^1 prod (node_i - u) du
    Poly prod{1.0};
    double qfact = 1.0;
    for (int i = 0; i < q; ++i) {
        prod = poly_mul(prod, Poly{nodes[static_cast<std::size_t>(i)], -1.0});
        qfact *= static_cast<double>(i + 1);
    }
    c.defect_const = poly_integral01(prod) / qfact;
    return c;
}

} // namespace detail

/// Adams-Moulton of order q: y_n = y_{n-1} + h sum_{j=0}^{q-1} beta_j f(t_n - j h).
inline AdamsCoeffs adams_moulton(int q) {
    if (q < 1 || q > 12) throw config_error("adams_moulton: order must be in 1..12");
    return detail::adams_on_nodes(0, q);
}

/// Adams-Bashforth of order q: yhat = y_{n-1} + h sum_{j=1}^{q} beta_{j-1} f(t_n - j h).
inline AdamsCoeffs adams_bashforth(int q) {
    if (q < 1 || q > 12) throw config_error("adams_bashforth: order must be in 1..12");
    return detail::adams_on_nodes(1, q);
}

/// Uniform-grid BDF of order q:
/// y_n = sum_{j=1}^{q} a[j-1] y_{n-j} + h beta0 f(t_n, y_n);
/// defect on exact data is -(beta0/(q+1)) h^(q+1) y^(q+1).
struct BdfCoeffs {
    std::vector<double> a;
    double beta0 = 0.0;
    double error_const = 0.0; // beta0/(q+1), positive
};

inline BdfCoeffs bdf(int q) {
    if (q < 1 || q > 5) throw config_error("bdf: order must be in 1..5");
    // collocation: p'(t_n) = f with p through u = 0..q; d/dt = -(1/h) d/du
    std::vector<double> nodes(static_cast<std::size_t>(q) + 1);
    for (int i = 0; i <= q; ++i) nodes[static_cast<std::size_t>(i)] = static_cast<double>(i);
    std::vector<double> ell(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const Poly basis = lagrange_poly(nodes, j);
        ell[j] = basis.size() > 1 ? -basis[1] : 0.0; // -L_j'(0)
    }
    BdfCoeffs c;
    c.beta0 = 1.0 / ell[0];
    c.a.resize(static_cast<std::size_t>(q));
    for (int j = 1; j <= q; ++j)
        c.a[static_cast<std::size_t>(j - 1)] = -ell[static_cast<std::size_t>(j)] / ell[0];
    c.error_const = c.beta0 / static_cast<double>(q + 1);
    return c;
}

} // namespace odekit::multistep
