#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>

#include "odekit/nonlinear_solver.hpp"
#include "odekit/vector.hpp"

namespace odekit {

/// ODE right-hand side: ydot = f(t, y).
using RhsFn = std::function<CbStatus(double t, const Vector& y, Vector& ydot)>;

class integration_error : public std::runtime_error {
public:
    explicit integration_error(const std::string& what) : std::runtime_error(what) {}
};

/// Error-control tolerances. The error weight for component i is
/// w_i = 1 / (rtol*|y_i| + atol_i).
struct Tolerances {
    double rtol = 1e-6;
    double atol = 1e-12;
    std::shared_ptr<const Vector> atol_vec; // overrides the scalar when set

    void validate() const {
        if (rtol < 0.0 || atol < 0.0)
            throw config_error("Tolerances: rtol and atol must be >= 0");
        if (rtol == 0.0 && atol == 0.0 && !atol_vec)
            throw config_error("Tolerances: rtol and atol must not both be zero");
    }
};

/// w = 1 / (rtol*|y| + atol); throws numeric_error if any weight entry would
/// divide by zero.
inline void build_error_weights(const Tolerances& tol, const Vector& y, Vector& w) {
    w.abs(y);
    w.scale(tol.rtol, w);
    if (tol.atol_vec)
        w.linear_sum(1.0, w, 1.0, *tol.atol_vec);
    else
        w.add_const(w, tol.atol);
    w.inv(w);
}

/// Per-attempt record passed to the optional step monitor (test aid).
struct StepRecord {
    double t_attempt = 0.0;
    double h = 0.0;
    int order = 0;
    double error_estimate = 0.0;
    bool accepted = false;
};

/// Cumulative integrator statistics (Table-2 style row names).
struct IntegratorCounters {
    long steps = 0;
    long step_fails = 0; // failed attempts: error-test and nonlinear rejections
    long rhs_evals = 0;  // integrator + linear solver (difference quotients included)
    long nls_iters = 0;
    long ls_iters = 0;
    long nls_conv_fails = 0;
};

/// Step-size growth after an accepted step with WRMS error estimate err.
inline double step_eta_accept(double err, int order) {
    if (err <= 0.0) return 5.0;
    return std::min(5.0, 0.9 * std::pow(err, -1.0 / (order + 1)));
}

/// Step-size shrink after a rejected step.
inline double step_eta_reject(double err, int order) {
    return std::max(0.1, 0.9 * std::pow(err, -1.0 / (order + 1)));
}

/// Initial step size: curvature heuristic capped by horizon/100. The second
/// derivative is estimated from one trial evaluation at t0 + delta with
/// delta = 1e-3 * horizon, targeting ||h^2/2 * ydd||_wrms = 1.
inline double initial_step_size(const RhsFn& f, double t0, const Vector& y0,
                                const Vector& f0, const Vector& w, double horizon) {
    const double cap = horizon / 100.0;
    const double delta = 1e-3 * horizon;

    auto ytrial = y0.clone();
    ytrial->linear_sum(1.0, y0, delta, f0);
    auto ftrial = y0.clone();
    if (f(t0 + delta, *ytrial, *ftrial) != CbStatus::ok) return cap;
    ftrial->linear_sum(1.0 / delta, *ftrial, -1.0 / delta, f0); // ydd estimate
    const double curv = ftrial->wrms_norm(w);
    if (curv <= 0.0) return cap;
    return std::min(std::sqrt(2.0 / curv), cap);
}

} // namespace odekit
