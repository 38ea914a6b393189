#pragma once

#include <functional>
#include <memory>

#include "odekit/vector.hpp"

namespace odekit {

/// RootFind solvers consume residual functions F(u) = 0; FixedPoint solvers
/// consume fixed-point evaluations G(u).
enum class NonlinearSolverType { RootFind, FixedPoint };

enum class NlsStatus {
    ok,
    max_iterations, // recoverable: caller may retry with fresh setup or smaller step
    diverged,       // recoverable: rate estimate exceeded the divergence bound
    setup_recoverable,
    solve_recoverable,
    sys_recoverable,
    fatal,
};

inline bool nls_status_recoverable(NlsStatus s) {
    return s != NlsStatus::ok && s != NlsStatus::fatal;
}

/// Callback return convention shared by all injected functions.
enum class CbStatus { ok, recoverable, fatal };

/// Nonlinear system function: residual F(ycor) for RootFind solvers or
/// fixed-point value G(ycor) for FixedPoint solvers, in correction space.
using SysFn = std::function<CbStatus(const Vector& ycor, Vector& out, void* mem)>;

/// Linear setup: jbad signals the cached Jacobian data is known stale;
/// jcur reports whether it was refreshed.
using LSetupFn = std::function<CbStatus(bool jbad, bool& jcur, void* mem)>;

/// Linear solve: overwrites b with the solution of the Newton system.
using LSolveFn = std::function<CbStatus(Vector& b, void* mem)>;

enum class ConvTest { converged, keep_iterating, recover };

/// Convergence test: inspects the latest iterate and update, returns whether
/// to stop, continue, or abandon the solve as unrecoverable-at-this-setup.
using ConvTestFn = std::function<ConvTest(const Vector& ycor, const Vector& delta,
                                          double tol, const Vector& w, void* ctx)>;

/// One nonlinear solve. The solution ycor is a correction to the predicted
/// state y0; the stopping test is in the WRMS norm with weights w.
struct NlsSolveRequest {
    const Vector* y0 = nullptr;
    Vector* ycor = nullptr; // in: initial correction; out: final correction
    const Vector* w = nullptr;
    double tol = 0.0;
    bool call_lsetup = false;
    void* context = nullptr; // opaque integrator/user data passed to callbacks
};

struct NlsOutcome {
    NlsStatus status = NlsStatus::ok;
    int iterations = 0; // completed updates in this solve
};

/// Abstract nonlinear solver with injected system function and optional
/// lsetup/lsolve/convergence-test hooks. Single-client per instance;
/// callbacks run on the caller's thread and must not re-enter the solver.
class NonlinearSolver {
public:
    virtual ~NonlinearSolver() = default;

    virtual NonlinearSolverType type() const = 0;

    virtual void set_sys_fn(SysFn fn) = 0;

    /// FixedPoint solvers reject these (they do not use a linear solver).
    virtual void set_lsetup_fn(LSetupFn) {
        throw config_error("this nonlinear solver does not use a linear solver");
    }
    virtual void set_lsolve_fn(LSolveFn) {
        throw config_error("this nonlinear solver does not use a linear solver");
    }

    virtual void set_convtest_fn(ConvTestFn fn, void* ctx) = 0;

    /// Whether solve() can proceed without an integrator-attached linear
    /// solver (none is needed, or the implementation solves internally).
    virtual bool linear_solve_ready() const { return true; }

    virtual NlsOutcome solve(const NlsSolveRequest& req) = 0;

    /// Cumulative counters since construction.
    virtual long num_iters() const = 0;
    virtual long num_conv_fails() const = 0;
};

} // namespace odekit
