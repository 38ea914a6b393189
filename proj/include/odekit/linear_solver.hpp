#pragma once

#include <cmath>
#include <functional>
#include <memory>

#include "odekit/matrix.hpp"
#include "odekit/vector.hpp"

namespace odekit {

/// Solver taxonomy; constant per instance. Integrators use it to decide how
/// aggressively setup cost can be amortized and which hooks apply.
enum class LinearSolverType { MatrixDirect, MatrixIterative, MatrixFreeIterative };

enum class LinStatus {
    ok,
    max_iterations,   // recoverable: not converged within the iteration budget
    singular_matrix,  // recoverable: factorization found a zero pivot
    breakdown,        // iteration cannot continue (e.g. operator not SPD)
    callback_recoverable,
    callback_fatal,
    unsupported,
};

inline bool lin_status_recoverable(LinStatus s) {
    return s == LinStatus::max_iterations || s == LinStatus::singular_matrix ||
           s == LinStatus::callback_recoverable;
}

struct LinSolveReport {
    bool converged = false;
    int iterations = 0;
    double res_norm = 0.0; // scaled preconditioned residual 2-norm
    LinStatus status = LinStatus::ok;
};

/// Matrix-vector product callback: z = A*x.
using ATimesFn = std::function<bool(const Vector& x, Vector& z)>;

enum class PrecSide { left, right };

/// Preconditioner hooks. psolve applies P1^-1 (left) or P2^-1 (right) to r,
/// writing z; it must be deterministic for a fixed setup state. psetup, when
/// present, is invoked from setup().
struct PreconditionerHooks {
    std::function<bool()> psetup; // optional; false = recoverable failure
    std::function<bool(PrecSide, const Vector& r, Vector& z)> psolve;
};

/// Abstract linear solver for A x = b.
///
/// The per-instance contract is single-client: no concurrent setup/solve on
/// one instance. Distinct instances are independent.
class LinearSolver {
public:
    virtual ~LinearSolver() = default;

    virtual LinearSolverType type() const = 0;

    /// Infrequent setup (factorization, preconditioner build). Matrix-direct
    /// solvers require A here; iterative solvers invoke psetup if provided.
    virtual LinStatus setup(const Matrix* A) { (void)A; return LinStatus::ok; }

    /// Solve A x = b. On entry x is the initial guess (integrators pass
    /// zero); on exit the solution. Iterative solvers stop when the 2-norm
    /// of the scaled preconditioned residual drops below tol.
    virtual LinSolveReport solve(const Matrix* A, Vector& x, const Vector& b,
                                 double tol) = 0;

    virtual bool set_atimes(ATimesFn) { return false; }
    virtual bool set_preconditioner(PreconditionerHooks) { return false; }
    virtual bool set_scaling_vectors(const Vector& /*s1*/, const Vector& /*s2*/) {
        return false;
    }
    virtual bool supports_scaling() const { return false; }

    /// Statistics of the most recent solve.
    virtual int num_iters() const { return 0; }
    virtual double res_norm() const { return 0.0; }
};

/// Tolerance adjustment for solvers without scaling support: request
/// stopping at tol / s1_rms, where s1_rms is the RMS norm of the diagonal of
/// S1. With scaling supported (s1 == nullptr), tol is unchanged.
inline double effective_tolerance(double tol, const Vector* s1) {
    if (!s1) return tol;
    auto ones = s1->clone();
    ones->const_fill(1.0);
    const double s1_rms = s1->wrms_norm(*ones); // sqrt((1/N) sum s1_i^2)
    return tol / s1_rms;
}

} // namespace odekit
