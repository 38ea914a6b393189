#pragma once

#include <cmath>
#include <limits>

#include "odekit/dense_lu.hpp"
#include "odekit/nonlinear_solver.hpp"

namespace odekit {

/// System function in state space: fu = F(u) (RootFind) or fu = G(u)
/// (FixedPoint).
using StateSysFn = std::function<CbStatus(const Vector& u, Vector& fu)>;

struct StandaloneResult {
    std::unique_ptr<Vector> u;
    NlsOutcome outcome;
};

/// Drives a nonlinear solver on a standalone system (no integrator): wraps
/// solve with y0 = u0 and ycor = 0 and returns u = u0 + ycor. The supplied
/// function must match the solver's type. For RootFind solvers an exact
/// Newton linear solve is wired up internally: a dense difference-quotient
/// Jacobian is rebuilt and refactored at every iteration (column increments
/// sqrt(eps) * max(|u_j|, 1)).
inline StandaloneResult standalone_solve(NonlinearSolver& nls, const StateSysFn& F,
                                         const Vector& u0, const Vector& w,
                                         double tol) {
    struct Workspace {
        const StateSysFn* F;
        const Vector* u0;
        std::unique_ptr<Vector> u;     // latest evaluation point
        std::unique_ptr<Vector> fu;    // F(u) there
        std::unique_ptr<Vector> shift; // correction-space adjust for fixed point
        bool root_find;
    } ws;

    ws.F = &F;
    ws.u0 = &u0;
    ws.u = u0.clone();
    ws.fu = u0.clone();
    ws.shift = u0.clone();
    ws.root_find = nls.type() == NonlinearSolverType::RootFind;

    nls.set_sys_fn([&ws](const Vector& ycor, Vector& out, void*) -> CbStatus {
        ws.u->linear_sum(1.0, *ws.u0, 1.0, ycor);
        const CbStatus flag = (*ws.F)(*ws.u, out);
        if (flag != CbStatus::ok) return flag;
        if (!ws.root_find) {
            // G acts on u; convert the fixed point back to correction space
            out.linear_sum(1.0, out, -1.0, *ws.u0);
        } else {
            ws.fu->scale(1.0, out);
        }
        return CbStatus::ok;
    });

    DenseLuSolver lu;
    if (ws.root_find) {
        nls.set_lsolve_fn([&ws, &lu](Vector& b, void*) -> CbStatus {
            auto* bs = dynamic_cast<SerialVector*>(&b);
            const auto* us = dynamic_cast<const SerialVector*>(ws.u.get());
            if (!bs || !us)
                throw config_error("standalone_solve: RootFind driver needs SerialVector state");
            const index_t n = us->length();
            DenseMatrix jac(n, n);
            auto up = ws.u->clone();
            auto fp = ws.u->clone();
            auto* ups = dynamic_cast<SerialVector*>(up.get());
            const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
            for (index_t j = 0; j < n; ++j) {
                up->scale(1.0, *ws.u);
                const double sigma = sqrt_eps * std::max(std::abs((*us)[j]), 1.0);
                (*ups)[j] += sigma;
                if ((*ws.F)(*up, *fp) != CbStatus::ok) return CbStatus::recoverable;
                const auto* fps = dynamic_cast<const SerialVector*>(fp.get());
                const auto* fus = dynamic_cast<const SerialVector*>(ws.fu.get());
                for (index_t i = 0; i < n; ++i)
                    jac(i, j) = ((*fps)[i] - (*fus)[i]) / sigma;
            }
            if (lu.setup(&jac) != LinStatus::ok) return CbStatus::recoverable;
            auto sol = b.clone();
            lu.solve(nullptr, *sol, b, 0.0);
            b.scale(1.0, *sol);
            return CbStatus::ok;
        });
    }

    StandaloneResult res;
    auto ycor = u0.clone();
    ycor->const_fill(0.0);

    NlsSolveRequest req;
    req.y0 = &u0;
    req.ycor = ycor.get();
    req.w = &w;
    req.tol = tol;
    req.call_lsetup = false;
    res.outcome = nls.solve(req);

    // the injected closures reference this frame; detach them before returning
    nls.set_sys_fn(SysFn{});
    if (ws.root_find) nls.set_lsolve_fn(LSolveFn{});

    res.u = u0.clone();
    res.u->linear_sum(1.0, u0, 1.0, *ycor);
    return res;
}

} // namespace odekit
