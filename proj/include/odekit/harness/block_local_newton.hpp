#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "odekit/ark.hpp"
#include "odekit/harness/bruss1d.hpp"
#include "odekit/newton.hpp"

namespace odekit::harness {

/// Problem-specific nonlinear solver for the advection-reaction stage
/// systems: because the implicit partition couples only within a grid point,
/// each block's subsystem is solved independently by an inner Newton
/// instance with closed-form 3x3 solves per point. The only cross-block
/// operation is one success/failure combine at the end of each solve
/// (counted by cross_block_reductions).
///
/// Solve requests must come from an ArkIntegrator stage solve: the request
/// context carries the stage time, gamma, known data, and predictor.
class BlockLocalNewton final : public NonlinearSolver {
public:
    explicit BlockLocalNewton(const Bruss1DProblem& prob, NewtonConfig inner_cfg = {})
        : prob_(prob), inner_cfg_(inner_cfg) {
        for (int k = 0; k < prob_.blocks(); ++k) {
            blocks_.push_back(std::make_unique<BlockState>());
            blocks_.back()->solver = std::make_unique<NewtonSolver>(inner_cfg_);
        }
    }

    NonlinearSolverType type() const override { return NonlinearSolverType::RootFind; }

    void set_sys_fn(SysFn fn) override { global_sys_ = std::move(fn); }
    void set_convtest_fn(ConvTestFn fn, void* ctx) override {
        for (auto& b : blocks_) b->solver->set_convtest_fn(fn, ctx);
    }
    void set_lsetup_fn(LSetupFn) override {
        // the task-local solves factor their own 3x3 systems
    }
    void set_lsolve_fn(LSolveFn) override {}

    long cross_block_reductions() const { return reductions_; }
    long num_solves() const { return nsolves_; }

    NlsOutcome solve(const NlsSolveRequest& req) override {
        if (!req.context)
            throw config_error("BlockLocalNewton: solve requires an ARK stage context");
        ++nsolves_;
        const auto* stage = static_cast<const ArkStageContext*>(req.context);
        const auto& pred = dynamic_cast<const ManyVector&>(*stage->predictor);
        const auto& known = dynamic_cast<const ManyVector&>(*stage->known_data);
        auto& ycor = dynamic_cast<ManyVector&>(*req.ycor);
        const auto& w = dynamic_cast<const ManyVector&>(*req.w);

        NlsOutcome out;
        bool all_ok = true;
        for (int k = 0; k < prob_.blocks(); ++k) {
            BlockState& blk = *blocks_[static_cast<std::size_t>(k)];
            blk.gamma = stage->gamma;
            blk.t = stage->t;
            blk.pred = &dynamic_cast<const SerialVector&>(pred.subvector(k));
            blk.a = &dynamic_cast<const SerialVector&>(known.subvector(k));
            if (!blk.zcur || blk.zcur->length() != blk.pred->length()) {
                blk.zcur = std::make_unique<SerialVector>(blk.pred->length());
                blk.fz = std::make_unique<SerialVector>(blk.pred->length());
            }
            bind_block(k);

            NlsSolveRequest local;
            local.y0 = blk.pred;
            local.ycor = &ycor.subvector(k);
            local.w = &w.subvector(k);
            local.tol = req.tol;
            local.call_lsetup = false;
            const NlsOutcome r = blk.solver->solve(local);
            out.iterations += r.iterations;
            niters_ += r.iterations;
            if (r.status != NlsStatus::ok) {
                if (r.status == NlsStatus::fatal) {
                    out.status = NlsStatus::fatal;
                    return out;
                }
                all_ok = false;
            }
        }

        ++reductions_; // the single cross-block success combine
        if (!all_ok) {
            ++nconvfails_;
            out.status = NlsStatus::max_iterations;
            return out;
        }
        out.status = NlsStatus::ok;
        return out;
    }

    long num_iters() const override { return niters_; }
    long num_conv_fails() const override { return nconvfails_; }

private:
    struct BlockState {
        std::unique_ptr<NewtonSolver> solver;
        const SerialVector* pred = nullptr;
        const SerialVector* a = nullptr;
        std::unique_ptr<SerialVector> zcur, fz;
        double gamma = 0.0;
        double t = 0.0;
    };

    void bind_block(int k) {
        BlockState& blk = *blocks_[static_cast<std::size_t>(k)];
        blk.solver->set_sys_fn([this, k](const Vector& ycor, Vector& out, void*) {
            BlockState& b = *blocks_[static_cast<std::size_t>(k)];
            b.zcur->linear_sum(1.0, *b.pred, 1.0, ycor);
            prob_.block_reaction_rhs(k, *b.zcur, *b.fz);
            // F(ycor) = ycor + (pred - a) - gamma f
            out.linear_sum(1.0, ycor, -b.gamma, *b.fz);
            out.linear_sum(1.0, out, 1.0, *b.pred);
            out.linear_sum(1.0, out, -1.0, *b.a);
            return CbStatus::ok;
        });
        blk.solver->set_lsolve_fn([this, k](Vector& rhs, void*) {
            BlockState& b = *blocks_[static_cast<std::size_t>(k)];
            auto& r = dynamic_cast<SerialVector&>(rhs);
            const index_t npts = b.zcur->length() / 3;
            double jac[3][3], m[3][3], x[3];
            for (index_t i = 0; i < npts; ++i) {
                prob_.point_jacobian((*b.zcur)[3 * i], (*b.zcur)[3 * i + 1],
                                     (*b.zcur)[3 * i + 2], jac);
                for (int r2 = 0; r2 < 3; ++r2)
                    for (int c2 = 0; c2 < 3; ++c2)
                        m[r2][c2] = (r2 == c2 ? 1.0 : 0.0) - b.gamma * jac[r2][c2];
                if (!solve3x3(m, &r[3 * i], x)) return CbStatus::recoverable;
                r[3 * i] = x[0];
                r[3 * i + 1] = x[1];
                r[3 * i + 2] = x[2];
            }
            return CbStatus::ok;
        });
    }

    /// 3x3 Gaussian elimination with partial pivoting on an augmented system.
    static bool solve3x3(double m[3][3], const double* b, double* x) {
        double a[3][4];
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) a[i][j] = m[i][j];
            a[i][3] = b[i];
        }
        for (int k = 0; k < 3; ++k) {
            int p = k;
            for (int i = k + 1; i < 3; ++i)
                if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
            if (a[p][k] == 0.0) return false;
            if (p != k)
                for (int j = 0; j < 4; ++j) std::swap(a[k][j], a[p][j]);
            for (int i = k + 1; i < 3; ++i) {
                const double f = a[i][k] / a[k][k];
                for (int j = k; j < 4; ++j) a[i][j] -= f * a[k][j];
            }
        }
        for (int i = 2; i >= 0; --i) {
            double s = a[i][3];
            for (int j = i + 1; j < 3; ++j) s -= a[i][j] * x[j];
            x[i] = s / a[i][i];
        }
        return true;
    }

    const Bruss1DProblem& prob_;
    NewtonConfig inner_cfg_;
    std::vector<std::unique_ptr<BlockState>> blocks_;
    SysFn global_sys_;

    long niters_ = 0;
    long nconvfails_ = 0;
    long reductions_ = 0;
    long nsolves_ = 0;
};

} // namespace odekit::harness
