#include "fld/solver.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

#include "fld/field_ops.hpp"

namespace fld {

std::string_view to_string(BicgstabVariant v) noexcept {
    return v == BicgstabVariant::Classic ? "classic" : "ganged";
}

BicgstabVariant parse_variant(std::string_view text) {
    if (text == "classic") return BicgstabVariant::Classic;
    if (text == "ganged") return BicgstabVariant::Ganged;
    throw std::invalid_argument(fmt::format("unknown BiCGSTAB variant '{}'", text));
}

void SolverConfig::validate() const {
    if (!(tol > 0.0) || !std::isfinite(tol)) {
        throw std::invalid_argument(fmt::format("solver.tol must be positive (got {})", tol));
    }
    if (max_iter && *max_iter < 1) {
        throw std::invalid_argument(fmt::format("solver.max_iter must be >= 1 (got {})", *max_iter));
    }
}

int SolverConfig::resolved_max_iter(std::size_t unknowns) const {
    if (max_iter) return *max_iter;
    return std::max(1, static_cast<int>(std::ceil(10.0 * std::sqrt(static_cast<double>(unknowns)))));
}

std::string to_string(SolveOutcome outcome, BreakdownKind kind) {
    switch (outcome) {
    case SolveOutcome::Converged: return "converged";
    case SolveOutcome::MaxIter: return "max_iter";
    case SolveOutcome::Breakdown:
        return kind == BreakdownKind::RhoZero ? "breakdown_rho" : "breakdown_omega";
    }
    return "?";
}

namespace {

using field_ops::ganged_dot;

/// Working vectors for one tile; all share the shape of b.
struct Workspace {
    explicit Workspace(const Field& like)
        : r(like), rhat(like), p(like), phat(like), v(like), s(like), shat(like), t(like) {
        for (Field* f : {&r, &rhat, &p, &phat, &v, &s, &shat, &t}) f->fill(0.0);
    }
    Field r, rhat, p, phat, v, s, shat, t;
};

class Bicgstab {
public:
    Bicgstab(Communicator& comm, const OperatorSpec& a, const PreconditionerSpec& m, const Field& b,
             Field& x, const SolverConfig& cfg, const IterateObserver& observer)
        : comm_(comm), a_(a), m_(m), b_(b), x_(x), cfg_(cfg), observer_(observer), w_(b),
          path_(cfg.path), zero_bc_(BoundaryCondition::dirichlet(0.0)) {}

    SolverStats run() {
        cfg_.validate();
        if (!b_.same_shape(x_) || !b_.same_shape(a_.stencil.diag)) {
            throw std::logic_error("bicgstab: operand shapes do not match the operator");
        }
        const int max_iter = cfg_.resolved_max_iter(a_.grid.unknowns());
        const auto events0 = comm_.reduction_events();

        // r = b - A x
        matvec(x_, w_.t);
        field_ops::dscal(path_, b_, 1.0, w_.t, w_.r);
        const auto setup = ganged_dot(comm_, path_, {{&b_, &b_}, {&w_.r, &w_.r}});
        stats_.setup_reduction_events = comm_.reduction_events() - events0;
        bb_ = setup[0];
        double rr = setup[1];

        if (bb_ == 0.0) {
            x_.fill(0.0);
            stats_.outcome = SolveOutcome::Converged;
            stats_.final_relative_residual = 0.0;
            stats_.residual_history.push_back(0.0);
            return finish(events0);
        }
        const double tol2 = cfg_.tol * cfg_.tol * bb_;
        stats_.residual_history.push_back(std::sqrt(rr / bb_));
        if (rr <= tol2) {
            stats_.outcome = SolveOutcome::Converged;
            stats_.final_relative_residual = std::sqrt(rr / bb_);
            return finish(events0);
        }

        w_.rhat.assign_interior(w_.r);
        const double rho_floor = 1e-30 * rr;  // 1e-30 ||r0|| ||rhat0||
        double rho = rr;                      // (rhat, r0)
        double rho_prev = 1.0;
        double alpha = 1.0;
        double omega = 1.0;
        bool first = true;
        const bool ganged = cfg_.variant == BicgstabVariant::Ganged;

        for (int k = 1; k <= max_iter; ++k) {
            if (!ganged) rho = ganged_dot(comm_, path_, {{&w_.rhat, &w_.r}})[0];
            if (!(std::abs(rho) >= rho_floor)) return breakdown(BreakdownKind::RhoZero, events0);

            if (first) {
                w_.p.assign_interior(w_.r);
                first = false;
            } else {
                const double beta = (rho / rho_prev) * (alpha / omega);
                field_ops::ddaxpy(path_, beta, w_.p, -beta * omega, w_.v, w_.r, w_.p);
            }
            precondition(w_.p, w_.phat);
            matvec(w_.phat, w_.v);

            const double rv = ganged_dot(comm_, path_, {{&w_.rhat, &w_.v}})[0];
            if (!(std::abs(rv) > 0.0) || !std::isfinite(rv)) {
                return breakdown(BreakdownKind::RhoZero, events0);
            }
            alpha = rho / rv;
            field_ops::dscal(path_, w_.r, alpha, w_.v, w_.s);
            precondition(w_.s, w_.shat);
            matvec(w_.shat, w_.t);

            std::vector<double> g;
            if (ganged) {
                g = ganged_dot(comm_, path_,
                               {{&w_.t, &w_.s}, {&w_.t, &w_.t}, {&w_.s, &w_.s}, {&w_.rhat, &w_.s},
                                {&w_.rhat, &w_.t}});
            } else {
                g = ganged_dot(comm_, path_, {{&w_.t, &w_.s}, {&w_.t, &w_.t}, {&w_.s, &w_.s}});
            }
            const double ts = g[0];
            const double tt = g[1];
            const double ss = g[2];
            stats_.iterations = k;

            if (ss <= tol2) {
                // x += alpha phat; s is the residual of that half step.
                field_ops::daxpy(path_, alpha, w_.phat, x_, x_);
                stats_.half_step_exit = true;
                stats_.residual_history.push_back(std::sqrt(ss / bb_));
                notify(k);
                if (recheck()) return finish(events0);
                stats_.half_step_exit = false;
                first = true;  // restart the direction from the true residual
                rho = rho_from_recheck_;
                continue;
            }
            if (!(tt >= 1e-300)) {
                field_ops::daxpy(path_, alpha, w_.phat, x_, x_);
                return breakdown(BreakdownKind::OmegaZero, events0);
            }
            omega = ts / tt;
            if (omega == 0.0 || !std::isfinite(omega)) {
                field_ops::daxpy(path_, alpha, w_.phat, x_, x_);
                return breakdown(BreakdownKind::OmegaZero, events0);
            }

            field_ops::ddaxpy(path_, alpha, w_.phat, omega, w_.shat, x_, x_);
            field_ops::dscal(path_, w_.s, omega, w_.t, w_.r);
            rho_prev = rho;
            if (ganged) {
                rr = std::max(0.0, ss - 2.0 * omega * ts + omega * omega * tt);
                rho = g[3] - omega * g[4];
            } else {
                rr = ganged_dot(comm_, path_, {{&w_.r, &w_.r}})[0];
            }
            stats_.residual_history.push_back(std::sqrt(rr / bb_));
            notify(k);

            if (rr <= tol2) {
                if (recheck()) return finish(events0);
                // Recursive residual drifted: continue from the true residual.
                rho = rho_from_recheck_;
            }
        }

        // Cap reached. A final true residual inside the tolerance still counts
        // as converged; otherwise the outcome stays MaxIter.
        stats_.outcome = SolveOutcome::MaxIter;
        if (!checked_at_current_x_) recheck();
        return finish(events0);
    }

private:
    void matvec(Field& in, Field& out) {
        comm_.halo_exchange(in, zero_bc_);
        apply_operator(a_, in, out, path_);
        ++stats_.matvec_count;
        checked_at_current_x_ = false;
    }

    void precondition(Field& in, Field& out) {
        if (m_.needs_halo()) comm_.halo_exchange(in, zero_bc_);
        apply_precond(m_, in, out, path_);
    }

    void notify(int k) {
        checked_at_current_x_ = false;
        if (observer_) observer_(k, x_);
    }

    /// r = b - A x recomputed; on success marks the run converged. On failure
    /// r is replaced by the true residual and (rhat, r) is left for the caller.
    bool recheck() {
        matvec(x_, w_.t);
        field_ops::dscal(path_, b_, 1.0, w_.t, w_.r);
        const auto g = ganged_dot(comm_, path_, {{&w_.r, &w_.r}, {&w_.rhat, &w_.r}});
        ++stats_.true_residual_checks;
        checked_at_current_x_ = true;
        stats_.final_relative_residual = std::sqrt(g[0] / bb_);
        rho_from_recheck_ = g[1];
        if (stats_.final_relative_residual <= cfg_.tol) {
            stats_.outcome = SolveOutcome::Converged;
            return true;
        }
        return false;
    }

    SolverStats breakdown(BreakdownKind kind, std::uint64_t events0) {
        recheck();
        stats_.outcome = SolveOutcome::Breakdown;
        stats_.breakdown = kind;
        return finish(events0);
    }

    SolverStats finish(std::uint64_t events0) {
        stats_.reduction_events = comm_.reduction_events() - events0;
        return std::move(stats_);
    }

    Communicator& comm_;
    const OperatorSpec& a_;
    const PreconditionerSpec& m_;
    const Field& b_;
    Field& x_;
    const SolverConfig& cfg_;
    const IterateObserver& observer_;
    Workspace w_;
    kernels::KernelPath path_;
    BoundaryCondition zero_bc_;
    SolverStats stats_;
    double bb_ = 0.0;
    double rho_from_recheck_ = 0.0;
    bool checked_at_current_x_ = false;
};

}  // namespace

SolverStats bicgstab(Communicator& comm, const OperatorSpec& a, const PreconditionerSpec& m,
                     const Field& b, Field& x, const SolverConfig& cfg,
                     const IterateObserver& observer) {
    return Bicgstab(comm, a, m, b, x, cfg, observer).run();
}

SolverStats bicgstab(const OperatorSpec& a, const PreconditionerSpec& m, const Field& b, Field& x,
                     const SolverConfig& cfg, const IterateObserver& observer) {
    Communicator comm(TileTopology::decompose(a.grid, 1, 1));
    return bicgstab(comm, a, m, b, x, cfg, observer);
}

std::vector<std::pair<std::vector<double>, std::vector<double>>>
bicgstab_variant_equivalence_probe(const OperatorSpec& a, const PreconditionerSpec& m,
                                   const Field& b, const Field& x0, int n_iters,
                                   kernels::KernelPath path) {
    auto collect = [&](BicgstabVariant variant) {
        SolverConfig cfg;
        cfg.variant = variant;
        cfg.max_iter = n_iters;
        cfg.tol = 1e-300;
        cfg.path = path;
        std::vector<std::vector<double>> iterates;
        Field x = x0;
        (void)bicgstab(a, m, b, x, cfg, [&](int, const Field& xk) { iterates.push_back(xk.flatten()); });
        return iterates;
    };
    auto classic = collect(BicgstabVariant::Classic);
    auto ganged = collect(BicgstabVariant::Ganged);
    std::vector<std::pair<std::vector<double>, std::vector<double>>> out;
    const std::size_t n = std::min(classic.size(), ganged.size());
    for (std::size_t k = 0; k < n; ++k) out.emplace_back(std::move(classic[k]), std::move(ganged[k]));
    return out;
}

}  // namespace fld
