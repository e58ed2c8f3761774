#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "obstacle/measure.hpp"
#include "obstacle/nonlinearity.hpp"
#include "obstacle/operators.hpp"

namespace obstacle {

/// One- or two-sided obstacle problem -Lu = f(x,u) + mu + nu, h1 <= u <= h2.
/// Barriers are node vectors; an absent barrier means -inf / +inf.
/// separating_v, when present, feeds the norm-bound checks (lambda = A v).
struct ObstacleProblem {
    std::shared_ptr<const AssembledOperator> op;
    Nonlinearity f;
    MeasureData mu;
    std::optional<Eigen::VectorXd> h1;
    std::optional<Eigen::VectorXd> h2;
    std::optional<Eigen::VectorXd> separating_v;
};

/// Throws PreconditionError on barrier ordering / dimension violations.
void validate(const ObstacleProblem& prob, bool require_barrier);

struct SolverOptions {
    double tol_newton = 1e-10;  // residual tol, relative to the data scale
    double tol_cont = 1e-6;     // continuation increment tol, * (1 + |u|_inf)
    double contact_rtol = 1e-6; // eps_c = contact_rtol * (1 + |h|_inf)
    double penalty_start = 1.0;
    double penalty_growth = 2.0;
    int max_steps = 40;         // continuation steps (penalty cap ~ 2^40)
    int max_newton = 100;
    int max_halvings = 30;
    int max_picard = 500;
    long max_sweeps = 2'000'000;  // projected Gauss-Seidel oracle
    double oracle_rtol = 1e-10;   // oracle residual tol, relative to data scale
};

struct PenaltyStep {
    double n_pen;
    double k_pen;      // 0 when no upper penalty
    double increment;  // sup-norm change from the previous iterate
};

/// Solution pair (u, nu) with diagnostics. nu carries lumped node densities
/// (no atoms); plus is supported in active_lower, minus in active_upper.
struct ObstacleSolution {
    Eigen::VectorXd u;
    SignedDecomposition nu;
    std::vector<int> active_lower;
    std::vector<int> active_upper;
    std::vector<PenaltyStep> penalty_trace;
    double residual_norm = 0.0;   // sup-norm of A u - f(u) - mu - nu
    int iterations = 0;           // total Newton iterations
    double final_n_pen = 0.0;
    double final_k_pen = 0.0;
    double contact_tol = 0.0;     // eps_c used for the active sets
    /// Sup-norm gap between the converged penalty density and the residual
    /// recovery of nu; large values flag penalty ill-conditioning.
    double penalty_cross_check = 0.0;

    Eigen::VectorXd nu_net() const {
        return nu.plus.density() - nu.minus.density();
    }
};

/// Semilinear solve A u = f(u) + lump(mu) by damped Newton (Picard fallback).
/// Throws SolverError(NonConvergence) when f violates (H1) badly enough to
/// defeat both.
Eigen::VectorXd solve_semilinear(const AssembledOperator& op, const Nonlinearity& f,
                                 const MeasureData& mu, const SolverOptions& opts = {});

/// Penalized one-sided equation A u = f(u) + lump(mu) + n_pen (h1 - u)^+.
Eigen::VectorXd solve_penalized_one_sided(const AssembledOperator& op,
                                          const Nonlinearity& f, const MeasureData& mu,
                                          const Eigen::VectorXd& h1, double n_pen,
                                          const SolverOptions& opts = {});

/// Doubly penalized equation
/// A u = f(u) + lump(mu) + n_pen (h1 - u)^+ - k_pen (u - h2)^+.
Eigen::VectorXd solve_two_sided_doubly_penalized(const AssembledOperator& op,
                                                 const Nonlinearity& f,
                                                 const MeasureData& mu,
                                                 const Eigen::VectorXd& h1,
                                                 const Eigen::VectorXd& h2, double n_pen,
                                                 double k_pen,
                                                 const SolverOptions& opts = {});

/// Lower-obstacle problem by penalty continuation n = penalty_start * growth^j.
/// Requires h1 finite and h2 absent.
ObstacleSolution solve_obstacle_one_sided(const ObstacleProblem& prob,
                                          const SolverOptions& opts = {});

/// Two-sided problem by the sequential scheme: outer loop over the upper
/// penalty k, each step solving the lower-obstacle problem with the extra
/// -k (u - h2)^+ reaction folded in; u_k is nonincreasing in k. Delegates to
/// the one-sided solver (directly or reflected) when a barrier is absent.
ObstacleSolution solve_obstacle_two_sided(const ObstacleProblem& prob,
                                          const SolverOptions& opts = {});

/// One step (u_k, alpha_k) of the sequential scheme at a fixed upper penalty
/// k_pen: the lower-obstacle problem for f - k_pen (u - h2)^+. Requires both
/// barriers. nu.plus is the inner reaction alpha_k, nu.minus the upper
/// penalty density k_pen (u - h2)^+.
ObstacleSolution solve_sequential_step(const ObstacleProblem& prob, double k_pen,
                                       const SolverOptions& opts = {});

/// Independent complementarity oracle: projected Gauss-Seidel with clamping
/// at h1. Ground truth for cross-validation; shares no path with the penalty
/// solvers.
ObstacleSolution lcp_oracle_one_sided(const ObstacleProblem& prob,
                                      const SolverOptions& opts = {});

/// Projected Gauss-Seidel clamped to [h1, h2].
ObstacleSolution lcp_oracle_two_sided(const ObstacleProblem& prob,
                                      const SolverOptions& opts = {});

}  // namespace obstacle
