#pragma once

#include <cstdint>

#include "obstacle/solver.hpp"

namespace obstacle {

/// Monte Carlo configuration for the representation-formula check.
/// Requires dt <= h^2/2 (resolution consistency) and n_paths >= 100.
struct McConfig {
    double x0 = 0.5;
    long n_paths = 100000;
    double dt = 1e-4;
    std::uint64_t seed = 1;
    bool use_exit_correction = true;
};

struct McEstimate {
    double estimate = 0.0;
    double half_width_95 = 0.0;
    long n_paths = 0;
    double mean_steps = 0.0;
    double mean_exit_time = 0.0;
    double bridge_kill_fraction = 0.0;
};

/// Estimate u(x0) from killed Brownian paths (dX = sqrt(2) dW, generator
/// d^2/dx^2, killed at exit from (a,b)) accumulating
/// f(X, u(X)) + rho_mu(X) + rho_nu(X) along the path, with u and the lumped
/// densities interpolated linearly (atoms enter mollified through lumping).
/// Per-path random streams derive deterministically from (seed, path index):
/// splitmix64 of the pair seeds an mt19937_64, normals by Box-Muller.
/// Requires the Dirichlet Laplacian (alpha = 2).
McEstimate estimate_u(const AssembledOperator& op, const Nonlinearity& f,
                      const MeasureData& mu, const SignedDecomposition& nu,
                      const Eigen::VectorXd& u, const McConfig& cfg);

/// Convenience overload for a solved obstacle instance.
McEstimate estimate_u(const ObstacleProblem& prob, const ObstacleSolution& sol,
                      const McConfig& cfg);

}  // namespace obstacle
