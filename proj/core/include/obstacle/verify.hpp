#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "obstacle/solver.hpp"

namespace obstacle {

/// One verified inequality; carries both sides so reports are auditable.
struct Check {
    std::string name;
    bool pass;
    double lhs;
    double rhs;
    double tol;
};

struct VerificationReport {
    std::vector<Check> checks;
    int envelope_admissible = 0;
    int envelope_skipped = 0;

    bool all_pass() const;
    void add(Check c) { checks.push_back(std::move(c)); }
    void add(const std::vector<Check>& cs) {
        checks.insert(checks.end(), cs.begin(), cs.end());
    }
};

/// Complementarity pairings sum m (u-h1) nu+ and sum m (h2-u) nu-, each
/// normalized by |nu|_TV * max(|u-h|_inf, eps_c); passes when both stay
/// below eps.
Check check_complementarity(const ObstacleSolution& sol, const ObstacleProblem& prob,
                            double eps);

/// Comparison principle u1 <= u2 (+ reaction ordering nu1 >= nu2 when the
/// barriers coincide). Throws PreconditionError unless the data is ordered:
/// lumped mu1 <= mu2, barriers ordered nodewise, and one nonlinearity
/// satisfying (H1) with the cross inequality.
std::vector<Check> check_comparison(const ObstacleSolution& sol1,
                                    const ObstacleSolution& sol2,
                                    const ObstacleProblem& prob1,
                                    const ObstacleProblem& prob2, double tol);

/// |nu| <= 2 (|mu| + |f0| + |lambda+| + |f_v^-|) with lambda = A v.
/// Requires prob.separating_v (one-sided admissible: v >= h1).
Check check_norm_bound_one_sided(const ObstacleSolution& sol,
                                 const ObstacleProblem& prob, double tol);

/// The two factor-3 bounds for nu+ and nu-; requires h1 <= v <= h2.
std::vector<Check> check_norm_bound_two_sided(const ObstacleSolution& sol,
                                              const ObstacleProblem& prob, double tol);

/// Energy of the truncation: sum m (A T_k u) (T_k u) <= 2k (|mu|+|nu|+|f0|).
Check check_energy_truncation(const ObstacleSolution& sol, const ObstacleProblem& prob,
                              double k, double tol);

struct EnvelopeResult {
    Check envelope;      // no admissible supersolution falls below u
    Check reproduction;  // lambda = nu+ reproduces v = u
    int admissible = 0;
    int skipped = 0;
};

/// Samples n_samples nonnegative measures lambda (uniform densities plus 0-3
/// atoms with weights in [0, 2|mu|+1]), solves v = PDE(f + mu - nu^- + lambda)
/// and asserts u <= v + tol whenever v >= h1 - tol/2. Samples below the
/// barrier are skipped and counted.
EnvelopeResult check_envelope(const ObstacleSolution& sol, const ObstacleProblem& prob,
                              int n_samples, std::uint64_t seed, double tol,
                              double tol_repro = 1e-8,
                              const SolverOptions& solver = {});

/// Nodewise nu+ <= 1_{u=h1} (f(.,h1) m + mu + L h1)^- + tol.
Check check_lewy_stampacchia(const ObstacleSolution& sol, const ObstacleProblem& prob,
                             double tol);

struct CheckOptions {
    double eps_comp = 1e-6;
    double tol = 1e-6;
    double tol_repro = 1e-8;
    int envelope_samples = 200;
    std::uint64_t seed = 1;
    bool with_comparison = true;
    SolverOptions solver;
};

/// Run every applicable check on a solved instance: complementarity, norm
/// bounds (separating_v defaults to the clamped solution), the energy sweep
/// k in {0.1,...,1.0} |u|_inf, Lewy-Stampacchia, the envelope sampling, and a
/// comparison against the same problem with an extra positive atom.
VerificationReport run_all_checks(const ObstacleSolution& sol,
                                  const ObstacleProblem& prob,
                                  const CheckOptions& opts = {});

}  // namespace obstacle
