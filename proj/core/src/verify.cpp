#include "obstacle/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "obstacle/errors.hpp"

namespace obstacle {

namespace {

double sup_norm(const Eigen::VectorXd& v) {
    return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

double contact_tol(const ObstacleSolution& sol) {
    return sol.contact_tol > 0.0 ? sol.contact_tol : 1e-6;
}

Eigen::VectorXd truncate(const Eigen::VectorXd& u, double k) {
    return u.cwiseMax(-k).cwiseMin(k);
}

double tv_density(const Grid& g, const Eigen::VectorXd& rho) {
    return g.l1_norm(rho);
}

/// Normalized complementarity pairing for one side.
double pairing(const Grid& g, const Eigen::VectorXd& gapv, const Eigen::VectorXd& rho,
               double eps_c) {
    const double raw = std::abs((g.mass().array() * gapv.array() * rho.array()).sum());
    const double tv = tv_density(g, rho);
    if (tv == 0.0) return 0.0;
    const double scale = tv * std::max(sup_norm(gapv), eps_c);
    return raw / scale;
}

bool barriers_equal(const std::optional<Eigen::VectorXd>& b1,
                    const std::optional<Eigen::VectorXd>& b2) {
    if (b1.has_value() != b2.has_value()) return false;
    if (!b1) return true;
    return sup_norm(*b1 - *b2) <= 1e-14 * (1.0 + sup_norm(*b1));
}

/// h1-ordering with absent = -inf, h2-ordering with absent = +inf.
bool barrier_leq(const std::optional<Eigen::VectorXd>& lo,
                 const std::optional<Eigen::VectorXd>& hi, bool lower_barrier,
                 double tol) {
    if (lower_barrier) {
        if (!lo) return true;
        if (!hi) return false;
    } else {
        if (!hi) return true;
        if (!lo) return false;
    }
    return ((*lo - *hi).array() <= tol).all();
}

}  // namespace

bool VerificationReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const Check& c) { return c.pass; });
}

Check check_complementarity(const ObstacleSolution& sol, const ObstacleProblem& prob,
                            double eps) {
    const Grid& g = prob.op->grid;
    const double eps_c = contact_tol(sol);
    double lhs = 0.0;
    if (prob.h1)
        lhs = std::max(lhs, pairing(g, sol.u - *prob.h1, sol.nu.plus.density(), eps_c));
    if (prob.h2)
        lhs = std::max(lhs, pairing(g, *prob.h2 - sol.u, sol.nu.minus.density(), eps_c));
    return {"complementarity", lhs <= eps, lhs, eps, eps};
}

std::vector<Check> check_comparison(const ObstacleSolution& sol1,
                                    const ObstacleSolution& sol2,
                                    const ObstacleProblem& prob1,
                                    const ObstacleProblem& prob2, double tol) {
    const Grid& g = prob1.op->grid;
    const double ptol = 1e-12 * (1.0 + sup_norm(lump(prob1.mu, g)) +
                                 sup_norm(lump(prob2.mu, g)));
    if (((lump(prob1.mu, g) - lump(prob2.mu, g)).array() > ptol).any())
        throw PreconditionError("check_comparison: requires mu1 <= mu2 after lumping");
    if (!barrier_leq(prob1.h1, prob2.h1, true, ptol) ||
        !barrier_leq(prob1.h2, prob2.h2, false, ptol))
        throw PreconditionError("check_comparison: requires ordered barriers");

    // Cross inequality on the nonlinearities, sampled at the solution values.
    std::vector<double> samples;
    for (int i = 0; i < sol1.u.size(); ++i) {
        samples.push_back(sol1.u[i]);
        samples.push_back(sol2.u[i]);
    }
    const bool f1_h1 = prob1.f.monotonicity_audit(samples);
    const bool f2_h1 = prob2.f.monotonicity_audit(samples);
    const bool cross_at_u2 =
        ((prob1.f.eval(sol2.u) - prob2.f.eval(sol2.u)).array() <= ptol).all();
    const bool cross_at_u1 =
        ((prob1.f.eval(sol1.u) - prob2.f.eval(sol1.u)).array() <= ptol).all();
    if (!((f1_h1 && cross_at_u2) || (f2_h1 && cross_at_u1)))
        throw PreconditionError(
            "check_comparison: needs one side satisfying (H1) with f1 <= f2 at the "
            "other solution");

    std::vector<Check> out;
    const double viol_u = (sol1.u - sol2.u).maxCoeff();
    out.push_back({"comparison_u", viol_u <= tol, viol_u, tol, tol});
    if (barriers_equal(prob1.h1, prob2.h1) && barriers_equal(prob1.h2, prob2.h2)) {
        const double viol_nu = (sol2.nu_net() - sol1.nu_net()).maxCoeff();
        out.push_back({"comparison_nu", viol_nu <= tol, viol_nu, tol, tol});
    }
    return out;
}

namespace {

struct NormBoundParts {
    double mu_tv, f0, lambda_plus, lambda_minus, fv_minus, fv_plus;
};

NormBoundParts norm_bound_parts(const ObstacleProblem& prob, const Eigen::VectorXd& v) {
    const Grid& g = prob.op->grid;
    const Eigen::VectorXd lambda = prob.op->A * v;
    const Eigen::VectorXd fv = prob.f.eval(v);
    NormBoundParts p;
    p.mu_tv = total_variation(prob.mu, g);
    p.f0 = g.l1_norm(prob.f.g());
    p.lambda_plus = (g.mass().array() * lambda.array().max(0.0)).sum();
    p.lambda_minus = (g.mass().array() * (-lambda.array()).max(0.0)).sum();
    p.fv_minus = (g.mass().array() * (-fv.array()).max(0.0)).sum();
    p.fv_plus = (g.mass().array() * fv.array().max(0.0)).sum();
    return p;
}

const Eigen::VectorXd& require_separating_v(const ObstacleProblem& prob) {
    if (!prob.separating_v)
        throw PreconditionError("norm bound check: missing separating_v");
    return *prob.separating_v;
}

}  // namespace

Check check_norm_bound_one_sided(const ObstacleSolution& sol,
                                 const ObstacleProblem& prob, double tol) {
    const Eigen::VectorXd& v = require_separating_v(prob);
    if (!prob.h1) throw PreconditionError("check_norm_bound_one_sided: needs h1");
    const double eps_c = contact_tol(sol);
    if (((*prob.h1 - v).array() > eps_c).any())
        throw PreconditionError("check_norm_bound_one_sided: v is not >= h1");
    const Grid& g = prob.op->grid;
    const NormBoundParts p = norm_bound_parts(prob, v);
    const double lhs = tv_density(g, sol.nu.plus.density()) +
                       tv_density(g, sol.nu.minus.density());
    const double rhs_raw = 2.0 * (p.mu_tv + p.f0 + p.lambda_plus + p.fv_minus);
    const double rhs = rhs_raw + tol * (1.0 + rhs_raw);
    return {"norm_bound_one_sided", lhs <= rhs, lhs, rhs, tol};
}

std::vector<Check> check_norm_bound_two_sided(const ObstacleSolution& sol,
                                              const ObstacleProblem& prob, double tol) {
    const Eigen::VectorXd& v = require_separating_v(prob);
    if (!prob.h1 || !prob.h2)
        throw PreconditionError("check_norm_bound_two_sided: needs both barriers");
    const double eps_c = contact_tol(sol);
    if (((*prob.h1 - v).array() > eps_c).any() ||
        ((v - *prob.h2).array() > eps_c).any())
        throw PreconditionError("check_norm_bound_two_sided: v not between barriers");
    const Grid& g = prob.op->grid;
    const NormBoundParts p = norm_bound_parts(prob, v);
    const double plus_tv = tv_density(g, sol.nu.plus.density());
    const double minus_tv = tv_density(g, sol.nu.minus.density());
    const double rhs_plus_raw = 3.0 * (p.mu_tv + p.f0 + p.lambda_plus + p.fv_minus);
    const double rhs_minus_raw = 3.0 * (p.mu_tv + p.f0 + p.lambda_minus + p.fv_plus);
    const double rhs_plus = rhs_plus_raw + tol * (1.0 + rhs_plus_raw);
    const double rhs_minus = rhs_minus_raw + tol * (1.0 + rhs_minus_raw);
    return {{"norm_bound_nu_plus", plus_tv <= rhs_plus, plus_tv, rhs_plus, tol},
            {"norm_bound_nu_minus", minus_tv <= rhs_minus, minus_tv, rhs_minus, tol}};
}

Check check_energy_truncation(const ObstacleSolution& sol, const ObstacleProblem& prob,
                              double k, double tol) {
    if (k < 0.0) throw PreconditionError("check_energy_truncation: k must be >= 0");
    const Grid& g = prob.op->grid;
    const Eigen::VectorXd tu = truncate(sol.u, k);
    const double energy =
        (g.mass().array() * (prob.op->A * tu).array() * tu.array()).sum();
    const double nu_tv = tv_density(g, sol.nu.plus.density()) +
                         tv_density(g, sol.nu.minus.density());
    const double rhs_raw =
        2.0 * k * (total_variation(prob.mu, g) + nu_tv + g.l1_norm(prob.f.g()));
    const double rhs = rhs_raw + tol;
    return {"energy_truncation", energy <= rhs, energy, rhs, tol};
}

EnvelopeResult check_envelope(const ObstacleSolution& sol, const ObstacleProblem& prob,
                              int n_samples, std::uint64_t seed, double tol,
                              double tol_repro, const SolverOptions& solver) {
    if (!prob.h1) throw PreconditionError("check_envelope: needs h1");
    const AssembledOperator& op = *prob.op;
    const Grid& g = op.grid;
    // PDE(f + mu - nu^- + lambda): the one-sided reduction of the problem.
    const MeasureData mu_eff = prob.mu.plus(sol.nu.minus.negate());

    // lambda = nu+ must reproduce u itself.
    const Eigen::VectorXd v0 =
        solve_semilinear(op, prob.f, mu_eff.plus(sol.nu.plus), solver);
    const double repro = sup_norm(v0 - sol.u);
    Check reproduction{"envelope_reproduction", repro <= tol_repro, repro, tol_repro,
                       tol_repro};

    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double wmax = 2.0 * total_variation(prob.mu, g) + 1.0;

    EnvelopeResult res{Check{"envelope", true, 0.0, tol, tol}, reproduction, 0, 0};
    double worst = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < n_samples; ++s) {
        Eigen::VectorXd dens = Eigen::VectorXd::Constant(g.n(), wmax * unit(eng));
        std::vector<Atom> atoms;
        const int n_atoms = static_cast<int>(4.0 * unit(eng));  // 0..3
        for (int a = 0; a < n_atoms; ++a) {
            const double pos = g.a() + (g.b() - g.a()) * (0.02 + 0.96 * unit(eng));
            atoms.push_back({pos, wmax * unit(eng)});
        }
        const MeasureData lambda(std::move(dens), std::move(atoms));
        const Eigen::VectorXd v = solve_semilinear(op, prob.f, mu_eff.plus(lambda), solver);
        if (((*prob.h1 - v).array() > 0.5 * tol).any()) {
            ++res.skipped;
            continue;
        }
        ++res.admissible;
        worst = std::max(worst, (sol.u - v).maxCoeff());
    }
    if (res.admissible > 0) res.envelope.lhs = worst;
    res.envelope.pass = res.envelope.lhs <= tol;
    return res;
}

Check check_lewy_stampacchia(const ObstacleSolution& sol, const ObstacleProblem& prob,
                             double tol) {
    if (!prob.h1) throw PreconditionError("check_lewy_stampacchia: h1 is infinite");
    const AssembledOperator& op = *prob.op;
    // s = f(., h1) m + mu + L h1 as a node density (A is -L).
    const Eigen::VectorXd s =
        prob.f.eval(*prob.h1) + lump(prob.mu, op.grid) - op.A * *prob.h1;
    Eigen::VectorXd bound = Eigen::VectorXd::Zero(op.n());
    for (int i : sol.active_lower) bound[i] = std::max(-s[i], 0.0);
    const double viol = (sol.nu.plus.density() - bound).maxCoeff();
    return {"lewy_stampacchia", viol <= tol, viol, tol, tol};
}

VerificationReport run_all_checks(const ObstacleSolution& sol,
                                  const ObstacleProblem& prob,
                                  const CheckOptions& opts) {
    VerificationReport rep;
    rep.add(check_complementarity(sol, prob, opts.eps_comp));

    // Norm bounds with the user's v, or the clamped solution as the default
    // admissible choice.
    ObstacleProblem withv = prob;
    if (!withv.separating_v) {
        Eigen::VectorXd v = sol.u;
        if (prob.h1) v = v.cwiseMax(*prob.h1);
        if (prob.h2) v = v.cwiseMin(*prob.h2);
        withv.separating_v = std::move(v);
    }
    if (prob.h1 && prob.h2) {
        rep.add(check_norm_bound_two_sided(sol, withv, opts.tol));
    } else if (prob.h1) {
        rep.add(check_norm_bound_one_sided(sol, withv, opts.tol));
    }

    const double umax = sup_norm(sol.u);
    for (int j = 1; j <= 10; ++j)
        rep.add(check_energy_truncation(sol, prob, 0.1 * j * umax, opts.tol * 0.01));

    if (prob.h1) {
        rep.add(check_lewy_stampacchia(sol, prob, opts.tol));
        EnvelopeResult env = check_envelope(sol, prob, opts.envelope_samples, opts.seed,
                                            opts.tol, opts.tol_repro, opts.solver);
        rep.add(env.envelope);
        rep.add(env.reproduction);
        rep.envelope_admissible = env.admissible;
        rep.envelope_skipped = env.skipped;
    }

    if (opts.with_comparison) {
        // Same problem with one extra positive atom at the midpoint.
        ObstacleProblem bumped = prob;
        const Grid& g = prob.op->grid;
        bumped.mu = prob.mu.plus(
            MeasureData(Eigen::VectorXd::Zero(g.n()), {{0.5 * (g.a() + g.b()), 0.5}}));
        ObstacleSolution sol2 = (prob.h1 && prob.h2)
                                    ? solve_obstacle_two_sided(bumped, opts.solver)
                                    : (prob.h1 ? solve_obstacle_one_sided(bumped, opts.solver)
                                               : solve_obstacle_two_sided(bumped, opts.solver));
        rep.add(check_comparison(sol, sol2, prob, bumped, opts.tol));
    }
    return rep;
}

}  // namespace obstacle
