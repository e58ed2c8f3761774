#include "obstacle/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "obstacle/errors.hpp"

namespace obstacle {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();

double sup_norm(const Eigen::VectorXd& v) {
    return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

/// 1 + |lump(mu)|_inf + |f(.,0)|_inf; the residual scale of the problem data.
double data_scale(const Nonlinearity& f, const Eigen::VectorXd& rhs0) {
    return 1.0 + sup_norm(rhs0) + sup_norm(f.g());
}

/// Optional upper-penalty term folded into the one-sided machinery.
struct UpperPenalty {
    const Eigen::VectorXd* h2 = nullptr;
    double k_pen = 0.0;
};

/// Residual F(u) = A u - f(u) - rhs0 - n (h1-u)^+ + k (u-h2)^+.
Eigen::VectorXd penalized_residual(const AssembledOperator& op, const Nonlinearity& f,
                                   const Eigen::VectorXd& rhs0,
                                   const Eigen::VectorXd* h1, double n_pen,
                                   const UpperPenalty& up, const Eigen::VectorXd& u) {
    Eigen::VectorXd F = op.A * u - f.eval(u) - rhs0;
    if (h1) F -= n_pen * (*h1 - u).cwiseMax(0.0);
    if (up.h2) F += up.k_pen * (u - *up.h2).cwiseMax(0.0);
    return F;
}

/// Quantization floor of the residual evaluation: with penalty factors around
/// 1e9+ the products n (h1-u)^+ move in steps of n*ulp, so no iterate can push
/// the residual below this level.
double residual_floor(const AssembledOperator& op, const Eigen::VectorXd* h1,
                      double n_pen, const UpperPenalty& up, const Eigen::VectorXd& u) {
    const double u_mag = 1.0 + sup_norm(u);
    double floor = 8.0 * kEps * op.A.cwiseAbs().rowwise().sum().maxCoeff() * u_mag;
    if (h1) floor += 8.0 * kEps * n_pen * (u_mag + sup_norm(*h1));
    if (up.h2) floor += 8.0 * kEps * up.k_pen * (u_mag + sup_norm(*up.h2));
    return floor;
}

struct NewtonResult {
    Eigen::VectorXd u;
    double residual;
    int iterations;
};

/// Damped semismooth Newton for the (possibly doubly) penalized system, with
/// a frozen-active-set Picard fallback. Throws SolverError(NonConvergence).
NewtonResult newton_penalized(const AssembledOperator& op, const Nonlinearity& f,
                              const Eigen::VectorXd& rhs0, const Eigen::VectorXd* h1,
                              double n_pen, const UpperPenalty& up,
                              Eigen::VectorXd u, const SolverOptions& opts) {
    const double tol_abs = opts.tol_newton * data_scale(f, rhs0);
    int iters = 0;

    auto threshold = [&](const Eigen::VectorXd& v) {
        return std::max(tol_abs, residual_floor(op, h1, n_pen, up, v));
    };

    Eigen::VectorXd F = penalized_residual(op, f, rhs0, h1, n_pen, up, u);
    for (; iters < opts.max_newton; ++iters) {
        if (sup_norm(F) <= threshold(u)) return {std::move(u), sup_norm(F), iters};

        Eigen::MatrixXd J = op.A;
        J.diagonal() -= f.derivative(u);
        if (h1)
            for (int i = 0; i < op.n(); ++i)
                if (u[i] < (*h1)[i]) J(i, i) += n_pen;
        if (up.h2)
            for (int i = 0; i < op.n(); ++i)
                if (u[i] > (*up.h2)[i]) J(i, i) += up.k_pen;

        Eigen::VectorXd d = J.ldlt().solve(-F);
        if (!d.allFinite()) break;

        const double merit = F.norm();
        double s = 1.0;
        bool accepted = false;
        for (int half = 0; half <= opts.max_halvings; ++half, s *= 0.5) {
            Eigen::VectorXd u_try = u + s * d;
            Eigen::VectorXd F_try =
                penalized_residual(op, f, rhs0, h1, n_pen, up, u_try);
            if (F_try.norm() <= merit * (1.0 - 1e-4 * s) ||
                sup_norm(F_try) <= threshold(u_try)) {
                u = std::move(u_try);
                F = std::move(F_try);
                accepted = true;
                break;
            }
        }
        if (!accepted) break;  // line search failed, fall back to Picard
    }
    if (sup_norm(F) <= threshold(u)) return {std::move(u), sup_norm(F), iters};

    // Picard with implicit penalties on the frozen active sets.
    for (int p = 0; p < opts.max_picard; ++p, ++iters) {
        Eigen::MatrixXd M = op.A;
        Eigen::VectorXd rhs = f.eval(u) + rhs0;
        if (h1)
            for (int i = 0; i < op.n(); ++i)
                if (u[i] < (*h1)[i]) {
                    M(i, i) += n_pen;
                    rhs[i] += n_pen * (*h1)[i];
                }
        if (up.h2)
            for (int i = 0; i < op.n(); ++i)
                if (u[i] > (*up.h2)[i]) {
                    M(i, i) += up.k_pen;
                    rhs[i] += up.k_pen * (*up.h2)[i];
                }
        Eigen::VectorXd u_next = M.ldlt().solve(rhs);
        if (!u_next.allFinite()) break;
        u = std::move(u_next);
        F = penalized_residual(op, f, rhs0, h1, n_pen, up, u);
        if (sup_norm(F) <= threshold(u)) return {std::move(u), sup_norm(F), iters};
    }
    throw SolverError(SolverError::Kind::NonConvergence,
                      "penalized solve did not converge: the nonlinearity likely "
                      "violates (H1) (monotonicity in y) or the data is badly scaled");
}

struct ContinuationResult {
    Eigen::VectorXd u;
    std::vector<PenaltyStep> trace;
    double n_final = 0.0;
    int iterations = 0;
};

/// Penalty continuation for the lower obstacle, with an optional fixed upper
/// penalty (the inner solve of the sequential two-sided scheme). Stops when
/// the sup-norm increment drops below tol_cont * (1 + |u|_inf) and the
/// feasibility gap |(h1-u)^+|_inf is within a tenth of the contact tolerance.
ContinuationResult continue_lower(const AssembledOperator& op, const Nonlinearity& f,
                                  const Eigen::VectorXd& rhs0, const Eigen::VectorXd& h1,
                                  const UpperPenalty& up, Eigen::VectorXd u_start,
                                  double eps_c, const SolverOptions& opts) {
    ContinuationResult res;
    res.u = std::move(u_start);
    const double feas_tol = 0.1 * eps_c;
    double n_pen = opts.penalty_start;
    double prev_inc = kInf;
    int stall = 0;
    for (int j = 0; j < opts.max_steps; ++j) {
        NewtonResult step =
            newton_penalized(op, f, rhs0, &h1, n_pen, up, res.u, opts);
        res.iterations += step.iterations;
        const double inc = sup_norm(step.u - res.u);
        res.u = std::move(step.u);
        res.n_final = n_pen;
        res.trace.push_back({n_pen, up.h2 ? up.k_pen : 0.0, inc});

        const double tol_abs = opts.tol_cont * (1.0 + sup_norm(res.u));
        const double gap = sup_norm((h1 - res.u).cwiseMax(0.0));
        if (inc < tol_abs && gap <= feas_tol) return res;

        if (inc >= 0.95 * prev_inc && inc > 100.0 * tol_abs) {
            if (++stall >= 6)
                throw SolverError(
                    SolverError::Kind::ContinuationStalled,
                    "penalty continuation stalled: no admissible separating "
                    "configuration at this scale ((H5)/(H6) analogue fails)");
        } else {
            stall = 0;
        }
        prev_inc = inc;
        n_pen *= opts.penalty_growth;
    }
    return res;  // reaching max_steps is a normal exit
}

std::vector<int> contact_set_lower(const Eigen::VectorXd& u, const Eigen::VectorXd& h1,
                                   double eps_c) {
    std::vector<int> idx;
    for (int i = 0; i < u.size(); ++i)
        if (u[i] - h1[i] <= eps_c) idx.push_back(i);
    return idx;
}

std::vector<int> contact_set_upper(const Eigen::VectorXd& u, const Eigen::VectorXd& h2,
                                   double eps_c) {
    std::vector<int> idx;
    for (int i = 0; i < u.size(); ++i)
        if (h2[i] - u[i] <= eps_c) idx.push_back(i);
    return idx;
}

/// Recover nu from the residual A u - f(u) - rhs0, restricted to the contact
/// sets (node-level Jordan split). The converged penalty densities serve as a
/// cross-check only; see ObstacleSolution::penalty_cross_check.
void recover_reaction(const AssembledOperator& op, const Nonlinearity& f,
                      const Eigen::VectorXd& rhs0, const Eigen::VectorXd* h1,
                      const Eigen::VectorXd* h2, double eps_c,
                      ObstacleSolution& sol) {
    const int n = op.n();
    const Eigen::VectorXd net = op.A * sol.u - f.eval(sol.u) - rhs0;
    Eigen::VectorXd plus = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd minus = Eigen::VectorXd::Zero(n);
    sol.contact_tol = eps_c;
    if (h1) {
        sol.active_lower = contact_set_lower(sol.u, *h1, eps_c);
        for (int i : sol.active_lower) plus[i] = std::max(net[i], 0.0);
    }
    if (h2) {
        sol.active_upper = contact_set_upper(sol.u, *h2, eps_c);
        for (int i : sol.active_upper) minus[i] = std::max(-net[i], 0.0);
    }
    sol.residual_norm = sup_norm(net - (plus - minus));
    sol.nu = SignedDecomposition{MeasureData(std::move(plus)),
                                 MeasureData(std::move(minus))};
}

double barrier_sup(const ObstacleProblem& prob) {
    double m = 0.0;
    if (prob.h1) m = std::max(m, sup_norm(*prob.h1));
    if (prob.h2) m = std::max(m, sup_norm(*prob.h2));
    return m;
}

ObstacleProblem reflect(const ObstacleProblem& prob) {
    ObstacleProblem r;
    r.op = prob.op;
    r.f = prob.f.reflected();
    r.mu = prob.mu.negate();
    if (prob.h2) r.h1 = -*prob.h2;
    if (prob.h1) r.h2 = -*prob.h1;
    if (prob.separating_v) r.separating_v = -*prob.separating_v;
    return r;
}

ObstacleSolution unreflect(ObstacleSolution sol) {
    sol.u = -sol.u;
    std::swap(sol.nu.plus, sol.nu.minus);
    std::swap(sol.active_lower, sol.active_upper);
    return sol;
}

}  // namespace

void validate(const ObstacleProblem& prob, bool require_barrier) {
    if (!prob.op) throw PreconditionError("ObstacleProblem: missing operator");
    const int n = prob.op->n();
    if (prob.f.n() != n)
        throw PreconditionError("ObstacleProblem: nonlinearity size mismatch");
    if (prob.mu.density().size() != n)
        throw PreconditionError("ObstacleProblem: measure density size mismatch");
    if (prob.h1 && prob.h1->size() != n)
        throw PreconditionError("ObstacleProblem: h1 size mismatch");
    if (prob.h2 && prob.h2->size() != n)
        throw PreconditionError("ObstacleProblem: h2 size mismatch");
    if (prob.separating_v && prob.separating_v->size() != n)
        throw PreconditionError("ObstacleProblem: separating_v size mismatch");
    if (prob.h1 && prob.h2 && ((*prob.h1 - *prob.h2).array() > 0.0).any())
        throw PreconditionError("ObstacleProblem: requires h1 <= h2 nodewise");
    if (require_barrier && !prob.h1 && !prob.h2)
        throw PreconditionError("ObstacleProblem: obstacle solve needs a barrier");
}

Eigen::VectorXd solve_semilinear(const AssembledOperator& op, const Nonlinearity& f,
                                 const MeasureData& mu, const SolverOptions& opts) {
    const Eigen::VectorXd rhs0 = lump(mu, op.grid);
    NewtonResult r = newton_penalized(op, f, rhs0, nullptr, 0.0, {},
                                      Eigen::VectorXd::Zero(op.n()), opts);
    return r.u;
}

Eigen::VectorXd solve_penalized_one_sided(const AssembledOperator& op,
                                          const Nonlinearity& f, const MeasureData& mu,
                                          const Eigen::VectorXd& h1, double n_pen,
                                          const SolverOptions& opts) {
    if (!(n_pen > 0.0))
        throw PreconditionError("solve_penalized_one_sided: n_pen must be > 0");
    const Eigen::VectorXd rhs0 = lump(mu, op.grid);
    NewtonResult r = newton_penalized(op, f, rhs0, &h1, n_pen, {},
                                      Eigen::VectorXd::Zero(op.n()), opts);
    return r.u;
}

Eigen::VectorXd solve_two_sided_doubly_penalized(const AssembledOperator& op,
                                                 const Nonlinearity& f,
                                                 const MeasureData& mu,
                                                 const Eigen::VectorXd& h1,
                                                 const Eigen::VectorXd& h2, double n_pen,
                                                 double k_pen, const SolverOptions& opts) {
    if (!(n_pen > 0.0) || !(k_pen > 0.0))
        throw PreconditionError("solve_two_sided_doubly_penalized: penalties must be > 0");
    if (((h1 - h2).array() > 0.0).any())
        throw PreconditionError("solve_two_sided_doubly_penalized: requires h1 <= h2");
    const Eigen::VectorXd rhs0 = lump(mu, op.grid);
    UpperPenalty up{&h2, k_pen};
    NewtonResult r = newton_penalized(op, f, rhs0, &h1, n_pen, up,
                                      Eigen::VectorXd::Zero(op.n()), opts);
    return r.u;
}

ObstacleSolution solve_obstacle_one_sided(const ObstacleProblem& prob,
                                          const SolverOptions& opts) {
    validate(prob, true);
    if (!prob.h1 || prob.h2)
        throw PreconditionError(
            "solve_obstacle_one_sided: needs finite h1 and no upper barrier");
    const AssembledOperator& op = *prob.op;
    const Eigen::VectorXd rhs0 = lump(prob.mu, op.grid);
    const double eps_c = opts.contact_rtol * (1.0 + barrier_sup(prob));

    Eigen::VectorXd u0 = solve_semilinear(op, prob.f, prob.mu, opts);
    ContinuationResult cont =
        continue_lower(op, prob.f, rhs0, *prob.h1, {}, std::move(u0), eps_c, opts);

    ObstacleSolution sol;
    sol.u = std::move(cont.u);
    sol.penalty_trace = std::move(cont.trace);
    sol.iterations = cont.iterations;
    sol.final_n_pen = cont.n_final;
    recover_reaction(op, prob.f, rhs0, &*prob.h1, nullptr, eps_c, sol);
    sol.penalty_cross_check = sup_norm(
        cont.n_final * (*prob.h1 - sol.u).cwiseMax(0.0) - sol.nu.plus.density());
    return sol;
}

ObstacleSolution solve_sequential_step(const ObstacleProblem& prob, double k_pen,
                                       const SolverOptions& opts) {
    validate(prob, true);
    if (!prob.h1 || !prob.h2)
        throw PreconditionError("solve_sequential_step: needs both barriers");
    if (!(k_pen > 0.0))
        throw PreconditionError("solve_sequential_step: k_pen must be > 0");
    const AssembledOperator& op = *prob.op;
    const Eigen::VectorXd rhs0 = lump(prob.mu, op.grid);
    const double eps_c = opts.contact_rtol * (1.0 + barrier_sup(prob));

    Eigen::VectorXd u0 = solve_semilinear(op, prob.f, prob.mu, opts);
    UpperPenalty up{&*prob.h2, k_pen};
    ContinuationResult cont =
        continue_lower(op, prob.f, rhs0, *prob.h1, up, std::move(u0), eps_c, opts);

    ObstacleSolution sol;
    sol.u = std::move(cont.u);
    sol.penalty_trace = std::move(cont.trace);
    sol.iterations = cont.iterations;
    sol.final_n_pen = cont.n_final;
    sol.final_k_pen = k_pen;
    // The reaction of the inner problem: alpha_k, plus the upper penalty term.
    recover_reaction(op, prob.f, rhs0, &*prob.h1, &*prob.h2, eps_c, sol);
    return sol;
}

ObstacleSolution solve_obstacle_two_sided(const ObstacleProblem& prob,
                                          const SolverOptions& opts) {
    validate(prob, true);
    if (prob.h1 && !prob.h2) return solve_obstacle_one_sided(prob, opts);
    if (!prob.h1 && prob.h2)
        return unreflect(solve_obstacle_one_sided(reflect(prob), opts));

    const AssembledOperator& op = *prob.op;
    const Eigen::VectorXd rhs0 = lump(prob.mu, op.grid);
    const double eps_c = opts.contact_rtol * (1.0 + barrier_sup(prob));
    const double feas_tol = 0.1 * eps_c;

    ObstacleSolution sol;
    sol.u = solve_semilinear(op, prob.f, prob.mu, opts);
    double k_pen = opts.penalty_start;
    double n_final = 0.0;
    int iterations = 0;
    std::vector<PenaltyStep> trace;
    for (int j = 0; j < opts.max_steps; ++j) {
        UpperPenalty up{&*prob.h2, k_pen};
        ContinuationResult cont =
            continue_lower(op, prob.f, rhs0, *prob.h1, up, sol.u, eps_c, opts);
        iterations += cont.iterations;
        const double dec = sup_norm(cont.u - sol.u);
        sol.u = std::move(cont.u);
        n_final = cont.n_final;
        trace.insert(trace.end(), cont.trace.begin(), cont.trace.end());

        const double tol_abs = opts.tol_cont * (1.0 + sup_norm(sol.u));
        const double gap = sup_norm((sol.u - *prob.h2).cwiseMax(0.0));
        sol.final_k_pen = k_pen;
        if (dec < tol_abs && gap <= feas_tol) break;
        k_pen *= opts.penalty_growth;
    }
    sol.penalty_trace = std::move(trace);
    sol.iterations = iterations;
    sol.final_n_pen = n_final;
    recover_reaction(op, prob.f, rhs0, &*prob.h1, &*prob.h2, eps_c, sol);
    sol.penalty_cross_check = std::max(
        sup_norm(n_final * (*prob.h1 - sol.u).cwiseMax(0.0) - sol.nu.plus.density()),
        sup_norm(sol.final_k_pen * (sol.u - *prob.h2).cwiseMax(0.0) -
                 sol.nu.minus.density()));
    return sol;
}

namespace {

/// Local scalar solve of A_ii y - f_i(y) = c for the Gauss-Seidel sweeps;
/// the left side is strictly increasing in y.
double local_solve(const Nonlinearity& f, int node, double a_ii, double c, double y0) {
    if (f.kind() == Nonlinearity::Kind::Affine) {
        // a_ii y - g_i + slope y = c
        const double slope = -f.derivative_at(0.0);
        return (c + f.g()[node]) / (a_ii + slope);
    }
    double y = y0;
    for (int it = 0; it < 50; ++it) {
        const double phi = a_ii * y - f.eval_at(node, y) - c;
        const double dphi = a_ii - f.derivative_at(y);
        const double step = phi / dphi;
        y -= step;
        if (!std::isfinite(y)) {
            y = y0;
            break;
        }
        if (std::abs(step) <= 1e-15 * (1.0 + std::abs(y))) return y;
    }
    // Bisection fallback on an expanded bracket.
    double lo = y, hi = y;
    double width = 1.0 + std::abs(y);
    auto phi_at = [&](double t) { return a_ii * t - f.eval_at(node, t) - c; };
    for (int it = 0; it < 200 && phi_at(lo) > 0.0; ++it) lo -= width, width *= 2.0;
    width = 1.0 + std::abs(y);
    for (int it = 0; it < 200 && phi_at(hi) < 0.0; ++it) hi += width, width *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (phi_at(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double sor_weight(const ObstacleProblem& prob) {
    if (prob.f.kind() != Nonlinearity::Kind::Affine) return 1.0;
    const int n = prob.op->n();
    if (prob.op->kind == OperatorKind::DirichletLaplacian ||
        prob.op->kind == OperatorKind::KillingPerturbed)
        return std::min(1.95, 2.0 / (1.0 + std::sin(M_PI / (n + 1))));
    return 1.6;
}

ObstacleSolution psor_clamped(const ObstacleProblem& prob, bool has_upper,
                              const SolverOptions& opts) {
    const AssembledOperator& op = *prob.op;
    const int n = op.n();
    const Eigen::VectorXd rhs0 = lump(prob.mu, op.grid);
    const double tol = opts.oracle_rtol * data_scale(prob.f, rhs0);
    const double eps_c = opts.contact_rtol * (1.0 + barrier_sup(prob));
    const double omega = sor_weight(prob);

    const Eigen::VectorXd& h1 = *prob.h1;
    Eigen::VectorXd u = h1;  // feasible start
    if (has_upper) u = u.cwiseMin(*prob.h2);

    long sweeps = 0;
    double theta_norm = kInf;
    for (; sweeps < opts.max_sweeps; ++sweeps) {
        for (int i = 0; i < n; ++i) {
            const double c = rhs0[i] - (op.A.row(i).dot(u) - op.A(i, i) * u[i]);
            double y = local_solve(prob.f, i, op.A(i, i), c, u[i]);
            y = u[i] + omega * (y - u[i]);
            y = std::max(y, h1[i]);
            if (has_upper) y = std::min(y, (*prob.h2)[i]);
            u[i] = y;
        }
        const Eigen::VectorXd r = op.A * u - prob.f.eval(u) - rhs0;
        theta_norm = 0.0;
        for (int i = 0; i < n; ++i) {
            double proj = std::max(u[i] - r[i], h1[i]);
            if (has_upper) proj = std::min(proj, (*prob.h2)[i]);
            theta_norm = std::max(theta_norm, std::abs(u[i] - proj));
        }
        if (theta_norm <= tol) break;
    }
    if (theta_norm > tol)
        throw SolverError(SolverError::Kind::MaxSweeps,
                          "projected Gauss-Seidel exceeded max_sweeps");

    ObstacleSolution sol;
    sol.u = std::move(u);
    sol.iterations = static_cast<int>(sweeps) + 1;
    recover_reaction(op, prob.f, rhs0, &h1,
                     has_upper ? &*prob.h2 : nullptr, eps_c, sol);
    sol.residual_norm = theta_norm;
    return sol;
}

}  // namespace

ObstacleSolution lcp_oracle_one_sided(const ObstacleProblem& prob,
                                      const SolverOptions& opts) {
    validate(prob, true);
    if (!prob.h1 || prob.h2)
        throw PreconditionError(
            "lcp_oracle_one_sided: needs finite h1 and no upper barrier");
    return psor_clamped(prob, false, opts);
}

ObstacleSolution lcp_oracle_two_sided(const ObstacleProblem& prob,
                                      const SolverOptions& opts) {
    validate(prob, true);
    if (!prob.h1 || !prob.h2)
        throw PreconditionError("lcp_oracle_two_sided: needs both barriers finite");
    return psor_clamped(prob, true, opts);
}

}  // namespace obstacle
