#include "obstacle/feynman_kac.hpp"

#include <cmath>
#include <random>

#include "obstacle/errors.hpp"

namespace obstacle {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Deterministic per-path stream: mt19937_64 seeded from (seed, path),
/// Box-Muller for normals.
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t path)
        : eng_(splitmix64(seed ^ (0x9E3779B97F4A7C15ull * (path + 1)))) {}

    double uniform() {  // (0, 1)
        return (eng_() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double th = 2.0 * M_PI * uniform();
        spare_ = r * std::sin(th);
        has_spare_ = true;
        return r * std::cos(th);
    }

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Piecewise-linear interpolation through (a,0), nodes, (b,0).
class NodeInterp {
public:
    NodeInterp(const Grid& g, Eigen::VectorXd values)
        : a_(g.a()), h_(g.h()), n_(g.n()), v_(std::move(values)) {}

    double operator()(double x) const {
        const double t = (x - a_) / h_;
        const int j = static_cast<int>(std::floor(t));
        if (j < 0 || j > n_) return 0.0;
        const double left = j == 0 ? 0.0 : v_[j - 1];
        const double right = j == n_ ? 0.0 : v_[j];
        return left + (t - j) * (right - left);
    }

private:
    double a_, h_;
    int n_;
    Eigen::VectorXd v_;
};

}  // namespace

McEstimate estimate_u(const AssembledOperator& op, const Nonlinearity& f,
                      const MeasureData& mu, const SignedDecomposition& nu,
                      const Eigen::VectorXd& u, const McConfig& cfg) {
    if (op.kind != OperatorKind::DirichletLaplacian)
        throw PreconditionError(
            "estimate_u: representation check requires the Dirichlet Laplacian "
            "(alpha = 2)");
    const Grid& g = op.grid;
    if (!(cfg.x0 > g.a() && cfg.x0 < g.b()))
        throw PreconditionError("estimate_u: x0 outside (a, b)");
    if (cfg.n_paths < 100)
        throw PreconditionError("estimate_u: n_paths must be >= 100");
    const double h2 = g.h() * g.h();
    if (!(cfg.dt > 0.0) || cfg.dt > 0.5 * h2)
        throw PreconditionError("estimate_u: requires 0 < dt <= h^2/2");
    if (u.size() != g.n()) throw PreconditionError("estimate_u: u size mismatch");

    const NodeInterp u_itp(g, u);
    const NodeInterp g_itp(g, f.g());
    const NodeInterp mu_itp(g, lump(mu, g));
    const NodeInterp nu_itp(g, nu.plus.density().size() == g.n()
                                   ? Eigen::VectorXd(nu.plus.density() -
                                                     nu.minus.density())
                                   : Eigen::VectorXd::Zero(g.n()));

    const double a = g.a(), b = g.b(), dt = cfg.dt;
    const double step_scale = std::sqrt(2.0 * dt);
    const long max_steps = 100'000'000;

    auto integrand = [&](double x) {
        return g_itp(x) + f.derivative_at(0.0) * 0.0 +  // keep shape explicit below
               0.0;
    };
    (void)integrand;

    double sum = 0.0, sum_sq = 0.0;
    double total_steps = 0.0, total_time = 0.0;
    long bridge_kills = 0;

    for (long p = 0; p < cfg.n_paths; ++p) {
        PathRng rng(cfg.seed, static_cast<std::uint64_t>(p));
        double x = cfg.x0;
        double acc = 0.0, time = 0.0;
        long steps = 0;
        while (steps < max_steps) {
            ++steps;
            const double val =
                g_itp(x) + (f.eval_at(0, u_itp(x)) - f.g()[0])  // s(u(x))
                + mu_itp(x) + nu_itp(x);
            const double x_new = x + step_scale * rng.normal();
            if (x_new <= a || x_new >= b) {
                acc += 0.5 * dt * val;
                time += 0.5 * dt;
                break;
            }
            if (cfg.use_exit_correction) {
                double p_exit = 0.0;
                const double ea = (x - a) * (x_new - a);
                const double eb = (b - x) * (b - x_new);
                if (ea < 40.0 * dt) p_exit += std::exp(-ea / dt);
                if (eb < 40.0 * dt) p_exit += std::exp(-eb / dt);
                if (p_exit > 0.0 && rng.uniform() < p_exit) {
                    acc += 0.5 * dt * val;
                    time += 0.5 * dt;
                    ++bridge_kills;
                    break;
                }
            }
            acc += dt * val;
            time += dt;
            x = x_new;
        }
        sum += acc;
        sum_sq += acc * acc;
        total_steps += static_cast<double>(steps);
        total_time += time;
    }

    McEstimate est;
    est.n_paths = cfg.n_paths;
    est.estimate = sum / cfg.n_paths;
    const double var =
        std::max(0.0, (sum_sq - sum * sum / cfg.n_paths) / (cfg.n_paths - 1));
    est.half_width_95 = 1.96 * std::sqrt(var / cfg.n_paths);
    est.mean_steps = total_steps / cfg.n_paths;
    est.mean_exit_time = total_time / cfg.n_paths;
    est.bridge_kill_fraction = static_cast<double>(bridge_kills) / cfg.n_paths;
    return est;
}

McEstimate estimate_u(const ObstacleProblem& prob, const ObstacleSolution& sol,
                      const McConfig& cfg) {
    return estimate_u(*prob.op, prob.f, prob.mu, sol.nu, sol.u, cfg);
}

}  // namespace obstacle
