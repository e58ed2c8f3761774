#include "obstacle/operators.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "obstacle/errors.hpp"

namespace obstacle {

OperatorSpec OperatorSpec::dirichlet_laplacian() {
    return OperatorSpec{OperatorKind::DirichletLaplacian, 2.0, nullptr, {}};
}

OperatorSpec OperatorSpec::spectral_fractional(double alpha) {
    return OperatorSpec{OperatorKind::SpectralFractional, alpha, nullptr, {}};
}

OperatorSpec OperatorSpec::integral_fractional(double alpha) {
    return OperatorSpec{OperatorKind::IntegralFractional, alpha, nullptr, {}};
}

OperatorSpec OperatorSpec::killing_perturbed(OperatorSpec base, MeasureData killing) {
    OperatorSpec spec;
    spec.kind = OperatorKind::KillingPerturbed;
    spec.base = std::make_shared<OperatorSpec>(std::move(base));
    spec.alpha = spec.base->alpha;
    spec.killing = std::move(killing);
    return spec;
}

namespace {

Eigen::MatrixXd laplacian_matrix(const Grid& g) {
    const int n = g.n();
    const double w = 1.0 / (g.h() * g.h());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        A(i, i) = 2.0 * w;
        if (i + 1 < n) {
            A(i, i + 1) = -w;
            A(i + 1, i) = -w;
        }
    }
    return A;
}

// Fractional centered-difference coefficients
// g_k = (-1)^k Gamma(alpha+1) / (Gamma(alpha/2-k+1) Gamma(alpha/2+k+1)),
// generated by the stable recurrence g_{k+1} = g_k (k - alpha/2)/(k + 1 + alpha/2).
// For alpha = 2 this reduces exactly to the (-1, 2, -1) stencil.
Eigen::MatrixXd integral_fractional_matrix(const Grid& g, double alpha) {
    const int n = g.n();
    Eigen::VectorXd coeff(n);
    coeff[0] = std::tgamma(alpha + 1.0) /
               std::pow(std::tgamma(alpha / 2.0 + 1.0), 2);
    for (int k = 0; k + 1 < n; ++k)
        coeff[k + 1] = coeff[k] * (k - alpha / 2.0) / (alpha / 2.0 + k + 1.0);
    const double scale = std::pow(g.h(), -alpha);
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = scale * coeff[std::abs(i - j)];
    return A;
}

void finalize(AssembledOperator& op) {
    // Symmetrize away roundoff before factorizing.
    op.A = 0.5 * (op.A + op.A.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.A);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("assemble: eigendecomposition failed");
    op.eigvals = es.eigenvalues();
    if (op.eigvals.minCoeff() <= 0.0)
        throw std::runtime_error("assemble: operator is not positive definite");
    // Euclidean-orthonormal eigenvectors rescaled to be m-orthonormal
    // (uniform mass h: V^T diag(m) V = I).
    op.eigvecs = es.eigenvectors() / std::sqrt(op.grid.h());
    op.factor.compute(op.A);
    if (op.factor.info() != Eigen::Success)
        throw std::runtime_error("assemble: factorization failed");
}

}  // namespace

Eigen::VectorXd AssembledOperator::solve(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd x = factor.solve(rhs);
    if (!x.allFinite())
        throw std::runtime_error("AssembledOperator::solve: singular solve");
    return x;
}

AssembledOperator assemble(const OperatorSpec& spec, const Grid& g) {
    AssembledOperator op{spec.kind, spec.alpha, g, {}, {}, {}, {}};
    switch (spec.kind) {
        case OperatorKind::DirichletLaplacian: {
            op.alpha = 2.0;
            op.A = laplacian_matrix(g);
            break;
        }
        case OperatorKind::SpectralFractional: {
            if (!(spec.alpha > 0.0 && spec.alpha <= 2.0))
                throw std::invalid_argument("assemble: alpha must be in (0, 2]");
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(laplacian_matrix(g));
            if (es.info() != Eigen::Success)
                throw std::runtime_error("assemble: eigendecomposition failed");
            const Eigen::VectorXd powered =
                es.eigenvalues().array().pow(spec.alpha / 2.0);
            op.A = es.eigenvectors() * powered.asDiagonal() *
                   es.eigenvectors().transpose();
            break;
        }
        case OperatorKind::IntegralFractional: {
            if (!(spec.alpha > 0.0 && spec.alpha <= 2.0))
                throw std::invalid_argument("assemble: alpha must be in (0, 2]");
            op.A = integral_fractional_matrix(g, spec.alpha);
            break;
        }
        case OperatorKind::KillingPerturbed: {
            if (!spec.base)
                throw std::invalid_argument("assemble: killing_perturbed needs a base");
            if (!spec.killing.is_nonnegative())
                throw std::invalid_argument("assemble: killing measure must be >= 0");
            AssembledOperator base = assemble(*spec.base, g);
            op.alpha = base.alpha;
            op.A = base.A;
            op.A.diagonal() += lump(spec.killing, g);
            break;
        }
    }
    finalize(op);
    return op;
}

Eigen::VectorXd potential(const AssembledOperator& op, const MeasureData& mu) {
    return op.solve(lump(mu, op.grid));
}

KillingContraction check_killing_contraction(const AssembledOperator& base,
                                             const MeasureData& mu, double tol) {
    if (!mu.is_nonnegative())
        throw PreconditionError("check_killing_contraction: mu must be >= 0");
    Eigen::VectorXd rho = lump(mu, base.grid);
    if (rho.maxCoeff() <= 0.0)
        throw PreconditionError("check_killing_contraction: mu vanishes");
    Eigen::MatrixXd M = base.A;
    M.diagonal() += rho;
    Eigen::VectorXd z = M.ldlt().solve(rho);
    KillingContraction out;
    out.max_entry = z.maxCoeff();
    out.min_entry = z.minCoeff();
    out.within_unit = out.min_entry >= -tol && out.max_entry <= 1.0 + tol;
    out.z = std::move(z);
    return out;
}

AdmissibilityReport weighted_admissibility_report(const AssembledOperator& op,
                                                  const MeasureData& mu) {
    if (op.kind == OperatorKind::KillingPerturbed)
        throw PreconditionError(
            "weighted_admissibility_report: needs a Laplacian or fractional operator");
    const Grid& g = op.grid;
    AdmissibilityReport rep;
    rep.alpha = op.alpha;
    rep.n = g.n();
    rep.r1 = op.solve(Eigen::VectorXd::Ones(g.n()));
    const Eigen::VectorXd weight = g.delta().array().pow(op.alpha / 2.0);
    rep.ratio = rep.r1.cwiseQuotient(weight);
    rep.ratio_min = rep.ratio.minCoeff();
    rep.ratio_max = rep.ratio.maxCoeff();

    double wnorm = (g.mass().array() * mu.density().array().abs() * weight.array()).sum();
    for (const Atom& a : mu.atoms()) {
        const double d = std::min(a.position - g.a(), g.b() - a.position);
        wnorm += std::abs(a.weight) * std::pow(d, op.alpha / 2.0);
    }
    rep.weighted_norm_mu = wnorm;
    return rep;
}

}  // namespace obstacle
