#pragma once

#include <memory>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "obstacle/grid.hpp"
#include "obstacle/measure.hpp"

namespace obstacle {

enum class OperatorKind {
    DirichletLaplacian,
    SpectralFractional,
    IntegralFractional,
    KillingPerturbed,
};

/// Recipe for the discrete Dirichlet operator -L.
struct OperatorSpec {
    OperatorKind kind = OperatorKind::DirichletLaplacian;
    double alpha = 2.0;                   // fractional kinds, in (0, 2]
    std::shared_ptr<OperatorSpec> base;   // killing-perturbed only
    MeasureData killing;                  // killing-perturbed only, nonnegative

    static OperatorSpec dirichlet_laplacian();
    static OperatorSpec spectral_fractional(double alpha);
    /// Restricted fractional Laplacian (zero exterior condition), discretized
    /// by the symmetric fractional-centered-difference Toeplitz kernel.
    static OperatorSpec integral_fractional(double alpha);
    static OperatorSpec killing_perturbed(OperatorSpec base, MeasureData killing);
};

/// Dense symmetric positive-definite matrix A representing -L in the
/// mass-weighted pairing: -Lu = rho reads A u = rho with rho a node density
/// w.r.t. m. Carries the full eigendecomposition (columns of eigvecs are
/// m-weighted orthonormal) and a cached factorization for potential solves.
/// Immutable after assembly; concurrent reads are safe.
struct AssembledOperator {
    OperatorKind kind;
    double alpha;  // exponent for delta-weight reports; 2 for the Laplacian
    Grid grid;
    Eigen::MatrixXd A;
    Eigen::VectorXd eigvals;  // ascending, all > 0
    Eigen::MatrixXd eigvecs;  // m-weighted orthonormal columns
    Eigen::LDLT<Eigen::MatrixXd> factor;

    int n() const { return grid.n(); }
    /// Solve A x = rhs using the cached factorization.
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
};

/// Assemble the operator on a grid. Throws std::invalid_argument for invalid
/// alpha or signed killing measures.
AssembledOperator assemble(const OperatorSpec& spec, const Grid& g);

/// Potential R(mu) = A^{-1} lump(mu); inverse positivity gives R(mu) >= 0 for
/// mu >= 0.
Eigen::VectorXd potential(const AssembledOperator& op, const MeasureData& mu);

/// Result of the killing-contraction check R^mu(mu) <= 1.
struct KillingContraction {
    Eigen::VectorXd z;     // (A + diag(rho)) z = rho
    bool within_unit;      // 0 <= z <= 1 + tol everywhere
    double max_entry;
    double min_entry;
};

/// Solves (A + diag(lump(mu))) z = lump(mu) for nonnegative mu and checks
/// 0 <= z <= 1 + tol. Throws PreconditionError for signed or vanishing mu.
KillingContraction check_killing_contraction(const AssembledOperator& base,
                                             const MeasureData& mu,
                                             double tol = 1e-12);

/// Weighted admissibility data: the ratio R1 / delta^{alpha/2} over the grid
/// and the delta^{alpha/2}-weighted L1 norm of |mu|. The min/max ratio pair is
/// the discrete surrogate of the two-sided potential bound constants.
struct AdmissibilityReport {
    double alpha;
    int n;
    Eigen::VectorXd r1;
    Eigen::VectorXd ratio;
    double ratio_min;
    double ratio_max;
    double weighted_norm_mu;
};

/// Requires a Laplacian or fractional operator (not killing-perturbed).
AdmissibilityReport weighted_admissibility_report(const AssembledOperator& op,
                                                  const MeasureData& mu);

}  // namespace obstacle
