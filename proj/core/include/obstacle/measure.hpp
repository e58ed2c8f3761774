#pragma once

#include <vector>

#include <Eigen/Core>

#include "obstacle/grid.hpp"

namespace obstacle {

/// Point mass at an interior position.
struct Atom {
    double position;
    double weight;
};

/// Signed measure as density-plus-atoms.
///
/// The density is taken with respect to the reference measure m (the mass
/// weights of the grid): a cell carries density_i * m_i. Atoms live at
/// arbitrary positions strictly inside (a, b). Construction canonicalizes the
/// atom list: sorted by position, same-position weights merged, zero weights
/// dropped. This makes total_variation and jordan_decompose minimal.
class MeasureData {
public:
    MeasureData() = default;
    explicit MeasureData(Eigen::VectorXd density, std::vector<Atom> atoms = {});

    static MeasureData zero(int n);

    const Eigen::VectorXd& density() const { return density_; }
    const std::vector<Atom>& atoms() const { return atoms_; }

    bool is_nonnegative() const;
    MeasureData negate() const;
    MeasureData scaled(double factor) const;
    /// Componentwise/atomwise sum; requires equal density lengths.
    MeasureData plus(const MeasureData& other) const;

private:
    Eigen::VectorXd density_;
    std::vector<Atom> atoms_;
};

/// Jordan decomposition into mutually singular nonnegative parts.
struct SignedDecomposition {
    MeasureData plus;
    MeasureData minus;
};

/// Componentwise / sign split; minimal by canonicalization of the input.
SignedDecomposition jordan_decompose(const MeasureData& mu);

/// sum_i m_i |density_i| + sum_k |weight_k|.
double total_variation(const MeasureData& mu, const Grid& g);

/// Lump onto the grid as a node density w.r.t. m.
///
/// Atoms between two nodes split linearly (weights proportional to
/// 1 - distance/h); an atom in a boundary cell goes entirely to the single
/// interior node of that cell, so the signed total is conserved exactly.
/// Throws PreconditionError for atoms outside (a, b).
Eigen::VectorXd lump(const MeasureData& mu, const Grid& g);

}  // namespace obstacle
