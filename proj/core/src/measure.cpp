#include "obstacle/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "obstacle/errors.hpp"

namespace obstacle {

MeasureData::MeasureData(Eigen::VectorXd density, std::vector<Atom> atoms)
    : density_(std::move(density)) {
    for (const Atom& a : atoms) {
        if (!std::isfinite(a.position) || !std::isfinite(a.weight))
            throw std::invalid_argument("MeasureData: non-finite atom");
    }
    std::stable_sort(atoms.begin(), atoms.end(),
                     [](const Atom& l, const Atom& r) { return l.position < r.position; });
    for (const Atom& a : atoms) {
        if (!atoms_.empty() && atoms_.back().position == a.position) {
            atoms_.back().weight += a.weight;
        } else {
            atoms_.push_back(a);
        }
    }
    std::erase_if(atoms_, [](const Atom& a) { return a.weight == 0.0; });
}

MeasureData MeasureData::zero(int n) {
    return MeasureData(Eigen::VectorXd::Zero(n));
}

bool MeasureData::is_nonnegative() const {
    if ((density_.array() < 0.0).any()) return false;
    return std::all_of(atoms_.begin(), atoms_.end(),
                       [](const Atom& a) { return a.weight >= 0.0; });
}

MeasureData MeasureData::negate() const { return scaled(-1.0); }

MeasureData MeasureData::scaled(double factor) const {
    std::vector<Atom> atoms = atoms_;
    for (Atom& a : atoms) a.weight *= factor;
    return MeasureData(factor * density_, std::move(atoms));
}

MeasureData MeasureData::plus(const MeasureData& other) const {
    if (density_.size() != other.density_.size())
        throw std::invalid_argument("MeasureData::plus: density length mismatch");
    std::vector<Atom> atoms = atoms_;
    atoms.insert(atoms.end(), other.atoms_.begin(), other.atoms_.end());
    return MeasureData(density_ + other.density_, std::move(atoms));
}

SignedDecomposition jordan_decompose(const MeasureData& mu) {
    Eigen::VectorXd dplus = mu.density().cwiseMax(0.0);
    Eigen::VectorXd dminus = (-mu.density()).cwiseMax(0.0);
    std::vector<Atom> aplus, aminus;
    for (const Atom& a : mu.atoms()) {
        if (a.weight > 0.0)
            aplus.push_back(a);
        else
            aminus.push_back({a.position, -a.weight});
    }
    return {MeasureData(std::move(dplus), std::move(aplus)),
            MeasureData(std::move(dminus), std::move(aminus))};
}

double total_variation(const MeasureData& mu, const Grid& g) {
    double tv = g.l1_norm(mu.density());
    for (const Atom& a : mu.atoms()) tv += std::abs(a.weight);
    return tv;
}

Eigen::VectorXd lump(const MeasureData& mu, const Grid& g) {
    if (mu.density().size() != g.n())
        throw std::invalid_argument("lump: density length mismatch");
    Eigen::VectorXd rho = mu.density();
    const double h = g.h();
    for (const Atom& a : mu.atoms()) {
        if (!(a.position > g.a() && a.position < g.b()))
            throw PreconditionError("lump: atom position outside (a, b)");
        const double t = (a.position - g.a()) / h;  // in (0, n+1)
        const int j = static_cast<int>(std::floor(t));
        if (j < 1) {
            rho[0] += a.weight / h;
        } else if (j >= g.n()) {
            rho[g.n() - 1] += a.weight / h;
        } else {
            const double share_right = (t - j) * a.weight;
            const double share_left = a.weight - share_right;  // exact conservation
            rho[j - 1] += share_left / h;
            rho[j] += share_right / h;
        }
    }
    return rho;
}

}  // namespace obstacle
