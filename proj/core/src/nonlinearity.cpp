#include "obstacle/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace obstacle {

Nonlinearity Nonlinearity::affine(Eigen::VectorXd g, double slope) {
    if (!(slope >= 0.0))
        throw std::invalid_argument("Nonlinearity::affine: slope must be >= 0");
    Nonlinearity f(Kind::Affine, std::move(g));
    f.slope_ = slope;
    return f;
}

Nonlinearity Nonlinearity::saturating(Eigen::VectorXd g) {
    return Nonlinearity(Kind::Saturating, std::move(g));
}

Nonlinearity Nonlinearity::power(Eigen::VectorXd g, int exponent) {
    if (exponent < 1 || exponent % 2 == 0)
        throw std::invalid_argument("Nonlinearity::power: exponent must be odd and >= 1");
    Nonlinearity f(Kind::Power, std::move(g));
    f.exponent_ = exponent;
    return f;
}

Nonlinearity Nonlinearity::custom_table(Eigen::VectorXd g,
                                        std::vector<std::pair<double, double>> table) {
    if (table.size() < 2)
        throw std::invalid_argument("Nonlinearity::custom_table: needs >= 2 knots");
    std::sort(table.begin(), table.end());
    for (size_t i = 1; i < table.size(); ++i)
        if (table[i].first == table[i - 1].first)
            throw std::invalid_argument("Nonlinearity::custom_table: duplicate knots");
    Nonlinearity f(Kind::CustomTable, std::move(g));
    f.table_ = std::move(table);
    f.table_at_zero_ = f.table_raw(0.0);
    return f;
}

double Nonlinearity::table_raw(double y) const {
    if (y <= table_.front().first) return table_.front().second;
    if (y >= table_.back().first) return table_.back().second;
    auto hi = std::upper_bound(table_.begin(), table_.end(), y,
                               [](double v, const auto& k) { return v < k.first; });
    auto lo = hi - 1;
    const double t = (y - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
}

double Nonlinearity::shape(double y) const {
    switch (kind_) {
        case Kind::Affine:
            return -slope_ * y;
        case Kind::Saturating:
            return -std::atan(y);
        case Kind::Power:
            return -(y < 0 ? -1.0 : 1.0) * std::pow(std::abs(y), exponent_);
        case Kind::CustomTable:
            return table_raw(y) - table_at_zero_;
    }
    return 0.0;
}

double Nonlinearity::shape_derivative(double y) const {
    switch (kind_) {
        case Kind::Affine:
            return -slope_;
        case Kind::Saturating:
            return -1.0 / (1.0 + y * y);
        case Kind::Power:
            return -static_cast<double>(exponent_) *
                   std::pow(std::abs(y), exponent_ - 1);
        case Kind::CustomTable: {
            const double step = 1e-6 * (1.0 + std::abs(y));
            return (table_raw(y + step) - table_raw(y - step)) / (2.0 * step);
        }
    }
    return 0.0;
}

Eigen::VectorXd Nonlinearity::eval(const Eigen::VectorXd& u) const {
    if (u.size() != g_.size())
        throw std::invalid_argument("Nonlinearity::eval: length mismatch");
    Eigen::VectorXd out(g_.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = g_[i] + shape(u[i]);
    return out;
}

Eigen::VectorXd Nonlinearity::derivative(const Eigen::VectorXd& u) const {
    if (u.size() != g_.size())
        throw std::invalid_argument("Nonlinearity::derivative: length mismatch");
    Eigen::VectorXd out(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = shape_derivative(u[i]);
    return out;
}

bool Nonlinearity::monotonicity_audit(std::span<const double> y_samples) const {
    if (y_samples.size() < 2)
        throw std::invalid_argument("monotonicity_audit: needs >= 2 samples");
    // f(x,y) - f(x,y') = s(y) - s(y'): the g part cancels, but evaluate the
    // full term at one node to keep the check honest about the x dependence.
    for (size_t i = 0; i < y_samples.size(); ++i) {
        for (size_t j = i + 1; j < y_samples.size(); ++j) {
            const double y = y_samples[i], yp = y_samples[j];
            if (y == yp) continue;
            for (int node = 0; node < n(); ++node) {
                const double diff = eval_at(node, y) - eval_at(node, yp);
                if (diff * (y - yp) > 0.0) return false;
            }
        }
    }
    return true;
}

Nonlinearity Nonlinearity::reflected() const {
    switch (kind_) {
        case Kind::Affine:
            return affine(-g_, slope_);
        case Kind::Saturating:
            return saturating(-g_);
        case Kind::Power: {
            Nonlinearity f(Kind::Power, -g_);
            f.exponent_ = exponent_;
            return f;
        }
        case Kind::CustomTable: {
            std::vector<std::pair<double, double>> table(table_.rbegin(), table_.rend());
            for (auto& k : table) {
                k.first = -k.first;
                k.second = -k.second;
            }
            return custom_table(-g_, std::move(table));
        }
    }
    throw std::logic_error("Nonlinearity::reflected: unknown kind");
}

}  // namespace obstacle
