#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace obstacle {

/// Monotone reaction term f(x, y) = g(x) + s(y) with s nonincreasing and
/// s(0) = 0, so f(x, 0) = g(x) exactly.
///
/// Built-in shapes:
///   affine:       s(y) = -slope * y, slope >= 0
///   saturating:   s(y) = -atan(y)
///   power:        s(y) = -sign(y) |y|^p, odd integer p >= 1
///   custom_table: s(y) interpolated linearly from (y, value) knots, clamped
///                 outside the knot range and shifted so that s(0) = 0.
///                 Tables are not vetted at construction; run
///                 monotonicity_audit before trusting them.
class Nonlinearity {
public:
    enum class Kind { Affine, Saturating, Power, CustomTable };

    static Nonlinearity affine(Eigen::VectorXd g, double slope);
    static Nonlinearity saturating(Eigen::VectorXd g);
    static Nonlinearity power(Eigen::VectorXd g, int exponent);
    static Nonlinearity custom_table(Eigen::VectorXd g,
                                     std::vector<std::pair<double, double>> table);

    Kind kind() const { return kind_; }
    const Eigen::VectorXd& g() const { return g_; }
    int n() const { return static_cast<int>(g_.size()); }

    /// Nodewise evaluation f(x_i, u_i).
    Eigen::VectorXd eval(const Eigen::VectorXd& u) const;
    /// Nodewise partial derivative d f / d y (always <= 0 for valid inputs).
    /// Analytic for built-ins; symmetric difference quotient with step
    /// 1e-6 (1 + |y|) for custom tables.
    Eigen::VectorXd derivative(const Eigen::VectorXd& u) const;

    double eval_at(int node, double y) const { return g_[node] + shape(y); }
    /// The y-only part s(y) with s(0) = 0.
    double shape_at(double y) const { return shape(y); }
    double derivative_at(double y) const { return shape_derivative(y); }

    /// (H1) audit: (f(x,y) - f(x,y'))(y - y') <= 0 on every sampled pair at
    /// every node. Requires at least two samples.
    bool monotonicity_audit(std::span<const double> y_samples) const;

    /// The reflected term ft(x, z) = -f(x, -z), used to reduce an
    /// upper-obstacle problem to a lower one. Preserves the kind and (H1).
    Nonlinearity reflected() const;

private:
    Nonlinearity(Kind kind, Eigen::VectorXd g) : kind_(kind), g_(std::move(g)) {}

    double shape(double y) const;             // s(y), s(0) = 0
    double shape_derivative(double y) const;  // s'(y)
    double table_raw(double y) const;

    Kind kind_;
    Eigen::VectorXd g_;
    double slope_ = 0.0;
    int exponent_ = 1;
    std::vector<std::pair<double, double>> table_;
    double table_at_zero_ = 0.0;
};

}  // namespace obstacle
