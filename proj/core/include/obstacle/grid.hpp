#pragma once

#include <Eigen/Core>

namespace obstacle {

/// Uniform 1-D Dirichlet grid on an open interval (a, b).
///
/// Holds the n interior nodes x_i = a + i*h with h = (b-a)/(n+1), the lumped
/// mass weights m_i = h and the boundary-distance function
/// delta_i = min(x_i - a, b - x_i). The two endpoints carry the homogeneous
/// condition and are not nodes. Immutable after construction.
class Grid {
public:
    /// Throws std::invalid_argument for b <= a, n < 1 or non-finite endpoints.
    Grid(double a, double b, int n);

    double a() const { return a_; }
    double b() const { return b_; }
    int n() const { return n_; }
    double h() const { return h_; }

    const Eigen::VectorXd& nodes() const { return nodes_; }
    const Eigen::VectorXd& mass() const { return mass_; }
    const Eigen::VectorXd& delta() const { return delta_; }

    /// Discrete L1(m) norm: sum_i m_i |v_i|. Throws on length mismatch.
    double l1_norm(const Eigen::VectorXd& v) const;

private:
    double a_, b_, h_;
    int n_;
    Eigen::VectorXd nodes_, mass_, delta_;
};

}  // namespace obstacle
