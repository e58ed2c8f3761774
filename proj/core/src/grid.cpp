#include "obstacle/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace obstacle {

Grid::Grid(double a, double b, int n) : a_(a), b_(b), n_(n) {
    if (!std::isfinite(a) || !std::isfinite(b))
        throw std::invalid_argument("Grid: endpoints must be finite");
    if (!(b > a)) throw std::invalid_argument("Grid: requires b > a");
    if (n < 1) throw std::invalid_argument("Grid: requires n >= 1");

    h_ = (b - a) / (n + 1);
    nodes_.resize(n);
    mass_ = Eigen::VectorXd::Constant(n, h_);
    delta_.resize(n);
    for (int i = 1; i <= n; ++i) {
        nodes_[i - 1] = a + i * h_;
        // min(i, n+1-i)*h keeps the symmetry delta_i == delta_{n+1-i} exact.
        delta_[i - 1] = std::min(i, n + 1 - i) * h_;
    }
}

double Grid::l1_norm(const Eigen::VectorXd& v) const {
    if (v.size() != n_)
        throw std::invalid_argument("Grid::l1_norm: vector length mismatch");
    return mass_.dot(v.cwiseAbs());
}

}  // namespace obstacle
