#pragma once

#include <memory>

#include <Eigen/Dense>

namespace hesspec {

/// A 1-D Gauss-Hermite rule.
struct QuadratureGrid {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
    int order = 0;
};

/// Physicists' rule for the weight exp(-x^2); weights sum to sqrt(pi).
/// Built by Golub-Welsch, so orders in the thousands are fine.
QuadratureGrid gauss_hermite_physicists(int order);

/// Rule for E[f(Z)], Z ~ N(0, 1): nodes scaled by sqrt(2), weights sum to 1.
/// Cached per order; the returned grid is shared and immutable.
std::shared_ptr<const QuadratureGrid> gauss_hermite_normal(int order);

}  // namespace hesspec
