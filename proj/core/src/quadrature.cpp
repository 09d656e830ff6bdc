#include "hesspec/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include <Eigen/Eigenvalues>

#include "hesspec/error.hpp"

namespace hesspec {

QuadratureGrid gauss_hermite_physicists(int order) {
    if (order < 1) {
        throw DomainError("quadrature order must be >= 1");
    }
    QuadratureGrid out;
    out.order = order;
    if (order == 1) {
        out.nodes = Eigen::VectorXd::Zero(1);
        out.weights = Eigen::VectorXd::Constant(1, std::sqrt(M_PI));
        return out;
    }
    // Jacobi matrix of the Hermite recurrence: zero diagonal, sqrt(k/2) off-diagonal.
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
    Eigen::VectorXd sub(order - 1);
    for (int k = 1; k < order; ++k) {
        sub(k - 1) = std::sqrt(0.5 * k);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    eig.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (eig.info() != Eigen::Success) {
        throw NumericError("Golub-Welsch eigensolve failed");
    }
    out.nodes = eig.eigenvalues();
    out.weights = std::sqrt(M_PI) * eig.eigenvectors().row(0).array().square().matrix().transpose();
    // Symmetrize: the rule is exactly symmetric, the eigensolver only nearly so.
    for (int i = 0; i < order / 2; ++i) {
        const int j = order - 1 - i;
        const double x = 0.5 * (out.nodes(j) - out.nodes(i));
        const double w = 0.5 * (out.weights(i) + out.weights(j));
        out.nodes(i) = -x;
        out.nodes(j) = x;
        out.weights(i) = w;
        out.weights(j) = w;
    }
    if (order % 2 == 1) {
        out.nodes(order / 2) = 0.0;
    }
    return out;
}

std::shared_ptr<const QuadratureGrid> gauss_hermite_normal(int order) {
    static std::mutex mutex;
    static std::map<int, std::shared_ptr<const QuadratureGrid>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(order);
    if (it != cache.end()) {
        return it->second;
    }
    QuadratureGrid rule = gauss_hermite_physicists(order);
    rule.nodes *= std::sqrt(2.0);
    rule.weights /= rule.weights.sum();
    auto shared = std::make_shared<const QuadratureGrid>(std::move(rule));
    cache.emplace(order, shared);
    return shared;
}

}  // namespace hesspec
