#pragma once

// Population expectations over the law of (h*, h, y): E[g/(1+g delta)], E[g^2/(1+g delta)^2]
// and the 3x3 matrix Lambda(z). The y-marginalization is exact, (h*, h) is integrated with
// a tensor Gauss-Hermite rule in whitened coordinates.

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "hesspec/feature_model.hpp"

namespace hesspec {

using cd = std::complex<double>;

struct LambdaMatrix {
    Eigen::Matrix3cd entries = Eigen::Matrix3cd::Zero();
    cd z{0.0, 0.0};
    cd delta{0.0, 0.0};
    /// U'U was rank deficient; the w*/w block lives on the reduced projection.
    bool degenerate_gram = false;
};

class ExpectationEngine {
public:
    /// One point of the discretized law: probability weight, curvature g and U+ z = (U'U)+ s.
    struct Atom {
        double weight;
        double g;
        Eigen::Vector2d u;
    };

    static constexpr int kDefaultOrder = 96;
    /// Rank-1 projection laws use a 1-D rule this many times longer than `order`.
    static constexpr int kRankOneFactor = 8;
    static constexpr int kNoiseOrder = 32;

    ExpectationEngine(const ProblemSpec& spec, const FeatureGeometry& geometry,
                      int order = kDefaultOrder);

    /// E[g / (1 + g delta)]
    cd e_weight(cd delta) const;
    /// E[g^2 / (1 + g delta)^2]
    cd e_weight_sq(cd delta) const;
    /// Both of the above in one pass.
    std::pair<cd, cd> e_weight_pair(cd delta) const;

    LambdaMatrix lambda_matrix(cd z, cd delta) const;
    /// E[g^2/(1+g delta)^2 B], the kernel of Lambda'(z) = -delta'(z) * kernel.
    Eigen::Matrix3cd lambda_sq_kernel(cd delta) const;

    /// Smallest and largest g over the discretized law.
    double g_min() const { return g_values_.front(); }
    double g_max() const { return g_values_.back(); }
    bool g_constant() const { return g_values_.size() == 1; }
    /// Weighted quantile of g over the discretized law, q in [0, 1].
    double g_quantile(double q) const;

    const std::vector<Atom>& atoms() const { return atoms_; }
    /// Distinct g values and their total weights, ascending.
    const std::vector<double>& g_values() const { return g_values_; }
    const std::vector<double>& g_weights() const { return g_weights_; }

    int order() const { return order_; }
    int projection_rank() const { return rank_; }
    bool degenerate_gram() const { return degenerate_gram_; }

private:
    template <class Kernel>
    Eigen::Matrix3cd lambda_like(cd delta, Kernel kernel) const;
    void check_poles(cd delta) const;

    int order_;
    int rank_ = 0;
    bool degenerate_gram_ = false;
    Eigen::Matrix2d gram_pinv_;
    std::vector<Atom> atoms_;
    std::vector<double> g_values_;
    std::vector<double> g_weights_;
};

}  // namespace hesspec
