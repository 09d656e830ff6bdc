#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "hesspec/hesspec.hpp"

namespace testing_support {

inline hesspec::ProblemSpec zero_spec(int p, int n) {
    hesspec::ProblemSpec s;
    s.p = p;
    s.n = n;
    s.mu = Eigen::VectorXd::Zero(p);
    s.w = Eigen::VectorXd::Zero(p);
    s.w_star = Eigen::VectorXd::Zero(p);
    return s;
}

/// Stieltjes transform of the Marchenko-Pastur law with ratio c and scale s
/// (limit of s X X'/n): the root of s c z m^2 - (s(1 - c) - z) m + 1 = 0 on the right branch.
inline std::complex<double> mp_stieltjes(std::complex<double> z, double c, double s) {
    const std::complex<double> a = s * c * z;
    const std::complex<double> b = -(s * (1.0 - c) - z);
    const std::complex<double> disc = std::sqrt(b * b - 4.0 * a);
    const std::complex<double> r1 = (-b + disc) / (2.0 * a);
    const std::complex<double> r2 = (-b - disc) / (2.0 * a);
    if (z.imag() != 0.0) {
        return (r1.imag() * z.imag() > 0.0) ? r1 : r2;
    }
    // Real z outside the support (c < 1): the other root blows up as z -> 0 or z -> -inf.
    return std::abs(r1) < std::abs(r2) ? r1 : r2;
}

inline double mp_density(double x, double c, double s) {
    const double lo = s * (1.0 - std::sqrt(c)) * (1.0 - std::sqrt(c));
    const double hi = s * (1.0 + std::sqrt(c)) * (1.0 + std::sqrt(c));
    if (x <= lo || x >= hi) return 0.0;
    return std::sqrt((hi - x) * (x - lo)) / (2.0 * M_PI * s * c * x);
}

}  // namespace testing_support
