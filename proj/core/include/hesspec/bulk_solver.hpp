#pragma once

// Fixed point for delta(z), m(z); density by Stieltjes inversion; support detection.

#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "hesspec/expectation.hpp"
#include "hesspec/feature_model.hpp"
#include "hesspec/glm_models.hpp"

namespace hesspec {

struct StieltjesPoint {
    cd z{0.0, 0.0};
    cd delta{0.0, 0.0};
    cd m{0.0, 0.0};
    cd e{0.0, 0.0};  // E[g/(1+g delta)]
    int iterations = 0;
    double residual = 0.0;
};

/// z-derivatives at a solved point.
struct StieltjesDerivatives {
    cd delta_prime;
    cd m_prime;
    cd e2;  // E[g^2/(1+g delta)^2]
};

struct DensityCurve {
    std::vector<double> grid;
    std::vector<double> density;
    double epsilon = 0.0;
    bool richardson = false;
    int failures = 0;  // points that did not converge, stored as NaN
};

enum class EdgeRefinement { Exact, DensityThreshold };

struct SupportReport {
    std::vector<std::pair<double, double>> intervals;
    int bulk_count = 0;
    bool bounded = true;
    EdgeRefinement refinement = EdgeRefinement::Exact;
    std::pair<double, double> scan_range{0.0, 0.0};
    double peak_density = 0.0;

    double left() const { return intervals.front().first; }
    double right() const { return intervals.back().second; }
    double width() const { return right() - left(); }
    bool contains(double x) const;
    /// Nearest edge to x and whether x lies to its left (true) or right.
    std::pair<double, bool> nearest_edge(double x) const;
};

class BulkSolver {
public:
    static constexpr int kDefaultResolution = 400;
    static constexpr double kThresholdRatio = 1e-3;

    explicit BulkSolver(const ProblemSpec& spec, int quad_order = ExpectationEngine::kDefaultOrder);

    const ProblemSpec& spec() const { return spec_; }
    const FeatureGeometry& geometry() const { return geometry_; }
    const ExpectationEngine& engine() const { return engine_; }
    double c() const { return c_; }
    /// Rough magnitude of the spectrum, used for continuation heights and tolerances.
    double scale() const { return scale_; }

    /// Solves the fixed point at z. Real z must lie outside the support.
    /// Throws NonConvergence or BranchViolation.
    StieltjesPoint solve_point(cd z, std::optional<cd> warm_start = std::nullopt) const;

    /// Real-axis solve that reports failure instead of throwing: nullopt means x is in the
    /// support (or no branch-consistent real solution was found).
    std::optional<StieltjesPoint> solve_exterior(double x,
                                                 std::optional<cd> warm_start = std::nullopt) const;

    StieltjesDerivatives derivatives(const StieltjesPoint& point) const;

    /// |delta - F(delta)| with F the right-hand side of the delta equation.
    double self_consistency(cd z, cd delta) const;

    /// (1/pi) Im m(x + i eps) on the grid. With `richardson`, returns 2 rho(eps/2) - rho(eps).
    DensityCurve density(const std::vector<double>& grid, double epsilon,
                         bool richardson = false) const;
    static double default_epsilon(double span);

    std::pair<double, double> default_scan_range() const;
    SupportReport support(std::optional<std::pair<double, double>> scan_range = std::nullopt,
                          int resolution = kDefaultResolution) const;

private:
    struct Eval {
        cd e, e2, f, m, d, b1;
    };
    Eval evaluate(cd z, cd delta) const;
    bool newton(cd z, cd& delta, int& iterations) const;
    bool damped(cd z, cd& delta, int& iterations) const;
    bool branch_ok(cd z, cd delta, const Eval& ev) const;
    StieltjesPoint finish(cd z, cd delta, int iterations) const;
    std::optional<StieltjesPoint> attempt(cd z, cd start) const;
    std::optional<StieltjesPoint> continuation(cd z, bool* reached_axis = nullptr) const;
    double refine_exact(double outside, double inside, std::optional<cd> warm) const;
    double refine_threshold(double below, double above, double threshold, double eps) const;

    ProblemSpec spec_;
    FeatureGeometry geometry_;
    ExpectationEngine engine_;
    double c_;
    double t_mean_;
    double scale_;
};

}  // namespace hesspec
