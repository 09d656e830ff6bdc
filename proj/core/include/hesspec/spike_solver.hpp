#pragma once

// Isolated eigenvalues as zeros of det G(z), G = I + Lambda(z) V'Qb(z)V, and their
// eigenvector alignments. Plus two closed-form special cases used as oracles.

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hesspec/bulk_solver.hpp"

namespace hesspec {

struct GMatrix {
    /// G restricted to the active columns of V, embedded in I_3.
    Eigen::Matrix3cd entries = Eigen::Matrix3cd::Identity();
    double z = 0.0;
    Eigen::Matrix3cd vqv = Eigen::Matrix3cd::Zero();
    LambdaMatrix lambda_mat;
    StieltjesPoint point;
};

enum class Side { Left, Right };

const char* to_string(Side side);

struct SpikeReport {
    double location = 0.0;
    Side side = Side::Right;
    double edge = 0.0;
    double gap = 0.0;
    /// Asymptotic V' u u' V.
    Eigen::Matrix3d alignment = Eigen::Matrix3d::Zero();
    /// alignment(k,k) / |V_k|^2, zero for inactive columns.
    Eigen::Vector3d cos2 = Eigen::Vector3d::Zero();
    double det_residual = 0.0;
    /// False when the zero eigenvalue of G was not simple; alignment is then NaN.
    bool simple = true;
};

class SpikeSolver {
public:
    static constexpr int kDefaultMesh = 200;
    static constexpr double kDefaultMarginFactor = 3.0;

    explicit SpikeSolver(const BulkSolver& bulk);

    /// Which of (mu, C w*, C w) are nonzero and take part in G.
    const std::array<bool, 3>& active() const { return active_; }
    int active_count() const { return static_cast<int>(index_.size()); }

    /// V' Qb(z) V at a solved point.
    Eigen::Matrix3cd q_bar_forms(const StieltjesPoint& point) const;
    Eigen::Matrix3cd q_bar_forms(double z) const;

    GMatrix g_matrix(double z, std::optional<cd> warm_start = std::nullopt) const;
    /// Real determinant of G(z). Throws ImaginaryLeak when Im det is not negligible.
    double det_g(double z, std::optional<cd> warm_start = std::nullopt) const;
    static double det_of(const GMatrix& g);

    Eigen::Matrix3cd g_prime(const GMatrix& g) const;
    Eigen::Matrix3cd g_prime(double z) const;

    /// V' u u' V at a zero of det G. Throws MultiplicityViolation if the zero is not simple.
    Eigen::Matrix3d alignment(double lambda) const;

    /// Scans every gap of the support and the two outer windows (edge -/+ margin) for sign
    /// changes of det G and bisects each bracket. margin defaults to 3x the support width.
    std::vector<SpikeReport> find_spikes(const SupportReport& support,
                                         std::optional<double> scan_margin = std::nullopt,
                                         int mesh = kDefaultMesh) const;

private:
    Eigen::MatrixXd reduce(const Eigen::Matrix3cd& full) const;
    Eigen::Matrix3cd q_forms(const StieltjesPoint& point, bool derivative, cd delta_prime,
                             cd e2) const;
    double bisect(double a, double b, double fa, cd warm) const;
    SpikeReport report(double lambda, const SupportReport& support) const;

    const BulkSolver& bulk_;
    std::array<bool, 3> active_{};
    std::vector<int> index_;
    Eigen::Vector3d col_norm2_;
};

/// Closed form for g = 1/4, C = I, w = w* = 0 at signal strength rho = |mu|^2.
struct Corollary1Result {
    bool spike = false;
    double lambda = 0.0;     // spike location, or the right bulk edge without a spike
    double alignment = 0.0;  // |mu'u|^2/|mu|^2
};
Corollary1Result corollary1_oracle(double rho, double c);

/// Logistic model and loss, mu = 0, C = I, with only |w| mattering. Independent scalar
/// solver: z is explicit in m, the left edge maximizes z(m) and expectations over
/// r ~ N(0, |w|^2) use a dense trapezoid rule.
struct Corollary2Result {
    double left_edge = 0.0;
    std::optional<double> lambda;
    std::optional<double> gap;
    std::optional<double> alignment;
};
Corollary2Result corollary2_oracle(double w_norm, double c);

}  // namespace hesspec
