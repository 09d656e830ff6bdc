#pragma once

// Feature statistics (mu, C), parameter vectors (w*, w) and the geometry derived from
// them: U = C^{1/2}[w*, w], V = [mu, C w*, C w], the spectral measure of C, and
// finite-sample feature generation.

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "hesspec/glm_models.hpp"
#include "hesspec/rng.hpp"

namespace hesspec {

namespace cov {

struct ScaledIdentity {
    double s = 1.0;
};

struct Diagonal {
    Eigen::VectorXd entries;
};

struct DenseSPD {
    Eigen::MatrixXd matrix;
};

}  // namespace cov

using CovSpec = std::variant<cov::ScaledIdentity, cov::Diagonal, cov::DenseSPD>;

using Matrix3Col = Eigen::Matrix<double, Eigen::Dynamic, 3>;

struct ProblemSpec {
    int p = 0;
    int n = 0;
    Eigen::VectorXd mu;
    CovSpec cov = cov::ScaledIdentity{1.0};
    Eigen::VectorXd w_star;
    Eigen::VectorXd w;
    ResponseModel model = model::Logistic{};
    WeightFn weight = LossCurvature{Loss::Logistic};

    /// Dimension ratio p / n.
    double c() const { return static_cast<double>(p) / static_cast<double>(n); }

    /// Throws DomainError on inconsistent sizes or a non-positive covariance.
    void validate() const;
};

/// An atomic probability measure.
struct SpectralMeasure {
    std::vector<double> values;
    std::vector<double> weights;
};

/// Law of (h*, h) = (w*'x, w'x): mean (w*'mu, w'mu), covariance U'U.
struct ProjectionLaw {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
};

/// Eigenvalues of C as a measure; equal eigenvalues (relative tolerance 1e-10) are merged.
SpectralMeasure cov_spectrum(const CovSpec& cov, int p);

ProjectionLaw projection_law(const ProblemSpec& spec);

/// Moore-Penrose pseudoinverse of a symmetric PSD 2x2 matrix. Eigenvalues below
/// 1e-10 times the largest are treated as zero.
Eigen::Matrix2d pinv2(const Eigen::Matrix2d& gram);

enum class FeatureDist { Gaussian, Rademacher, StudentT };

struct FeatureLaw {
    FeatureDist kind = FeatureDist::Gaussian;
    double dof = 0.0;  // StudentT only, > 2
};

/// Parses "gaussian", "rademacher" or "student_t:<dof>".
FeatureLaw parse_feature_law(std::string_view text);
std::string to_string(const FeatureLaw& law);

/// Everything derived from a ProblemSpec that the solvers reuse. Immutable once built.
class FeatureGeometry {
public:
    explicit FeatureGeometry(const ProblemSpec& spec);

    int p() const { return p_; }

    /// Eigenvalues of C, one per coordinate of the eigenbasis.
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    /// True when C is not diagonal and an explicit eigenbasis O is stored.
    bool has_basis() const { return basis_.size() > 0; }
    const Eigen::MatrixXd& basis() const { return basis_; }

    const SpectralMeasure& spectrum() const { return spectrum_; }

    /// V = [mu, C w*, C w] (p x 3) and O'V.
    const Matrix3Col& v() const { return v_; }
    const Matrix3Col& v_rotated() const { return v_rotated_; }

    /// U'U and its pseudoinverse.
    const Eigen::Matrix2d& gram() const { return gram_; }
    const Eigen::Matrix2d& gram_pinv() const { return gram_pinv_; }
    const ProjectionLaw& projection() const { return projection_; }

    Eigen::MatrixXd apply_cov(const Eigen::MatrixXd& x) const;
    Eigen::MatrixXd apply_sqrt_cov(const Eigen::MatrixXd& x) const;
    Eigen::MatrixXd apply_inv_sqrt_cov(const Eigen::MatrixXd& x) const;

private:
    Eigen::MatrixXd apply_power(const Eigen::MatrixXd& x, double power) const;

    int p_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd basis_;
    SpectralMeasure spectrum_;
    Matrix3Col v_;
    Matrix3Col v_rotated_;
    Eigen::Matrix2d gram_;
    Eigen::Matrix2d gram_pinv_;
    ProjectionLaw projection_;
};

/// [-1_{p/2}; +1_{p/2}] scaled to Euclidean norm `norm` (odd p: one more +1 entry).
Eigen::VectorXd pm_block(int p, double norm);

/// A N(0, I/p) draw rescaled to Euclidean norm exactly `norm`.
Eigen::VectorXd gaussian_direction(int p, double norm, Philox4x32& rng);

/// Feature matrix X (p x n) with columns mu + C^{1/2} z_i, entries of z_i i.i.d. with
/// zero mean and unit variance drawn from `law`.
Eigen::MatrixXd sample_features(const ProblemSpec& spec, const FeatureGeometry& geometry,
                                const FeatureLaw& law, Philox4x32& rng);

}  // namespace hesspec
