#pragma once

// Finite-size ground truth: sample X and y, build H = (1/n) X D X', eigendecompose, and
// compare against the asymptotic predictions.

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hesspec/bulk_solver.hpp"
#include "hesspec/feature_model.hpp"
#include "hesspec/spike_solver.hpp"

namespace hesspec {

struct EmpiricalSpectrum {
    Eigen::VectorXd eigenvalues;  // ascending
    Eigen::MatrixXd top_vecs;     // column k: eigenvector of the (k+1)-th largest eigenvalue
    Eigen::MatrixXd bottom_vecs;  // column k: eigenvector of the (k+1)-th smallest eigenvalue
    std::uint64_t seed = 0;

    Eigen::VectorXd top_vec() const { return top_vecs.col(0); }
    Eigen::VectorXd bottom_vec() const { return bottom_vecs.col(0); }
};

/// H = (1/n) sum_i d_i x_i x_i', exactly symmetric.
Eigen::MatrixXd build_hessian(const Eigen::MatrixXd& x, const Eigen::VectorXd& d);

/// d_i = g(y_i, w'x_i) with y_i drawn from the response model at w*'x_i.
Eigen::VectorXd hessian_weights(const ProblemSpec& spec, const Eigen::MatrixXd& x,
                                Philox4x32& rng);

/// One Monte Carlo draw. Features use Philox stream 0 of `seed`, responses stream 1.
/// Keeps `extreme` eigenvectors at each end of the spectrum.
EmpiricalSpectrum run_trial(const ProblemSpec& spec, const FeatureGeometry& geometry,
                            const FeatureLaw& law, std::uint64_t seed, int extreme = 1);

struct Outlier {
    double value = 0.0;
    Side side = Side::Right;
    Eigen::Index index = 0;
};

/// 5/p times the support width.
double default_edge_tol(const SupportReport& support, int p);

std::vector<Outlier> extract_outliers(const EmpiricalSpectrum& spectrum,
                                      const SupportReport& support,
                                      std::optional<double> edge_tol = std::nullopt);

/// (target'vec)^2 / |target|^2.
double measure_alignment(const Eigen::VectorXd& vec, const Eigen::VectorXd& target);

struct ErrorEntry {
    double empirical = 0.0;  // mean over trials
    double theory = 0.0;
    double abs_error = 0.0;
    double std_error = 0.0;  // of the empirical mean
};

struct SpikeComparison {
    Side side = Side::Right;
    ErrorEntry location;
    ErrorEntry gap;
    /// Per column of V (mu, C w*, C w); only active columns are meaningful.
    std::array<ErrorEntry, 3> cos2{};
    std::array<bool, 3> active{};
    int detected_trials = 0;  // trials where the matching eigenvalue was an outlier
};

struct ComparisonReport {
    double density_l1 = 0.0;
    int bins = 0;
    std::vector<SpikeComparison> spikes;
    std::vector<int> outlier_counts;  // per trial
    int trials = 0;
    std::vector<std::uint64_t> seeds;
};

struct CompareOptions {
    int trials = 10;
    std::uint64_t base_seed = 1;
    FeatureLaw law;
    int threads = 0;
    std::optional<double> edge_tol;
};

/// Pools eigenvalues over trials (seeds base_seed + t) and compares with the theory:
/// histogram vs density over Freedman-Diaconis bins, extreme eigenvalues and their
/// eigenvector alignments vs each predicted spike.
ComparisonReport compare(const BulkSolver& bulk, const SupportReport& support,
                         const std::vector<SpikeReport>& spikes, const CompareOptions& options);

/// Freedman-Diaconis histogram of `values` (density-normalized) and the L1 distance
/// sum_b |hist_b - theory_b| * width_b against the bin-averaged theory density.
double density_l1(const BulkSolver& bulk, std::vector<double> values, int* bins = nullptr);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_distance(std::vector<double> a, std::vector<double> b);

}  // namespace hesspec
