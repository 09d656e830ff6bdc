#include "hesspec/empirical.hpp"

#include <algorithm>
#include <cmath>

#include "hesspec/error.hpp"
#include "hesspec/parallel.hpp"

namespace hesspec {

namespace {

struct Accumulator {
    double sum = 0.0;
    double sum_sq = 0.0;
    int count = 0;

    void add(double v) {
        sum += v;
        sum_sq += v * v;
        ++count;
    }
    double mean() const { return count ? sum / count : std::nan(""); }
    double std_error() const {
        if (count < 2) return 0.0;
        const double m = mean();
        const double var = std::max(0.0, (sum_sq - count * m * m) / (count - 1));
        return std::sqrt(var / count);
    }
    ErrorEntry entry(double theory) const {
        return {mean(), theory, std::abs(mean() - theory), std_error()};
    }
};

double quantile_sorted(const std::vector<double>& v, double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const std::size_t j = std::min(i + 1, v.size() - 1);
    return v[i] + (pos - static_cast<double>(i)) * (v[j] - v[i]);
}

}  // namespace

Eigen::MatrixXd build_hessian(const Eigen::MatrixXd& x, const Eigen::VectorXd& d) {
    if (d.size() != x.cols()) {
        throw DomainError("build_hessian: d has length " + std::to_string(d.size()) + ", X has " +
                          std::to_string(x.cols()) + " columns");
    }
    const Eigen::Index p = x.rows();
    const double inv_n = 1.0 / static_cast<double>(x.cols());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p, p);
    // Split D into its positive and negative parts so both updates are rank-k SYRKs.
    const Eigen::VectorXd pos = d.cwiseMax(0.0).cwiseSqrt();
    const Eigen::VectorXd neg = (-d).cwiseMax(0.0).cwiseSqrt();
    if (pos.squaredNorm() > 0.0) {
        h.selfadjointView<Eigen::Lower>().rankUpdate(x * pos.asDiagonal(), inv_n);
    }
    if (neg.squaredNorm() > 0.0) {
        h.selfadjointView<Eigen::Lower>().rankUpdate(x * neg.asDiagonal(), -inv_n);
    }
    h.triangularView<Eigen::StrictlyUpper>() = h.transpose();
    return h;
}

Eigen::VectorXd hessian_weights(const ProblemSpec& spec, const Eigen::MatrixXd& x,
                                Philox4x32& rng) {
    const Eigen::VectorXd h_star = x.transpose() * spec.w_star;
    const Eigen::VectorXd h = x.transpose() * spec.w;
    Eigen::VectorXd d(x.cols());
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        const double y = sample_response(spec.model, h_star(i), rng);
        d(i) = curvature(spec.weight, y, h(i));
    }
    return d;
}

EmpiricalSpectrum run_trial(const ProblemSpec& spec, const FeatureGeometry& geometry,
                            const FeatureLaw& law, std::uint64_t seed, int extreme) {
    Philox4x32 feature_rng(seed, 0);
    Philox4x32 response_rng(seed, 1);
    const Eigen::MatrixXd x = sample_features(spec, geometry, law, feature_rng);
    const Eigen::VectorXd d = hessian_weights(spec, x, response_rng);
    const Eigen::MatrixXd h = build_hessian(x, d);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
    if (eig.info() != Eigen::Success) {
        throw NumericError("Hessian eigendecomposition failed (seed " + std::to_string(seed) + ")");
    }
    EmpiricalSpectrum out;
    out.seed = seed;
    out.eigenvalues = eig.eigenvalues();
    const Eigen::Index p = h.rows();
    const Eigen::Index k = std::clamp<Eigen::Index>(extreme, 1, p);
    out.top_vecs.resize(p, k);
    out.bottom_vecs.resize(p, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        out.top_vecs.col(j) = eig.eigenvectors().col(p - 1 - j);
        out.bottom_vecs.col(j) = eig.eigenvectors().col(j);
    }
    return out;
}

double default_edge_tol(const SupportReport& support, int p) {
    return support.width() * 5.0 / static_cast<double>(p);
}

std::vector<Outlier> extract_outliers(const EmpiricalSpectrum& spectrum,
                                      const SupportReport& support,
                                      std::optional<double> edge_tol) {
    std::vector<Outlier> out;
    if (support.intervals.empty()) return out;
    const auto p = static_cast<int>(spectrum.eigenvalues.size());
    const double tol = edge_tol.value_or(default_edge_tol(support, p));
    for (Eigen::Index i = 0; i < spectrum.eigenvalues.size(); ++i) {
        const double v = spectrum.eigenvalues(i);
        bool near = false;
        for (const auto& [a, b] : support.intervals) {
            if (v >= a - tol && v <= b + tol) {
                near = true;
                break;
            }
        }
        if (near) continue;
        const auto [edge, left] = support.nearest_edge(v);
        (void)edge;
        out.push_back({v, left ? Side::Left : Side::Right, i});
    }
    return out;
}

double measure_alignment(const Eigen::VectorXd& vec, const Eigen::VectorXd& target) {
    const double norm2 = target.squaredNorm();
    if (!(norm2 > 0.0)) throw DomainError("measure_alignment: zero target");
    if (vec.size() != target.size()) throw DomainError("measure_alignment: size mismatch");
    const double dot = target.dot(vec);
    return dot * dot / norm2;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw DomainError("ks_distance: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0;
    std::size_t j = 0;
    double best = 0.0;
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return best;
}

double density_l1(const BulkSolver& bulk, std::vector<double> values, int* bins) {
    if (values.size() < 2) throw DomainError("density_l1 needs at least two values");
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    const double lo = values.front();
    const double hi = values.back();
    if (!(hi > lo)) throw DomainError("density_l1: degenerate sample");
    const double iqr = quantile_sorted(values, 0.75) - quantile_sorted(values, 0.25);
    double width = 2.0 * iqr * std::cbrt(1.0 / n);
    if (!(width > 0.0)) width = (hi - lo) / std::sqrt(n);
    const int nb = std::clamp(static_cast<int>(std::ceil((hi - lo) / width)), 1, 10000);
    width = (hi - lo) / nb;

    std::vector<double> counts(nb, 0.0);
    for (double v : values) {
        const int b = std::min(static_cast<int>((v - lo) / width), nb - 1);
        counts[b] += 1.0;
    }

    constexpr int kSub = 8;
    std::vector<double> grid(static_cast<std::size_t>(nb) * kSub);
    for (int b = 0; b < nb; ++b) {
        for (int k = 0; k < kSub; ++k) {
            grid[static_cast<std::size_t>(b) * kSub + k] = lo + width * (b + (k + 0.5) / kSub);
        }
    }
    const DensityCurve theory = bulk.density(grid, BulkSolver::default_epsilon(hi - lo));
    double l1 = 0.0;
    for (int b = 0; b < nb; ++b) {
        double avg = 0.0;
        for (int k = 0; k < kSub; ++k) {
            const double r = theory.density[static_cast<std::size_t>(b) * kSub + k];
            avg += std::isfinite(r) ? r : 0.0;
        }
        avg /= kSub;
        l1 += std::abs(counts[b] / (n * width) - avg) * width;
    }
    if (bins) *bins = nb;
    return l1;
}

ComparisonReport compare(const BulkSolver& bulk, const SupportReport& support,
                         const std::vector<SpikeReport>& spikes, const CompareOptions& options) {
    if (options.trials < 1) throw DomainError("compare needs at least one trial");
    const ProblemSpec& spec = bulk.spec();
    const FeatureGeometry& geometry = bulk.geometry();

    // Match the j-th rightmost predicted spike with the j-th largest eigenvalue, and
    // likewise on the left.
    std::vector<int> right, left;
    for (int s = 0; s < static_cast<int>(spikes.size()); ++s) {
        (spikes[s].side == Side::Right && spikes[s].location > support.right() ? right : left)
            .push_back(s);
    }
    std::sort(right.begin(), right.end(),
              [&](int a, int b) { return spikes[a].location > spikes[b].location; });
    std::sort(left.begin(), left.end(),
              [&](int a, int b) { return spikes[a].location < spikes[b].location; });
    const int extreme = std::max<int>({1, static_cast<int>(right.size()), static_cast<int>(left.size())});

    struct TrialResult {
        std::vector<double> eigenvalues;
        std::vector<double> location;
        std::vector<std::array<double, 3>> cos2;
        std::vector<bool> detected;
        int outliers = 0;
    };
    std::vector<TrialResult> results(options.trials);
    ComparisonReport report;
    report.trials = options.trials;
    for (int t = 0; t < options.trials; ++t) report.seeds.push_back(options.base_seed + t);

    parallel_for(
        static_cast<std::size_t>(options.trials),
        [&](std::size_t t) {
            const EmpiricalSpectrum es =
                run_trial(spec, geometry, options.law, report.seeds[t], extreme);
            TrialResult& r = results[t];
            r.eigenvalues.assign(es.eigenvalues.data(), es.eigenvalues.data() + es.eigenvalues.size());
            const auto outliers = extract_outliers(es, support, options.edge_tol);
            r.outliers = static_cast<int>(outliers.size());
            r.location.resize(spikes.size());
            r.cos2.resize(spikes.size());
            r.detected.resize(spikes.size());
            const Eigen::Index p = es.eigenvalues.size();
            auto record = [&](int s, Eigen::Index index, const Eigen::VectorXd& vec) {
                r.location[s] = es.eigenvalues(index);
                r.detected[s] = std::any_of(outliers.begin(), outliers.end(),
                                            [&](const Outlier& o) { return o.index == index; });
                for (int k = 0; k < 3; ++k) {
                    const Eigen::VectorXd col = geometry.v().col(k);
                    r.cos2[s][k] = col.squaredNorm() > 0.0 ? measure_alignment(vec, col) : 0.0;
                }
            };
            for (std::size_t j = 0; j < right.size(); ++j) {
                record(right[j], p - 1 - static_cast<Eigen::Index>(j), es.top_vecs.col(j));
            }
            for (std::size_t j = 0; j < left.size(); ++j) {
                record(left[j], static_cast<Eigen::Index>(j), es.bottom_vecs.col(j));
            }
        },
        options.threads);

    std::vector<double> pooled;
    pooled.reserve(static_cast<std::size_t>(options.trials) * spec.p);
    for (const TrialResult& r : results) {
        pooled.insert(pooled.end(), r.eigenvalues.begin(), r.eigenvalues.end());
        report.outlier_counts.push_back(r.outliers);
    }
    report.density_l1 = density_l1(bulk, pooled, &report.bins);

    for (std::size_t s = 0; s < spikes.size(); ++s) {
        SpikeComparison sc;
        sc.side = spikes[s].side;
        Accumulator loc, gap;
        std::array<Accumulator, 3> cos2;
        for (const TrialResult& r : results) {
            loc.add(r.location[s]);
            gap.add(std::abs(r.location[s] - spikes[s].edge));
            for (int k = 0; k < 3; ++k) cos2[k].add(r.cos2[s][k]);
            if (r.detected[s]) ++sc.detected_trials;
        }
        sc.location = loc.entry(spikes[s].location);
        sc.gap = gap.entry(spikes[s].gap);
        for (int k = 0; k < 3; ++k) {
            sc.active[k] = geometry.v().col(k).squaredNorm() > 0.0;
            sc.cos2[k] = cos2[k].entry(spikes[s].cos2(k));
        }
        report.spikes.push_back(sc);
    }
    return report;
}

}  // namespace hesspec
