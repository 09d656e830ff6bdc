#include "hesspec/spike_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "hesspec/error.hpp"

namespace hesspec {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

const char* to_string(Side side) { return side == Side::Left ? "left" : "right"; }

SpikeSolver::SpikeSolver(const BulkSolver& bulk) : bulk_(bulk) {
    const Matrix3Col& v = bulk_.geometry().v();
    for (int k = 0; k < 3; ++k) {
        col_norm2_(k) = v.col(k).squaredNorm();
        active_[k] = col_norm2_(k) > 0.0;
        if (active_[k]) index_.push_back(k);
    }
}

Eigen::Matrix3cd SpikeSolver::q_forms(const StieltjesPoint& point, bool derivative, cd delta_prime,
                                      cd e2) const {
    const Matrix3Col& w = bulk_.geometry().v_rotated();
    const Eigen::VectorXd& t = bulk_.geometry().eigenvalues();
    Eigen::Matrix3cd out = Eigen::Matrix3cd::Zero();
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        const cd r = 1.0 / (point.e * t(i) - point.z);
        const cd factor = derivative ? (1.0 + e2 * delta_prime * t(i)) * r * r : r;
        for (int a = 0; a < 3; ++a) {
            for (int b = a; b < 3; ++b) {
                out(a, b) += factor * (w(i, a) * w(i, b));
            }
        }
    }
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < a; ++b) out(a, b) = out(b, a);
    }
    return out;
}

Eigen::Matrix3cd SpikeSolver::q_bar_forms(const StieltjesPoint& point) const {
    return q_forms(point, false, 0.0, 0.0);
}

Eigen::Matrix3cd SpikeSolver::q_bar_forms(double z) const {
    return q_bar_forms(bulk_.solve_point(cd(z, 0.0)));
}

GMatrix SpikeSolver::g_matrix(double z, std::optional<cd> warm_start) const {
    GMatrix out;
    out.z = z;
    out.point = bulk_.solve_point(cd(z, 0.0), warm_start);
    out.vqv = q_bar_forms(out.point);
    out.lambda_mat = bulk_.engine().lambda_matrix(out.point.z, out.point.delta);
    for (int a : index_) {
        for (int b : index_) {
            cd sum = a == b ? 1.0 : 0.0;
            for (int k : index_) sum += out.lambda_mat.entries(a, k) * out.vqv(k, b);
            out.entries(a, b) = sum;
        }
    }
    return out;
}

double SpikeSolver::det_of(const GMatrix& g) {
    const cd det = g.entries.determinant();
    if (std::abs(det.imag()) > 1e-9 * std::max(1.0, std::abs(det))) {
        throw ImaginaryLeak("det G(z) has imaginary part " + std::to_string(det.imag()) +
                            " at z = " + std::to_string(g.z));
    }
    return det.real();
}

double SpikeSolver::det_g(double z, std::optional<cd> warm_start) const {
    return det_of(g_matrix(z, warm_start));
}

Eigen::Matrix3cd SpikeSolver::g_prime(const GMatrix& g) const {
    const StieltjesDerivatives d = bulk_.derivatives(g.point);
    const Eigen::Matrix3cd lambda_prime =
        -d.delta_prime * bulk_.engine().lambda_sq_kernel(g.point.delta);
    const Eigen::Matrix3cd vqv_prime = q_forms(g.point, true, d.delta_prime, d.e2);
    Eigen::Matrix3cd out = Eigen::Matrix3cd::Zero();
    for (int a : index_) {
        for (int b : index_) {
            cd sum{0.0, 0.0};
            for (int k : index_) {
                sum += lambda_prime(a, k) * g.vqv(k, b) + g.lambda_mat.entries(a, k) * vqv_prime(k, b);
            }
            out(a, b) = sum;
        }
    }
    return out;
}

Eigen::Matrix3cd SpikeSolver::g_prime(double z) const { return g_prime(g_matrix(z)); }

Eigen::MatrixXd SpikeSolver::reduce(const Eigen::Matrix3cd& full) const {
    const int k = active_count();
    Eigen::MatrixXd out(k, k);
    for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) out(a, b) = full(index_[a], index_[b]).real();
    }
    return out;
}

Eigen::Matrix3d SpikeSolver::alignment(double lambda) const {
    if (index_.empty()) {
        throw DomainError("V has no nonzero column; there is nothing to align with");
    }
    const GMatrix g = g_matrix(lambda);
    const Eigen::MatrixXd gk = reduce(g.entries);
    const Eigen::MatrixXd mk = reduce(g.vqv);
    const Eigen::MatrixXd gpk = reduce(g_prime(g));

    if (gk.rows() > 1) {
        Eigen::EigenSolver<Eigen::MatrixXd> eig(gk, false);
        std::vector<double> mags;
        for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
            mags.push_back(std::abs(eig.eigenvalues()(i)));
        }
        std::sort(mags.begin(), mags.end());
        if (mags[1] <= 1e-6) {
            throw MultiplicityViolation("zero eigenvalue of G at " + std::to_string(lambda) +
                                        " is not simple");
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(gk, Eigen::ComputeFullV);
    const Eigen::VectorXd v_right = svd.matrixV().col(gk.cols() - 1);
    // G^T = I + M Lambda has null vector M v_right since Lambda and M are symmetric.
    const Eigen::VectorXd v_left = mk * v_right;
    const double denom = v_left.dot(gpk * v_right);
    const Eigen::MatrixXd ak = -(v_left * v_left.transpose()) / denom;

    Eigen::Matrix3d out = Eigen::Matrix3d::Zero();
    for (int a = 0; a < active_count(); ++a) {
        for (int b = 0; b < active_count(); ++b) out(index_[a], index_[b]) = ak(a, b);
    }
    return out;
}

double SpikeSolver::bisect(double a, double b, double fa, cd warm) const {
    const double tol = 1e-12 * std::max(1.0, bulk_.scale());
    while (std::abs(b - a) > tol) {
        const double mid = 0.5 * (a + b);
        const GMatrix g = g_matrix(mid, warm);
        const double fm = det_of(g);
        warm = g.point.delta;
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (fa > 0.0)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    return 0.5 * (a + b);
}

SpikeReport SpikeSolver::report(double lambda, const SupportReport& support) const {
    SpikeReport out;
    out.location = lambda;
    const auto [edge, left] = support.nearest_edge(lambda);
    out.edge = edge;
    out.side = left ? Side::Left : Side::Right;
    out.gap = std::abs(lambda - edge);
    out.det_residual = std::abs(det_g(lambda));
    try {
        out.alignment = alignment(lambda);
        for (int k = 0; k < 3; ++k) {
            out.cos2(k) = active_[k] ? out.alignment(k, k) / col_norm2_(k) : 0.0;
        }
    } catch (const MultiplicityViolation&) {
        out.simple = false;
        out.alignment.setConstant(kNaN);
        out.cos2.setConstant(kNaN);
    }
    return out;
}

std::vector<SpikeReport> SpikeSolver::find_spikes(const SupportReport& support,
                                                  std::optional<double> scan_margin,
                                                  int mesh) const {
    std::vector<SpikeReport> out;
    if (support.intervals.empty()) {
        throw NumericError("support is empty; cannot scan for spikes");
    }
    if (index_.empty() || mesh < 2) return out;
    const double width = std::max(support.width(), 1e-12 * std::max(1.0, bulk_.scale()));
    const double margin = scan_margin.value_or(kDefaultMarginFactor * width);
    const double d_min = 1e-8 * width;

    // Mesh distances from an edge, graded geometrically so spikes close to an edge resolve.
    auto graded = [&](double reach, int count) {
        std::vector<double> d(count);
        const double lo = std::min(d_min, 0.5 * reach);
        for (int k = 0; k < count; ++k) {
            d[k] = lo * std::pow(reach / lo, static_cast<double>(k) / (count - 1));
        }
        return d;
    };

    std::vector<std::vector<double>> windows;
    {
        std::vector<double> xs;
        for (double d : graded(margin, mesh)) xs.push_back(support.left() - d);
        std::reverse(xs.begin(), xs.end());
        windows.push_back(xs);
    }
    for (std::size_t i = 0; i + 1 < support.intervals.size(); ++i) {
        const double a = support.intervals[i].second;
        const double b = support.intervals[i + 1].first;
        const double half = 0.5 * (b - a);
        if (!(half > 0.0)) continue;
        std::vector<double> xs;
        for (double d : graded(half, mesh / 2)) xs.push_back(a + d);
        std::vector<double> back;
        for (double d : graded(half, mesh / 2)) back.push_back(b - d);
        std::reverse(back.begin(), back.end());
        back.erase(back.begin());  // midpoint is shared
        xs.insert(xs.end(), back.begin(), back.end());
        windows.push_back(xs);
    }
    {
        std::vector<double> xs;
        for (double d : graded(margin, mesh)) xs.push_back(support.right() + d);
        windows.push_back(xs);
    }

    for (const auto& xs : windows) {
        std::optional<cd> warm;
        double prev_x = kNaN;
        double prev_det = kNaN;
        std::optional<cd> prev_delta;
        for (double x : xs) {
            double det = kNaN;
            try {
                const GMatrix g = g_matrix(x, warm);
                det = det_of(g);
                warm = g.point.delta;
            } catch (const NumericError&) {
                warm.reset();
            }
            if (std::isfinite(det) && std::isfinite(prev_det)) {
                if (det == 0.0) {
                    out.push_back(report(x, support));
                } else if ((det > 0.0) != (prev_det > 0.0) && prev_det != 0.0) {
                    const double root = bisect(prev_x, x, prev_det, *prev_delta);
                    out.push_back(report(root, support));
                }
            }
            prev_x = x;
            prev_det = det;
            prev_delta = warm;
        }
    }
    std::sort(out.begin(), out.end(),
              [](const SpikeReport& a, const SpikeReport& b) { return a.location < b.location; });
    return out;
}

Corollary1Result corollary1_oracle(double rho, double c) {
    if (!(rho >= 0.0) || !(c > 0.0)) {
        throw DomainError("corollary1_oracle needs rho >= 0 and c > 0");
    }
    Corollary1Result out;
    if (rho > std::sqrt(c)) {
        out.spike = true;
        out.lambda = 0.25 * (1.0 + rho + c * (rho + 1.0) / rho);
        out.alignment = (rho * rho - c) / (rho * rho + c * rho);
    } else {
        out.lambda = 0.25 * (1.0 + std::sqrt(c)) * (1.0 + std::sqrt(c));
        out.alignment = 0.0;
    }
    return out;
}

namespace {

// E over r = w_norm * xi, xi ~ N(0,1), by the trapezoid rule on [-12, 12].
class Corollary2Law {
public:
    Corollary2Law(double w_norm, double c) : c_(c) {
        constexpr int kPoints = 12001;
        constexpr double kHalf = 12.0;
        const double h = 2.0 * kHalf / (kPoints - 1);
        cosh2_.resize(kPoints);
        a_.resize(kPoints);
        w_.resize(kPoints);
        double total = 0.0;
        for (int i = 0; i < kPoints; ++i) {
            const double xi = -kHalf + h * i;
            const double r = w_norm * xi;
            cosh2_[i] = std::exp(r) + std::exp(-r);
            a_[i] = xi * xi - 1.0;
            w_[i] = std::exp(-0.5 * xi * xi) * ((i == 0 || i == kPoints - 1) ? 0.5 : 1.0);
            total += w_[i];
        }
        for (double& w : w_) w /= total;
    }

    struct Moments {
        double f, f2, fa, f2a;
    };

    Moments at(double m) const {
        Moments mo{0.0, 0.0, 0.0, 0.0};
        for (std::size_t i = 0; i < w_.size(); ++i) {
            const double f = 1.0 / (c_ * m + 2.0 + cosh2_[i]);
            mo.f += w_[i] * f;
            mo.f2 += w_[i] * f * f;
            mo.fa += w_[i] * f * a_[i];
            mo.f2a += w_[i] * f * f * a_[i];
        }
        return mo;
    }

    double z(double m) const { return at(m).f - 1.0 / m; }
    double z_slope(double m) const { return 1.0 / (m * m) - c_ * at(m).f2; }
    double det(double m) const { return 1.0 + m * at(m).fa; }

private:
    double c_;
    std::vector<double> cosh2_, a_, w_;
};

}  // namespace

Corollary2Result corollary2_oracle(double w_norm, double c) {
    if (!(w_norm > 0.0) || !(c > 0.0)) {
        throw DomainError("corollary2_oracle needs w_norm > 0 and c > 0");
    }
    if (!(c < 1.0)) {
        throw DomainError("corollary2_oracle needs c < 1 (no left edge otherwise)");
    }
    const Corollary2Law law(w_norm, c);

    // Left edge: z(m) increases on (0, m_edge) and peaks at m_edge.
    double lo = 1e-6;
    double hi = 1.0;
    while (law.z_slope(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) throw NumericError("corollary2_oracle: no left edge found");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (law.z_slope(mid) > 0.0 ? lo : hi) = mid;
    }
    const double m_edge = 0.5 * (lo + hi);

    Corollary2Result out;
    out.left_edge = law.z(m_edge);

    constexpr int kScan = 2000;
    double prev_m = 1e-9 * m_edge;
    double prev_det = law.det(prev_m);
    for (int k = 1; k <= kScan; ++k) {
        const double m = m_edge * std::pow(1e-9, 1.0 - static_cast<double>(k) / kScan);
        const double det = law.det(m);
        if ((det > 0.0) != (prev_det > 0.0)) {
            double a = prev_m;
            double b = m;
            for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
                const double mid = 0.5 * (a + b);
                ((law.det(mid) > 0.0) == (prev_det > 0.0) ? a : b) = mid;
            }
            const double ms = 0.5 * (a + b);
            const auto mo = law.at(ms);
            const double m_prime = 1.0 / law.z_slope(ms);
            const double g_prime = m_prime * (mo.fa - c * ms * mo.f2a);
            out.lambda = law.z(ms);
            out.gap = out.left_edge - *out.lambda;
            out.alignment = -ms / g_prime;
            break;
        }
        prev_m = m;
        prev_det = det;
    }
    return out;
}

}  // namespace hesspec
