#include "hesspec/feature_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "draws.hpp"
#include "hesspec/error.hpp"

namespace hesspec {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kMergeTol = 1e-10;
constexpr double kRankTol = 1e-10;

SpectralMeasure merge_sorted(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    SpectralMeasure out;
    const double unit = 1.0 / static_cast<double>(values.size());
    for (double v : values) {
        if (!out.values.empty() &&
            std::abs(v - out.values.back()) <= kMergeTol * std::max(std::abs(v), 1e-300)) {
            out.weights.back() += unit;
        } else {
            out.values.push_back(v);
            out.weights.push_back(unit);
        }
    }
    return out;
}

void check_vector(const Eigen::VectorXd& v, int p, const char* name) {
    if (v.size() != p) {
        throw DomainError(std::string(name) + " has length " + std::to_string(v.size()) +
                          ", expected p = " + std::to_string(p));
    }
    if (!v.allFinite()) {
        throw DomainError(std::string(name) + " has non-finite entries");
    }
}

Eigen::VectorXd cov_eigenvalues(const CovSpec& cov, int p, Eigen::MatrixXd* basis) {
    return std::visit(
        Overloaded{
            [&](const cov::ScaledIdentity& s) -> Eigen::VectorXd {
                return Eigen::VectorXd::Constant(p, s.s);
            },
            [&](const cov::Diagonal& d) -> Eigen::VectorXd { return d.entries; },
            [&](const cov::DenseSPD& m) -> Eigen::VectorXd {
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.matrix);
                if (eig.info() != Eigen::Success) {
                    throw NumericError("covariance eigendecomposition failed");
                }
                if (basis != nullptr) {
                    *basis = eig.eigenvectors();
                }
                return eig.eigenvalues();
            },
        },
        cov);
}

}  // namespace

void ProblemSpec::validate() const {
    if (p <= 0 || n <= 0) {
        throw DomainError("p and n must be positive");
    }
    check_vector(mu, p, "mu");
    check_vector(w_star, p, "w_star");
    check_vector(w, p, "w");
    std::visit(Overloaded{
                   [](const cov::ScaledIdentity& s) {
                       if (!(s.s > 0.0) || !std::isfinite(s.s)) {
                           throw DomainError("scaled identity covariance needs s > 0");
                       }
                   },
                   [&](const cov::Diagonal& d) {
                       check_vector(d.entries, p, "cov diagonal");
                       if (!(d.entries.array() > 0.0).all()) {
                           throw DomainError("diagonal covariance entries must be positive");
                       }
                   },
                   [&](const cov::DenseSPD& m) {
                       if (m.matrix.rows() != p || m.matrix.cols() != p) {
                           throw DomainError("dense covariance must be p x p");
                       }
                       if (!m.matrix.allFinite()) {
                           throw DomainError("dense covariance has non-finite entries");
                       }
                       const double asym = (m.matrix - m.matrix.transpose()).cwiseAbs().maxCoeff();
                       if (asym > 1e-12 * std::max(1.0, m.matrix.cwiseAbs().maxCoeff())) {
                           throw DomainError("dense covariance is not symmetric");
                       }
                       Eigen::LLT<Eigen::MatrixXd> llt(m.matrix);
                       if (llt.info() != Eigen::Success) {
                           throw DomainError("dense covariance is not positive definite");
                       }
                   },
               },
               cov);
    if (const auto* pre = std::get_if<Preprocess>(&weight); pre && !pre->map.fn) {
        throw DomainError("preprocessing map is empty");
    }
}

SpectralMeasure cov_spectrum(const CovSpec& cov, int p) {
    if (p <= 0) {
        throw DomainError("p must be positive");
    }
    if (const auto* s = std::get_if<cov::ScaledIdentity>(&cov)) {
        return {{s->s}, {1.0}};
    }
    const Eigen::VectorXd ev = cov_eigenvalues(cov, p, nullptr);
    return merge_sorted(std::vector<double>(ev.data(), ev.data() + ev.size()));
}

ProjectionLaw projection_law(const ProblemSpec& spec) {
    return FeatureGeometry(spec).projection();
}

Eigen::Matrix2d pinv2(const Eigen::Matrix2d& gram) {
    const Eigen::Matrix2d sym = 0.5 * (gram + gram.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(sym);
    const Eigen::Vector2d ev = eig.eigenvalues();
    const double top = std::max(std::abs(ev(0)), std::abs(ev(1)));
    Eigen::Matrix2d out = Eigen::Matrix2d::Zero();
    if (top == 0.0) {
        return out;
    }
    for (int k = 0; k < 2; ++k) {
        if (ev(k) > kRankTol * top) {
            const Eigen::Vector2d u = eig.eigenvectors().col(k);
            out += (u * u.transpose()) / ev(k);
        }
    }
    return out;
}

FeatureLaw parse_feature_law(std::string_view text) {
    if (text == "gaussian") return {FeatureDist::Gaussian, 0.0};
    if (text == "rademacher") return {FeatureDist::Rademacher, 0.0};
    for (std::string_view prefix : {"student_t:", "student_t("}) {
        if (text.substr(0, prefix.size()) == prefix) {
            std::string rest(text.substr(prefix.size()));
            if (!rest.empty() && rest.back() == ')') rest.pop_back();
            std::size_t used = 0;
            double dof = 0.0;
            try {
                dof = std::stod(rest, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != rest.size()) {
                throw DomainError("bad student_t degrees of freedom in '" + std::string(text) + "'");
            }
            if (!(dof > 2.0)) {
                throw DomainError("student_t needs dof > 2 for unit variance");
            }
            return {FeatureDist::StudentT, dof};
        }
    }
    throw DomainError("unknown feature distribution '" + std::string(text) +
                      "' (valid: gaussian, rademacher, student_t:<dof>)");
}

std::string to_string(const FeatureLaw& law) {
    switch (law.kind) {
        case FeatureDist::Gaussian: return "gaussian";
        case FeatureDist::Rademacher: return "rademacher";
        case FeatureDist::StudentT: {
            char buf[64];
            std::snprintf(buf, sizeof buf, "student_t:%.17g", law.dof);
            return buf;
        }
    }
    return "unknown";
}

FeatureGeometry::FeatureGeometry(const ProblemSpec& spec) : p_(spec.p) {
    spec.validate();
    eigenvalues_ = cov_eigenvalues(spec.cov, p_, &basis_);
    spectrum_ = std::holds_alternative<cov::ScaledIdentity>(spec.cov)
                    ? SpectralMeasure{{eigenvalues_(0)}, {1.0}}
                    : merge_sorted(std::vector<double>(eigenvalues_.data(),
                                                       eigenvalues_.data() + eigenvalues_.size()));

    Eigen::MatrixXd ws(p_, 2);
    ws.col(0) = spec.w_star;
    ws.col(1) = spec.w;
    const Eigen::MatrixXd cws = apply_cov(ws);

    v_.resize(p_, 3);
    v_.col(0) = spec.mu;
    v_.col(1) = cws.col(0);
    v_.col(2) = cws.col(1);
    v_rotated_ = has_basis() ? Matrix3Col(basis_.transpose() * v_) : v_;

    gram_ = ws.transpose() * cws;
    gram_ = 0.5 * (gram_ + gram_.transpose()).eval();
    gram_pinv_ = pinv2(gram_);
    projection_.mean = Eigen::Vector2d(spec.w_star.dot(spec.mu), spec.w.dot(spec.mu));
    projection_.cov = gram_;
}

Eigen::MatrixXd FeatureGeometry::apply_power(const Eigen::MatrixXd& x, double power) const {
    const Eigen::VectorXd scale = eigenvalues_.array().pow(power).matrix();
    if (has_basis()) {
        return basis_ * (scale.asDiagonal() * (basis_.transpose() * x));
    }
    return scale.asDiagonal() * x;
}

Eigen::MatrixXd FeatureGeometry::apply_cov(const Eigen::MatrixXd& x) const { return apply_power(x, 1.0); }

Eigen::MatrixXd FeatureGeometry::apply_sqrt_cov(const Eigen::MatrixXd& x) const {
    return apply_power(x, 0.5);
}

Eigen::MatrixXd FeatureGeometry::apply_inv_sqrt_cov(const Eigen::MatrixXd& x) const {
    return apply_power(x, -0.5);
}

Eigen::VectorXd pm_block(int p, double norm) {
    if (p <= 0) throw DomainError("pm_block needs p > 0");
    Eigen::VectorXd v = Eigen::VectorXd::Ones(p);
    v.head(p / 2).setConstant(-1.0);
    return v * (norm / std::sqrt(static_cast<double>(p)));
}

Eigen::VectorXd gaussian_direction(int p, double norm, Philox4x32& rng) {
    if (p <= 0) throw DomainError("gaussian_direction needs p > 0");
    Eigen::VectorXd v(p);
    for (int i = 0; i < p; ++i) v(i) = detail::standard_normal(rng);
    return v * (norm / v.norm());
}

Eigen::MatrixXd sample_features(const ProblemSpec& spec, const FeatureGeometry& geometry,
                                const FeatureLaw& law, Philox4x32& rng) {
    Eigen::MatrixXd z(spec.p, spec.n);
    double* data = z.data();
    const Eigen::Index total = z.size();
    switch (law.kind) {
        case FeatureDist::Gaussian:
            for (Eigen::Index i = 0; i < total; ++i) data[i] = detail::standard_normal(rng);
            break;
        case FeatureDist::Rademacher:
            for (Eigen::Index i = 0; i < total; ++i) data[i] = detail::rademacher(rng);
            break;
        case FeatureDist::StudentT: {
            if (!(law.dof > 2.0)) {
                throw DomainError("student_t needs dof > 2 for unit variance");
            }
            const double scale = std::sqrt((law.dof - 2.0) / law.dof);
            for (Eigen::Index i = 0; i < total; ++i) data[i] = scale * detail::student_t(rng, law.dof);
            break;
        }
    }
    Eigen::MatrixXd x;
    if (const auto* s = std::get_if<cov::ScaledIdentity>(&spec.cov)) {
        x = std::sqrt(s->s) * z;
    } else {
        x = geometry.apply_sqrt_cov(z);
    }
    x.colwise() += spec.mu;
    return x;
}

}  // namespace hesspec
