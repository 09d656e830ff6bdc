#include "hesspec/glm_models.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "draws.hpp"
#include "hesspec/error.hpp"
#include "hesspec/feature_model.hpp"

namespace hesspec {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_finite(double value, const char* what) {
    if (!std::isfinite(value)) {
        throw DomainError(std::string("non-finite ") + what);
    }
}

void require_sign(double y, Loss loss) {
    if (y != 1.0 && y != -1.0) {
        throw DomainError(std::string(to_string(loss)) + " loss expects y in {-1, +1}, got " +
                          std::to_string(y));
    }
}

// sigma(t) * sigma(-t), evaluated without overflow.
double logistic_curvature(double t) {
    const double e = std::exp(-std::abs(t));
    return e / ((1.0 + e) * (1.0 + e));
}

double sigmoid(double t) {
    if (t >= 0) {
        return 1.0 / (1.0 + std::exp(-t));
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
}

constexpr int kSupportSamples = 200000;

GSupportClass sampled_support(const ProblemSpec& spec) {
    const ProjectionLaw law = projection_law(spec);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(law.cov);
    const Eigen::Vector2d sd = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Philox4x32 rng(0x5eedu, 0x9u);
    std::vector<double> g(kSupportSamples);
    for (double& value : g) {
        const Eigen::Vector2d xi(detail::standard_normal(rng), detail::standard_normal(rng));
        const Eigen::Vector2d h = law.mean + eig.eigenvectors() * sd.cwiseProduct(xi);
        const double y = sample_response(spec.model, h(0), rng);
        value = curvature(spec.weight, y, h(1));
    }
    std::vector<double> sorted = g;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    std::vector<double> dev(sorted.size());
    std::transform(sorted.begin(), sorted.end(), dev.begin(),
                   [median](double v) { return std::abs(v - median); });
    std::sort(dev.begin(), dev.end());
    const double q999 = dev[static_cast<std::size_t>(0.999 * static_cast<double>(dev.size()))];
    const double max_dev = dev.back();

    GSupportClass out;
    out.rationale = "sampled";
    // Light or bounded tails keep the sample extreme close to the 99.9% quantile;
    // Gaussian-type tails push it out by a third or more at this sample size.
    out.bounded = max_dev <= 1.05 * q999 + 1e-12;
    if (out.bounded) {
        out.lower_bound = sorted.front();
        out.upper_bound = sorted.back();
    }
    return out;
}

}  // namespace

NamedFn identity_fn() { return {"identity", [](double x) { return x; }}; }

NamedFn tanh_fn() { return {"tanh", [](double x) { return std::tanh(x); }}; }

NamedFn named_fn(std::string_view name) {
    if (name == "identity") return identity_fn();
    if (name == "tanh") return tanh_fn();
    throw DomainError("unknown scalar function '" + std::string(name) +
                      "' (valid: identity, tanh)");
}

std::string_view to_string(Loss loss) {
    switch (loss) {
        case Loss::Logistic: return "logistic";
        case Loss::Exponential: return "exponential";
        case Loss::Square: return "square";
        case Loss::PhaseSquare: return "phase_square";
    }
    return "unknown";
}

Loss parse_loss(std::string_view name) {
    if (name == "logistic") return Loss::Logistic;
    if (name == "exponential") return Loss::Exponential;
    if (name == "square") return Loss::Square;
    if (name == "phase_square") return Loss::PhaseSquare;
    throw DomainError("unknown loss '" + std::string(name) +
                      "' (valid: logistic, exponential, square, phase_square)");
}

std::string model_name(const ResponseModel& model) {
    return std::visit(Overloaded{
                          [](const model::Logistic&) { return std::string("logistic"); },
                          [](const model::PhaseRetrieval&) { return std::string("phase_retrieval"); },
                          [](const model::NoisyNonlinearFactor&) { return std::string("factor"); },
                          [](const model::SingleLayerNN&) { return std::string("nn"); },
                      },
                      model);
}

std::string weight_name(const WeightFn& weight) {
    return std::visit(Overloaded{
                          [](const LossCurvature& lc) { return std::string(to_string(lc.loss)); },
                          [](const Preprocess& pre) { return pre.map.name; },
                      },
                      weight);
}

double loss_value(Loss loss, double y, double h) {
    switch (loss) {
        case Loss::Logistic: {
            const double t = -y * h;
            // log1p(exp(t)) without overflow
            return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
        }
        case Loss::Exponential: return std::exp(-y * h);
        case Loss::Square: return 0.5 * (y - h) * (y - h);
        case Loss::PhaseSquare: return 0.25 * (y - h * h) * (y - h * h);
    }
    throw DomainError("unknown loss");
}

double curvature(const WeightFn& weight, double y, double h) {
    require_finite(y, "y");
    require_finite(h, "h");
    return std::visit(Overloaded{
                          [&](const LossCurvature& lc) -> double {
                              switch (lc.loss) {
                                  case Loss::Logistic:
                                      require_sign(y, lc.loss);
                                      return logistic_curvature(y * h);
                                  case Loss::Exponential:
                                      require_sign(y, lc.loss);
                                      return std::exp(-y * h);
                                  case Loss::Square: return 1.0;
                                  case Loss::PhaseSquare: return 3.0 * h * h - y;
                              }
                              throw DomainError("unknown loss");
                          },
                          [&](const Preprocess& pre) { return pre.map(y); },
                      },
                      weight);
}

double sample_response(const ResponseModel& model, double h_star, Philox4x32& rng) {
    require_finite(h_star, "h_star");
    return std::visit(Overloaded{
                          [&](const model::Logistic&) {
                              return detail::uniform01(rng) < sigmoid(h_star) ? 1.0 : -1.0;
                          },
                          [&](const model::PhaseRetrieval&) { return h_star * h_star; },
                          [&](const model::NoisyNonlinearFactor& m) {
                              const double mean = m.link(h_star);
                              return m.sigma > 0 ? mean + m.sigma * detail::standard_normal(rng)
                                                 : mean;
                          },
                          [&](const model::SingleLayerNN& m) { return m.activation(h_star); },
                      },
                      model);
}

double preprocess_trim(double t, double c) {
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw DomainError("preprocess_trim needs c in (0, inf)");
    }
    if (std::isinf(t) && t > 0) {
        return 1.0;
    }
    const double tp = std::max(t, 0.0);
    return (tp - 1.0) / (tp + std::sqrt(2.0 / c) - 1.0);
}

Preprocess trim_preprocess(double c) {
    if (!(c > 0.0)) {
        throw DomainError("trim preprocessing needs c in (0, inf)");
    }
    Preprocess pre{{"trim", [c](double t) { return preprocess_trim(t, c); }}, std::nullopt};
    const double a = std::sqrt(2.0 / c);
    if (a > 1.0) {
        pre.bounds = std::make_pair(-1.0 / (a - 1.0), 1.0);
    }
    return pre;
}

GSupportClass classify_g_support(const ProblemSpec& spec) {
    const ProjectionLaw law = projection_law(spec);
    const double var_h = law.cov(1, 1);
    const double scale = std::max({1.0, law.cov(0, 0), var_h});
    const bool h_random = var_h > 1e-14 * scale;

    if (const auto* pre = std::get_if<Preprocess>(&spec.weight)) {
        if (pre->bounds) {
            return {true, pre->bounds->second, pre->bounds->first,
                    "preprocessing map '" + pre->map.name + "' has bounded range"};
        }
        return sampled_support(spec);
    }

    const Loss loss = std::get<LossCurvature>(spec.weight).loss;
    switch (loss) {
        case Loss::Logistic:
            return {true, 0.25, 0.0, "logistic curvature sigma(yh)sigma(-yh) <= 1/4"};
        case Loss::Square:
            return {true, 1.0, 1.0, "square loss has constant curvature 1"};
        case Loss::Exponential:
            if (h_random) {
                return {false, std::nullopt, std::nullopt,
                        "exp(-yh) with Gaussian h is log-normal"};
            }
            {
                const double g = std::exp(std::abs(law.mean(1)));
                return {true, g, 1.0 / g, "h is deterministic, g takes two values"};
            }
        case Loss::PhaseSquare: {
            // g = 3h^2 - y; only a degenerate quadratic form keeps it bounded.
            const bool pr = std::holds_alternative<model::PhaseRetrieval>(spec.model);
            if (pr) {
                Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(law.cov);
                const Eigen::Matrix2d root = eig.eigenvectors() *
                                             eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                                             eig.eigenvectors().transpose();
                const Eigen::Matrix2d form =
                    root * Eigen::Vector2d(-1.0, 3.0).asDiagonal() * root;
                const Eigen::Vector2d linear =
                    2.0 * root * Eigen::Vector2d(-law.mean(0), 3.0 * law.mean(1));
                if (form.norm() <= 1e-12 * scale && linear.norm() <= 1e-12 * scale) {
                    const double g = 3.0 * law.mean(1) * law.mean(1) - law.mean(0) * law.mean(0);
                    return {true, g, g, "3h^2 - (h*)^2 is degenerate (constant)"};
                }
                return {false, std::nullopt, std::nullopt,
                        "3h^2 - (h*)^2 is a weighted chi-square"};
            }
            if (h_random) {
                return {false, std::nullopt, std::nullopt, "3h^2 - y with Gaussian h is unbounded"};
            }
            return sampled_support(spec);
        }
    }
    return sampled_support(spec);
}

}  // namespace hesspec
