#pragma once

// Response models y ~ f(y | w*'x), loss curvatures g = d^2 l / dh^2 and the
// preprocessing weights that may replace them.

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

#include "hesspec/rng.hpp"

namespace hesspec {

struct ProblemSpec;

/// A scalar function with a stable name, so configs can be echoed and re-parsed.
struct NamedFn {
    std::string name;
    std::function<double(double)> fn;

    double operator()(double x) const { return fn(x); }
};

NamedFn identity_fn();
NamedFn tanh_fn();
/// Look up one of the shipped scalar functions ("identity", "tanh").
NamedFn named_fn(std::string_view name);

namespace model {

/// P(y = 1 | h*) = 1 / (1 + exp(-h*)), y in {-1, +1}.
struct Logistic {};

/// y = (h*)^2.
struct PhaseRetrieval {};

/// y ~ N(link(h*), sigma^2).
struct NoisyNonlinearFactor {
    NamedFn link;
    double sigma = 0.0;
};

/// y = activation(h*).
struct SingleLayerNN {
    NamedFn activation;
};

}  // namespace model

using ResponseModel = std::variant<model::Logistic, model::PhaseRetrieval,
                                   model::NoisyNonlinearFactor, model::SingleLayerNN>;

enum class Loss {
    Logistic,     // ln(1 + exp(-y h))
    Exponential,  // exp(-y h)
    Square,       // (y - h)^2 / 2
    PhaseSquare,  // (y - h^2)^2 / 4
};

struct LossCurvature {
    Loss loss = Loss::Logistic;
};

/// g(y, h) = map(y), independent of h. `bounds` is the known range of `map`, if any.
struct Preprocess {
    NamedFn map;
    std::optional<std::pair<double, double>> bounds;
};

using WeightFn = std::variant<LossCurvature, Preprocess>;

struct GSupportClass {
    bool bounded = false;
    std::optional<double> upper_bound;
    std::optional<double> lower_bound;
    std::string rationale;
};

std::string_view to_string(Loss loss);
Loss parse_loss(std::string_view name);
std::string model_name(const ResponseModel& model);
std::string weight_name(const WeightFn& weight);

/// Loss value l(y, h).
double loss_value(Loss loss, double y, double h);

/// g(y, h): the loss curvature, or the preprocessing map applied to y.
double curvature(const WeightFn& weight, double y, double h);

/// One draw of y given h* = w*'x.
double sample_response(const ResponseModel& model, double h_star, Philox4x32& rng);

/// Trimming preprocessor f(t) = (max(t,0) - 1) / (max(t,0) + sqrt(2/c) - 1).
double preprocess_trim(double t, double c);

/// Preprocess weight wrapping preprocess_trim at dimension ratio c, with its range attached.
Preprocess trim_preprocess(double c);

/// Whether the law of g has compact support.
GSupportClass classify_g_support(const ProblemSpec& spec);

}  // namespace hesspec
