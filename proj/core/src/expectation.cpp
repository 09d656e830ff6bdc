#include "hesspec/expectation.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "hesspec/error.hpp"
#include "hesspec/quadrature.hpp"

namespace hesspec {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kRankTol = 1e-10;
constexpr double kPoleTol = 1e-12;

struct Node {
    double h_star;
    double h;
    double weight;
};

double sigmoid(double t) {
    if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

// (h*, h) nodes for the 2-D Gaussian law, in whitened coordinates.
std::vector<Node> projection_nodes(const ProjectionLaw& law, int order, int* rank) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(law.cov);
    const Eigen::Vector2d ev = eig.eigenvalues();
    const double top = std::max(ev(0), ev(1));
    std::vector<int> dirs;
    for (int k = 0; k < 2; ++k) {
        if (top > 0.0 && ev(k) > kRankTol * top) dirs.push_back(k);
    }
    *rank = static_cast<int>(dirs.size());

    std::vector<Node> nodes;
    if (dirs.empty()) {
        nodes.push_back({law.mean(0), law.mean(1), 1.0});
        return nodes;
    }
    if (dirs.size() == 1) {
        const Eigen::Vector2d axis = eig.eigenvectors().col(dirs[0]) * std::sqrt(ev(dirs[0]));
        const auto rule = gauss_hermite_normal(order * ExpectationEngine::kRankOneFactor);
        nodes.reserve(rule->order);
        for (int i = 0; i < rule->order; ++i) {
            const Eigen::Vector2d h = law.mean + rule->nodes(i) * axis;
            nodes.push_back({h(0), h(1), rule->weights(i)});
        }
        return nodes;
    }
    const Eigen::Matrix2d root = eig.eigenvectors() * ev.cwiseSqrt().asDiagonal();
    const auto rule = gauss_hermite_normal(order);
    nodes.reserve(static_cast<std::size_t>(rule->order) * rule->order);
    for (int i = 0; i < rule->order; ++i) {
        for (int j = 0; j < rule->order; ++j) {
            const Eigen::Vector2d h =
                law.mean + root * Eigen::Vector2d(rule->nodes(i), rule->nodes(j));
            nodes.push_back({h(0), h(1), rule->weights(i) * rule->weights(j)});
        }
    }
    return nodes;
}

// Exact law of y given h*, as (value, probability) pairs.
template <class Emit>
void marginalize_y(const ResponseModel& model, double h_star, Emit&& emit) {
    std::visit(Overloaded{
                   [&](const model::Logistic&) {
                       emit(1.0, sigmoid(h_star));
                       emit(-1.0, sigmoid(-h_star));
                   },
                   [&](const model::PhaseRetrieval&) { emit(h_star * h_star, 1.0); },
                   [&](const model::SingleLayerNN& m) { emit(m.activation(h_star), 1.0); },
                   [&](const model::NoisyNonlinearFactor& m) {
                       const double mean = m.link(h_star);
                       if (!(m.sigma > 0.0)) {
                           emit(mean, 1.0);
                           return;
                       }
                       const auto rule = gauss_hermite_normal(ExpectationEngine::kNoiseOrder);
                       for (int k = 0; k < rule->order; ++k) {
                           emit(mean + m.sigma * rule->nodes(k), rule->weights(k));
                       }
                   },
               },
               model);
}

}  // namespace

ExpectationEngine::ExpectationEngine(const ProblemSpec& spec, const FeatureGeometry& geometry,
                                     int order)
    : order_(order), gram_pinv_(geometry.gram_pinv()) {
    if (order < 1) {
        throw DomainError("quadrature order must be >= 1");
    }
    const ProjectionLaw& law = geometry.projection();
    const std::vector<Node> nodes = projection_nodes(law, order, &rank_);
    degenerate_gram_ = rank_ < 2;

    atoms_.reserve(nodes.size() * 2);
    for (const Node& node : nodes) {
        const Eigen::Vector2d s(node.h_star - law.mean(0), node.h - law.mean(1));
        const Eigen::Vector2d u = gram_pinv_ * s;
        marginalize_y(spec.model, node.h_star, [&](double y, double prob) {
            const double weight = node.weight * prob;
            if (weight <= 0.0) return;
            atoms_.push_back({weight, curvature(spec.weight, y, node.h), u});
        });
    }
    if (atoms_.empty()) {
        throw NumericError("quadrature produced no atoms");
    }

    std::vector<std::pair<double, double>> gw;
    gw.reserve(atoms_.size());
    for (const Atom& a : atoms_) gw.emplace_back(a.g, a.weight);
    std::sort(gw.begin(), gw.end());
    for (const auto& [g, w] : gw) {
        if (!g_values_.empty() && g == g_values_.back()) {
            g_weights_.back() += w;
        } else {
            g_values_.push_back(g);
            g_weights_.push_back(w);
        }
    }
}

void ExpectationEngine::check_poles(cd delta) const {
    for (std::size_t i = 0; i < g_values_.size(); ++i) {
        if (std::abs(1.0 + g_values_[i] * delta) <= kPoleTol) {
            throw PoleError(i, g_values_[i], delta);
        }
    }
}

std::pair<cd, cd> ExpectationEngine::e_weight_pair(cd delta) const {
    check_poles(delta);
    cd e1{0.0, 0.0};
    cd e2{0.0, 0.0};
    for (std::size_t i = 0; i < g_values_.size(); ++i) {
        const cd k = g_values_[i] / (1.0 + g_values_[i] * delta);
        e1 += g_weights_[i] * k;
        e2 += g_weights_[i] * k * k;
    }
    return {e1, e2};
}

cd ExpectationEngine::e_weight(cd delta) const { return e_weight_pair(delta).first; }

cd ExpectationEngine::e_weight_sq(cd delta) const { return e_weight_pair(delta).second; }

template <class Kernel>
Eigen::Matrix3cd ExpectationEngine::lambda_like(cd delta, Kernel kernel) const {
    check_poles(delta);
    cd s00{0.0, 0.0}, s01{0.0, 0.0}, s02{0.0, 0.0};
    cd s11{0.0, 0.0}, s12{0.0, 0.0}, s22{0.0, 0.0};
    for (const Atom& a : atoms_) {
        const cd k = a.weight * kernel(a.g);
        s00 += k;
        s01 += k * a.u(0);
        s02 += k * a.u(1);
        s11 += k * (a.u(0) * a.u(0));
        s12 += k * (a.u(0) * a.u(1));
        s22 += k * (a.u(1) * a.u(1));
    }
    Eigen::Matrix3cd out;
    out(0, 0) = s00;
    out(0, 1) = out(1, 0) = s01;
    out(0, 2) = out(2, 0) = s02;
    out(1, 1) = s11 - gram_pinv_(0, 0) * s00;
    out(1, 2) = out(2, 1) = s12 - gram_pinv_(0, 1) * s00;
    out(2, 2) = s22 - gram_pinv_(1, 1) * s00;
    return out;
}

LambdaMatrix ExpectationEngine::lambda_matrix(cd z, cd delta) const {
    LambdaMatrix out;
    out.z = z;
    out.delta = delta;
    out.degenerate_gram = degenerate_gram_;
    out.entries = lambda_like(delta, [delta](double g) { return g / (1.0 + g * delta); });
    return out;
}

Eigen::Matrix3cd ExpectationEngine::lambda_sq_kernel(cd delta) const {
    return lambda_like(delta, [delta](double g) {
        const cd k = g / (1.0 + g * delta);
        return k * k;
    });
}

double ExpectationEngine::g_quantile(double q) const {
    q = std::clamp(q, 0.0, 1.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < g_values_.size(); ++i) {
        acc += g_weights_[i];
        if (acc >= q) return g_values_[i];
    }
    return g_values_.back();
}

}  // namespace hesspec
