#include <cmath>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "doctest.h"
#include "test_support.hpp"

using namespace hesspec;
using testing_support::zero_spec;

namespace {

struct Mc {
    double mean;
    double se;
};

// Plain Monte Carlo of E[phi(h)], h ~ N(0, s^2), with y marginalized out by sampling.
template <class F>
Mc monte_carlo(int draws, std::uint64_t seed, F&& f) {
    Philox4x32 rng(seed);
    boost::random::normal_distribution<double> normal;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < draws; ++i) {
        const double v = f(normal(rng), rng);
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / draws;
    return {mean, std::sqrt((sum_sq / draws - mean * mean) / draws)};
}

double logistic_g(double h) {
    const double e = std::exp(-std::abs(h));
    return e / ((1.0 + e) * (1.0 + e));
}

}  // namespace

TEST_SUITE("expectation") {
    TEST_CASE("constant g gives closed forms") {
        const ProblemSpec s = zero_spec(20, 40);
        const FeatureGeometry geo(s);
        const ExpectationEngine eng(s, geo);
        CHECK(eng.g_constant());
        CHECK(eng.g_min() == 0.25);
        for (cd delta : {cd(0.0, 0.0), cd(1.3, 0.0), cd(-0.5, 0.7)}) {
            CHECK(std::abs(eng.e_weight(delta) - 0.25 / (1.0 + 0.25 * delta)) < 1e-15);
            const LambdaMatrix lam = eng.lambda_matrix(cd(0.1, 0.0), delta);
            Eigen::Matrix3cd expected = Eigen::Matrix3cd::Zero();
            expected(0, 0) = 0.25 / (1.0 + 0.25 * delta);
            CHECK((lam.entries - expected).norm() < 1e-15);
            CHECK(lam.degenerate_gram);
        }
        CHECK(std::abs(eng.e_weight_sq(2.0) - 1.0 / 36.0) < 1e-15);
        CHECK_THROWS_AS(eng.e_weight(-4.0), PoleError);
        try {
            eng.e_weight(-4.0);
        } catch (const PoleError& e) {
            CHECK(e.g() == 0.25);
            CHECK(e.delta() == cd(-4.0, 0.0));
        }
    }

    TEST_CASE("square loss") {
        ProblemSpec s = zero_spec(20, 40);
        s.weight = LossCurvature{Loss::Square};
        s.w = pm_block(20, 1.0);
        const FeatureGeometry geo(s);
        const ExpectationEngine eng(s, geo);
        CHECK(std::abs(eng.e_weight(1.0) - 0.5) < 1e-15);
        CHECK(std::abs(eng.e_weight_sq(0.0) - 1.0) < 1e-13);
        // Deterministic g: the U+ z blocks average to zero and (U'U)+.
        const LambdaMatrix lam = eng.lambda_matrix(0.0, 0.0);
        CHECK(std::abs(lam.entries(0, 0) - 1.0) < 1e-13);
        CHECK(lam.entries.bottomRightCorner(2, 2).norm() < 1e-12);
        CHECK(std::abs(lam.entries(0, 2)) < 1e-13);
    }

    TEST_CASE("logistic E[g] and E[g^2] against Monte Carlo") {
        ProblemSpec s = zero_spec(20, 40);
        s.w = pm_block(20, 1.0);
        const FeatureGeometry geo(s);
        const ExpectationEngine eng(s, geo);
        const int draws = 10000000;
        const Mc g1 = monte_carlo(draws, 1, [](double h, Philox4x32&) { return logistic_g(h); });
        const Mc g2 = monte_carlo(draws, 2, [](double h, Philox4x32&) {
            const double g = logistic_g(h);
            return g * g;
        });
        const cd e = eng.e_weight(0.0);
        CHECK(std::abs(e.real() - g1.mean) < 3.0 * g1.se);
        CHECK(e.real() > 0.0);
        CHECK(e.real() <= 0.25);
        CHECK(std::abs(eng.e_weight_sq(0.0).real() - g2.mean) < 3.0 * g2.se);
    }

    TEST_CASE("signal-free logistic scalar E[f(r)(r^2/|w|^2 - 1)] against Monte Carlo") {
        const double wn = 2.0;
        const double c = 0.1;
        const double m = 3.0;
        ProblemSpec s = zero_spec(80, 800);
        s.w = pm_block(80, wn);
        const FeatureGeometry geo(s);
        const ExpectationEngine eng(s, geo);
        const cd delta = c * m;
        const LambdaMatrix lam = eng.lambda_matrix(0.0, delta);
        const double quad = lam.entries(2, 2).real() * wn * wn;
        const Mc mc = monte_carlo(10000000, 3, [&](double xi, Philox4x32&) {
            const double r = wn * xi;
            return (xi * xi - 1.0) / (c * m + 2.0 + std::exp(r) + std::exp(-r));
        });
        CHECK(std::abs(quad - mc.mean) < 3.0 * mc.se);
    }

    TEST_CASE("odd-symmetric entries vanish for the logistic model with mu = 0") {
        ProblemSpec s = zero_spec(30, 60);
        Philox4x32 rng(12);
        s.w = gaussian_direction(30, 1.2, rng);
        s.w_star = gaussian_direction(30, 0.8, rng);
        const FeatureGeometry geo(s);
        const ExpectationEngine eng(s, geo);
        const LambdaMatrix lam = eng.lambda_matrix(cd(0.2, 0.1), cd(0.4, 0.3));
        CHECK(std::abs(lam.entries(0, 1)) < 1e-14);
        CHECK(std::abs(lam.entries(0, 2)) < 1e-14);
        CHECK_FALSE(lam.degenerate_gram);
        CHECK((lam.entries - lam.entries.transpose()).norm() < 1e-15);
    }

    TEST_CASE("quadrature order 64 vs 128 agree to 1e-9") {
        ProblemSpec s = zero_spec(30, 60);
        Philox4x32 rng(13);
        s.mu = gaussian_direction(30, 0.7, rng);
        s.w = gaussian_direction(30, 1.1, rng);
        s.w_star = gaussian_direction(30, 0.9, rng);
        const FeatureGeometry geo(s);
        const ExpectationEngine lo(s, geo, 64);
        const ExpectationEngine hi(s, geo, 128);
        for (cd delta : {cd(0.0, 0.0), cd(0.8, 0.0), cd(0.3, 0.5)}) {
            const cd a = lo.e_weight(delta), b = hi.e_weight(delta);
            CHECK(std::abs(a - b) <= 1e-9 * std::abs(b));
            CHECK(std::abs(lo.e_weight_sq(delta) - hi.e_weight_sq(delta)) <=
                  1e-9 * std::abs(hi.e_weight_sq(delta)));
            const Eigen::Matrix3cd la = lo.lambda_matrix(0.0, delta).entries;
            const Eigen::Matrix3cd lb = hi.lambda_matrix(0.0, delta).entries;
            CHECK((la - lb).cwiseAbs().maxCoeff() <= 1e-9 * lb.cwiseAbs().maxCoeff());
        }
    }

    TEST_CASE("conjugate symmetry") {
        ProblemSpec s = zero_spec(30, 60);
        s.w = pm_block(30, 1.5);
        s.weight = LossCurvature{Loss::Exponential};
        const FeatureGeometry geo(s);
        const ExpectationEngine eng(s, geo);
        for (cd delta : {cd(0.3, 0.4), cd(-0.1, 2.0), cd(1.0, -0.5)}) {
            CHECK(std::abs(eng.e_weight(std::conj(delta)) - std::conj(eng.e_weight(delta))) < 1e-15);
        }
    }

    TEST_CASE("Lambda agrees with plain Monte Carlo on randomized specs") {
        for (std::uint64_t seed : {31u, 32u, 33u}) {
            ProblemSpec s = zero_spec(25, 50);
            Philox4x32 rng(seed);
            s.mu = gaussian_direction(25, 0.6, rng);
            s.w = gaussian_direction(25, 1.0, rng);
            s.w_star = gaussian_direction(25, 1.3, rng);
            const FeatureGeometry geo(s);
            const ExpectationEngine eng(s, geo);
            const cd delta(0.7, 0.0);
            const Eigen::Matrix3cd lam = eng.lambda_matrix(0.0, delta).entries;

            const ProjectionLaw& law = geo.projection();
            const Eigen::Matrix2d chol = law.cov.llt().matrixL();
            const Eigen::Matrix2d pinv = geo.gram_pinv();
            Philox4x32 mc_rng(seed + 100);
            boost::random::normal_distribution<double> normal;
            boost::random::uniform_01<double> unif;
            const int draws = 1000000;
            Eigen::Matrix3d sum = Eigen::Matrix3d::Zero(), sum_sq = Eigen::Matrix3d::Zero();
            for (int i = 0; i < draws; ++i) {
                const Eigen::Vector2d xi(normal(mc_rng), normal(mc_rng));
                const Eigen::Vector2d s2 = chol * xi;
                const Eigen::Vector2d h = law.mean + s2;
                const double y = unif(mc_rng) < 1.0 / (1.0 + std::exp(-h(0))) ? 1.0 : -1.0;
                const double g = logistic_g(y * h(1));
                const double k = g / (1.0 + g * delta.real());
                const Eigen::Vector2d u = pinv * s2;
                Eigen::Matrix3d b;
                b(0, 0) = 1.0;
                b.block<1, 2>(0, 1) = u.transpose();
                b.block<2, 1>(1, 0) = u;
                b.block<2, 2>(1, 1) = u * u.transpose() - pinv;
                const Eigen::Matrix3d v = k * b;
                sum += v;
                sum_sq += v.cwiseProduct(v);
            }
            const Eigen::Matrix3d mean = sum / draws;
            const Eigen::Matrix3d se = ((sum_sq / draws - mean.cwiseProduct(mean)) / draws).cwiseSqrt();
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) {
                    INFO("seed " << seed << " entry " << a << b);
                    CHECK(std::abs(lam(a, b).real() - mean(a, b)) < 4.0 * se(a, b) + 1e-12);
                }
            }
        }
    }

    TEST_CASE("collinear w and w* use the reduced projection") {
        ProblemSpec s = zero_spec(30, 150);
        s.model = model::PhaseRetrieval{};
        s.weight = trim_preprocess(0.2);
        s.w_star = pm_block(30, 1.0);
        s.w = std::sqrt(2.0 / 3.0) * s.w_star;
        const FeatureGeometry geo(s);
        const ExpectationEngine eng(s, geo);
        CHECK(eng.projection_rank() == 1);
        CHECK(eng.degenerate_gram());
        const LambdaMatrix lam = eng.lambda_matrix(0.0, 0.5);
        CHECK(lam.degenerate_gram);
        CHECK(lam.entries.allFinite());
        // y = h*^2 with h* ~ N(0, 1): E[f(y)] by a direct 1-D sum on a fine grid.
        double direct = 0.0, total = 0.0;
        for (double x = -12.0; x <= 12.0; x += 1e-3) {
            const double w = std::exp(-0.5 * x * x);
            direct += w * preprocess_trim(x * x, 0.2);
            total += w;
        }
        CHECK(eng.e_weight(0.0).real() == doctest::Approx(direct / total).epsilon(1e-9));
    }

    TEST_CASE("noisy factor model marginalizes y with an inner rule") {
        ProblemSpec s = zero_spec(20, 40);
        s.model = model::NoisyNonlinearFactor{identity_fn(), 0.5};
        s.weight = Preprocess{tanh_fn(), std::nullopt};
        s.w_star = pm_block(20, 1.0);
        const FeatureGeometry geo(s);
        const ExpectationEngine eng(s, geo);
        // y ~ N(0, 1 + 0.25) marginally; E[tanh(y)^2] by a direct sum.
        double direct = 0.0, total = 0.0;
        const double sd = std::sqrt(1.25);
        for (double x = -12.0; x <= 12.0; x += 1e-3) {
            const double w = std::exp(-0.5 * x * x);
            direct += w * std::tanh(sd * x) * std::tanh(sd * x);
            total += w;
        }
        CHECK(eng.e_weight_sq(0.0).real() == doctest::Approx(direct / total).epsilon(1e-8));
    }
}
