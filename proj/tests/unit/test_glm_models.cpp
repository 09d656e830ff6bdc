#include <cmath>
#include <limits>

#include "doctest.h"
#include "test_support.hpp"

using namespace hesspec;

TEST_SUITE("glm_models") {
    TEST_CASE("curvature examples") {
        CHECK(curvature(LossCurvature{Loss::Logistic}, 1.0, 0.0) == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(curvature(LossCurvature{Loss::Exponential}, -1.0, 0.0) == 1.0);
        CHECK(curvature(LossCurvature{Loss::PhaseSquare}, 1.0, 2.0) == 11.0);
        CHECK(curvature(LossCurvature{Loss::Square}, 0.3, -7.0) == 1.0);
        CHECK(curvature(trim_preprocess(0.2), 1.0, 123.0) == 0.0);
    }

    TEST_CASE("curvature rejects bad input") {
        const double inf = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(curvature(LossCurvature{Loss::Logistic}, 1.0, inf), DomainError);
        CHECK_THROWS_AS(curvature(LossCurvature{Loss::Square}, std::nan(""), 0.0), DomainError);
        CHECK_THROWS_AS(curvature(LossCurvature{Loss::Logistic}, 0.5, 0.0), DomainError);
        CHECK_THROWS_AS(curvature(LossCurvature{Loss::Exponential}, 2.0, 0.0), DomainError);
    }

    TEST_CASE("logistic curvature stays in (0, 1/4] and is symmetric in yh") {
        for (double h = -30.0; h <= 30.0; h += 0.37) {
            for (double y : {-1.0, 1.0}) {
                const double g = curvature(LossCurvature{Loss::Logistic}, y, h);
                CHECK(g > 0.0);
                CHECK(g <= 0.25);
                CHECK(g == curvature(LossCurvature{Loss::Logistic}, -y, -h));
            }
        }
    }

    TEST_CASE("curvature equals the second finite difference of the loss") {
        const double eps = 1e-4;
        struct Case {
            Loss loss;
            std::vector<double> ys;
        };
        const std::vector<Case> cases = {{Loss::Logistic, {-1.0, 1.0}},
                                         {Loss::Exponential, {-1.0, 1.0}},
                                         {Loss::Square, {-1.3, 0.0, 2.0}},
                                         {Loss::PhaseSquare, {0.0, 0.7, 2.5}}};
        for (const Case& cs : cases) {
            for (double y : cs.ys) {
                for (double h = -2.0; h <= 2.0; h += 0.25) {
                    const double fd = (loss_value(cs.loss, y, h + eps) - 2.0 * loss_value(cs.loss, y, h) +
                                       loss_value(cs.loss, y, h - eps)) /
                                      (eps * eps);
                    const double g = curvature(LossCurvature{cs.loss}, y, h);
                    INFO("loss " << to_string(cs.loss) << " y " << y << " h " << h);
                    CHECK(std::abs(fd - g) <= 1e-5 * std::max(1.0, std::abs(g)));
                }
            }
        }
    }

    TEST_CASE("sample_response") {
        Philox4x32 rng(3);
        CHECK(sample_response(model::PhaseRetrieval{}, 3.0, rng) == 9.0);
        CHECK(sample_response(model::NoisyNonlinearFactor{identity_fn(), 0.0}, 1.7, rng) == 1.7);
        CHECK(sample_response(model::SingleLayerNN{tanh_fn()}, 0.5, rng) == std::tanh(0.5));

        const int draws = 200000;
        int plus = 0;
        for (int i = 0; i < draws; ++i) {
            const double y = sample_response(model::Logistic{}, 0.0, rng);
            REQUIRE((y == 1.0 || y == -1.0));
            plus += y > 0.0;
        }
        const double se = std::sqrt(0.25 / draws);
        CHECK(std::abs(static_cast<double>(plus) / draws - 0.5) < 4.0 * se);

        // Noisy factor: mean link(h*), standard deviation sigma.
        double sum = 0.0, sum_sq = 0.0;
        const model::NoisyNonlinearFactor noisy{tanh_fn(), 0.5};
        for (int i = 0; i < draws; ++i) {
            const double y = sample_response(noisy, 0.8, rng);
            sum += y;
            sum_sq += y * y;
        }
        const double mean = sum / draws;
        CHECK(std::abs(mean - std::tanh(0.8)) < 4.0 * 0.5 / std::sqrt(draws));
        CHECK(std::sqrt(sum_sq / draws - mean * mean) == doctest::Approx(0.5).epsilon(0.01));
    }

    TEST_CASE("preprocess_trim") {
        CHECK(preprocess_trim(0.0, 0.2) == doctest::Approx(-1.0 / (std::sqrt(10.0) - 1.0)).epsilon(1e-15));
        CHECK(preprocess_trim(0.0, 0.2) == doctest::Approx(-0.462475).epsilon(1e-6));
        CHECK(preprocess_trim(1.0, 0.2) == 0.0);
        CHECK(preprocess_trim(std::numeric_limits<double>::infinity(), 0.2) == 1.0);
        CHECK(preprocess_trim(1e12, 0.2) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(preprocess_trim(-5.0, 0.2) == preprocess_trim(0.0, 0.2));
        CHECK_THROWS_AS(preprocess_trim(1.0, 0.0), DomainError);
        CHECK_THROWS_AS(preprocess_trim(1.0, -1.0), DomainError);

        double prev = preprocess_trim(0.0, 0.2);
        for (double t = 0.01; t < 50.0; t *= 1.1) {
            const double v = preprocess_trim(t, 0.2);
            CHECK(v >= prev);
            CHECK(v <= 1.0);
            prev = v;
        }
        const Preprocess pre = trim_preprocess(0.2);
        REQUIRE(pre.bounds.has_value());
        CHECK(pre.bounds->first == doctest::Approx(-0.462475).epsilon(1e-6));
        CHECK(pre.bounds->second == 1.0);
        CHECK_FALSE(trim_preprocess(4.0).bounds.has_value());
    }

    TEST_CASE("classify_g_support") {
        using testing_support::zero_spec;
        ProblemSpec s = zero_spec(40, 80);
        s.w = pm_block(40, 1.0);

        const GSupportClass logistic = classify_g_support(s);
        CHECK(logistic.bounded);
        REQUIRE(logistic.upper_bound.has_value());
        CHECK(*logistic.upper_bound == 0.25);
        CHECK(*logistic.lower_bound <= *logistic.upper_bound);

        s.weight = LossCurvature{Loss::Exponential};
        CHECK_FALSE(classify_g_support(s).bounded);

        ProblemSpec pr = zero_spec(40, 80);
        pr.model = model::PhaseRetrieval{};
        pr.weight = LossCurvature{Loss::PhaseSquare};
        pr.w_star = pm_block(40, 1.0);
        pr.w = pr.w_star;
        const GSupportClass phase = classify_g_support(pr);
        CHECK_FALSE(phase.bounded);
        CHECK(phase.rationale.find("chi-square") != std::string::npos);

        pr.weight = trim_preprocess(0.5);
        CHECK(classify_g_support(pr).bounded);

        ProblemSpec sq = zero_spec(40, 80);
        sq.weight = LossCurvature{Loss::Square};
        const GSupportClass square = classify_g_support(sq);
        CHECK(square.bounded);
        CHECK(*square.upper_bound == 1.0);

        // Unknown map: falls back to sampling.
        ProblemSpec custom = zero_spec(40, 80);
        custom.model = model::NoisyNonlinearFactor{identity_fn(), 1.0};
        custom.weight = Preprocess{tanh_fn(), std::nullopt};
        const GSupportClass sampled = classify_g_support(custom);
        CHECK(sampled.rationale == "sampled");
        CHECK(sampled.bounded);
    }

    TEST_CASE("names round-trip") {
        for (Loss l : {Loss::Logistic, Loss::Exponential, Loss::Square, Loss::PhaseSquare}) {
            CHECK(parse_loss(to_string(l)) == l);
        }
        CHECK_THROWS_AS(parse_loss("hinge"), DomainError);
        CHECK(named_fn("tanh")(0.3) == std::tanh(0.3));
        CHECK_THROWS_AS(named_fn("relu"), DomainError);
    }
}
