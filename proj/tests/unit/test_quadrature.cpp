#include <cmath>

#include "doctest.h"
#include "hesspec/quadrature.hpp"

using namespace hesspec;

TEST_SUITE("quadrature") {
    TEST_CASE("physicists' weights sum to sqrt(pi)") {
        for (int order : {1, 2, 5, 32, 96, 200}) {
            const QuadratureGrid g = gauss_hermite_physicists(order);
            CHECK(g.order == order);
            CHECK(g.nodes.size() == order);
            CHECK(std::abs(g.weights.sum() - std::sqrt(M_PI)) < 1e-13);
            CHECK((g.weights.array() >= 0.0).all());
        }
        CHECK_THROWS(gauss_hermite_physicists(0));
    }

    TEST_CASE("small rules match closed forms") {
        const QuadratureGrid g2 = gauss_hermite_physicists(2);
        CHECK(g2.nodes(1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
        CHECK(g2.weights(0) == doctest::Approx(std::sqrt(M_PI) / 2).epsilon(1e-14));
        const QuadratureGrid g3 = gauss_hermite_physicists(3);
        CHECK(g3.nodes(1) == 0.0);
        CHECK(g3.nodes(2) == doctest::Approx(std::sqrt(1.5)).epsilon(1e-14));
        CHECK(g3.weights(1) == doctest::Approx(2.0 * std::sqrt(M_PI) / 3).epsilon(1e-14));
    }

    TEST_CASE("normal rule integrates even moments exactly") {
        const auto g = gauss_hermite_normal(20);
        CHECK(std::abs(g->weights.sum() - 1.0) < 1e-13);
        double double_factorial = 1.0;
        for (int k = 1; k <= 19; ++k) {
            double_factorial *= (2 * k - 1);
            const double moment = (g->weights.array() * g->nodes.array().pow(2 * k)).sum();
            CHECK(moment == doctest::Approx(double_factorial).epsilon(1e-10));
            const double odd = (g->weights.array() * g->nodes.array().pow(2 * k - 1)).sum();
            CHECK(std::abs(odd) < 1e-9 * double_factorial);
        }
    }

    TEST_CASE("nodes are symmetric and sorted") {
        const auto g = gauss_hermite_normal(96);
        for (int i = 0; i < 96; ++i) {
            CHECK(g->nodes(i) == -g->nodes(95 - i));
            CHECK(g->weights(i) == g->weights(95 - i));
            if (i > 0) CHECK(g->nodes(i) > g->nodes(i - 1));
        }
    }

    TEST_CASE("long rules stay accurate") {
        const auto g = gauss_hermite_normal(768);
        CHECK(std::abs(g->weights.sum() - 1.0) < 1e-13);
        // E[cos(aZ)] = exp(-a^2/2)
        for (double a : {0.5, 2.0, 8.0}) {
            const double v = (g->weights.array() * (a * g->nodes.array()).cos()).sum();
            CHECK(std::abs(v - std::exp(-0.5 * a * a)) < 1e-12);
        }
    }

    TEST_CASE("rules are cached") {
        CHECK(gauss_hermite_normal(17).get() == gauss_hermite_normal(17).get());
    }
}
