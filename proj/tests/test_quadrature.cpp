#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tpe/errors.hpp"
#include "tpe/quadrature.hpp"

using namespace tpe;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// exact value of x^a y^b integrated over the reference triangle
double tri_monomial(int a, int b) {
    return factorial(a) * factorial(b) / factorial(a + b + 2);
}

} // namespace

TEST_CASE("triangle rule weights sum to the reference area") {
    for (int deg = 1; deg <= 8; ++deg) {
        double s = 0.0;
        for (const auto& pt : triangle_rule(deg)) s += pt.w;
        CHECK(std::abs(s - 0.5) < 1e-14);
    }
}

TEST_CASE("triangle rules integrate monomials to stated degree") {
    for (int deg = 1; deg <= 8; ++deg)
        for (int a = 0; a <= deg; ++a)
            for (int b = 0; a + b <= deg; ++b) {
                double s = 0.0;
                for (const auto& pt : triangle_rule(deg))
                    s += pt.w * std::pow(pt.x, a) * std::pow(pt.y, b);
                double exact = tri_monomial(a, b);
                CHECK(std::abs(s - exact) <= 1e-14 * std::max(1.0, exact));
            }
}

TEST_CASE("degree request maps to the next available table") {
    CHECK(triangle_rule(2).size() == triangle_rule(3).size());
    CHECK(triangle_rule(4).size() == triangle_rule(5).size());
    CHECK(triangle_rule(1).size() == 1);
    CHECK(triangle_rule(8).size() == 25);
    CHECK_THROWS_AS(triangle_rule(9), ConfigError);
    CHECK_THROWS_AS(triangle_rule(0), ConfigError);
}

TEST_CASE("edge rules integrate polynomials on the unit interval") {
    for (int deg = 1; deg <= 9; ++deg) {
        double s = 0.0;
        for (const auto& pt : edge_rule(deg)) s += pt.w;
        CHECK(std::abs(s - 1.0) < 1e-14);
        for (int a = 0; a <= deg; ++a) {
            double v = 0.0;
            for (const auto& pt : edge_rule(deg)) v += pt.w * std::pow(pt.t, a);
            CHECK(std::abs(v - 1.0 / (a + 1)) < 1e-14);
        }
    }
    CHECK_THROWS_AS(edge_rule(10), ConfigError);
}

TEST_CASE("points lie inside the reference domains") {
    for (int deg = 1; deg <= 8; ++deg)
        for (const auto& pt : triangle_rule(deg)) {
            CHECK(pt.x >= 0.0);
            CHECK(pt.y >= 0.0);
            CHECK(pt.x + pt.y <= 1.0 + 1e-15);
        }
    for (int deg = 1; deg <= 9; ++deg)
        for (const auto& pt : edge_rule(deg)) {
            CHECK(pt.t > 0.0);
            CHECK(pt.t < 1.0);
        }
}
