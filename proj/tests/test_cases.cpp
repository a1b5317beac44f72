#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "tpe/cases.hpp"
#include "tpe/errors.hpp"

using namespace tpe;

namespace {

// central differences on the value functions; the derivative closures in the
// exact solutions must reproduce them
double dfdx(const TScalarFn& f, const Vec2& x, double t, double h = 1e-6) {
    return (f(Vec2(x.x() + h, x.y()), t) - f(Vec2(x.x() - h, x.y()), t)) /
           (2 * h);
}
double dfdy(const TScalarFn& f, const Vec2& x, double t, double h = 1e-6) {
    return (f(Vec2(x.x(), x.y() + h), t) - f(Vec2(x.x(), x.y() - h), t)) /
           (2 * h);
}
double dfdt(const TScalarFn& f, const Vec2& x, double t, double h = 1e-6) {
    return (f(x, t + h) - f(x, t - h)) / (2 * h);
}
double lap_fd(const TScalarFn& f, const Vec2& x, double t, double h = 1e-4) {
    return (f(Vec2(x.x() + h, x.y()), t) + f(Vec2(x.x() - h, x.y()), t) +
            f(Vec2(x.x(), x.y() + h), t) + f(Vec2(x.x(), x.y() - h), t) -
            4 * f(x, t)) /
           (h * h);
}
double dxx_fd(const TScalarFn& f, const Vec2& x, double t, double h = 1e-4) {
    return (f(Vec2(x.x() + h, x.y()), t) - 2 * f(x, t) +
            f(Vec2(x.x() - h, x.y()), t)) /
           (h * h);
}
double dyy_fd(const TScalarFn& f, const Vec2& x, double t, double h = 1e-4) {
    return (f(Vec2(x.x(), x.y() + h), t) - 2 * f(x, t) +
            f(Vec2(x.x(), x.y() - h), t)) /
           (h * h);
}
double dxy_fd(const TScalarFn& f, const Vec2& x, double t, double h = 1e-4) {
    return (f(Vec2(x.x() + h, x.y() + h), t) - f(Vec2(x.x() + h, x.y() - h), t) -
            f(Vec2(x.x() - h, x.y() + h), t) + f(Vec2(x.x() - h, x.y() - h), t)) /
           (4 * h * h);
}

TScalarFn comp(const TVectorFn& u, int i) {
    return [=](const Vec2& x, double t) { return u(x, t)[i]; };
}

void check_close(double got, double want, double tol_scale) {
    CHECK(std::abs(got - want) <= tol_scale * (1.0 + std::abs(want)));
}

std::vector<Vec2> interior_points(int count, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uni(0.05, 0.95);
    std::vector<Vec2> pts;
    for (int i = 0; i < count; ++i) pts.emplace_back(uni(rng), uni(rng));
    return pts;
}

void check_exact_derivatives(const Case& c, double t) {
    const ExactSolution& ex = c.exact;
    for (const Vec2& x : interior_points(12, 7u)) {
        TScalarFn u1 = comp(ex.u, 0), u2 = comp(ex.u, 1);

        Mat2 g = ex.grad_u(x, t);
        check_close(g(0, 0), dfdx(u1, x, t), 1e-6);
        check_close(g(0, 1), dfdy(u1, x, t), 1e-6);
        check_close(g(1, 0), dfdx(u2, x, t), 1e-6);
        check_close(g(1, 1), dfdy(u2, x, t), 1e-6);

        check_close(ex.lap_u(x, t)[0], lap_fd(u1, x, t), 1e-4);
        check_close(ex.lap_u(x, t)[1], lap_fd(u2, x, t), 1e-4);

        double div_fd = dfdx(u1, x, t) + dfdy(u2, x, t);
        check_close(ex.div_u(x, t), div_fd, 1e-6);
        check_close(ex.grad_div_u(x, t)[0],
                    dxx_fd(u1, x, t) + dxy_fd(u2, x, t), 1e-4);
        check_close(ex.grad_div_u(x, t)[1],
                    dxy_fd(u1, x, t) + dyy_fd(u2, x, t), 1e-4);
        TScalarFn divu = [&](const Vec2& y, double s) {
            return ex.div_u(y, s);
        };
        check_close(ex.div_u_t(x, t), dfdt(divu, x, t), 1e-6);

        check_close(ex.grad_p(x, t)[0], dfdx(ex.p, x, t), 1e-6);
        check_close(ex.grad_p(x, t)[1], dfdy(ex.p, x, t), 1e-6);
        check_close(ex.lap_p(x, t), lap_fd(ex.p, x, t), 1e-4);
        check_close(ex.p_t(x, t), dfdt(ex.p, x, t), 1e-6);

        check_close(ex.grad_T(x, t)[0], dfdx(ex.T, x, t), 1e-6);
        check_close(ex.grad_T(x, t)[1], dfdy(ex.T, x, t), 1e-6);
        check_close(ex.lap_T(x, t), lap_fd(ex.T, x, t), 1e-4);
        check_close(ex.T_t(x, t), dfdt(ex.T, x, t), 1e-6);
    }
}

} // namespace

TEST_CASE("exact solution derivative closures agree with finite differences") {
    check_exact_derivatives(build_case("test1"), 0.37);
    check_exact_derivatives(build_case("test2"), 5e-4);
    check_exact_derivatives(build_case("conservation"), 0.05);
}

TEST_CASE("momentum source reconstructed from field values alone") {
    for (const char* name : {"test1", "test2"}) {
        Case c = build_case(name);
        double mu = c.params.mu(), lm = c.params.lambda() + c.params.mu();
        double t = c.t_f / 2;
        for (const Vec2& x : interior_points(8, 21u)) {
            TScalarFn u1 = comp(c.exact.u, 0), u2 = comp(c.exact.u, 1);
            double fx = -mu * lap_fd(u1, x, t) -
                        lm * (dxx_fd(u1, x, t) + dxy_fd(u2, x, t)) +
                        c.params.alpha * dfdx(c.exact.p, x, t) +
                        c.params.beta * dfdx(c.exact.T, x, t);
            double fy = -mu * lap_fd(u2, x, t) -
                        lm * (dxy_fd(u1, x, t) + dyy_fd(u2, x, t)) +
                        c.params.alpha * dfdy(c.exact.p, x, t) +
                        c.params.beta * dfdy(c.exact.T, x, t);
            Vec2 f = c.f(x, t);
            check_close(f[0], fx, 1e-4);
            check_close(f[1], fy, 1e-4);
        }
    }
}

TEST_CASE("flow source matches a finite-difference divergence of k grad p") {
    // t small enough that the permeability exponent stays inside the clamp
    Case c = build_case("test2");
    const auto& ex = c.exact;
    PermeabilityLaw law = make_permeability(c.params);
    double lm = c.params.lambda() + c.params.mu();
    double t = 1e-6;
    auto flux = [&](int i) {
        return TScalarFn([&, i](const Vec2& x, double s) {
            double tau = c.params.alpha * ex.p(x, s) +
                         c.params.beta * ex.T(x, s) - lm * ex.div_u(x, s);
            return law(tau) * ex.grad_p(x, s)[i];
        });
    };
    for (const Vec2& x : interior_points(6, 33u)) {
        double tau = c.params.alpha * ex.p(x, t) + c.params.beta * ex.T(x, t) -
                     lm * ex.div_u(x, t);
        REQUIRE(law.unclamped(tau));
        double div_k_grad_p = dfdx(flux(0), x, t) + dfdy(flux(1), x, t);
        double g_fd = c.params.c0 * ex.p_t(x, t) - c.params.b0 * ex.T_t(x, t) +
                      c.params.alpha * ex.div_u_t(x, t) - div_k_grad_p;
        check_close(c.g(x, t), g_fd, 1e-5);
    }
}

TEST_CASE("flow source drops the permeability gradient where the clamp holds") {
    Case c = build_case("test1");
    const auto& ex = c.exact;
    PermeabilityLaw law = make_permeability(c.params);
    double lm = c.params.lambda() + c.params.mu();
    Vec2 x(0.5, 0.5);
    double t = 1.0;
    double tau = c.params.alpha * ex.p(x, t) + c.params.beta * ex.T(x, t) -
                 lm * ex.div_u(x, t);
    REQUIRE(!law.unclamped(tau));
    CHECK(law(tau) ==
          doctest::Approx(law.kClampHi * law.a_k0).epsilon(1e-12));
    double g_exp = c.params.c0 * ex.p_t(x, t) - c.params.b0 * ex.T_t(x, t) +
                   c.params.alpha * ex.div_u_t(x, t) - law(tau) * ex.lap_p(x, t);
    CHECK(c.g(x, t) == doctest::Approx(g_exp).epsilon(1e-13));
}

TEST_CASE("heat source composition") {
    for (const char* name : {"test1", "test2", "conservation"}) {
        Case c = build_case(name);
        const auto& ex = c.exact;
        for (const Vec2& x : interior_points(6, 55u)) {
            double t = 0.61 * c.t_f;
            double want = c.params.a0 * ex.T_t(x, t) -
                          c.params.b0 * ex.p_t(x, t) +
                          c.params.beta * ex.div_u_t(x, t) -
                          c.params.Theta * ex.lap_T(x, t);
            CHECK(c.phi(x, t) == doctest::Approx(want).epsilon(1e-12));
        }
    }
}

TEST_CASE("frozen sample values") {
    Case c1 = build_case("test1");
    CHECK(c1.exact.p(Vec2(0.5, 0.0), 1.0) ==
          doctest::Approx(2.718281828459045).epsilon(1e-14));
    CHECK(c1.exact.T(Vec2(0.3, 0.4), 0.2) ==
          doctest::Approx(c1.exact.p(Vec2(0.3, 0.4), 0.2)).epsilon(1e-15));

    Case c2 = build_case("test2");
    CHECK(c2.exact.p(Vec2(0.5, 0.5), 1e-3) ==
          doctest::Approx(6.25e-5).epsilon(1e-14));
    for (double cx : {0.0, 1.0})
        for (double cy : {0.0, 1.0}) {
            CHECK(c2.exact.u(Vec2(cx, cy), 0.3).norm() == 0.0);
            CHECK(c2.exact.p(Vec2(cx, cy), 0.3) == 0.0);
            CHECK(c2.exact.T(Vec2(cx, cy), 0.3) == 0.0);
        }
}

TEST_CASE("initial data is the exact state at t=0, time argument ignored") {
    Case c = build_case("test1");
    Vec2 x(0.4, 0.7);
    CHECK(c.u0(x, 42.0) == c.exact.u(x, 0.0));
    CHECK(c.p0(x, 42.0) == c.exact.p(x, 0.0));
    CHECK(c.T0(x, 42.0) == c.exact.T(x, 0.0));
}

TEST_CASE("boundary condition masks") {
    Case c1 = build_case("test1");
    CHECK(c1.bc.u1_dirichlet == std::array<bool, 4>{false, true, false, true});
    CHECK(c1.bc.u2_dirichlet == std::array<bool, 4>{true, false, true, false});
    CHECK(c1.bc.p_dirichlet == std::array<bool, 4>{true, true, true, true});
    CHECK(c1.bc.T_dirichlet == std::array<bool, 4>{true, true, true, true});
    CHECK(!c1.bc.traction_from_state);

    Case cc = build_case("conservation");
    CHECK(cc.bc.u1_dirichlet == std::array<bool, 4>{true, true, true, true});
    CHECK(cc.bc.p_dirichlet == std::array<bool, 4>{false, false, false, false});
    CHECK(cc.params.b == 0.0);

    Case cb = build_case("barry_mercer", "pressure");
    CHECK(cb.bc.u1_dirichlet == std::array<bool, 4>{true, false, true, false});
    CHECK(cb.bc.u2_dirichlet == std::array<bool, 4>{false, true, false, true});
    CHECK(cb.bc.p_dirichlet == std::array<bool, 4>{true, true, true, true});
    CHECK(cb.bc.traction_from_state);
}

TEST_CASE("benchmark variants select the storage pairing") {
    Case cp = build_case("barry_mercer", "pressure");
    CHECK(cp.params.a0 == 1e-1);
    CHECK(cp.params.c0 == 1e-10);
    Case ct = build_case("barry_mercer", "temperature");
    CHECK(ct.params.a0 == 1e-10);
    CHECK(ct.params.c0 == 1e-1);
    for (const Case* c : {&cp, &ct}) {
        CHECK(c->params.b0 == 0.0);
        CHECK(c->params.alpha == 1.0);
        CHECK(c->params.beta == 1.0);
        CHECK(c->params.k0 == 0.1);
        CHECK(c->params.Theta == 1e-8);
        CHECK(c->params.E == 2.8e5);
        CHECK(c->params.nu == 0.42);
    }
    CHECK(build_case("barry_mercer").params.c0 == 1e-10); // defaults to pressure
    CHECK_THROWS_AS(build_case("barry_mercer", "entropy"), ConfigError);
    CHECK_THROWS_AS(build_case("no_such_case"), ConfigError);
}

TEST_CASE("pulse data: left edge for the benchmark, top edge for the sweep") {
    double t = 0.9, s = std::sin(t);
    Case cb = build_case("barry_mercer", "pressure");
    CHECK(cb.bc.p_data(Vec2(0.0, 0.5), t) == doctest::Approx(s));
    CHECK(cb.bc.p_data(Vec2(0.0, 0.2), t) == doctest::Approx(s)); // closed left
    CHECK(cb.bc.p_data(Vec2(0.0, 0.8), t) == 0.0);                // open right
    CHECK(cb.bc.p_data(Vec2(0.0, 0.1), t) == 0.0);
    CHECK(cb.bc.p_data(Vec2(0.5, 0.5), t) == 0.0);  // off the tagged edge
    CHECK(cb.bc.T_data(Vec2(0.0, 0.5), t) == doctest::Approx(s));

    Case cs = build_case("b_sweep");
    CHECK(cs.bc.p_data(Vec2(0.5, 1.0), t) == doctest::Approx(s));
    CHECK(cs.bc.p_data(Vec2(0.85, 1.0), t) == 0.0);
    CHECK(cs.bc.p_data(Vec2(0.5, 0.0), t) == 0.0);
    CHECK(cs.bc.T_data(Vec2(0.3, 1.0), t) == doctest::Approx(s));
}

TEST_CASE("parameter override replaces defaults before sources are derived") {
    PhysicalParams prm = build_case("test1").params;
    prm.E = 4e4;
    Case c = build_case("test1", "", prm);
    CHECK(c.params.E == 4e4);
    Vec2 x(0.3, 0.3);
    Vec2 f_default = build_case("test1").f(x, 0.5);
    Vec2 f_override = c.f(x, 0.5);
    CHECK((f_default - f_override).norm() > 0.0);
}

TEST_CASE("steady sources and fluxes in the conservation fixture") {
    Case c = build_case("conservation");
    Vec2 x(0.3, 0.8);
    CHECK(c.g(x, 0.01) == doctest::Approx(c.g(x, 0.09)).epsilon(1e-14));
    CHECK(c.phi(x, 0.01) == doctest::Approx(c.phi(x, 0.09)).epsilon(1e-14));
    // b = 0, a = k0 = 1: unit permeability, flux is grad p . n
    Vec2 n(1, 0);
    CHECK(c.bc.flux_p(Vec2(1.0, 0.5), 0.05, n) == doctest::Approx(1.0));
}
