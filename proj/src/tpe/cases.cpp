#include "cases.hpp"

#include <cmath>

#include "errors.hpp"

namespace tpe {

namespace {

const double PI = 3.14159265358979323846;

ExactSolution test1_exact() {
    // u = (pi e^t cos(pi x) cos(pi y/2), (pi/2) e^t sin(pi x) sin(pi y/2)),
    // p = T = e^t sin(pi x) cos(pi y/2).
    ExactSolution ex;
    auto sc = [](const Vec2& x) {
        return Vec2(std::sin(PI * x.x()), std::cos(PI * x.x()));
    };
    auto SC = [](const Vec2& x) {
        return Vec2(std::sin(PI * x.y() / 2), std::cos(PI * x.y() / 2));
    };
    ex.u = [=](const Vec2& x, double t) {
        double E = std::exp(t);
        return Vec2(PI * E * sc(x).y() * SC(x).y(),
                    (PI / 2) * E * sc(x).x() * SC(x).x());
    };
    ex.grad_u = [=](const Vec2& x, double t) {
        double E = std::exp(t);
        double s = sc(x).x(), c = sc(x).y(), S = SC(x).x(), C = SC(x).y();
        Mat2 g;
        g << -PI * PI * E * s * C, -(PI * PI / 2) * E * c * S,
             (PI * PI / 2) * E * c * S, (PI * PI / 4) * E * s * C;
        return g;
    };
    ex.lap_u = [=](const Vec2& x, double t) {
        double E = std::exp(t);
        double s = sc(x).x(), c = sc(x).y(), S = SC(x).x(), C = SC(x).y();
        return Vec2(-(5 * PI * PI * PI / 4) * E * c * C,
                    -(5 * PI * PI * PI / 8) * E * s * S);
    };
    ex.div_u = [=](const Vec2& x, double t) {
        return -(3 * PI * PI / 4) * std::exp(t) * sc(x).x() * SC(x).y();
    };
    ex.grad_div_u = [=](const Vec2& x, double t) {
        double E = std::exp(t);
        return Vec2(-(3 * PI * PI * PI / 4) * E * sc(x).y() * SC(x).y(),
                    (3 * PI * PI * PI / 8) * E * sc(x).x() * SC(x).x());
    };
    ex.div_u_t = ex.div_u;
    ex.p = [=](const Vec2& x, double t) {
        return std::exp(t) * sc(x).x() * SC(x).y();
    };
    ex.grad_p = [=](const Vec2& x, double t) {
        double E = std::exp(t);
        return Vec2(PI * E * sc(x).y() * SC(x).y(),
                    -(PI / 2) * E * sc(x).x() * SC(x).x());
    };
    ex.lap_p = [=](const Vec2& x, double t) {
        return -(5 * PI * PI / 4) * std::exp(t) * sc(x).x() * SC(x).y();
    };
    ex.p_t = ex.p;
    ex.T = ex.p;
    ex.grad_T = ex.grad_p;
    ex.lap_T = ex.lap_p;
    ex.T_t = ex.p_t;
    return ex;
}

ExactSolution test2_exact() {
    // p = T = t x(1-x) y(1-y), u = p * (1,1).
    ExactSolution ex;
    auto G = [](double x) { return x * (1 - x); };
    auto dG = [](double x) { return 1 - 2 * x; };
    ex.p = [=](const Vec2& x, double t) { return t * G(x.x()) * G(x.y()); };
    ex.grad_p = [=](const Vec2& x, double t) {
        return Vec2(t * dG(x.x()) * G(x.y()), t * G(x.x()) * dG(x.y()));
    };
    ex.lap_p = [=](const Vec2& x, double t) { return -2 * t * (G(x.y()) + G(x.x())); };
    ex.p_t = [=](const Vec2& x, double) { return G(x.x()) * G(x.y()); };
    ex.T = ex.p;
    ex.grad_T = ex.grad_p;
    ex.lap_T = ex.lap_p;
    ex.T_t = ex.p_t;
    ex.u = [=](const Vec2& x, double t) {
        double v = t * G(x.x()) * G(x.y());
        return Vec2(v, v);
    };
    ex.grad_u = [=](const Vec2& x, double t) {
        double gx = t * dG(x.x()) * G(x.y()), gy = t * G(x.x()) * dG(x.y());
        Mat2 g;
        g << gx, gy, gx, gy;
        return g;
    };
    ex.lap_u = [=](const Vec2& x, double t) {
        double v = -2 * t * (G(x.y()) + G(x.x()));
        return Vec2(v, v);
    };
    ex.div_u = [=](const Vec2& x, double t) {
        return t * (dG(x.x()) * G(x.y()) + G(x.x()) * dG(x.y()));
    };
    ex.grad_div_u = [=](const Vec2& x, double t) {
        return Vec2(t * (-2 * G(x.y()) + dG(x.x()) * dG(x.y())),
                    t * (dG(x.x()) * dG(x.y()) - 2 * G(x.x())));
    };
    ex.div_u_t = [=](const Vec2& x, double) {
        return dG(x.x()) * G(x.y()) + G(x.x()) * dG(x.y());
    };
    return ex;
}

ExactSolution conservation_exact() {
    // Time-linear fields with constant-in-space rates, so all sources and
    // natural fluxes are time-independent: the discrete means must then grow
    // exactly linearly in t.
    const double cp = 1.0, cT = 2.0, cq = 3.0;
    ExactSolution ex;
    ex.u = [=](const Vec2& x, double t) {
        return Vec2(x.x() * x.x() * x.y() + 0.5 * cq * t * x.x(),
                    -x.x() * x.y() * x.y() + 0.5 * cq * t * x.y());
    };
    ex.grad_u = [=](const Vec2& x, double t) {
        Mat2 g;
        g << 2 * x.x() * x.y() + 0.5 * cq * t, x.x() * x.x(),
             -x.y() * x.y(), -2 * x.x() * x.y() + 0.5 * cq * t;
        return g;
    };
    ex.lap_u = [](const Vec2& x, double) { return Vec2(2 * x.y(), -2 * x.x()); };
    ex.div_u = [=](const Vec2&, double t) { return cq * t; };
    ex.grad_div_u = [](const Vec2&, double) { return Vec2(0, 0); };
    ex.div_u_t = [=](const Vec2&, double) { return cq; };
    ex.p = [=](const Vec2& x, double t) {
        return x.x() * x.x() * x.y() + x.y() * x.y() + cp * t;
    };
    ex.grad_p = [](const Vec2& x, double) {
        return Vec2(2 * x.x() * x.y(), x.x() * x.x() + 2 * x.y());
    };
    ex.lap_p = [](const Vec2& x, double) { return 2 * x.y() + 2; };
    ex.p_t = [=](const Vec2&, double) { return cp; };
    ex.T = [=](const Vec2& x, double t) {
        return x.x() * x.y() * x.y() + x.x() * x.x() + cT * t;
    };
    ex.grad_T = [](const Vec2& x, double) {
        return Vec2(x.y() * x.y() + 2 * x.x(), 2 * x.x() * x.y());
    };
    ex.lap_T = [](const Vec2& x, double) { return 2 * x.x() + 2; };
    ex.T_t = [=](const Vec2&, double) { return cT; };
    return ex;
}

double pulse(double s, double t) { return (s >= 0.2 && s < 0.8) ? std::sin(t) : 0.0; }

TScalarFn pulse_on_left() {
    return [](const Vec2& x, double t) {
        return (std::abs(x.x()) < 1e-12) ? pulse(x.y(), t) : 0.0;
    };
}

TScalarFn pulse_on_top() {
    return [](const Vec2& x, double t) {
        return (std::abs(x.y() - 1.0) < 1e-12) ? pulse(x.x(), t) : 0.0;
    };
}

Case barry_base(const std::string& variant) {
    Case c;
    c.params.b0 = 0;
    c.params.alpha = 1;
    c.params.beta = 1;
    c.params.a = 1;
    c.params.b = 1;
    c.params.k0 = 0.1;
    c.params.Theta = 1e-8;
    c.params.E = 2.8e5;
    c.params.nu = 0.42;
    if (variant == "temperature") {
        c.params.a0 = 1e-10;
        c.params.c0 = 1e-1;
    } else if (variant.empty() || variant == "pressure") {
        c.params.a0 = 1e-1;
        c.params.c0 = 1e-10;
    } else {
        throw ConfigError("unknown variant '" + variant +
                          "' (expected pressure or temperature)");
    }
    c.t_f = 1.0;
    c.has_exact = false;
    c.f = [](const Vec2&, double) { return Vec2(0, 0); };
    c.g = [](const Vec2&, double) { return 0.0; };
    c.phi = [](const Vec2&, double) { return 0.0; };
    c.u0 = [](const Vec2&, double) { return Vec2(0, 0); };
    c.p0 = [](const Vec2&, double) { return 0.0; };
    c.T0 = [](const Vec2&, double) { return 0.0; };

    auto& bc = c.bc;
    bc.u1_dirichlet = {true, false, true, false};  // bottom/top
    bc.u2_dirichlet = {false, true, false, true};  // right/left
    bc.p_dirichlet = {true, true, true, true};
    bc.T_dirichlet = {true, true, true, true};
    bc.u_data = [](const Vec2&, double) { return Vec2(0, 0); };
    bc.traction_from_state = true;
    bc.flux_p = [](const Vec2&, double, const Vec2&) { return 0.0; };
    bc.flux_T = [](const Vec2&, double, const Vec2&) { return 0.0; };
    return c;
}

} // namespace

void derive_manufactured_data(Case& c, bool constant_permeability) {
    if (!c.has_exact)
        throw ModelError("cannot derive sources: case has no exact solution");
    const PhysicalParams prm = c.params;
    const double lam = prm.lambda(), mu = prm.mu(), lm = lam + mu;
    const double al = prm.alpha, be = prm.beta;
    const PermeabilityLaw law = make_permeability(prm, constant_permeability);
    const ExactSolution ex = c.exact;

    auto tau_ex = [=](const Vec2& x, double t) {
        return al * ex.p(x, t) + be * ex.T(x, t) - lm * ex.div_u(x, t);
    };
    auto grad_tau = [=](const Vec2& x, double t) {
        return Vec2(al * ex.grad_p(x, t) + be * ex.grad_T(x, t) -
                    lm * ex.grad_div_u(x, t));
    };

    c.f = [=](const Vec2& x, double t) {
        return Vec2(-mu * ex.lap_u(x, t) - lm * ex.grad_div_u(x, t) +
                    al * ex.grad_p(x, t) + be * ex.grad_T(x, t));
    };
    c.g = [=](const Vec2& x, double t) {
        double tau = tau_ex(x, t);
        double k = law(tau);
        double div_k_grad_p = k * ex.lap_p(x, t);
        if (law.unclamped(tau) && !law.constant_model)
            div_k_grad_p += (k * law.b) * grad_tau(x, t).dot(ex.grad_p(x, t));
        return prm.c0 * ex.p_t(x, t) - prm.b0 * ex.T_t(x, t) +
               al * ex.div_u_t(x, t) - div_k_grad_p;
    };
    c.phi = [=](const Vec2& x, double t) {
        return prm.a0 * ex.T_t(x, t) - prm.b0 * ex.p_t(x, t) +
               be * ex.div_u_t(x, t) - prm.Theta * ex.lap_T(x, t);
    };

    c.bc.traction = [=](const Vec2& x, double t, const Vec2& n) {
        return Vec2(mu * (ex.grad_u(x, t) * n) - tau_ex(x, t) * n);
    };
    c.bc.flux_p = [=](const Vec2& x, double t, const Vec2& n) {
        return law(tau_ex(x, t)) * ex.grad_p(x, t).dot(n);
    };
    c.bc.flux_T = [=](const Vec2& x, double t, const Vec2& n) {
        return prm.Theta * ex.grad_T(x, t).dot(n);
    };

    c.bc.u_data = [=](const Vec2& x, double t) { return ex.u(x, t); };
    c.bc.p_data = [=](const Vec2& x, double t) { return ex.p(x, t); };
    c.bc.T_data = [=](const Vec2& x, double t) { return ex.T(x, t); };
    c.u0 = [=](const Vec2& x, double) { return ex.u(x, 0.0); };
    c.p0 = [=](const Vec2& x, double) { return ex.p(x, 0.0); };
    c.T0 = [=](const Vec2& x, double) { return ex.T(x, 0.0); };
}

Case build_case(const std::string& name, const std::string& variant,
                const std::optional<PhysicalParams>& override_params) {
    Case c;
    c.name = name;
    if (name == "test1") {
        c.params = {2e-1, 1e-1, 2e-1, 0.01, 0.01, 1, 1, 1e-5, 1e-5, 2e4, 0.4};
        c.t_f = 1.0;
        c.has_exact = true;
        c.exact = test1_exact();
        c.bc.u1_dirichlet = {false, true, false, true};
        c.bc.u2_dirichlet = {true, false, true, false};
        c.bc.p_dirichlet = {true, true, true, true};
        c.bc.T_dirichlet = {true, true, true, true};
    } else if (name == "test2") {
        c.params = {2e5, 1e5, 2e5, 0.01, 0.01, 1, 1, 0.1, 0.1, 2e7, 0.4};
        c.t_f = 1e-3;
        c.has_exact = true;
        c.exact = test2_exact();
        c.bc.u1_dirichlet = {false, true, false, true};
        c.bc.u2_dirichlet = {true, false, true, false};
        c.bc.p_dirichlet = {true, true, true, true};
        c.bc.T_dirichlet = {true, true, true, true};
    } else if (name == "conservation") {
        c.params = {2e-1, 1e-1, 2e-1, 0.01, 0.01, 1, 0, 1.0, 1.0, 2e4, 0.4};
        c.t_f = 0.1;
        c.has_exact = true;
        c.exact = conservation_exact();
        c.bc.u1_dirichlet = {true, true, true, true};
        c.bc.u2_dirichlet = {true, true, true, true};
        c.bc.p_dirichlet = {false, false, false, false};
        c.bc.T_dirichlet = {false, false, false, false};
    } else if (name == "barry_mercer") {
        c = barry_base(variant);
        c.name = name;
        c.bc.p_data = pulse_on_left();
        c.bc.T_data = pulse_on_left();
    } else if (name == "b_sweep") {
        c = barry_base(variant);
        c.name = name;
        c.bc.p_data = pulse_on_top();
        c.bc.T_data = pulse_on_top();
    } else {
        throw ConfigError("unknown case '" + name + "'");
    }

    if (override_params) c.params = *override_params;
    if (c.has_exact) derive_manufactured_data(c);
    return c;
}

} // namespace tpe
