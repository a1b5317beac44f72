#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>

#include "model.hpp"
#include "mesh.hpp"

namespace tpe {

using TScalarFn = std::function<double(const Vec2&, double)>;
using TVectorFn = std::function<Vec2(const Vec2&, double)>;
using TMatrixFn = std::function<Mat2(const Vec2&, double)>;
// Natural boundary data: (position, time, outward normal).
using TNormalScalarFn = std::function<double(const Vec2&, double, const Vec2&)>;
using TNormalVectorFn = std::function<Vec2(const Vec2&, double, const Vec2&)>;

// Closed-form fields with the derivatives needed to build sources and errors.
struct ExactSolution {
    TVectorFn u;
    TMatrixFn grad_u;      // row i = gradient of u_i
    TVectorFn lap_u;
    TScalarFn div_u;
    TVectorFn grad_div_u;
    TScalarFn div_u_t;
    TScalarFn p, T;
    TVectorFn grad_p, grad_T;
    TScalarFn lap_p, lap_T;
    TScalarFn p_t, T_t;
};

struct BoundaryConditions {
    // Dirichlet masks per segment tag 1..4 (index tag-1).
    std::array<bool, 4> u1_dirichlet{}, u2_dirichlet{};
    std::array<bool, 4> p_dirichlet{}, T_dirichlet{};
    TVectorFn u_data;
    TScalarFn p_data, T_data;
    // Natural data on the complementary parts. When traction_from_state is
    // set, the traction is (0, alpha*p_h + beta*T_h) evaluated from the most
    // recent recovered pressure/temperature trace instead of `traction`.
    bool traction_from_state = false;
    TNormalVectorFn traction;
    TNormalScalarFn flux_p, flux_T;
};

struct Case {
    std::string name;
    PhysicalParams params;
    double t_f = 1.0;
    bool has_exact = false;
    ExactSolution exact;
    TVectorFn f;
    TScalarFn g, phi;
    BoundaryConditions bc;
    TVectorFn u0;
    TScalarFn p0, T0;
};

// Known names: test1, test2, conservation (time-linear fields with steady
// fluxes, natural p/T everywhere), barry_mercer (variant "pressure" or
// "temperature"), b_sweep (barry_mercer with the pulse moved to the top edge).
// Optional params override replaces the case's defaults before sources are
// derived.
Case build_case(const std::string& name, const std::string& variant = "",
                const std::optional<PhysicalParams>& override_params = std::nullopt);

// Derives f, g, phi and the natural boundary data from c.exact via the strong
// form, using the clamped permeability law (grad k = k*b*grad tau where the
// clamp is inactive, 0 where it saturates). Fills c.f, c.g, c.phi, c.bc
// natural data and the initial fields.
void derive_manufactured_data(Case& c, bool constant_permeability = false);

} // namespace tpe
