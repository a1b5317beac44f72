#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tpe {

// Raw model constants. Theta and k0 are isotropic (scalar times identity).
struct PhysicalParams {
    double a0 = 0.0;    // effective thermal capacity
    double b0 = 0.0;    // thermal dilation coefficient
    double c0 = 0.0;    // constrained specific storage
    double alpha = 0.0; // Biot-Willis constant
    double beta = 0.0;  // thermal stress coefficient
    double a = 1.0;     // mutation coefficient
    double b = 0.0;     // stress coupling coefficient in the permeability law
    double k0 = 0.0;    // initial permeability
    double Theta = 0.0; // effective thermal conductivity
    double E = 0.0;     // Young's modulus
    double nu = 0.0;    // Poisson ratio

    double lambda() const { return E * nu / ((1 + nu) * (1 - 2 * nu)); }
    double mu() const { return E / (2 * (1 + nu)); }

    // Returns human-readable violations; empty if admissible. With
    // allow_degenerate the storage-coefficient strict inequalities
    // (c0-b0>0, a0-b0>0) become warnings collected separately by the caller.
    std::vector<std::string> validate(bool allow_degenerate = false) const;
};

// Change of variables (p,T,q) -> (varpi, tau, varsigma):
//   varpi    = c0*p - b0*T + alpha*q
//   tau      = alpha*p + beta*T - (lambda+mu)*q
//   varsigma = a0*T - b0*p + beta*q
// The inverse supplies the recovery coefficients gamma1..gamma6:
//   p = g4*tau + g5*varpi + g2*varsigma
//   T = g1*tau + g2*varpi + g3*varsigma
//   q = -g6*tau + g4*varpi + g1*varsigma
struct DerivedCoefficients {
    double lambda = 0, mu = 0;
    double g1 = 0, g2 = 0, g3 = 0, g4 = 0, g5 = 0, g6 = 0;
    double M = 0; // alpha * det(A), the paper's normalizer
    Eigen::Matrix3d A;    // rows (varpi, tau, varsigma) over columns (p, T, q)
    Eigen::Matrix3d Ainv;

    // Printed closed-form gamma values, kept as a diagnostic cross-check of
    // the numerical inverse (they agree up to a known typo in g2).
    std::string diagnostic_report() const;
};

DerivedCoefficients derive_coefficients(const PhysicalParams& p);

// k(tau) = a*k0*exp(b*tau), clamped to [1e-14, 1e14]*a*k0 so the diffusion
// coefficient keeps uniform positive bounds. The exponent is clamped before
// exp to avoid overflow. model "constant" ignores tau entirely.
struct PermeabilityLaw {
    double a_k0 = 0.0;
    double b = 0.0;
    bool constant_model = false;
    static constexpr double kClampLo = 1e-14;
    static constexpr double kClampHi = 1e14;

    double operator()(double tau) const;
    // True if the exponent clamp is inactive at tau (the law is locally smooth).
    bool unclamped(double tau) const;
};

PermeabilityLaw make_permeability(const PhysicalParams& p, bool constant_model = false);

} // namespace tpe
