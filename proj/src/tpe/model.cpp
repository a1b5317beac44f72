#include "model.hpp"

#include <cmath>
#include <sstream>

#include "errors.hpp"

namespace tpe {

std::vector<std::string> PhysicalParams::validate(bool allow_degenerate) const {
    std::vector<std::string> errs;
    if (!(E > 0)) errs.push_back("Young's modulus E must be positive");
    if (!(nu > 0 && nu < 0.5))
        errs.push_back("Poisson ratio nu must lie in (0, 0.5), got " + std::to_string(nu));
    if (a0 < 0 || b0 < 0 || c0 < 0 || alpha < 0 || beta < 0)
        errs.push_back("storage/coupling coefficients a0,b0,c0,alpha,beta must be nonnegative");
    if (!(a > 0)) errs.push_back("mutation coefficient a must be positive");
    if (!(k0 > 0)) errs.push_back("initial permeability k0 must be positive");
    if (!(Theta > 0)) errs.push_back("thermal conductivity Theta must be positive definite");
    if (!allow_degenerate) {
        if (!(c0 - b0 > 0))
            errs.push_back("storage condition c0 - b0 > 0 violated (override with allow_degenerate)");
        if (!(a0 - b0 > 0))
            errs.push_back("storage condition a0 - b0 > 0 violated (override with allow_degenerate)");
    }
    return errs;
}

DerivedCoefficients derive_coefficients(const PhysicalParams& p) {
    DerivedCoefficients c;
    c.lambda = p.lambda();
    c.mu = p.mu();
    const double lm = c.lambda + c.mu;

    // Rows (varpi, tau, varsigma) over columns (p, T, q).
    c.A << p.c0, -p.b0, p.alpha,
           p.alpha, p.beta, -lm,
          -p.b0, p.a0, p.beta;

    const double det = c.A.determinant();
    c.M = p.alpha * det;
    if (std::abs(det) < 1e-300) {
        std::ostringstream os;
        os << "singular change of variables: det=" << det << " with a0=" << p.a0
           << " b0=" << p.b0 << " c0=" << p.c0 << " alpha=" << p.alpha
           << " beta=" << p.beta << " lambda+mu=" << lm;
        throw ModelError(os.str());
    }
    c.Ainv = c.A.inverse();

    // Inverse rows are (p, T, q) over columns (varpi, tau, varsigma).
    c.g5 = c.Ainv(0, 0);
    c.g4 = c.Ainv(0, 1);
    c.g2 = c.Ainv(0, 2);
    c.g1 = c.Ainv(1, 1);
    c.g3 = c.Ainv(1, 2);
    c.g6 = -c.Ainv(2, 1);
    return c;
}

std::string DerivedCoefficients::diagnostic_report() const {
    // Closed-form values stated alongside Eq (2-4); the g2 formula is printed
    // there with `a` where `alpha` is meant, fixed here.
    const double alpha = A(0, 2);
    const double b0 = -A(0, 1);
    const double c0 = A(0, 0);
    const double a0 = A(2, 1);
    const double beta = A(2, 2);
    const double lm = -A(1, 2);
    const double D = a0 * alpha * alpha + (a0 * c0 - b0 * b0) * lm +
                     2 * alpha * b0 * beta + beta * beta * c0;
    const double Mm = alpha * D;
    std::ostringstream os;
    os.precision(12);
    os << "gamma diagnostic (numerical inverse vs closed forms):\n";
    auto line = [&](const char* name, double inv, double printed) {
        os << "  " << name << ": inverse=" << inv << " closed=" << printed
           << " |diff|=" << std::abs(inv - printed) << "\n";
    };
    line("g1", g1, (alpha * beta * c0 + alpha * alpha * b0) / Mm);
    line("g2", g2, (alpha * b0 * lm - alpha * alpha * beta) / Mm);
    line("g3", g3, (alpha * alpha * alpha + alpha * c0 * lm) / Mm);
    line("g4", g4, (alpha * alpha * a0 + alpha * b0 * beta) / Mm);
    line("g5", g5, (alpha * a0 * lm + alpha * beta * beta) / Mm);
    line("g6", g6, (alpha * a0 * c0 - alpha * b0 * b0) / Mm);
    os << "  M=" << Mm << " det(A)=" << A.determinant() << "\n";
    return os.str();
}

double PermeabilityLaw::operator()(double tau) const {
    if (constant_model) return a_k0;
    if (!std::isfinite(tau)) throw ModelError("non-finite permeability argument");
    const double lo = std::log(kClampLo), hi = std::log(kClampHi);
    double e = b * tau;
    if (e < lo) e = lo;
    if (e > hi) e = hi;
    return a_k0 * std::exp(e);
}

bool PermeabilityLaw::unclamped(double tau) const {
    if (constant_model) return true;
    const double e = b * tau;
    return e > std::log(kClampLo) && e < std::log(kClampHi);
}

PermeabilityLaw make_permeability(const PhysicalParams& p, bool constant_model) {
    PermeabilityLaw law;
    law.a_k0 = p.a * p.k0;
    law.b = p.b;
    law.constant_model = constant_model;
    return law;
}

} // namespace tpe
