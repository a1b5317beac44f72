#pragma once

#include <cstddef>
#include <span>

namespace tpe {

// Quadrature node on the reference triangle {(x,y): x,y >= 0, x+y <= 1}.
// Weights sum to the reference area 1/2.
struct QuadPoint {
    double x;
    double y;
    double w;
};

// Gauss node on the reference edge [0,1]; weights sum to 1.
struct EdgeQuadPoint {
    double t;
    double w;
};

// Rule exact for polynomials of total degree <= `degree`, degree in [1,8].
// Throws ConfigError for unsupported degrees.
std::span<const QuadPoint> triangle_rule(int degree);

// 1D Gauss-Legendre on [0,1], exact to `degree` in [1,9].
std::span<const EdgeQuadPoint> edge_rule(int degree);

} // namespace tpe
