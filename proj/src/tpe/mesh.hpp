#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

namespace tpe {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// Boundary segment tags on the unit square: 1 bottom (y=0), 2 right (x=1),
// 3 top (y=1), 4 left (x=0).
struct BoundaryEdge {
    int v0;
    int v1;
    int tag;
    Vec2 normal; // outward unit normal
};

struct Mesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles; // counterclockwise
    std::vector<BoundaryEdge> boundary_edges;
    double h = 0.0; // max element diameter

    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_triangles() const { return static_cast<int>(triangles.size()); }

    double tri_area(int t) const;
    // Affine map x = v0 + J*(xi,eta); returns J.
    Mat2 tri_jacobian(int t) const;
    Vec2 tri_point(int t, double xi, double eta) const;
};

// Uniform triangulation of [x0,x1]x[y0,y1] with nx-by-ny cells, each split
// along its lower-left to upper-right diagonal.
Mesh build_structured(int nx, int ny, double x0 = 0.0, double y0 = 0.0,
                      double x1 = 1.0, double y1 = 1.0);

// Midpoint (red) refinement: each triangle into 4 congruent children; h halves.
Mesh refine_uniform(const Mesh& m);

// Plain-text dump (one record per line) for debugging.
std::string dump_mesh(const Mesh& m);

} // namespace tpe
