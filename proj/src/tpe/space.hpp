#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mesh.hpp"

namespace tpe {

using VectorXd = Eigen::VectorXd;

// Continuous Lagrange space P1/P2, scalar (vdim=1) or 2-vector (vdim=2).
// Scalar node order: mesh vertices first, then edge midpoints (edges sorted by
// their (min,max) vertex pair). Vector DOFs interleave per node: (u1,u2).
struct FeSpace {
    const Mesh* mesh = nullptr;
    int degree = 1;
    int vdim = 1;
    int n_nodes = 0;
    std::vector<Vec2> node_xy;
    std::vector<std::array<int, 6>> cell_nodes; // last 3 unused for P1
    std::vector<std::array<int, 3>> bedge_nodes; // v0, v1, midpoint (-1 for P1)
    std::array<std::vector<int>, 4> boundary_nodes_by_tag; // closed segments

    int local_size() const { return degree == 1 ? 3 : 6; }
    int n_dofs() const { return n_nodes * vdim; }
    int dof(int node, int comp) const { return node * vdim + comp; }
};

FeSpace build_space(const Mesh& mesh, int degree, int vdim);

// Reference shape functions at (xi,eta); fills local_size() entries.
void shape_values(int degree, double xi, double eta, double* vals, Vec2* ref_grads);

struct FieldSample {
    Eigen::Vector2d value;   // component 0 only used for scalar
    Eigen::Matrix2d grad;    // row i = physical gradient of component i
};

// Evaluate a coefficient vector on element `tri` at reference point (xi,eta).
FieldSample eval_field(const FeSpace& s, const VectorXd& coeffs, int tri,
                       double xi, double eta);

using ScalarFn = std::function<double(const Vec2&)>;
using VectorFn = std::function<Vec2(const Vec2&)>;
using MatrixFn = std::function<Mat2(const Vec2&)>;

// Nodal interpolation.
VectorXd interpolate(const FeSpace& s, const ScalarFn& f);
VectorXd interpolate(const FeSpace& s, const VectorFn& f);

// L2 projection via mass-matrix solve.
VectorXd l2_project(const FeSpace& s, const ScalarFn& f, int quad_degree);
VectorXd l2_project(const FeSpace& s, const VectorFn& f, int quad_degree);

struct ErrorNorms {
    double l2 = 0.0;        // ||fh - exact||_L2
    double h1 = 0.0;        // full H1 norm of the error
    double exact_l2 = 0.0;  // ||exact||_L2
    double exact_h1 = 0.0;
};

ErrorNorms compute_error(const FeSpace& s, const VectorXd& coeffs,
                         const ScalarFn& exact, const VectorFn& exact_grad,
                         int quad_degree);
// Vector version; exact_grad returns the Jacobian (row i = grad of component i).
ErrorNorms compute_error(const FeSpace& s, const VectorXd& coeffs,
                         const VectorFn& exact, const MatrixFn& exact_grad,
                         int quad_degree);

// Per-vertex CSV export: "x,y,value[,value2]" rows.
void write_field_csv(const FeSpace& s, const VectorXd& coeffs,
                     const std::string& path);
// Legacy-ASCII unstructured-grid export (linear triangles, vertex data).
void write_field_vtk(const FeSpace& s, const VectorXd& coeffs,
                     const std::string& field_name, const std::string& path);

} // namespace tpe
