#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Sparse>

#include "cases.hpp"
#include "model.hpp"
#include "space.hpp"

namespace tpe {

using SpMat = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

// Coefficient sampled at a quadrature point of element `tri`; (xi,eta) are the
// reference coordinates and x the mapped physical point.
using QuadWeightFn =
    std::function<double(int tri, double xi, double eta, const Vec2& x)>;
// Boundary integrand sampled on boundary edge `be` at parameter tpar in [0,1].
using EdgeVectorFn =
    std::function<Vec2(int be, double tpar, const Vec2& x, const Vec2& n)>;

// (phi_j, phi_i); block-diagonal per component for vector spaces.
SpMat assemble_mass(const FeSpace& s, int quad_degree);
// (grad phi_j, grad phi_i); componentwise for vector spaces.
SpMat assemble_stiffness(const FeSpace& s, int quad_degree);
SpMat assemble_weighted_stiffness(const FeSpace& s, const QuadWeightFn& w,
                                  int quad_degree);
// B[i,j] = (div phi_j, psi_i): rows on the scalar space, cols on the vector one.
SpMat assemble_div_coupling(const FeSpace& scalar_s, const FeSpace& vector_s,
                            int quad_degree);
// (div phi_j, div phi_i) on a vector space.
SpMat assemble_divdiv(const FeSpace& vector_s, int quad_degree);

VectorXd assemble_load(const FeSpace& s, const TScalarFn& f, double t,
                       int quad_degree);
VectorXd assemble_load(const FeSpace& s, const TVectorFn& f, double t,
                       int quad_degree);

// Restriction of the shape functions to a boundary edge, parametrized by
// tpar in [0,1] from the edge's first vertex; entries ordered (v0, v1, mid).
void edge_trace(int degree, double tpar, double* vals);

// <data, psi> over the edges whose tag is flagged natural.
VectorXd assemble_flux_load(const FeSpace& s, const TNormalScalarFn& data,
                            double t, const std::array<bool, 4>& natural,
                            int quad_degree);
// <data, v> with independent per-component natural masks.
VectorXd assemble_traction_load(const FeSpace& s, const TNormalVectorFn& data,
                                double t, const std::array<bool, 4>& natural_u1,
                                const std::array<bool, 4>& natural_u2,
                                int quad_degree);
// Same, with the integrand supplied per quadrature point (state-dependent data).
VectorXd assemble_traction_load(const FeSpace& s, const EdgeVectorFn& data,
                                const std::array<bool, 4>& natural_u1,
                                const std::array<bool, 4>& natural_u2,
                                int quad_degree);

// w_i = (phi_i, 1), so (f_h, 1) = w . coeffs.
VectorXd basis_integrals(const FeSpace& s, int quad_degree);
// Integral of max(0, -f_h), the mass carried by spurious negative values.
double negative_part_integral(const FeSpace& s, const VectorXd& coeffs,
                              int quad_degree);

struct DirichletSet {
    std::vector<int> dofs;      // ascending
    VectorXd values;            // full length; meaningful at constrained dofs
    std::vector<char> mask;     // 1 where constrained

    int size() const { return static_cast<int>(dofs.size()); }
    bool constrained(int d) const { return mask[d] != 0; }
};

DirichletSet empty_dirichlet(int n_dofs);

// Nodes on flagged closed boundary segments; where segments share a corner the
// lowest tag supplies the value.
DirichletSet collect_dirichlet(const FeSpace& s, const std::array<bool, 4>& segs,
                               const TScalarFn& data, double t);
DirichletSet collect_dirichlet(const FeSpace& s,
                               const std::array<bool, 4>& segs_u1,
                               const std::array<bool, 4>& segs_u2,
                               const TVectorFn& data, double t);

// Convert p/T boundary data into (pw, sg) node values given the tau trace:
// per node solve [g5 g2; g2 g3][pw; sg] = [p_D - g4 tau; T_D - g1 tau].
void translate_pt_dirichlet(const DerivedCoefficients& dc,
                            const DirichletSet& p_bc, const DirichletSet& T_bc,
                            const VectorXd& tau, DirichletSet& pw_bc,
                            DirichletSet& sg_bc);

// Block-system helpers: copy `a` scaled into the triplet list at an offset, and
// splice a field-level constraint set into a system-level one.
void add_block(Triplets& out, const SpMat& a, int row0, int col0, double scale);
SpMat build_matrix(int rows, int cols, const Triplets& t);
void append_offset(const DirichletSet& field_bc, int offset, DirichletSet& sys_bc);

// Symmetric elimination: constrained rows/cols dropped, unit diagonal left in
// place. eliminate_rhs uses the original (pre-elimination) matrix so boundary
// values can change between solves with one factorization.
SpMat eliminate_matrix(const SpMat& a, const DirichletSet& bc);
VectorXd eliminate_rhs(const SpMat& a, const VectorXd& rhs,
                       const DirichletSet& bc);

} // namespace tpe
