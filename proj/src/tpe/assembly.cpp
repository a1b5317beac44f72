#include "assembly.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "quadrature.hpp"

namespace tpe {

namespace {

struct TabulatedPoint {
    double xi, eta, w;
    double vals[6];
    Vec2 ref_grads[6];
};

std::vector<TabulatedPoint> tabulate(int degree, int quad_degree) {
    auto rule = triangle_rule(quad_degree);
    std::vector<TabulatedPoint> out(rule.size());
    for (size_t q = 0; q < rule.size(); ++q) {
        out[q].xi = rule[q].x;
        out[q].eta = rule[q].y;
        out[q].w = rule[q].w;
        shape_values(degree, rule[q].x, rule[q].y, out[q].vals, out[q].ref_grads);
    }
    return out;
}

} // namespace

SpMat assemble_mass(const FeSpace& s, int quad_degree) {
    const Mesh& mesh = *s.mesh;
    const int nloc = s.local_size();
    auto tab = tabulate(s.degree, quad_degree);
    Triplets trip;
    trip.reserve(mesh.triangles.size() * nloc * nloc * s.vdim);
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        double detj = mesh.tri_jacobian(static_cast<int>(t)).determinant();
        const auto& nodes = s.cell_nodes[t];
        for (const auto& q : tab) {
            double scale = q.w * detj;
            for (int i = 0; i < nloc; ++i)
                for (int j = 0; j < nloc; ++j) {
                    double v = scale * q.vals[i] * q.vals[j];
                    for (int c = 0; c < s.vdim; ++c)
                        trip.emplace_back(s.dof(nodes[i], c), s.dof(nodes[j], c), v);
                }
        }
    }
    return build_matrix(s.n_dofs(), s.n_dofs(), trip);
}

SpMat assemble_stiffness(const FeSpace& s, int quad_degree) {
    return assemble_weighted_stiffness(
        s, [](int, double, double, const Vec2&) { return 1.0; }, quad_degree);
}

SpMat assemble_weighted_stiffness(const FeSpace& s, const QuadWeightFn& w,
                                  int quad_degree) {
    const Mesh& mesh = *s.mesh;
    const int nloc = s.local_size();
    auto tab = tabulate(s.degree, quad_degree);
    Triplets trip;
    trip.reserve(mesh.triangles.size() * nloc * nloc * s.vdim);
    Vec2 g[6];
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        int ti = static_cast<int>(t);
        Mat2 jac = mesh.tri_jacobian(ti);
        double detj = jac.determinant();
        Mat2 jit = jac.inverse().transpose();
        const auto& nodes = s.cell_nodes[t];
        for (const auto& q : tab) {
            Vec2 x = mesh.tri_point(ti, q.xi, q.eta);
            double scale = q.w * detj * w(ti, q.xi, q.eta, x);
            for (int i = 0; i < nloc; ++i) g[i] = jit * q.ref_grads[i];
            for (int i = 0; i < nloc; ++i)
                for (int j = 0; j < nloc; ++j) {
                    double v = scale * g[i].dot(g[j]);
                    for (int c = 0; c < s.vdim; ++c)
                        trip.emplace_back(s.dof(nodes[i], c), s.dof(nodes[j], c), v);
                }
        }
    }
    return build_matrix(s.n_dofs(), s.n_dofs(), trip);
}

SpMat assemble_div_coupling(const FeSpace& scalar_s, const FeSpace& vector_s,
                            int quad_degree) {
    if (scalar_s.mesh != vector_s.mesh)
        throw ModelError("div coupling requires spaces on the same mesh");
    const Mesh& mesh = *scalar_s.mesh;
    const int ns = scalar_s.local_size();
    const int nv = vector_s.local_size();
    auto tab_s = tabulate(scalar_s.degree, quad_degree);
    auto tab_v = tabulate(vector_s.degree, quad_degree);
    Triplets trip;
    trip.reserve(mesh.triangles.size() * ns * nv * 2);
    Vec2 g[6];
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        Mat2 jac = mesh.tri_jacobian(static_cast<int>(t));
        double detj = jac.determinant();
        Mat2 jit = jac.inverse().transpose();
        const auto& sn = scalar_s.cell_nodes[t];
        const auto& vn = vector_s.cell_nodes[t];
        for (size_t q = 0; q < tab_s.size(); ++q) {
            double scale = tab_s[q].w * detj;
            for (int j = 0; j < nv; ++j) g[j] = jit * tab_v[q].ref_grads[j];
            for (int i = 0; i < ns; ++i)
                for (int j = 0; j < nv; ++j)
                    for (int c = 0; c < 2; ++c)
                        trip.emplace_back(sn[i], vector_s.dof(vn[j], c),
                                          scale * tab_s[q].vals[i] * g[j][c]);
        }
    }
    return build_matrix(scalar_s.n_dofs(), vector_s.n_dofs(), trip);
}

SpMat assemble_divdiv(const FeSpace& vector_s, int quad_degree) {
    const Mesh& mesh = *vector_s.mesh;
    const int nloc = vector_s.local_size();
    auto tab = tabulate(vector_s.degree, quad_degree);
    Triplets trip;
    trip.reserve(mesh.triangles.size() * nloc * nloc * 4);
    Vec2 g[6];
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        Mat2 jac = mesh.tri_jacobian(static_cast<int>(t));
        double detj = jac.determinant();
        Mat2 jit = jac.inverse().transpose();
        const auto& nodes = vector_s.cell_nodes[t];
        for (const auto& q : tab) {
            double scale = q.w * detj;
            for (int i = 0; i < nloc; ++i) g[i] = jit * q.ref_grads[i];
            for (int i = 0; i < nloc; ++i)
                for (int j = 0; j < nloc; ++j)
                    for (int a = 0; a < 2; ++a)
                        for (int b = 0; b < 2; ++b)
                            trip.emplace_back(vector_s.dof(nodes[i], a),
                                              vector_s.dof(nodes[j], b),
                                              scale * g[i][a] * g[j][b]);
        }
    }
    return build_matrix(vector_s.n_dofs(), vector_s.n_dofs(), trip);
}

VectorXd assemble_load(const FeSpace& s, const TScalarFn& f, double t,
                       int quad_degree) {
    const Mesh& mesh = *s.mesh;
    const int nloc = s.local_size();
    auto tab = tabulate(s.degree, quad_degree);
    VectorXd load = VectorXd::Zero(s.n_dofs());
    for (size_t tr = 0; tr < mesh.triangles.size(); ++tr) {
        int ti = static_cast<int>(tr);
        double detj = mesh.tri_jacobian(ti).determinant();
        const auto& nodes = s.cell_nodes[tr];
        for (const auto& q : tab) {
            double fv = f(mesh.tri_point(ti, q.xi, q.eta), t) * q.w * detj;
            for (int i = 0; i < nloc; ++i) load[nodes[i]] += fv * q.vals[i];
        }
    }
    return load;
}

VectorXd assemble_load(const FeSpace& s, const TVectorFn& f, double t,
                       int quad_degree) {
    const Mesh& mesh = *s.mesh;
    const int nloc = s.local_size();
    auto tab = tabulate(s.degree, quad_degree);
    VectorXd load = VectorXd::Zero(s.n_dofs());
    for (size_t tr = 0; tr < mesh.triangles.size(); ++tr) {
        int ti = static_cast<int>(tr);
        double detj = mesh.tri_jacobian(ti).determinant();
        const auto& nodes = s.cell_nodes[tr];
        for (const auto& q : tab) {
            Vec2 fv = f(mesh.tri_point(ti, q.xi, q.eta), t) * (q.w * detj);
            for (int i = 0; i < nloc; ++i)
                for (int c = 0; c < 2; ++c)
                    load[s.dof(nodes[i], c)] += fv[c] * q.vals[i];
        }
    }
    return load;
}

void edge_trace(int degree, double tpar, double* vals) {
    if (degree == 1) {
        vals[0] = 1.0 - tpar;
        vals[1] = tpar;
    } else {
        vals[0] = (1.0 - tpar) * (1.0 - 2.0 * tpar);
        vals[1] = tpar * (2.0 * tpar - 1.0);
        vals[2] = 4.0 * tpar * (1.0 - tpar);
    }
}

namespace {

// Shared edge loop: cb(be, tpar, x, n, ds) is called per quadrature point with
// ds the arc-length weight.
template <class F>
void for_each_edge_point(const FeSpace& s, const std::array<bool, 4>& active,
                         int quad_degree, F&& cb) {
    const Mesh& mesh = *s.mesh;
    auto rule = edge_rule(quad_degree);
    for (size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
        const BoundaryEdge& e = mesh.boundary_edges[k];
        if (!active[e.tag - 1]) continue;
        Vec2 a = mesh.vertices[e.v0], b = mesh.vertices[e.v1];
        double len = (b - a).norm();
        for (const auto& q : rule) {
            Vec2 x = a + q.t * (b - a);
            cb(static_cast<int>(k), q.t, x, e.normal, q.w * len);
        }
    }
}

} // namespace

VectorXd assemble_flux_load(const FeSpace& s, const TNormalScalarFn& data,
                            double t, const std::array<bool, 4>& natural,
                            int quad_degree) {
    VectorXd load = VectorXd::Zero(s.n_dofs());
    const int nt = s.degree + 1;
    double tr[3];
    for_each_edge_point(s, natural, quad_degree,
                        [&](int be, double tpar, const Vec2& x, const Vec2& n,
                            double ds) {
                            double v = data(x, t, n) * ds;
                            edge_trace(s.degree, tpar, tr);
                            const auto& en = s.bedge_nodes[be];
                            for (int i = 0; i < nt; ++i) load[en[i]] += v * tr[i];
                        });
    return load;
}

VectorXd assemble_traction_load(const FeSpace& s, const TNormalVectorFn& data,
                                double t, const std::array<bool, 4>& natural_u1,
                                const std::array<bool, 4>& natural_u2,
                                int quad_degree) {
    return assemble_traction_load(
        s,
        [&](int, double, const Vec2& x, const Vec2& n) { return data(x, t, n); },
        natural_u1, natural_u2, quad_degree);
}

VectorXd assemble_traction_load(const FeSpace& s, const EdgeVectorFn& data,
                                const std::array<bool, 4>& natural_u1,
                                const std::array<bool, 4>& natural_u2,
                                int quad_degree) {
    VectorXd load = VectorXd::Zero(s.n_dofs());
    std::array<bool, 4> any;
    for (int i = 0; i < 4; ++i) any[i] = natural_u1[i] || natural_u2[i];
    const int nt = s.degree + 1;
    double tr[3];
    for_each_edge_point(
        s, any, quad_degree,
        [&](int be, double tpar, const Vec2& x, const Vec2& n, double ds) {
            int tag = s.mesh->boundary_edges[be].tag;
            Vec2 v = data(be, tpar, x, n) * ds;
            edge_trace(s.degree, tpar, tr);
            const auto& en = s.bedge_nodes[be];
            for (int i = 0; i < nt; ++i) {
                if (natural_u1[tag - 1]) load[s.dof(en[i], 0)] += v[0] * tr[i];
                if (natural_u2[tag - 1]) load[s.dof(en[i], 1)] += v[1] * tr[i];
            }
        });
    return load;
}

VectorXd basis_integrals(const FeSpace& s, int quad_degree) {
    return assemble_load(
        s, [](const Vec2&, double) { return 1.0; }, 0.0, quad_degree);
}

double negative_part_integral(const FeSpace& s, const VectorXd& coeffs,
                              int quad_degree) {
    const Mesh& mesh = *s.mesh;
    const int nloc = s.local_size();
    auto tab = tabulate(s.degree, quad_degree);
    double acc = 0.0;
    for (size_t tr = 0; tr < mesh.triangles.size(); ++tr) {
        double detj = mesh.tri_jacobian(static_cast<int>(tr)).determinant();
        const auto& nodes = s.cell_nodes[tr];
        for (const auto& q : tab) {
            double v = 0.0;
            for (int i = 0; i < nloc; ++i) v += coeffs[nodes[i]] * q.vals[i];
            if (v < 0.0) acc -= v * q.w * detj;
        }
    }
    return acc;
}

DirichletSet empty_dirichlet(int n_dofs) {
    DirichletSet bc;
    bc.values = VectorXd::Zero(n_dofs);
    bc.mask.assign(n_dofs, 0);
    return bc;
}

DirichletSet collect_dirichlet(const FeSpace& s, const std::array<bool, 4>& segs,
                               const TScalarFn& data, double t) {
    DirichletSet bc = empty_dirichlet(s.n_dofs());
    for (int tag = 1; tag <= 4; ++tag) {
        if (!segs[tag - 1]) continue;
        for (int node : s.boundary_nodes_by_tag[tag - 1]) {
            if (bc.mask[node]) continue;
            bc.mask[node] = 1;
            bc.values[node] = data(s.node_xy[node], t);
            bc.dofs.push_back(node);
        }
    }
    std::sort(bc.dofs.begin(), bc.dofs.end());
    return bc;
}

DirichletSet collect_dirichlet(const FeSpace& s,
                               const std::array<bool, 4>& segs_u1,
                               const std::array<bool, 4>& segs_u2,
                               const TVectorFn& data, double t) {
    DirichletSet bc = empty_dirichlet(s.n_dofs());
    const std::array<bool, 4>* segs[2] = {&segs_u1, &segs_u2};
    for (int tag = 1; tag <= 4; ++tag)
        for (int c = 0; c < 2; ++c) {
            if (!(*segs[c])[tag - 1]) continue;
            for (int node : s.boundary_nodes_by_tag[tag - 1]) {
                int d = s.dof(node, c);
                if (bc.mask[d]) continue;
                bc.mask[d] = 1;
                bc.values[d] = data(s.node_xy[node], t)[c];
                bc.dofs.push_back(d);
            }
        }
    std::sort(bc.dofs.begin(), bc.dofs.end());
    return bc;
}

void translate_pt_dirichlet(const DerivedCoefficients& dc,
                            const DirichletSet& p_bc, const DirichletSet& T_bc,
                            const VectorXd& tau, DirichletSet& pw_bc,
                            DirichletSet& sg_bc) {
    if (p_bc.dofs != T_bc.dofs)
        throw ModelError("pressure/temperature Dirichlet segments must coincide "
                         "to determine boundary values of the mixed variables");
    double det = dc.g5 * dc.g3 - dc.g2 * dc.g2;
    double scale = std::abs(dc.g5 * dc.g3) + dc.g2 * dc.g2;
    if (std::abs(det) <= 1e-14 * std::max(1.0, scale))
        throw ModelError("boundary translation system is singular");
    pw_bc = p_bc;
    sg_bc = T_bc;
    for (int d : p_bc.dofs) {
        double rp = p_bc.values[d] - dc.g4 * tau[d];
        double rT = T_bc.values[d] - dc.g1 * tau[d];
        pw_bc.values[d] = (dc.g3 * rp - dc.g2 * rT) / det;
        sg_bc.values[d] = (dc.g5 * rT - dc.g2 * rp) / det;
    }
}

void add_block(Triplets& out, const SpMat& a, int row0, int col0, double scale) {
    for (int k = 0; k < a.outerSize(); ++k)
        for (SpMat::InnerIterator it(a, k); it; ++it)
            out.emplace_back(row0 + static_cast<int>(it.row()),
                             col0 + static_cast<int>(it.col()),
                             scale * it.value());
}

SpMat build_matrix(int rows, int cols, const Triplets& t) {
    SpMat a(rows, cols);
    a.setFromTriplets(t.begin(), t.end());
    a.makeCompressed();
    return a;
}

void append_offset(const DirichletSet& field_bc, int offset,
                   DirichletSet& sys_bc) {
    for (int d : field_bc.dofs) {
        int sd = offset + d;
        if (sys_bc.mask[sd]) continue;
        sys_bc.mask[sd] = 1;
        sys_bc.dofs.push_back(sd);
    }
    for (int d : field_bc.dofs) sys_bc.values[offset + d] = field_bc.values[d];
    std::sort(sys_bc.dofs.begin(), sys_bc.dofs.end());
}

SpMat eliminate_matrix(const SpMat& a, const DirichletSet& bc) {
    Triplets trip;
    trip.reserve(static_cast<size_t>(a.nonZeros()) + bc.dofs.size());
    for (int k = 0; k < a.outerSize(); ++k)
        for (SpMat::InnerIterator it(a, k); it; ++it) {
            int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
            if (!bc.constrained(r) && !bc.constrained(c))
                trip.emplace_back(r, c, it.value());
        }
    for (int d : bc.dofs) trip.emplace_back(d, d, 1.0);
    return build_matrix(static_cast<int>(a.rows()), static_cast<int>(a.cols()),
                        trip);
}

VectorXd eliminate_rhs(const SpMat& a, const VectorXd& rhs,
                       const DirichletSet& bc) {
    VectorXd xbc = VectorXd::Zero(rhs.size());
    for (int d : bc.dofs) xbc[d] = bc.values[d];
    VectorXd r = rhs - a * xbc;
    for (int d : bc.dofs) r[d] = bc.values[d];
    return r;
}

} // namespace tpe
