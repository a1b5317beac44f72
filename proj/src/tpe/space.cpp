#include "space.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "errors.hpp"
#include "quadrature.hpp"

namespace tpe {

void shape_values(int degree, double xi, double eta, double* v, Vec2* g) {
    const double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
    if (degree == 1) {
        v[0] = l0; v[1] = l1; v[2] = l2;
        g[0] = Vec2(-1, -1); g[1] = Vec2(1, 0); g[2] = Vec2(0, 1);
        return;
    }
    // P2: vertex bases l(2l-1), edge bases 4*l_i*l_j with local edge order
    // 3=(0,1), 4=(1,2), 5=(0,2).
    v[0] = l0 * (2 * l0 - 1);
    v[1] = l1 * (2 * l1 - 1);
    v[2] = l2 * (2 * l2 - 1);
    v[3] = 4 * l0 * l1;
    v[4] = 4 * l1 * l2;
    v[5] = 4 * l0 * l2;
    const Vec2 d0(-1, -1), d1(1, 0), d2(0, 1);
    g[0] = (4 * l0 - 1) * d0;
    g[1] = (4 * l1 - 1) * d1;
    g[2] = (4 * l2 - 1) * d2;
    g[3] = 4 * (l1 * d0 + l0 * d1);
    g[4] = 4 * (l2 * d1 + l1 * d2);
    g[5] = 4 * (l2 * d0 + l0 * d2);
}

FeSpace build_space(const Mesh& mesh, int degree, int vdim) {
    if (degree != 1 && degree != 2)
        throw ConfigError("element degree must be 1 or 2, got " + std::to_string(degree));
    if (vdim != 1 && vdim != 2)
        throw ConfigError("value dimension must be 1 or 2, got " + std::to_string(vdim));

    FeSpace s;
    s.mesh = &mesh;
    s.degree = degree;
    s.vdim = vdim;
    s.node_xy = mesh.vertices;

    std::map<std::pair<int, int>, int> edge_id;
    if (degree == 2) {
        std::set<std::pair<int, int>> edges;
        for (const auto& t : mesh.triangles) {
            edges.insert(std::minmax(t[0], t[1]));
            edges.insert(std::minmax(t[1], t[2]));
            edges.insert(std::minmax(t[0], t[2]));
        }
        int next = mesh.n_vertices();
        for (const auto& e : edges) { // std::set iterates in sorted pair order
            edge_id[e] = next++;
            s.node_xy.push_back(0.5 * (mesh.vertices[e.first] + mesh.vertices[e.second]));
        }
    }
    s.n_nodes = static_cast<int>(s.node_xy.size());

    s.cell_nodes.resize(mesh.n_triangles());
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        auto& cn = s.cell_nodes[t];
        cn = {tri[0], tri[1], tri[2], -1, -1, -1};
        if (degree == 2) {
            cn[3] = edge_id.at(std::minmax(tri[0], tri[1]));
            cn[4] = edge_id.at(std::minmax(tri[1], tri[2]));
            cn[5] = edge_id.at(std::minmax(tri[0], tri[2]));
        }
    }

    s.bedge_nodes.resize(mesh.boundary_edges.size());
    std::array<std::set<int>, 4> per_tag;
    for (size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
        const auto& be = mesh.boundary_edges[e];
        int mid = -1;
        if (degree == 2) mid = edge_id.at(std::minmax(be.v0, be.v1));
        s.bedge_nodes[e] = {be.v0, be.v1, mid};
        auto& nodes = per_tag[be.tag - 1];
        nodes.insert(be.v0);
        nodes.insert(be.v1);
        if (mid >= 0) nodes.insert(mid);
    }
    for (int t = 0; t < 4; ++t)
        s.boundary_nodes_by_tag[t].assign(per_tag[t].begin(), per_tag[t].end());
    return s;
}

FieldSample eval_field(const FeSpace& s, const VectorXd& coeffs, int tri,
                       double xi, double eta) {
    double v[6];
    Vec2 g[6];
    shape_values(s.degree, xi, eta, v, g);
    Mat2 Jinv = s.mesh->tri_jacobian(tri).inverse();

    FieldSample out;
    out.value.setZero();
    out.grad.setZero();
    const int nl = s.local_size();
    for (int i = 0; i < nl; ++i) {
        int node = s.cell_nodes[tri][i];
        Vec2 gphys = Jinv.transpose() * g[i];
        for (int c = 0; c < s.vdim; ++c) {
            double ci = coeffs[s.dof(node, c)];
            out.value[c] += ci * v[i];
            out.grad.row(c) += ci * gphys.transpose();
        }
    }
    return out;
}

VectorXd interpolate(const FeSpace& s, const ScalarFn& f) {
    if (s.vdim != 1) throw DataError("scalar interpolation on a vector space");
    VectorXd x(s.n_dofs());
    for (int n = 0; n < s.n_nodes; ++n) {
        double val = f(s.node_xy[n]);
        if (!std::isfinite(val)) throw DataError("non-finite interpolation value");
        x[n] = val;
    }
    return x;
}

VectorXd interpolate(const FeSpace& s, const VectorFn& f) {
    if (s.vdim != 2) throw DataError("vector interpolation on a scalar space");
    VectorXd x(s.n_dofs());
    for (int n = 0; n < s.n_nodes; ++n) {
        Vec2 val = f(s.node_xy[n]);
        if (!val.allFinite()) throw DataError("non-finite interpolation value");
        x[s.dof(n, 0)] = val.x();
        x[s.dof(n, 1)] = val.y();
    }
    return x;
}

namespace {

Eigen::SparseMatrix<double> mass_matrix(const FeSpace& s, int quad_degree) {
    auto rule = triangle_rule(quad_degree);
    std::vector<Eigen::Triplet<double>> trips;
    const int nl = s.local_size();
    double v[6];
    Vec2 g[6];
    for (int t = 0; t < s.mesh->n_triangles(); ++t) {
        double jac = 2.0 * s.mesh->tri_area(t);
        for (const auto& q : rule) {
            shape_values(s.degree, q.x, q.y, v, g);
            double w = q.w * jac;
            for (int i = 0; i < nl; ++i)
                for (int j = 0; j < nl; ++j)
                    for (int c = 0; c < s.vdim; ++c)
                        trips.emplace_back(s.dof(s.cell_nodes[t][i], c),
                                           s.dof(s.cell_nodes[t][j], c),
                                           w * v[i] * v[j]);
        }
    }
    Eigen::SparseMatrix<double> M(s.n_dofs(), s.n_dofs());
    M.setFromTriplets(trips.begin(), trips.end());
    return M;
}

VectorXd project_rhs(const FeSpace& s, const ScalarFn& fs, const VectorFn& fv,
                     int quad_degree) {
    auto rule = triangle_rule(quad_degree);
    VectorXd b = VectorXd::Zero(s.n_dofs());
    const int nl = s.local_size();
    double v[6];
    Vec2 g[6];
    for (int t = 0; t < s.mesh->n_triangles(); ++t) {
        double jac = 2.0 * s.mesh->tri_area(t);
        for (const auto& q : rule) {
            shape_values(s.degree, q.x, q.y, v, g);
            Vec2 x = s.mesh->tri_point(t, q.x, q.y);
            double w = q.w * jac;
            if (s.vdim == 1) {
                double fval = fs(x);
                for (int i = 0; i < nl; ++i)
                    b[s.cell_nodes[t][i]] += w * fval * v[i];
            } else {
                Vec2 fval = fv(x);
                for (int i = 0; i < nl; ++i)
                    for (int c = 0; c < 2; ++c)
                        b[s.dof(s.cell_nodes[t][i], c)] += w * fval[c] * v[i];
            }
        }
    }
    return b;
}

VectorXd mass_solve(const FeSpace& s, const VectorXd& b, int quad_degree) {
    Eigen::SparseMatrix<double> M = mass_matrix(s, quad_degree);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(M);
    if (ldlt.info() != Eigen::Success)
        throw SolverError("mass matrix factorization failed");
    VectorXd x = ldlt.solve(b);
    double resid = (M * x - b).norm();
    if (resid > 1e-10 * std::max(1.0, b.norm()))
        throw SolverError("mass solve residual " + std::to_string(resid));
    return x;
}

} // namespace

VectorXd l2_project(const FeSpace& s, const ScalarFn& f, int quad_degree) {
    return mass_solve(s, project_rhs(s, f, {}, quad_degree), quad_degree);
}

VectorXd l2_project(const FeSpace& s, const VectorFn& f, int quad_degree) {
    return mass_solve(s, project_rhs(s, {}, f, quad_degree), quad_degree);
}

namespace {

ErrorNorms error_impl(const FeSpace& s, const VectorXd& coeffs,
                      const std::function<void(const Vec2&, Eigen::Vector2d&, Mat2&)>& exact,
                      int quad_degree) {
    auto rule = triangle_rule(quad_degree);
    double e_l2 = 0, e_h1s = 0, x_l2 = 0, x_h1s = 0;
    Eigen::Vector2d xv;
    Mat2 xg;
    for (int t = 0; t < s.mesh->n_triangles(); ++t) {
        double jac = 2.0 * s.mesh->tri_area(t);
        for (const auto& q : rule) {
            FieldSample fh = eval_field(s, coeffs, t, q.x, q.y);
            Vec2 x = s.mesh->tri_point(t, q.x, q.y);
            xv.setZero();
            xg.setZero();
            exact(x, xv, xg);
            double w = q.w * jac;
            for (int c = 0; c < s.vdim; ++c) {
                double dv = fh.value[c] - xv[c];
                e_l2 += w * dv * dv;
                x_l2 += w * xv[c] * xv[c];
                Vec2 dg = fh.grad.row(c).transpose() - xg.row(c).transpose();
                e_h1s += w * dg.squaredNorm();
                x_h1s += w * xg.row(c).squaredNorm();
            }
        }
    }
    ErrorNorms out;
    out.l2 = std::sqrt(e_l2);
    out.h1 = std::sqrt(e_l2 + e_h1s);
    out.exact_l2 = std::sqrt(x_l2);
    out.exact_h1 = std::sqrt(x_l2 + x_h1s);
    return out;
}

} // namespace

ErrorNorms compute_error(const FeSpace& s, const VectorXd& coeffs,
                         const ScalarFn& exact, const VectorFn& exact_grad,
                         int quad_degree) {
    if (s.vdim != 1) throw DataError("scalar error on a vector space");
    return error_impl(
        s, coeffs,
        [&](const Vec2& x, Eigen::Vector2d& v, Mat2& g) {
            v[0] = exact(x);
            g.row(0) = exact_grad(x).transpose();
        },
        quad_degree);
}

ErrorNorms compute_error(const FeSpace& s, const VectorXd& coeffs,
                         const VectorFn& exact, const MatrixFn& exact_grad,
                         int quad_degree) {
    if (s.vdim != 2) throw DataError("vector error on a scalar space");
    return error_impl(
        s, coeffs,
        [&](const Vec2& x, Eigen::Vector2d& v, Mat2& g) {
            v = exact(x);
            g = exact_grad(x);
        },
        quad_degree);
}

void write_field_csv(const FeSpace& s, const VectorXd& coeffs,
                     const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open " + path);
    os.precision(17);
    os << (s.vdim == 1 ? "x,y,value\n" : "x,y,value1,value2\n");
    for (int v = 0; v < s.mesh->n_vertices(); ++v) {
        os << s.node_xy[v].x() << "," << s.node_xy[v].y();
        for (int c = 0; c < s.vdim; ++c) os << "," << coeffs[s.dof(v, c)];
        os << "\n";
    }
}

void write_field_vtk(const FeSpace& s, const VectorXd& coeffs,
                     const std::string& field_name, const std::string& path) {
    const Mesh& m = *s.mesh;
    std::ofstream os(path);
    if (!os) throw DataError("cannot open " + path);
    os.precision(17);
    os << "# vtk DataFile Version 2.0\n" << field_name << "\nASCII\n"
       << "DATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << m.n_vertices() << " double\n";
    for (const auto& v : m.vertices) os << v.x() << " " << v.y() << " 0\n";
    os << "CELLS " << m.n_triangles() << " " << 4 * m.n_triangles() << "\n";
    for (const auto& t : m.triangles)
        os << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
    os << "CELL_TYPES " << m.n_triangles() << "\n";
    for (int t = 0; t < m.n_triangles(); ++t) os << "5\n";
    os << "POINT_DATA " << m.n_vertices() << "\n";
    if (s.vdim == 1) {
        os << "SCALARS " << field_name << " double 1\nLOOKUP_TABLE default\n";
        for (int v = 0; v < m.n_vertices(); ++v) os << coeffs[v] << "\n";
    } else {
        os << "VECTORS " << field_name << " double\n";
        for (int v = 0; v < m.n_vertices(); ++v)
            os << coeffs[s.dof(v, 0)] << " " << coeffs[s.dof(v, 1)] << " 0\n";
    }
}

} // namespace tpe
