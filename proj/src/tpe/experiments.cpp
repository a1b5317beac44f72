#include "experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <sstream>
#include <thread>

#include "errors.hpp"
#include "quadrature.hpp"

namespace tpe {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double rate_between(double e_coarse, double e_fine) {
    return std::log2(e_coarse / e_fine);
}

void ErrorTable::compute_rates() {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rates.assign(errors.size(), std::vector<double>(fields.size(), nan));
    for (size_t r = 1; r < errors.size(); ++r)
        for (size_t c = 0; c < fields.size(); ++c)
            rates[r][c] = rate_between(errors[r - 1][c], errors[r][c]);
}

std::string ErrorTable::csv() const {
    std::ostringstream os;
    os << x_name;
    for (const auto& f : fields) os << "," << f << ",CR";
    os << "\n";
    for (size_t r = 0; r < x.size(); ++r) {
        os << format_g17(x[r]);
        for (size_t c = 0; c < fields.size(); ++c) {
            os << "," << format_g17(errors[r][c]) << ",";
            if (r < rates.size() && !std::isnan(rates[r][c]))
                os << format_g17(rates[r][c]);
        }
        os << "\n";
    }
    return os.str();
}

void run_parallel(std::vector<std::function<void()>>& tasks, int jobs) {
    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
    if (jobs == 1) {
        for (auto& t : tasks) t();
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int w = 0; w < jobs; ++w)
        pool.emplace_back([&] {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= tasks.size()) return;
                tasks[i]();
            }
        });
    for (auto& th : pool) th.join();
}

namespace {

SolverSettings make_settings(const StudyOptions& opt, double dt) {
    SolverSettings s;
    s.theta = opt.theta;
    s.dt = dt;
    s.deg_u = opt.deg_u;
    s.deg_s = opt.deg_s;
    s.linear_tol = opt.linear_tol;
    s.picard_tol = opt.picard_tol;
    s.picard_max = opt.picard_max;
    return s;
}

struct FieldErrors {
    ErrorNorms u, p, T;
};

FieldErrors errors_at_final(const MafeaSolver& sol) {
    const Case& c = sol.problem();
    double tf = c.t_f;
    const ExactSolution& ex = c.exact;
    FieldErrors e;
    e.u = compute_error(
        sol.u_space(), sol.state().u,
        [&](const Vec2& x) { return ex.u(x, tf); },
        [&](const Vec2& x) { return Mat2(ex.grad_u(x, tf)); },
        sol.quad_degree());
    e.p = compute_error(
        sol.scalar_space(), sol.state().p,
        [&](const Vec2& x) { return ex.p(x, tf); },
        [&](const Vec2& x) { return Vec2(ex.grad_p(x, tf)); },
        sol.quad_degree());
    e.T = compute_error(
        sol.scalar_space(), sol.state().T,
        [&](const Vec2& x) { return ex.T(x, tf); },
        [&](const Vec2& x) { return Vec2(ex.grad_T(x, tf)); },
        sol.quad_degree());
    return e;
}

} // namespace

ErrorTable spatial_convergence(const Case& c, const std::vector<int>& mesh_n,
                               bool dt_h2, double dt, bool relative,
                               const StudyOptions& opt) {
    if (!c.has_exact)
        throw ConfigError("spatial study requires a case with an exact solution");
    ErrorTable tbl;
    tbl.x_name = "h";
    tbl.fields = {"e_u_L2", "e_u_H1", "e_p_L2", "e_p_H1", "e_T_L2", "e_T_H1"};
    tbl.x.resize(mesh_n.size());
    tbl.errors.assign(mesh_n.size(), std::vector<double>(6, 0.0));

    std::vector<std::function<void()>> tasks;
    for (size_t r = 0; r < mesh_n.size(); ++r)
        tasks.push_back([&, r] {
            int n = mesh_n[r];
            Mesh mesh = build_structured(n, n, 0, 0, 1, 1);
            double row_dt = dt_h2 ? 1.0 / (static_cast<double>(n) * n) : dt;
            MafeaSolver sol(mesh, c, make_settings(opt, row_dt));
            sol.run();
            FieldErrors e = errors_at_final(sol);
            auto rel = [&](double err, double nrm) {
                return relative ? err / nrm : err;
            };
            tbl.x[r] = 1.0 / n;
            tbl.errors[r] = {rel(e.u.l2, e.u.exact_l2), rel(e.u.h1, e.u.exact_h1),
                             rel(e.p.l2, e.p.exact_l2), rel(e.p.h1, e.p.exact_h1),
                             rel(e.T.l2, e.T.exact_l2), rel(e.T.h1, e.T.exact_h1)};
        });
    run_parallel(tasks, opt.jobs);
    tbl.compute_rates();
    return tbl;
}

ErrorTable temporal_convergence(const Case& c, int mesh_n,
                                const std::vector<double>& dts,
                                const StudyOptions& opt) {
    if (dts.size() < 2)
        throw ConfigError("temporal study needs at least two step sizes");
    Mesh mesh = build_structured(mesh_n, mesh_n, 0, 0, 1, 1);

    struct Final {
        VectorXd u, p, T;
    };
    std::vector<Final> finals(dts.size());
    std::vector<std::function<void()>> tasks;
    for (size_t r = 0; r < dts.size(); ++r)
        tasks.push_back([&, r] {
            MafeaSolver sol(mesh, c, make_settings(opt, dts[r]));
            sol.run();
            finals[r] = {sol.state().u, sol.state().p, sol.state().T};
        });
    run_parallel(tasks, opt.jobs);

    FeSpace su = build_space(mesh, opt.deg_u, 2);
    FeSpace ss = build_space(mesh, opt.deg_s, 1);
    int qdeg = 2 * std::max(opt.deg_u, opt.deg_s) + 2;
    SpMat mu = assemble_mass(su, qdeg);
    SpMat ms = assemble_mass(ss, qdeg);
    auto l2 = [](const SpMat& m, const VectorXd& d) {
        return std::sqrt(d.dot(m * d));
    };

    ErrorTable tbl;
    tbl.x_name = "dt";
    tbl.fields = {"diff_u_L2", "diff_p_L2", "diff_T_L2"};
    for (size_t r = 0; r + 1 < dts.size(); ++r) {
        tbl.x.push_back(dts[r]);
        tbl.errors.push_back({l2(mu, finals[r].u - finals[r + 1].u),
                              l2(ms, finals[r].p - finals[r + 1].p),
                              l2(ms, finals[r].T - finals[r + 1].T)});
    }
    tbl.compute_rates();
    return tbl;
}

LockingReport locking_comparison(const Case& c, int mesh_n, double dt,
                                 const StudyOptions& opt) {
    Mesh mesh = build_structured(mesh_n, mesh_n, 0, 0, 1, 1);
    LockingReport rep;

    ClassicalSolver cls(mesh, c, make_settings(opt, dt));
    cls.run();
    rep.undershoot_classical = cls.history().back().undershoot_p;
    rep.min_p_classical = cls.history().back().min_p;
    rep.p_classical = cls.state().p;

    SolverSettings ms = make_settings(opt, dt);
    ms.theta = 1; // robust at large steps regardless of the study default
    MafeaSolver maf(mesh, c, ms);
    maf.run();
    rep.undershoot_mafea = maf.history().back().undershoot_p;
    rep.min_p_mafea = maf.history().back().min_p;
    rep.p_mafea = maf.state().p;
    return rep;
}

FieldSample eval_structured(const FeSpace& s, const VectorXd& coeffs, int n,
                            const Vec2& x) {
    double gx = std::clamp(x.x(), 0.0, 1.0) * n;
    double gy = std::clamp(x.y(), 0.0, 1.0) * n;
    int i = std::min(static_cast<int>(gx), n - 1);
    int j = std::min(static_cast<int>(gy), n - 1);
    double xi = gx - i, eta = gy - j;
    int tri;
    double lx, ly;
    if (eta <= xi) { // lower-right triangle of the cell
        tri = 2 * (j * n + i);
        lx = xi - eta;
        ly = eta;
    } else {
        tri = 2 * (j * n + i) + 1;
        lx = xi;
        ly = eta - xi;
    }
    return eval_field(s, coeffs, tri, lx, ly);
}

namespace {

// L2/H1 differences between a coarse run and a structured reference run,
// integrated on the coarse mesh.
std::vector<double> reference_errors(const MafeaSolver& sol,
                                     const MafeaSolver& ref, int ref_n) {
    const FeSpace& suc = sol.u_space();
    const FeSpace& ssc = sol.scalar_space();
    const Mesh& mesh = *suc.mesh;
    auto rule = triangle_rule(sol.quad_degree());
    double acc[3] = {0, 0, 0}; // squared L2 differences of u, p, T
    double h1[3] = {0, 0, 0};  // squared seminorm differences
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        int ti = static_cast<int>(t);
        double detj = mesh.tri_jacobian(ti).determinant();
        for (const auto& q : rule) {
            Vec2 x = mesh.tri_point(ti, q.x, q.y);
            double w = q.w * detj;

            FieldSample uc = eval_field(suc, sol.state().u, ti, q.x, q.y);
            FieldSample ur = eval_structured(ref.u_space(), ref.state().u,
                                             ref_n, x);
            acc[0] += w * (uc.value - ur.value).squaredNorm();
            h1[0] += w * (uc.grad - ur.grad).squaredNorm();

            FieldSample pc = eval_field(ssc, sol.state().p, ti, q.x, q.y);
            FieldSample pr = eval_structured(ref.scalar_space(), ref.state().p,
                                             ref_n, x);
            acc[1] += w * (pc.value[0] - pr.value[0]) * (pc.value[0] - pr.value[0]);
            h1[1] += w * (pc.grad.row(0) - pr.grad.row(0)).squaredNorm();

            FieldSample tc = eval_field(ssc, sol.state().T, ti, q.x, q.y);
            FieldSample trf = eval_structured(ref.scalar_space(), ref.state().T,
                                              ref_n, x);
            acc[2] += w * (tc.value[0] - trf.value[0]) * (tc.value[0] - trf.value[0]);
            h1[2] += w * (tc.grad.row(0) - trf.grad.row(0)).squaredNorm();
        }
    }
    return {std::sqrt(acc[0]), std::sqrt(acc[0] + h1[0]),
            std::sqrt(acc[1]), std::sqrt(acc[1] + h1[1]),
            std::sqrt(acc[2]), std::sqrt(acc[2] + h1[2])};
}

} // namespace

ErrorTable self_convergence(const Case& c, const std::vector<int>& mesh_n,
                            int ref_n, double dt, const StudyOptions& opt) {
    Mesh ref_mesh = build_structured(ref_n, ref_n, 0, 0, 1, 1);
    MafeaSolver ref(ref_mesh, c, make_settings(opt, dt));
    ref.run();

    ErrorTable tbl;
    tbl.x_name = "h";
    tbl.fields = {"e_u_L2", "e_u_H1", "e_p_L2", "e_p_H1", "e_T_L2", "e_T_H1"};
    tbl.x.resize(mesh_n.size());
    tbl.errors.assign(mesh_n.size(), std::vector<double>(6, 0.0));

    std::vector<Mesh> meshes(mesh_n.size());
    std::vector<std::function<void()>> tasks;
    for (size_t r = 0; r < mesh_n.size(); ++r)
        tasks.push_back([&, r] {
            meshes[r] = build_structured(mesh_n[r], mesh_n[r], 0, 0, 1, 1);
            MafeaSolver sol(meshes[r], c, make_settings(opt, dt));
            sol.run();
            tbl.x[r] = 1.0 / mesh_n[r];
            tbl.errors[r] = reference_errors(sol, ref, ref_n);
        });
    run_parallel(tasks, opt.jobs);
    tbl.compute_rates();
    return tbl;
}

std::vector<SweepRecord> sweep_b(const std::string& variant,
                                 const std::vector<double>& b_values,
                                 int mesh_n, double dt, double t_f,
                                 const StudyOptions& opt, bool constant_model) {
    std::vector<SweepRecord> out(b_values.size());
    Mesh mesh = build_structured(mesh_n, mesh_n, 0, 0, 1, 1);
    std::vector<std::function<void()>> tasks;
    for (size_t r = 0; r < b_values.size(); ++r)
        tasks.push_back([&, r] {
            SweepRecord& rec = out[r];
            rec.b = b_values[r];
            try {
                Case c = build_case("b_sweep", variant);
                c.params.b = b_values[r];
                c.t_f = t_f;
                SolverSettings st = make_settings(opt, dt);
                st.constant_permeability = constant_model;
                MafeaSolver sol(mesh, c, st);
                sol.run();
                rec.u = sol.state().u;
                rec.p = sol.state().p;
                rec.T = sol.state().T;
                rec.max_p = rec.p.maxCoeff();
                rec.min_p = rec.p.minCoeff();
                rec.max_T = rec.T.maxCoeff();
                rec.min_T = rec.T.minCoeff();
                rec.undershoot = sol.history().back().undershoot_p;
                rec.ok = true;
            } catch (const std::exception& e) {
                rec.ok = false;
                rec.message = e.what();
            }
        });
    run_parallel(tasks, opt.jobs);
    return out;
}

} // namespace tpe
