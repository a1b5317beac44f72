#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "../src/tpe/config.hpp"
#include "../src/tpe/errors.hpp"
#include "../src/tpe/experiments.hpp"

namespace fs = std::filesystem;
using namespace tpe;

namespace {

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << content;
}

Case make_case(const RunConfig& cfg) {
    Case base = build_case(cfg.case_name, cfg.variant);
    if (!cfg.param_overrides.empty()) {
        PhysicalParams prm = base.params;
        for (const auto& [k, v] : cfg.param_overrides) {
            if (k == "a0") prm.a0 = v;
            else if (k == "b0") prm.b0 = v;
            else if (k == "c0") prm.c0 = v;
            else if (k == "alpha") prm.alpha = v;
            else if (k == "beta") prm.beta = v;
            else if (k == "a") prm.a = v;
            else if (k == "b") prm.b = v;
            else if (k == "k0") prm.k0 = v;
            else if (k == "theta_cond") prm.Theta = v;
            else if (k == "E") prm.E = v;
            else if (k == "nu") prm.nu = v;
        }
        base = build_case(cfg.case_name, cfg.variant, prm);
    }
    if (cfg.u1_dirichlet) base.bc.u1_dirichlet = *cfg.u1_dirichlet;
    if (cfg.u2_dirichlet) base.bc.u2_dirichlet = *cfg.u2_dirichlet;
    if (cfg.p_dirichlet) base.bc.p_dirichlet = *cfg.p_dirichlet;
    if (cfg.T_dirichlet) base.bc.T_dirichlet = *cfg.T_dirichlet;
    if (cfg.t_f) base.t_f = *cfg.t_f;
    return base;
}

SolverSettings make_solver_settings(const RunConfig& cfg, int mesh_n) {
    SolverSettings st;
    st.theta = cfg.theta;
    st.dt = cfg.dt_is_h2 ? 1.0 / (static_cast<double>(mesh_n) * mesh_n) : cfg.dt;
    st.deg_u = cfg.deg_u;
    st.deg_s = cfg.deg_s;
    st.quad_degree = cfg.quad_degree;
    st.linear_tol = cfg.linear_tol;
    st.picard_tol = cfg.picard_tol;
    st.picard_max = cfg.picard_max;
    st.init_by_projection = cfg.init_by_projection;
    st.constant_permeability = cfg.constant_permeability;
    st.allow_degenerate = cfg.allow_degenerate;
    return st;
}

StudyOptions make_study_options(const RunConfig& cfg, int jobs) {
    StudyOptions opt;
    opt.deg_u = cfg.deg_u;
    opt.deg_s = cfg.deg_s;
    opt.theta = cfg.theta;
    opt.jobs = jobs;
    opt.linear_tol = cfg.linear_tol;
    opt.picard_tol = cfg.picard_tol;
    opt.picard_max = cfg.picard_max;
    return opt;
}

std::string params_echo(const PhysicalParams& p) {
    std::ostringstream os;
    os << "a0 = " << format_g17(p.a0) << "\nb0 = " << format_g17(p.b0)
       << "\nc0 = " << format_g17(p.c0) << "\nalpha = " << format_g17(p.alpha)
       << "\nbeta = " << format_g17(p.beta) << "\na = " << format_g17(p.a)
       << "\nb = " << format_g17(p.b) << "\nk0 = " << format_g17(p.k0)
       << "\nTheta = " << format_g17(p.Theta) << "\nE = " << format_g17(p.E)
       << "\nnu = " << format_g17(p.nu) << "\n";
    return os.str();
}

std::string step_stats_csv(const std::vector<StepStats>& hist) {
    std::ostringstream os;
    os << "n,t,picard_iters,picard_residual,mean_pw,mean_sg,energy,"
          "undershoot_p,min_p\n";
    for (const auto& s : hist) {
        os << s.n << "," << format_g17(s.t) << "," << s.picard_iters << ","
           << format_g17(s.picard_residual) << "," << format_g17(s.mean_pw)
           << "," << format_g17(s.mean_sg) << "," << format_g17(s.energy)
           << "," << format_g17(s.undershoot_p) << "," << format_g17(s.min_p)
           << "\n";
    }
    return os.str();
}

void write_provenance(const fs::path& dir, const std::string& command,
                      const RunConfig& cfg, const Case& c,
                      const std::vector<std::string>& extra) {
    std::ostringstream os;
    os << "command: " << command << "\ncase: " << c.name;
    if (!cfg.variant.empty()) os << " (" << cfg.variant << ")";
    os << "\nelements: u degree " << cfg.deg_u << ", scalar degree "
       << cfg.deg_s << "\ntheta: " << cfg.theta << "\n";
    os << "t_f: " << format_g17(c.t_f) << "\n";
    os << "\n[parameters]\n" << params_echo(c.params);
    try {
        DerivedCoefficients dc = derive_coefficients(c.params);
        os << "\n[derived coefficients]\n" << dc.diagnostic_report();
    } catch (const std::exception& e) {
        os << "\n[derived coefficients]\nunavailable: " << e.what() << "\n";
    }
    if (!extra.empty()) {
        os << "\n[run notes]\n";
        for (const auto& s : extra) os << s << "\n";
    }
    write_text(dir / "provenance.log", os.str());
}

void write_snapshots(const fs::path& dir, const std::string& suffix,
                     const FeSpace& su, const VectorXd& u, const FeSpace& ss,
                     const VectorXd& p, const VectorXd& T) {
    write_field_csv(su, u, (dir / ("u" + suffix + ".csv")).string());
    write_field_csv(ss, p, (dir / ("p" + suffix + ".csv")).string());
    write_field_csv(ss, T, (dir / ("T" + suffix + ".csv")).string());
    write_field_vtk(su, u, "u", (dir / ("u" + suffix + ".vtk")).string());
    write_field_vtk(ss, p, "p", (dir / ("p" + suffix + ".vtk")).string());
    write_field_vtk(ss, T, "T", (dir / ("T" + suffix + ".vtk")).string());
}

int cmd_run(const RunConfig& cfg, const fs::path& dir, int snapshot_every) {
    Case c = make_case(cfg);
    Mesh mesh = build_structured(cfg.n, cfg.n, 0, 0, 1, 1);
    MafeaSolver sol(mesh, c, make_solver_settings(cfg, cfg.n));
    for (const auto& w : sol.warnings()) std::cerr << "warning: " << w << "\n";
    sol.run([&](const MafeaSolver& s) {
        if (snapshot_every > 0 && s.step() % snapshot_every == 0) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "_%06d", s.step());
            write_snapshots(dir, buf, s.u_space(), s.state().u,
                            s.scalar_space(), s.state().p, s.state().T);
        }
    });
    write_text(dir / "step_stats.csv", step_stats_csv(sol.history()));
    write_snapshots(dir, "", sol.u_space(), sol.state().u, sol.scalar_space(),
                    sol.state().p, sol.state().T);
    std::vector<std::string> notes;
    notes.push_back("steps: " + std::to_string(sol.n_steps()));
    int max_it = 0;
    for (const auto& s : sol.history()) max_it = std::max(max_it, s.picard_iters);
    notes.push_back("max picard iterations: " + std::to_string(max_it));
    for (const auto& w : sol.warnings()) notes.push_back("warning: " + w);
    write_provenance(dir, "run", cfg, c, notes);
    return 0;
}

int cmd_converge_space(const RunConfig& cfg, const fs::path& dir, int jobs) {
    Case c = make_case(cfg);
    ErrorTable tbl =
        spatial_convergence(c, cfg.n_list, cfg.dt_is_h2, cfg.dt, cfg.relative,
                            make_study_options(cfg, jobs));
    std::ostringstream name;
    name << "spatial_" << c.name << "_p" << cfg.deg_u << "p" << cfg.deg_s
         << ".csv";
    write_text(dir / name.str(), tbl.csv());
    write_provenance(dir, "converge-space", cfg, c,
                     {"rows: " + std::to_string(tbl.x.size()),
                      "errors: " + std::string(cfg.relative ? "relative"
                                                            : "absolute")});
    std::cout << tbl.csv();
    return 0;
}

int cmd_converge_time(const RunConfig& cfg, const fs::path& dir, int jobs) {
    Case c = make_case(cfg);
    std::vector<double> dts = cfg.dt_list;
    if (dts.empty())
        for (double f : {0.1, 0.05, 0.025, 0.0125}) dts.push_back(c.t_f * f);
    ErrorTable tbl =
        temporal_convergence(c, cfg.n, dts, make_study_options(cfg, jobs));
    write_text(dir / ("temporal_" + c.name + ".csv"), tbl.csv());
    write_provenance(dir, "converge-time", cfg, c,
                     {"mesh n: " + std::to_string(cfg.n)});
    std::cout << tbl.csv();
    return 0;
}

int cmd_barry(const RunConfig& cfg, const fs::path& dir, int jobs,
              bool reference_run) {
    RunConfig bc = cfg;
    if (bc.case_name != "barry_mercer" && bc.case_name != "b_sweep")
        bc.case_name = "barry_mercer";
    if (bc.variant.empty()) bc.variant = "pressure";
    Case c = make_case(bc);

    Case lock_case = c;
    lock_case.t_f = bc.locking_t_f;
    LockingReport rep = locking_comparison(lock_case, bc.locking_n,
                                           bc.locking_dt,
                                           make_study_options(bc, jobs));
    std::ostringstream lk;
    lk << "path,undershoot,min_p\n";
    lk << "classical," << format_g17(rep.undershoot_classical) << ","
       << format_g17(rep.min_p_classical) << "\n";
    lk << "mafea," << format_g17(rep.undershoot_mafea) << ","
       << format_g17(rep.min_p_mafea) << "\n";
    write_text(dir / "locking.csv", lk.str());
    {
        Mesh m = build_structured(bc.locking_n, bc.locking_n, 0, 0, 1, 1);
        FeSpace ss = build_space(m, bc.deg_s, 1);
        write_field_csv(ss, rep.p_classical,
                        (dir / "p_classical.csv").string());
        write_field_csv(ss, rep.p_mafea, (dir / "p_mafea.csv").string());
        write_field_vtk(ss, rep.p_classical, "p",
                        (dir / "p_classical.vtk").string());
        write_field_vtk(ss, rep.p_mafea, "p", (dir / "p_mafea.vtk").string());
    }

    int ref_n = reference_run ? 180 : bc.ref_n;
    std::vector<int> ns = {4, 8, 16};
    StudyOptions opt = make_study_options(bc, jobs);
    opt.theta = 1; // shared time error cancels; coupled step is step-size robust
    double dt = bc.dt_is_h2 ? 5e-2 : bc.dt;
    ErrorTable tbl = self_convergence(c, ns, ref_n, dt, opt);
    write_text(dir / "self_convergence.csv", tbl.csv());
    std::cout << tbl.csv();

    write_provenance(
        dir, "barry", bc, c,
        {"locking mesh n: " + std::to_string(bc.locking_n),
         "locking dt: " + format_g17(bc.locking_dt),
         "locking horizon: " + format_g17(bc.locking_t_f),
         "undershoot classical: " + format_g17(rep.undershoot_classical),
         "undershoot mafea: " + format_g17(rep.undershoot_mafea),
         "reference mesh n: " + std::to_string(ref_n),
         "self-convergence dt: " + format_g17(dt)});
    return 0;
}

int cmd_sweep_b(const RunConfig& cfg, const fs::path& dir, int jobs) {
    RunConfig sc = cfg;
    if (sc.variant.empty()) sc.variant = "pressure";
    double t_f = sc.t_f ? *sc.t_f : 1.0;
    double dt = sc.dt_is_h2 ? 5e-2 : sc.dt;
    StudyOptions opt = make_study_options(sc, jobs);
    opt.theta = 1;
    auto recs = sweep_b(sc.variant, sc.b_list, sc.n, dt, t_f, opt);

    std::ostringstream os;
    os << "b,completed,max_p,min_p,max_T,min_T,undershoot,message\n";
    for (const auto& r : recs) {
        os << format_g17(r.b) << "," << (r.ok ? 1 : 0) << ","
           << format_g17(r.max_p) << "," << format_g17(r.min_p) << ","
           << format_g17(r.max_T) << "," << format_g17(r.min_T) << ","
           << format_g17(r.undershoot) << "," << r.message << "\n";
    }
    write_text(dir / "sweep_b.csv", os.str());
    std::cout << os.str();

    Mesh m = build_structured(sc.n, sc.n, 0, 0, 1, 1);
    FeSpace ss = build_space(m, sc.deg_s, 1);
    for (size_t i = 0; i < recs.size(); ++i) {
        if (!recs[i].ok) continue;
        std::string tag = "_b" + std::to_string(i);
        write_field_csv(ss, recs[i].p, (dir / ("p" + tag + ".csv")).string());
        write_field_csv(ss, recs[i].T, (dir / ("T" + tag + ".csv")).string());
    }

    std::vector<std::string> notes;
    bool has_zero = false;
    for (const auto& r : recs) has_zero |= (r.b == 0.0 && r.ok);
    if (has_zero) {
        auto control = sweep_b(sc.variant, {0.0}, sc.n, dt, t_f, opt, true);
        bool same = control[0].ok;
        for (const auto& r : recs)
            if (r.b == 0.0 && same) {
                same = r.p.size() == control[0].p.size() &&
                       std::memcmp(r.p.data(), control[0].p.data(),
                                   r.p.size() * sizeof(double)) == 0 &&
                       std::memcmp(r.T.data(), control[0].T.data(),
                                   r.T.size() * sizeof(double)) == 0 &&
                       std::memcmp(r.u.data(), control[0].u.data(),
                                   r.u.size() * sizeof(double)) == 0;
            }
        notes.push_back(std::string("b=0 matches constant-permeability run "
                                    "bitwise: ") +
                        (same ? "yes" : "NO"));
    }
    Case c = make_case(sc);
    write_provenance(dir, "sweep-b", sc, c, notes);
    return 0;
}

bool report(const char* name, bool ok) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name << "\n";
    return ok;
}

int cmd_check() {
    bool all = true;

    // coefficient-matrix round trips for every built-in parameter set
    {
        bool ok = true;
        for (const char* spec : {"test1|", "test2|", "barry_mercer|pressure",
                                 "barry_mercer|temperature"}) {
            std::string s(spec);
            auto bar = s.find('|');
            Case c = build_case(s.substr(0, bar), s.substr(bar + 1));
            DerivedCoefficients dc = derive_coefficients(c.params);
            double err = (dc.A * dc.Ainv - Eigen::Matrix3d::Identity())
                             .cwiseAbs()
                             .maxCoeff();
            ok = ok && err < 1e-12 && dc.g6 > 0;
        }
        all &= report("coefficient inverse round trip, g6 > 0", ok);
    }

    // hand-integrated element matrices on the unit right triangle
    {
        Mesh m;
        m.vertices = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
        m.triangles = {{0, 1, 2}};
        m.h = std::sqrt(2.0);
        FeSpace s = build_space(m, 1, 1);
        Eigen::Matrix3d mass = Eigen::Matrix3d(assemble_mass(s, 4));
        Eigen::Matrix3d stiff = Eigen::Matrix3d(assemble_stiffness(s, 4));
        Eigen::Matrix3d mref;
        mref << 2, 1, 1, 1, 2, 1, 1, 1, 2;
        mref *= 0.5 / 12.0;
        Eigen::Matrix3d kref;
        kref << 1, -0.5, -0.5, -0.5, 0.5, 0, -0.5, 0, 0.5;
        bool ok = (mass - mref).cwiseAbs().maxCoeff() < 1e-13 &&
                  (stiff - kref).cwiseAbs().maxCoeff() < 1e-13;
        all &= report("element matrices match hand integration", ok);
    }

    // zero data keeps the solution at zero
    {
        Case c = build_case("conservation");
        c.f = [](const Vec2&, double) { return Vec2(0, 0); };
        c.g = [](const Vec2&, double) { return 0.0; };
        c.phi = [](const Vec2&, double) { return 0.0; };
        c.u0 = [](const Vec2&, double) { return Vec2(0, 0); };
        c.p0 = [](const Vec2&, double) { return 0.0; };
        c.T0 = [](const Vec2&, double) { return 0.0; };
        c.bc.u_data = [](const Vec2&, double) { return Vec2(0, 0); };
        c.bc.flux_p = [](const Vec2&, double, const Vec2&) { return 0.0; };
        c.bc.flux_T = [](const Vec2&, double, const Vec2&) { return 0.0; };
        c.t_f = 0.05;
        Mesh m = build_structured(4, 4, 0, 0, 1, 1);
        SolverSettings st;
        st.theta = 1;
        st.dt = 0.01;
        MafeaSolver sol(m, c, st);
        sol.run();
        bool ok = sol.state().u.norm() == 0.0 && sol.state().p.norm() == 0.0 &&
                  sol.state().T.norm() == 0.0;
        all &= report("zero data yields the zero solution", ok);
    }

    // discrete mean identity on a short pure-flux run
    {
        Case c = build_case("conservation");
        c.t_f = 0.05;
        Mesh m = build_structured(4, 4, 0, 0, 1, 1);
        SolverSettings st;
        st.theta = 1;
        st.dt = 0.01;
        MafeaSolver sol(m, c, st);
        int qd = sol.quad_degree();
        FeSpace ss = build_space(m, st.deg_s, 1);
        VectorXd fg = assemble_load(ss, c.g, 0.0, qd) +
                      assemble_flux_load(ss, c.bc.flux_p, 0.0,
                                         {true, true, true, true}, qd);
        double slope = fg.sum();
        double m0 = sol.history().front().mean_pw;
        sol.run();
        bool ok = true;
        for (const auto& s : sol.history())
            ok = ok && std::abs(s.mean_pw - m0 - s.t * slope) <=
                           1e-8 * std::max(1.0, std::abs(m0));
        all &= report("pressure-variable mean follows the source integral", ok);
    }

    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite element solver for coupled flow, heat and deformation "
                 "in a porous medium, with convergence and benchmark drivers"};
    std::string command;
    app.add_option("command", command,
                   "run | converge-space | converge-time | barry | sweep-b | "
                   "check")
        ->required();
    std::string config_path;
    app.add_option("--config", config_path, "sectioned key-value config file");
    int jobs = 1;
    app.add_option("--jobs", jobs, "worker threads for study rows");
    std::string out_dir;
    app.add_option("--out", out_dir, "output directory (overrides config)");
    bool reference_run = false;
    app.add_flag("--reference-run", reference_run,
                 "use the expensive 1/180 reference mesh");
    int snapshot_every = 0;
    app.add_option("--snapshot-every", snapshot_every,
                   "write field snapshots every K steps (run command)");
    CLI11_PARSE(app, argc, argv);

    try {
        if (command == "check") return cmd_check();

        RunConfig cfg;
        if (!config_path.empty()) cfg = parse_config(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        fs::path dir(cfg.out_dir);
        fs::create_directories(dir);
        write_text(dir / "config_echo.txt",
                   cfg.raw_text.empty() ? "# defaults (no config file given)\n"
                                        : cfg.raw_text);

        if (command == "run") return cmd_run(cfg, dir, snapshot_every);
        if (command == "converge-space")
            return cmd_converge_space(cfg, dir, jobs);
        if (command == "converge-time") return cmd_converge_time(cfg, dir, jobs);
        if (command == "barry") return cmd_barry(cfg, dir, jobs, reference_run);
        if (command == "sweep-b") return cmd_sweep_b(cfg, dir, jobs);
        std::cerr << "unknown command '" << command << "'\n"
                  << app.help() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
