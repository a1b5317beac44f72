// Release gate: runs the ten acceptance checks end to end and prints one
// verdict line per check, with the measured numbers underneath. Exits with
// the number of failed checks.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "tpe/assembly.hpp"
#include "tpe/cases.hpp"
#include "tpe/experiments.hpp"
#include "tpe/mesh.hpp"
#include "tpe/model.hpp"
#include "tpe/solver.hpp"

using namespace tpe;

namespace {

int g_fail = 0;

void verdict(int id, bool ok, const std::string& what) {
    std::printf("criterion %2d [%s] %s\n", id, ok ? "PASS" : "FAIL",
                what.c_str());
    std::fflush(stdout);
    if (!ok) ++g_fail;
}

void detail(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line))
        std::printf("              | %s\n", line.c_str());
    std::fflush(stdout);
}

void run_criterion(int id, const std::function<void()>& body) {
    try {
        body();
    } catch (const std::exception& e) {
        verdict(id, false, std::string("aborted: ") + e.what());
    }
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5g", v);
    return buf;
}

struct RateWindow {
    const char* name;
    int col;
    double mid, half;
};

// last-row rates of `tbl` against the windows; appends a report to `os`
bool check_rate_windows(const ErrorTable& tbl,
                        const std::vector<RateWindow>& wins,
                        std::ostringstream& os) {
    bool ok = true;
    const std::vector<double>& last = tbl.rates.back();
    for (const auto& w : wins) {
        bool in = std::abs(last[w.col] - w.mid) <= w.half;
        ok = ok && in;
        os << w.name << "=" << num(last[w.col]) << " (want " << num(w.mid)
           << "+-" << num(w.half) << (in ? ")" : ") <-- out of window");
        os << "  ";
    }
    return ok;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

StudyOptions base_options() {
    StudyOptions o;
    o.jobs = 4;
    return o;
}

} // namespace

// 1: smooth-solution spatial study, P2-P1, sequential stepper, dt = h^2
static void criterion_1() {
    auto t0 = std::chrono::steady_clock::now();
    Case c = build_case("test1");
    StudyOptions opt = base_options();
    ErrorTable tbl =
        spatial_convergence(c, {4, 8, 16, 32}, true, 0.0, true, opt);
    double elapsed = seconds_since(t0);

    std::ostringstream os;
    bool rates_ok = check_rate_windows(tbl,
                                       {{"u-L2", 0, 3.0, 0.2},
                                        {"u-H1", 1, 2.0, 0.15},
                                        {"p-L2", 2, 2.0, 0.2},
                                        {"p-H1", 3, 1.0, 0.1},
                                        {"T-L2", 4, 2.0, 0.1},
                                        {"T-H1", 5, 1.0, 0.1}},
                                       os);
    os << "\n";

    // published magnitudes for the finest mesh; ours may not be worse than
    // 2x of them (smaller is fine: our u-L2 runs ~12x below the published
    // value, which itself breaks the O(h) L2/H1 scaling its own H1 column
    // implies, so the bound is a ceiling only)
    const double published[6] = {1.0622e-04, 5.5480e-04, 9.5594e-04,
                                 3.6632e-02, 1.8260e-03, 3.6393e-02};
    bool mags_ok = true;
    os << "finest-row magnitude ratios vs published (ceiling 2): ";
    for (int c2 = 0; c2 < 6; ++c2) {
        double ratio = tbl.errors.back()[c2] / published[c2];
        bool in = ratio <= 2.0;
        mags_ok = mags_ok && in;
        os << num(ratio) << (in ? " " : "(out) ");
    }
    os << "\n";
    bool time_ok = elapsed <= 300.0;
    os << "elapsed " << num(elapsed) << " s (limit 300)\n" << tbl.csv();
    verdict(1, rates_ok && mags_ok && time_ok,
            "P2-P1 spatial rates, magnitudes at most 2x published, in time");
    detail(os.str());
}

// 2: the same ladder runs with equal-order pairs
static void criterion_2() {
    Case c = build_case("test1");
    StudyOptions opt = base_options();
    opt.deg_u = 1;
    opt.deg_s = 1;
    ErrorTable t11 =
        spatial_convergence(c, {4, 8, 16, 32}, true, 0.0, true, opt);
    std::ostringstream os;
    bool ok11 = check_rate_windows(
        t11, {{"u-L2", 0, 2.0, 0.2}, {"u-H1", 1, 1.0, 0.1}}, os);
    os << "\n" << t11.csv();

    opt.deg_u = 2;
    opt.deg_s = 2;
    ErrorTable t22 =
        spatial_convergence(c, {4, 8, 16, 32}, true, 0.0, true, opt);
    bool ok22 = check_rate_windows(
        t22, {{"u-L2", 0, 3.0, 0.2}, {"T-L2", 4, 3.0, 0.3}}, os);
    os << "\n" << t22.csv();

    verdict(2, ok11 && ok22, "P1-P1 and P2-P2 ladders reach the same orders");
    detail(os.str());
}

// 3: step-halving study on a constant-permeability configuration
static void criterion_3() {
    PhysicalParams pp = build_case("test1").params;
    pp.b = 0.0;
    pp.E = 1.0;
    pp.nu = 0.25;
    pp.alpha = 1.0;
    pp.beta = 1.0;
    pp.a0 = 2.0;
    pp.b0 = 0.5;
    pp.c0 = 2.0;
    pp.k0 = 1.0;
    pp.Theta = 1.0;
    Case c = build_case("test1", "", pp);
    c.t_f = 1e-3;
    StudyOptions opt = base_options();
    ErrorTable tbl =
        temporal_convergence(c, 8, {1e-4, 5e-5, 2.5e-5, 1.25e-5}, opt);

    bool ok = true;
    std::ostringstream os;
    for (size_t r = 1; r < tbl.rates.size(); ++r)
        for (size_t f = 0; f < tbl.fields.size(); ++f) {
            if (!(tbl.rates[r][f] >= 0.9)) ok = false;
        }
    os << "all Richardson rates >= 0.9 required; the literature quotes ~2 "
          "for this study, logged here without being asserted\n"
       << tbl.csv();
    verdict(3, ok, "backward-Euler temporal rates hold the first-order floor");
    detail(os.str());
}

// 4 and 9a share one pure-Neumann coupled run
static void criteria_4_and_9a() {
    Case c = build_case("conservation");
    c.t_f = 0.1;
    Mesh m = build_structured(8, 8);
    SolverSettings st;
    st.theta = 1;
    st.dt = 0.01;
    MafeaSolver s(m, c, st);
    const FeSpace& ss = s.scalar_space();
    int qd = s.quad_degree();
    double rate_pw = assemble_load(ss, c.g, 0.0, qd).sum() +
                     assemble_flux_load(ss, c.bc.flux_p, 0.0,
                                        {true, true, true, true}, qd).sum();
    double rate_sg = assemble_load(ss, c.phi, 0.0, qd).sum() +
                     assemble_flux_load(ss, c.bc.flux_T, 0.0,
                                        {true, true, true, true}, qd).sum();
    s.run();

    double mean_pw0 = s.history()[0].mean_pw;
    double mean_sg0 = s.history()[0].mean_sg;
    double tol_pw = 1e-8 * std::max(1.0, std::abs(mean_pw0));
    double tol_sg = 1e-8 * std::max(1.0, std::abs(mean_sg0));
    double worst_pw = 0.0, worst_sg = 0.0;
    int max_iters = 0;
    for (const auto& h : s.history()) {
        worst_pw = std::max(worst_pw,
                            std::abs(h.mean_pw - mean_pw0 - h.t * rate_pw));
        worst_sg = std::max(worst_sg,
                            std::abs(h.mean_sg - mean_sg0 - h.t * rate_sg));
        max_iters = std::max(max_iters, h.picard_iters);
    }
    bool cons_ok = worst_pw <= tol_pw && worst_sg <= tol_sg;
    verdict(4, cons_ok, "discrete means follow the source/flux budget");
    std::ostringstream os4;
    os4 << "pure-Neumann run, 10 steps: worst pseudo-pressure drift "
        << num(worst_pw) << " (tol " << num(tol_pw)
        << "), worst pseudo-entropy drift " << num(worst_sg) << " (tol "
        << num(tol_sg) << ")";
    detail(os4.str());

    verdict(9, max_iters <= 2,
            "(part a) linear coupled steps settle in at most two sweeps");
    std::ostringstream os9;
    os9 << "constant-permeability coupled run: max sweeps per step "
        << max_iters;
    detail(os9.str());
}

// 5: coefficient matrix times its derived inverse, all built-in sets
static void criterion_5() {
    struct Named {
        const char* label;
        PhysicalParams p;
    };
    std::vector<Named> sets = {
        {"smooth", build_case("test1").params},
        {"polynomial", build_case("test2").params},
        {"pure-neumann", build_case("conservation").params},
        {"pulse-pressure", build_case("barry_mercer", "pressure").params},
        {"pulse-temperature",
         build_case("barry_mercer", "temperature").params},
    };
    bool ok = true;
    std::ostringstream os;
    for (const auto& s : sets) {
        DerivedCoefficients dc = derive_coefficients(s.p);
        double err = (dc.A * dc.Ainv - Eigen::Matrix3d::Identity())
                         .cwiseAbs()
                         .maxCoeff();
        bool in = err <= 1e-12 && dc.g6 > 0;
        ok = ok && in;
        os << s.label << ": |A*Ainv - I|=" << num(err) << " g6=" << num(dc.g6)
           << (in ? "\n" : "  <-- fail\n");
    }
    verdict(5, ok, "variable-change inverse is exact and keeps g6 positive");
    detail(os.str());
}

// 6: hand-integrated element matrices on the unit right triangle
static void criterion_6() {
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
    double em = (mass - mref).cwiseAbs().maxCoeff();
    double ek = (stiff - kref).cwiseAbs().maxCoeff();
    verdict(6, em <= 1e-13 && ek <= 1e-13,
            "P1 element matrices match hand integration");
    detail("mass dev " + num(em) + ", stiffness dev " + num(ek) +
           " (tol 1e-13)");
}

// 7: pressure-pulse benchmark, primal pair against the reformulated pair
static void criterion_7() {
    Case c = build_case("barry_mercer", "pressure");
    c.t_f = 5e-8;
    StudyOptions opt = base_options();
    LockingReport rep = locking_comparison(c, 16, 1e-8, opt);
    bool positive = rep.undershoot_classical > 0.0;
    bool separated =
        rep.undershoot_classical >= 10.0 * rep.undershoot_mafea;
    verdict(7, positive && separated,
            "primal undershoot positive and at least 10x the reformulated one");
    std::ostringstream os;
    os << "undershoot primal " << num(rep.undershoot_classical)
       << ", reformulated " << num(rep.undershoot_mafea) << ", ratio "
       << num(rep.undershoot_mafea > 0
                  ? rep.undershoot_classical / rep.undershoot_mafea
                  : std::numeric_limits<double>::infinity())
       << " (need >= 10)\n";
    os << "min pressure primal " << num(rep.min_p_classical)
       << ", reformulated " << num(rep.min_p_mafea) << "\n";
    os << "both discretizations impose the discontinuous pulse trace "
          "exactly, so they share the same interpolation-driven dip; see "
          "the self-convergence study for the quantitative agreement";
    detail(os.str());
}

// 8: pulse benchmark self-convergence against a fine reference
static void criterion_8() {
    auto t0 = std::chrono::steady_clock::now();
    Case c = build_case("barry_mercer", "pressure");
    c.t_f = 1.0;
    StudyOptions opt = base_options();
    opt.theta = 1;
    opt.picard_tol = 1e-8;
    ErrorTable tbl = self_convergence(c, {4, 8, 16}, 90, 0.1, opt);

    bool ok = true;
    std::ostringstream os;
    for (int col : {0, 2, 4}) { // the L2 columns of u, p, T
        for (size_t r = 1; r < tbl.errors.size(); ++r) {
            bool dec = tbl.errors[r][col] < tbl.errors[r - 1][col];
            bool pos = tbl.rates[r][col] > 0.0;
            if (!(dec && pos)) {
                ok = false;
                os << tbl.fields[col] << " fails to decrease at row " << r
                   << "\n";
            }
        }
    }
    os << "L2 errors must fall monotonically with positive rates; the H1 "
          "columns are reported unasserted (the pulse data is too rough for "
          "H1 convergence right at the boundary)\n"
       << tbl.csv() << "elapsed " << num(seconds_since(t0)) << " s";
    verdict(8, ok, "pulse benchmark L2 self-convergence is monotone");
    detail(os.str());
}

// 9b: nonlinear permeability on the smooth case stays inside the sweep budget
static void criterion_9b() {
    PhysicalParams pp = build_case("test1").params;
    pp.b = 1.0;
    Case c = build_case("test1", "", pp);
    Mesh m = build_structured(8, 8);
    SolverSettings st;
    st.theta = 1;
    st.dt = 1.0 / 64.0;
    st.picard_tol = 1e-10;
    st.picard_max = 50;
    MafeaSolver s(m, c, st);
    s.run();
    int max_iters = 0;
    double worst_resid = 0.0;
    for (const auto& h : s.history()) {
        max_iters = std::max(max_iters, h.picard_iters);
        worst_resid = std::max(worst_resid, h.picard_residual);
    }
    bool ok = max_iters <= 50 && worst_resid <= 1e-10;
    verdict(9, ok, "(part b) exponential-permeability sweeps stay in budget");
    std::ostringstream os;
    os << "b=1 coupled run, 64 steps: max sweeps " << max_iters
       << " (limit 50), worst accepted update " << num(worst_resid)
       << " (tol 1e-10)";
    detail(os.str());
}

// 10: permeability-coupling sweep on the top-edge pulse benchmark
static void criterion_10() {
    StudyOptions opt = base_options();
    opt.theta = 1;
    opt.picard_tol = 1e-8;
    std::vector<double> bs = {0.0, 1e-2, 1.0, 1e2};
    auto recs = sweep_b("", bs, 16, 1e-2, 0.1, opt);
    auto rec0 = sweep_b("", {0.0}, 16, 1e-2, 0.1, opt, true);

    std::ostringstream os;
    bool all_ok = true;
    for (const auto& r : recs) {
        os << "b=" << num(r.b) << ": " << (r.ok ? "completed" : r.message)
           << "  max_p=" << num(r.max_p) << " min_p=" << num(r.min_p)
           << " max_T=" << num(r.max_T) << " undershoot=" << num(r.undershoot)
           << "\n";
        all_ok = all_ok && r.ok;
    }

    bool bitwise = rec0[0].ok && recs[0].ok &&
                   (recs[0].u - rec0[0].u).lpNorm<Eigen::Infinity>() == 0.0 &&
                   (recs[0].p - rec0[0].p).lpNorm<Eigen::Infinity>() == 0.0 &&
                   (recs[0].T - rec0[0].T).lpNorm<Eigen::Infinity>() == 0.0;
    os << "b=0 vs constant-model run bitwise identical: "
       << (bitwise ? "yes" : "NO") << "\n";

    double lo = recs[0].max_p, hi = recs[0].max_p;
    for (const auto& r : recs) {
        lo = std::min(lo, r.max_p);
        hi = std::max(hi, r.max_p);
    }
    double spread = hi - lo;
    bool varies = spread > 1e-6 * std::max(1.0, std::abs(recs[0].max_p));
    os << "peak-pressure spread across b: " << num(spread);
    verdict(10, all_ok && bitwise && varies,
            "coupling sweep completes, b=0 is bitwise stable, summaries vary");
    detail(os.str());
}

int main() {
    std::printf("acceptance checks (this takes several minutes)\n");
    std::fflush(stdout);
    run_criterion(1, criterion_1);
    run_criterion(2, criterion_2);
    run_criterion(3, criterion_3);
    run_criterion(4, criteria_4_and_9a); // also prints the criterion 9 part a line
    run_criterion(5, criterion_5);
    run_criterion(6, criterion_6);
    run_criterion(7, criterion_7);
    run_criterion(8, criterion_8);
    run_criterion(9, criterion_9b);
    run_criterion(10, criterion_10);
    std::printf("acceptance: %d failed\n", g_fail);
    return g_fail;
}
