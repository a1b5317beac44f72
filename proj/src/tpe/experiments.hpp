#pragma once

#include <string>
#include <vector>

#include "solver.hpp"

namespace tpe {

// %.17g, round-trip exact.
std::string format_g17(double v);

struct StudyOptions {
    int deg_u = 2;
    int deg_s = 1;
    int theta = 0;
    int jobs = 1;
    double linear_tol = 1e-10;
    double picard_tol = 1e-10;
    int picard_max = 50;
};

// One error/rate table: column k of `errors` holds the measurement named
// fields[k]; rates[k] = log2(e_prev/e_cur), NaN on the first row.
struct ErrorTable {
    std::string x_name;          // "h" or "dt"
    std::vector<double> x;
    std::vector<std::string> fields;
    std::vector<std::vector<double>> errors;
    std::vector<std::vector<double>> rates;

    void compute_rates();
    std::string csv() const;     // header: x, <field>, CR, <field>, CR, ...
};

double rate_between(double e_coarse, double e_fine);

// Runs the stepper on meshes 1/n for n in mesh_n and tabulates errors of
// u, p, T in L2 and H1 against the exact solution at t_f. dt = h^2 when
// dt_h2 is set, otherwise the fixed dt. Relative errors divide by the exact
// norms.
ErrorTable spatial_convergence(const Case& c, const std::vector<int>& mesh_n,
                               bool dt_h2, double dt, bool relative,
                               const StudyOptions& opt);

// Richardson study on a fixed mesh: row i holds
// ||X(dts[i]) - X(dts[i+1])||_{L2} per field; rates between consecutive rows.
ErrorTable temporal_convergence(const Case& c, int mesh_n,
                                const std::vector<double>& dts,
                                const StudyOptions& opt);

struct LockingReport {
    double undershoot_classical = 0.0;
    double undershoot_mafea = 0.0;
    double min_p_classical = 0.0;
    double min_p_mafea = 0.0;
    VectorXd p_classical, p_mafea;   // final pressure snapshots (scalar space)
};

// Same case, mesh and step for both discretizations; t_f taken from the case.
LockingReport locking_comparison(const Case& c, int mesh_n, double dt,
                                 const StudyOptions& opt);

// Self-convergence against a fine reference mesh 1/ref_n sharing the same dt;
// absolute L2/H1 errors of u, p, T at t_f sampled on each coarse mesh.
ErrorTable self_convergence(const Case& c, const std::vector<int>& mesh_n,
                            int ref_n, double dt, const StudyOptions& opt);

struct SweepRecord {
    double b = 0.0;
    bool ok = false;
    std::string message;
    double max_p = 0.0, min_p = 0.0, max_T = 0.0, min_T = 0.0;
    double undershoot = 0.0;
    VectorXd u, p, T;                // final fields
};

// Pulse-on-top benchmark swept over the permeability coupling coefficient.
// A failing value is reported in-place without aborting the others.
std::vector<SweepRecord> sweep_b(const std::string& variant,
                                 const std::vector<double>& b_values,
                                 int mesh_n, double dt, double t_f,
                                 const StudyOptions& opt,
                                 bool constant_model = false);

// Evaluate a field of a build_structured(n,n) unit-square space at x.
FieldSample eval_structured(const FeSpace& s, const VectorXd& coeffs, int n,
                            const Vec2& x);

// Run tasks with at most `jobs` worker threads; results must be written to
// preassigned slots.
void run_parallel(std::vector<std::function<void()>>& tasks, int jobs);

} // namespace tpe
