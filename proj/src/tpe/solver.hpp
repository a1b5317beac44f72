#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/SparseLU>

#include "assembly.hpp"

namespace tpe {

struct SolverSettings {
    int theta = 0;            // 0: sequential step, 1: coupled step with Picard
    double dt = 1e-2;
    double t_f = 1.0;
    int deg_u = 2;            // displacement degree
    int deg_s = 1;            // degree shared by the scalar fields
    int quad_degree = 0;      // 0 picks 2*max(deg)+2
    double linear_tol = 1e-10;
    double picard_tol = 1e-10;
    int picard_max = 50;
    bool init_by_projection = false;
    bool constant_permeability = false;
    bool allow_degenerate = false;
};

struct StepStats {
    int n = 0;
    double t = 0.0;
    int picard_iters = 0;
    double picard_residual = 0.0;
    double mean_pw = 0.0;     // (pw_h, 1)
    double mean_sg = 0.0;     // (sg_h, 1)
    double energy = 0.0;
    double undershoot_p = 0.0; // integral of the negative part of p_h
    double min_p = 0.0;        // smallest nodal value of p_h
};

// Direct solve with residual verification.
VectorXd solve_linear(const SpMat& a, const VectorXd& rhs, double tol,
                      const std::string& what);

struct MafeaState {
    VectorXd u;               // vector space
    VectorXd tau, pw, sg;     // scalar space
    VectorXd p, T, q;         // recovered, scalar space
};

// Time stepper for the reformulated system: a generalized Stokes block in
// (u, tau) coupled to two reaction-diffusion equations in (pw, sg), with the
// physical fields recovered nodally through the coefficient inverse.
class MafeaSolver {
  public:
    MafeaSolver(const Mesh& mesh, const Case& c, const SolverSettings& st);

    void advance();           // one backward-Euler step
    void run(const std::function<void(const MafeaSolver&)>& per_step = {});

    const MafeaState& state() const { return st_; }
    const FeSpace& u_space() const { return su_; }
    const FeSpace& scalar_space() const { return ss_; }
    const DerivedCoefficients& coefficients() const { return dc_; }
    const Case& problem() const { return case_; }
    const SolverSettings& settings() const { return set_; }
    double time() const { return n_ * set_.dt; }
    int step() const { return n_; }
    int n_steps() const { return nsteps_; }
    int quad_degree() const { return qdeg_; }
    const std::vector<StepStats>& history() const { return hist_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

  private:
    void advance_sequential();
    void advance_coupled();
    SpMat permeability_stiffness(const VectorXd& tau_coeffs) const;
    VectorXd traction_load(double t, const VectorXd& p_lag,
                           const VectorXd& T_lag) const;
    void recover(const VectorXd& pw_used, const VectorXd& sg_used);
    void record_stats(double t, int iters, double resid, const VectorXd& load_f,
                      const VectorXd& load_f1);

    Case case_;
    SolverSettings set_;
    DerivedCoefficients dc_;
    PermeabilityLaw law_;
    FeSpace su_, ss_;
    int qdeg_ = 0;
    int nu_ = 0, ns_ = 0;
    std::array<bool, 4> nat_u1_{}, nat_u2_{}, nat_p_{}, nat_T_{};

    SpMat Ms_, K1_, KTh_, Ku_, B_, BT_;
    VectorXd wint_;           // basis integrals of the scalar space

    SpMat stokes_full_;       // theta=0 block, kept unconstrained for rhs work
    SpMat stokes_elim_;       // constrained copy backing the factorization
    Eigen::SparseLU<SpMat> stokes_lu_;

    MafeaState st_;
    int n_ = 0, nsteps_ = 0;
    bool stall_warned_ = false;
    std::vector<StepStats> hist_;
    std::vector<std::string> warnings_;
};

struct ClassicalState {
    VectorXd u, p, T;
};

// Backward-Euler stepper for the primal three-field form, with the
// permeability frozen at the previous step's state. Used as the locking
// comparison baseline.
class ClassicalSolver {
  public:
    ClassicalSolver(const Mesh& mesh, const Case& c, const SolverSettings& st);

    void advance();
    void run(const std::function<void(const ClassicalSolver&)>& per_step = {});

    const ClassicalState& state() const { return st_; }
    const FeSpace& u_space() const { return su_; }
    const FeSpace& scalar_space() const { return ss_; }
    const Case& problem() const { return case_; }
    double time() const { return n_ * set_.dt; }
    int step() const { return n_; }
    int n_steps() const { return nsteps_; }
    int quad_degree() const { return qdeg_; }
    const std::vector<StepStats>& history() const { return hist_; }

  private:
    VectorXd traction_load(double t) const;
    void record_stats(double t);

    Case case_;
    SolverSettings set_;
    double lambda_ = 0.0, mu_ = 0.0;
    PermeabilityLaw law_;
    FeSpace su_, ss_;
    int qdeg_ = 0;
    int nu_ = 0, ns_ = 0;
    std::array<bool, 4> nat_u1_{}, nat_u2_{}, nat_p_{}, nat_T_{};

    SpMat Ms_, K1_, KTh_, Ku_, Kdd_, B_, BT_;

    ClassicalState st_;
    int n_ = 0, nsteps_ = 0;
    std::vector<StepStats> hist_;
};

} // namespace tpe
