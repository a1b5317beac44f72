#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "model.hpp"

namespace tpe {

// Parsed, validated run description. The file format is sectioned key-value
// text: `[section]` headers, `key = value` lines, `#` comments. Unknown
// sections or keys are errors; all problems are reported together.
struct RunConfig {
    // [run]
    std::string case_name = "test1";
    std::string variant;

    // [elements]
    int deg_u = 2;
    int deg_s = 1;

    // [time]
    int theta = 0;
    bool dt_is_h2 = true;      // dt = h^2 unless an explicit dt is given
    double dt = 0.0;
    std::optional<double> t_f; // default: the case's own horizon

    // [mesh]
    int n = 8;
    std::vector<int> n_list = {4, 8, 16, 32};
    int ref_n = 90;

    // [model] partial physical-parameter overrides, applied over the case
    std::map<std::string, double> param_overrides;
    bool allow_degenerate = false;

    // [bc] Dirichlet mask overrides (4 flags each) when present
    std::optional<std::array<bool, 4>> u1_dirichlet, u2_dirichlet;
    std::optional<std::array<bool, 4>> p_dirichlet, T_dirichlet;

    // [solver]
    double linear_tol = 1e-10;
    double picard_tol = 1e-10;
    int picard_max = 50;
    int quad_degree = 0;
    bool init_by_projection = false;
    bool constant_permeability = false;

    // [study]
    bool relative = true;
    std::vector<double> dt_list;
    std::vector<double> b_list = {0.0, 1e-2, 1.0, 1e2};
    double locking_dt = 1e-3;
    double locking_t_f = 1e-2;
    int locking_n = 32;

    // [output]
    std::string out_dir = "out";

    std::string raw_text;      // exact file contents, echoed into outputs
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

} // namespace tpe
