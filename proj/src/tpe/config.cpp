#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "cases.hpp"
#include "errors.hpp"

namespace tpe {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

const std::map<std::string, std::set<std::string>> kSchema = {
    {"run", {"case", "variant"}},
    {"elements", {"deg_u", "deg_s"}},
    {"time", {"theta", "dt", "t_f"}},
    {"mesh", {"n", "n_list", "ref_n"}},
    {"model",
     {"a0", "b0", "c0", "alpha", "beta", "a", "b", "k0", "theta_cond", "E",
      "nu", "allow_degenerate"}},
    {"bc", {"u1_dirichlet", "u2_dirichlet", "p_dirichlet", "T_dirichlet"}},
    {"solver",
     {"linear_tol", "picard_tol", "picard_max", "quad_degree",
      "init_by_projection", "constant_permeability"}},
    {"study",
     {"relative", "dt_list", "b_list", "locking_dt", "locking_t_f",
      "locking_n"}},
    {"output", {"dir"}},
};

struct Parser {
    std::vector<std::string> errors;

    void fail(int line, const std::string& msg) {
        errors.push_back("line " + std::to_string(line) + ": " + msg);
    }

    bool parse_double(int line, const std::string& key, const std::string& v,
                      double& out) {
        try {
            size_t pos = 0;
            out = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return true;
        } catch (...) {
            fail(line, key + ": expected a number, got '" + v + "'");
            return false;
        }
    }

    bool parse_int(int line, const std::string& key, const std::string& v,
                   int& out) {
        try {
            size_t pos = 0;
            out = std::stoi(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return true;
        } catch (...) {
            fail(line, key + ": expected an integer, got '" + v + "'");
            return false;
        }
    }

    bool parse_bool(int line, const std::string& key, const std::string& v,
                    bool& out) {
        if (v == "1" || v == "true" || v == "yes") {
            out = true;
            return true;
        }
        if (v == "0" || v == "false" || v == "no") {
            out = false;
            return true;
        }
        fail(line, key + ": expected a boolean (0/1/true/false), got '" + v + "'");
        return false;
    }

    static std::string decomma(std::string s) {
        std::replace(s.begin(), s.end(), ',', ' ');
        return s;
    }

    template <class T, class F>
    bool parse_list(int line, const std::string& key, const std::string& v,
                    std::vector<T>& out, F&& one) {
        std::istringstream is(decomma(v));
        std::string tok;
        std::vector<T> vals;
        while (is >> tok) {
            T x;
            if (!one(line, key, tok, x)) return false;
            vals.push_back(x);
        }
        if (vals.empty()) {
            fail(line, key + ": expected a space-separated list");
            return false;
        }
        out = std::move(vals);
        return true;
    }

    bool parse_mask(int line, const std::string& key, const std::string& v,
                    std::array<bool, 4>& out) {
        std::istringstream is(decomma(v));
        std::string tok;
        int i = 0;
        while (is >> tok) {
            bool b;
            if (i >= 4 || !parse_bool(line, key, tok, b)) {
                fail(line, key + ": expected exactly four boolean flags");
                return false;
            }
            out[i++] = b;
        }
        if (i != 4) {
            fail(line, key + ": expected exactly four boolean flags");
            return false;
        }
        return true;
    }
};

void validate_semantics(RunConfig& c, Parser& p) {
    if (c.deg_u != 1 && c.deg_u != 2)
        p.errors.push_back("elements.deg_u must be 1 or 2");
    if (c.deg_s != 1 && c.deg_s != 2)
        p.errors.push_back("elements.deg_s must be 1 or 2");
    if (c.theta != 0 && c.theta != 1)
        p.errors.push_back("time.theta must be 0 or 1");
    if (!c.dt_is_h2 && !(c.dt > 0))
        p.errors.push_back("time.dt must be positive");
    if (c.t_f && !(*c.t_f > 0)) p.errors.push_back("time.t_f must be positive");
    if (c.n < 1) p.errors.push_back("mesh.n must be at least 1");
    if (c.ref_n < 2) p.errors.push_back("mesh.ref_n must be at least 2");
    for (int n : c.n_list)
        if (n < 1) p.errors.push_back("mesh.n_list entries must be at least 1");
    static const std::set<std::string> cases = {
        "test1", "test2", "conservation", "barry_mercer", "b_sweep"};
    if (!cases.count(c.case_name))
        p.errors.push_back("run.case must be one of test1, test2, "
                           "conservation, barry_mercer, b_sweep");
    if (!c.variant.empty() && c.variant != "pressure" &&
        c.variant != "temperature")
        p.errors.push_back("run.variant must be pressure or temperature");
    if (c.picard_max < 1) p.errors.push_back("solver.picard_max must be >= 1");
    if (!(c.linear_tol > 0)) p.errors.push_back("solver.linear_tol must be > 0");
    if (!(c.picard_tol > 0)) p.errors.push_back("solver.picard_tol must be > 0");

    // Physical-parameter overrides are checked on the merged set so the
    // failure names the actual bound, e.g. the Poisson-ratio range.
    if (!c.param_overrides.empty() && cases.count(c.case_name)) {
        try {
            Case base = build_case(c.case_name, c.variant);
            PhysicalParams prm = base.params;
            for (const auto& [k, v] : c.param_overrides) {
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
            for (const auto& e : prm.validate(c.allow_degenerate))
                p.errors.push_back("model: " + e);
        } catch (const std::exception& e) {
            p.errors.push_back(std::string("model: ") + e.what());
        }
    }
}

} // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig c;
    c.raw_text = text;
    Parser p;
    std::istringstream is(text);
    std::string rawline, section;
    int lineno = 0;
    while (std::getline(is, rawline)) {
        ++lineno;
        std::string line = rawline;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                p.fail(lineno, "malformed section header '" + line + "'");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            if (!kSchema.count(section))
                p.fail(lineno, "unknown section '" + section + "'");
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos) {
            p.fail(lineno, "expected 'key = value', got '" + line + "'");
            continue;
        }
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (section.empty()) {
            p.fail(lineno, "key '" + key + "' appears before any section");
            continue;
        }
        auto sit = kSchema.find(section);
        if (sit == kSchema.end()) continue; // section error already recorded
        if (!sit->second.count(key)) {
            p.fail(lineno, "unknown key '" + key + "' in section [" + section + "]");
            continue;
        }

        auto num = [&](double& out) { p.parse_double(lineno, key, val, out); };
        if (section == "run") {
            if (key == "case") c.case_name = val;
            else c.variant = val;
        } else if (section == "elements") {
            if (key == "deg_u") p.parse_int(lineno, key, val, c.deg_u);
            else p.parse_int(lineno, key, val, c.deg_s);
        } else if (section == "time") {
            if (key == "theta") p.parse_int(lineno, key, val, c.theta);
            else if (key == "dt") {
                if (val == "h2") {
                    c.dt_is_h2 = true;
                } else if (p.parse_double(lineno, key, val, c.dt)) {
                    c.dt_is_h2 = false;
                }
            } else {
                double v;
                if (p.parse_double(lineno, key, val, v)) c.t_f = v;
            }
        } else if (section == "mesh") {
            if (key == "n") p.parse_int(lineno, key, val, c.n);
            else if (key == "ref_n") p.parse_int(lineno, key, val, c.ref_n);
            else
                p.parse_list<int>(lineno, key, val, c.n_list,
                                  [&](int l, const std::string& k,
                                      const std::string& v, int& o) {
                                      return p.parse_int(l, k, v, o);
                                  });
        } else if (section == "model") {
            if (key == "allow_degenerate")
                p.parse_bool(lineno, key, val, c.allow_degenerate);
            else {
                double v;
                if (p.parse_double(lineno, key, val, v))
                    c.param_overrides[key] = v;
            }
        } else if (section == "bc") {
            std::array<bool, 4> m;
            if (p.parse_mask(lineno, key, val, m)) {
                if (key == "u1_dirichlet") c.u1_dirichlet = m;
                else if (key == "u2_dirichlet") c.u2_dirichlet = m;
                else if (key == "p_dirichlet") c.p_dirichlet = m;
                else c.T_dirichlet = m;
            }
        } else if (section == "solver") {
            if (key == "linear_tol") num(c.linear_tol);
            else if (key == "picard_tol") num(c.picard_tol);
            else if (key == "picard_max") p.parse_int(lineno, key, val, c.picard_max);
            else if (key == "quad_degree") p.parse_int(lineno, key, val, c.quad_degree);
            else if (key == "init_by_projection")
                p.parse_bool(lineno, key, val, c.init_by_projection);
            else p.parse_bool(lineno, key, val, c.constant_permeability);
        } else if (section == "study") {
            if (key == "relative") p.parse_bool(lineno, key, val, c.relative);
            else if (key == "dt_list")
                p.parse_list<double>(lineno, key, val, c.dt_list,
                                     [&](int l, const std::string& k,
                                         const std::string& v, double& o) {
                                         return p.parse_double(l, k, v, o);
                                     });
            else if (key == "b_list")
                p.parse_list<double>(lineno, key, val, c.b_list,
                                     [&](int l, const std::string& k,
                                         const std::string& v, double& o) {
                                         return p.parse_double(l, k, v, o);
                                     });
            else if (key == "locking_dt") num(c.locking_dt);
            else if (key == "locking_t_f") num(c.locking_t_f);
            else p.parse_int(lineno, key, val, c.locking_n);
        } else if (section == "output") {
            c.out_dir = val;
        }
    }

    validate_semantics(c, p);
    if (!p.errors.empty()) {
        std::string msg = "configuration errors:";
        for (const auto& e : p.errors) msg += "\n  - " + e;
        throw ConfigError(msg);
    }
    return c;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

} // namespace tpe
