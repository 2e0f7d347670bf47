#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsvolterra/bracketing.hpp"
#include "tsvolterra/errors.hpp"
#include "tsvolterra/expr.hpp"
#include "tsvolterra/solver.hpp"
#include "tsvolterra/timescale.hpp"

namespace tsvolterra {

/// One runnable problem description, stored as a JSON object with exactly
/// these keys (unknown keys are a config error):
///
///   name, timescale, f, k           required strings
///   v, w                            optional expression strings (bracket)
///   tol, max_iter, step_h           required numerics
///   lipschitz_L                     optional; estimated from k when absent
///   penalty_sign                    "corrected" (default) or "verbatim"
///   n_bracket_iters                 monotone levels, default 10
struct Scenario {
    std::string name;
    std::string timescale;
    std::string f;
    std::string k;
    std::optional<std::string> v;
    std::optional<std::string> w;
    double tol = 1e-10;
    int max_iter = 50;
    double step_h = 1e-3;
    std::optional<double> lipschitz_L;
    PenaltySign penalty_sign = PenaltySign::Corrected;
    int n_bracket_iters = 10;
};

inline const char* to_string(PenaltySign p) {
    return p == PenaltySign::Corrected ? "corrected" : "verbatim";
}

inline PenaltySign penalty_sign_from_string(const std::string& s) {
    if (s == "corrected") return PenaltySign::Corrected;
    if (s == "verbatim") return PenaltySign::Verbatim;
    throw ConfigError("penalty_sign must be \"corrected\" or \"verbatim\", got \"" + s + "\"");
}

namespace detail {

inline void validate_expression(const std::string& text, const std::string& field,
                                bool allow_s, bool allow_x) {
    Expr e = [&] {
        try {
            return Expr::parse(text);
        } catch (const SyntaxError& err) {
            throw ConfigError("field \"" + field + "\": " + err.what());
        } catch (const UnknownIdentifier& err) {
            throw ConfigError("field \"" + field + "\": " + err.what());
        }
    }();
    if (!allow_s && e.uses(Var::S))
        throw ConfigError("field \"" + field + "\" may not reference s");
    if (!allow_x && e.uses(Var::X))
        throw ConfigError("field \"" + field + "\" may not reference x");
}

}  // namespace detail

inline Scenario scenario_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("scenario must be a JSON object");

    static const std::set<std::string> known = {"name",  "timescale",   "f",
                                                "k",     "v",           "w",
                                                "tol",   "max_iter",    "step_h",
                                                "lipschitz_L", "penalty_sign", "n_bracket_iters"};
    for (const auto& item : j.items())
        if (!known.count(item.key())) throw ConfigError("unknown scenario field \"" + item.key() + "\"");

    auto require = [&](const char* key) -> const nlohmann::json& {
        if (!j.contains(key)) throw ConfigError(std::string("missing scenario field \"") + key + "\"");
        return j.at(key);
    };
    auto as_string = [&](const char* key) {
        const nlohmann::json& v = require(key);
        if (!v.is_string()) throw ConfigError(std::string("field \"") + key + "\" must be a string");
        return v.get<std::string>();
    };

    Scenario sc;
    sc.name = as_string("name");
    sc.timescale = as_string("timescale");
    sc.f = as_string("f");
    sc.k = as_string("k");
    if (j.contains("v")) sc.v = as_string("v");
    if (j.contains("w")) sc.w = as_string("w");

    try {
        sc.tol = require("tol").get<double>();
        sc.max_iter = require("max_iter").get<int>();
        sc.step_h = require("step_h").get<double>();
        if (j.contains("lipschitz_L")) sc.lipschitz_L = j.at("lipschitz_L").get<double>();
        if (j.contains("n_bracket_iters")) sc.n_bracket_iters = j.at("n_bracket_iters").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad numeric scenario field: ") + e.what());
    }
    if (j.contains("penalty_sign")) sc.penalty_sign = penalty_sign_from_string(as_string("penalty_sign"));

    if (sc.name.empty()) throw ConfigError("scenario name must not be empty");
    if (!(sc.tol > 0.0)) throw ConfigError("tol must be > 0");
    if (sc.max_iter < 1) throw ConfigError("max_iter must be >= 1");
    if (!(sc.step_h > 0.0)) throw ConfigError("step_h must be > 0");
    if (sc.lipschitz_L && !(*sc.lipschitz_L >= 0.0)) throw ConfigError("lipschitz_L must be >= 0");
    if (sc.n_bracket_iters < 1) throw ConfigError("n_bracket_iters must be >= 1");

    try {
        parse_timescale(sc.timescale);
    } catch (const SyntaxError& err) {
        throw ConfigError("field \"timescale\": " + std::string(err.what()));
    }
    detail::validate_expression(sc.f, "f", false, false);
    detail::validate_expression(sc.k, "k", true, true);
    if (sc.v) detail::validate_expression(*sc.v, "v", false, false);
    if (sc.w) detail::validate_expression(*sc.w, "w", false, false);
    return sc;
}

inline nlohmann::ordered_json scenario_to_json(const Scenario& sc) {
    nlohmann::ordered_json j;
    j["name"] = sc.name;
    j["timescale"] = sc.timescale;
    j["f"] = sc.f;
    j["k"] = sc.k;
    if (sc.v) j["v"] = *sc.v;
    if (sc.w) j["w"] = *sc.w;
    j["tol"] = sc.tol;
    j["max_iter"] = sc.max_iter;
    j["step_h"] = sc.step_h;
    if (sc.lipschitz_L) j["lipschitz_L"] = *sc.lipschitz_L;
    j["penalty_sign"] = to_string(sc.penalty_sign);
    j["n_bracket_iters"] = sc.n_bracket_iters;
    return j;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("scenario file " + path.string() + " is not valid JSON: " + e.what());
    }
    return scenario_from_json(j);
}

inline void save_scenario(const Scenario& sc, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write scenario file " + path.string());
    out << scenario_to_json(sc).dump(2) << "\n";
}

// ---- output writers -------------------------------------------------------

/// Doubles in CSV output are printed with 17 significant digits, which
/// round-trips the exact bit pattern through parsing.
inline std::string fmt17(double v) { return detail::dtos(v); }

inline void write_solution_csv(const std::filesystem::path& path, const GridFunction& x) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << "t,x\n";
    for (std::size_t i = 0; i < x.size(); ++i)
        out << fmt17(x.grid().node(i)) << "," << fmt17(x[i]) << "\n";
}

inline nlohmann::ordered_json solve_report_to_json(const SolveReport& rep) {
    nlohmann::ordered_json j;
    j["iterations"] = rep.iterations;
    j["deltas"] = rep.deltas;
    j["apriori_bounds"] = rep.apriori_bounds;
    j["residual"] = rep.residual;
    j["stop_reason"] = to_string(rep.stop_reason);
    j["L"] = rep.lipschitz_L;
    j["M"] = rep.initial_gap;
    return j;
}

inline void write_solve_report_json(const std::filesystem::path& path, const SolveReport& rep) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << solve_report_to_json(rep).dump(2) << "\n";
}

/// Bracket CSV: one row per node with the full chains in inequality order,
/// t, v0..vn, wn..w0, alpha, beta.
inline void write_bracket_csv(const std::filesystem::path& path, const BracketReport& rep) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << "t";
    for (int l = 0; l <= rep.n_iters; ++l) out << ",v" << l;
    for (int l = rep.n_iters; l >= 0; --l) out << ",w" << l;
    out << ",alpha,beta\n";
    const Grid& g = rep.alpha.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        out << fmt17(g.node(i));
        for (int l = 0; l <= rep.n_iters; ++l) out << "," << fmt17(rep.v_chain[l][i]);
        for (int l = rep.n_iters; l >= 0; --l) out << "," << fmt17(rep.w_chain[l][i]);
        out << "," << fmt17(rep.alpha[i]) << "," << fmt17(rep.beta[i]) << "\n";
    }
}

inline nlohmann::ordered_json bracket_report_to_json(const BracketReport& rep) {
    nlohmann::ordered_json j;
    j["n_iters"] = rep.n_iters;
    j["gap_per_level"] = rep.gaps_per_level();
    j["gap"] = rep.gap;
    nlohmann::ordered_json viols = nlohmann::ordered_json::array();
    for (const OrderingViolation& v : rep.ordering_violations) {
        nlohmann::ordered_json jv;
        jv["level"] = v.level;
        jv["node"] = v.node;
        jv["magnitude"] = v.magnitude;
        viols.push_back(jv);
    }
    j["ordering_violations"] = viols;
    return j;
}

inline void write_bracket_json(const std::filesystem::path& path, const BracketReport& rep) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << bracket_report_to_json(rep).dump(2) << "\n";
}

}  // namespace tsvolterra
