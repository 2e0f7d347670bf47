// tsvolterra: scenario-driven solver for Volterra integral dynamic equations
// on bounded time scales.
//
// Exit codes: 0 success, 1 mathematical failure (non-convergence, failed
// verification, ordering violations), 2 usage/config errors.

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tsvolterra/scenario.hpp"
#include "tsvolterra/tsvolterra.hpp"

namespace fs = std::filesystem;
using namespace tsvolterra;

namespace {

struct CommonOpts {
    std::string scenario_path;
    std::string out_dir = ".";
    bool strict_monotone = false;
    std::string penalty_sign_override;
};

/// Everything a command needs, materialized from a scenario file.
struct RunContext {
    Scenario sc;
    TimeScale ts;
    std::shared_ptr<const Grid> grid;
    Expr f;
    Expr k;
    std::optional<GridFunction> v;
    std::optional<GridFunction> w;
    double lipschitz = 0.0;
    bool lipschitz_estimated = false;

    SolveConfig solve_config() const {
        SolveConfig cfg;
        cfg.tol = sc.tol;
        cfg.max_iter = sc.max_iter;
        cfg.step_h = sc.step_h;
        cfg.lipschitz_L = lipschitz;
        return cfg;
    }
};

RunContext make_context(const CommonOpts& opts) {
    Scenario sc = load_scenario(opts.scenario_path);
    if (!opts.penalty_sign_override.empty())
        sc.penalty_sign = penalty_sign_from_string(opts.penalty_sign_override);

    RunContext ctx{sc,
                   parse_timescale(sc.timescale),
                   nullptr,
                   Expr::parse(sc.f),
                   Expr::parse(sc.k),
                   std::nullopt,
                   std::nullopt};
    ctx.grid = std::make_shared<const Grid>(ctx.ts.discretize(sc.step_h));
    if (sc.v) ctx.v = GridFunction::sample(ctx.grid, forcing_fn(Expr::parse(*sc.v)));
    if (sc.w) ctx.w = GridFunction::sample(ctx.grid, forcing_fn(Expr::parse(*sc.w)));

    if (sc.lipschitz_L) {
        ctx.lipschitz = *sc.lipschitz_L;
    } else {
        // Sampled estimate over the sector when a bracket is given, else over
        // a symmetric range scaled from the forcing term.
        double x_lo, x_hi;
        if (ctx.v && ctx.w) {
            x_lo = min_value(*ctx.v);
            x_hi = max_value(*ctx.w);
        } else {
            GridFunction fs_ = GridFunction::sample(ctx.grid, forcing_fn(ctx.f));
            double m = std::max(1.0, sup_abs(fs_));
            x_lo = -2.0 * m;
            x_hi = 2.0 * m;
        }
        ctx.lipschitz = estimate_lipschitz(ctx.k, *ctx.grid, x_lo, x_hi, 33).L;
        ctx.lipschitz_estimated = true;
    }
    return ctx;
}

GridFunction default_seed(const RunContext& ctx) {
    if (ctx.v) return *ctx.v;
    return GridFunction::constant(ctx.grid, 0.0);
}

void require_bracket(const RunContext& ctx, const char* cmd) {
    if (!ctx.v || !ctx.w)
        throw ConfigError(std::string(cmd) + " needs both v and w in the scenario");
}

void print_lipschitz(const RunContext& ctx) {
    std::cout << "L = " << ctx.lipschitz
              << (ctx.lipschitz_estimated ? " (sampled lower estimate)" : " (from scenario)")
              << "\n";
}

int cmd_verify(const CommonOpts& opts) {
    RunContext ctx = make_context(opts);
    require_bracket(ctx, "verify");
    auto f = forcing_fn(ctx.f);
    double slack = default_bracket_slack(*ctx.grid);

    VerifyResult lo = verify_lower(f, ctx.k, *ctx.v, slack);
    VerifyResult hi = verify_upper(f, ctx.k, *ctx.w, slack);
    double sector_worst = 0.0, sector_node = ctx.grid->node(0);
    for (std::size_t i = 0; i < ctx.v->size(); ++i) {
        double d = (*ctx.v)[i] - (*ctx.w)[i];
        if (d > sector_worst) {
            sector_worst = d;
            sector_node = ctx.grid->node(i);
        }
    }
    bool sector_ok = sector_worst <= 1e-12;

    std::cout << "scenario " << ctx.sc.name << " (slack " << slack << ")\n"
              << "  lower solution v: " << (lo.ok ? "ok" : "FAIL") << "  worst defect "
              << lo.worst_defect << " at t = " << lo.worst_node << "\n"
              << "  upper solution w: " << (hi.ok ? "ok" : "FAIL") << "  worst defect "
              << hi.worst_defect << " at t = " << hi.worst_node << "\n"
              << "  sector v <= w:    " << (sector_ok ? "ok" : "FAIL") << "  worst v - w "
              << sector_worst << " at t = " << sector_node << "\n";
    return (lo.ok && hi.ok && sector_ok) ? 0 : 1;
}

int cmd_solve(const CommonOpts& opts) {
    RunContext ctx = make_context(opts);
    auto f = forcing_fn(ctx.f);
    print_lipschitz(ctx);

    auto [x, rep] = picard_solve(f, ctx.k, default_seed(ctx), ctx.solve_config());

    fs::path out_dir(opts.out_dir);
    fs::create_directories(out_dir);
    fs::path csv = out_dir / (ctx.sc.name + ".solution.csv");
    fs::path json = out_dir / (ctx.sc.name + ".report.json");
    write_solution_csv(csv, x);
    write_solve_report_json(json, rep);

    std::cout << "iterations  " << rep.iterations << "\n"
              << "stop reason " << to_string(rep.stop_reason) << "\n"
              << "final delta " << (rep.deltas.empty() ? 0.0 : rep.deltas.back()) << "\n"
              << "residual    " << rep.residual << "\n"
              << "M           " << rep.initial_gap << "\n"
              << "x(b)        " << x[x.size() - 1] << "\n"
              << "wrote " << csv.string() << ", " << json.string() << "\n";
    return rep.stop_reason == StopReason::MaxIter ? 1 : 0;
}

int cmd_bracket(const CommonOpts& opts) {
    RunContext ctx = make_context(opts);
    require_bracket(ctx, "bracket");
    auto f = forcing_fn(ctx.f);

    BracketPair pair(*ctx.v, *ctx.w);
    BracketReport rep = monotone_iterate(f, ctx.k, pair, ctx.sc.n_bracket_iters,
                                         opts.strict_monotone);
    if (rep.monotone_witness) {
        const MonotoneWitness& wit = *rep.monotone_witness;
        std::cerr << "warning: kernel not nondecreasing in x between x = " << wit.x1 << " and "
                  << wit.x2 << " at (t, s) = (" << wit.t << ", " << wit.s << ")\n";
    }

    fs::path out_dir(opts.out_dir);
    fs::create_directories(out_dir);
    fs::path csv = out_dir / (ctx.sc.name + ".bracket.csv");
    fs::path json = out_dir / (ctx.sc.name + ".bracket.json");
    write_bracket_csv(csv, rep);
    write_bracket_json(json, rep);

    std::vector<double> gaps = rep.gaps_per_level();
    std::cout << "levels      " << rep.n_iters << "\n"
              << "gap chain   ";
    for (double gp : gaps) std::cout << gp << " ";
    std::cout << "\nfinal gap   " << rep.gap << "\n"
              << "violations  " << rep.ordering_violations.size() << "\n"
              << "wrote " << csv.string() << ", " << json.string() << "\n";
    return rep.ordering_violations.empty() ? 0 : 1;
}

int cmd_compare(const CommonOpts& opts) {
    RunContext ctx = make_context(opts);
    require_bracket(ctx, "compare");
    auto f = forcing_fn(ctx.f);
    print_lipschitz(ctx);
    SolveConfig cfg = ctx.solve_config();

    auto [x, rep] = picard_solve(f, ctx.k, default_seed(ctx), cfg);
    BracketPair pair(*ctx.v, *ctx.w);
    BracketReport brep = monotone_iterate(f, ctx.k, pair, ctx.sc.n_bracket_iters,
                                          opts.strict_monotone);

    double gap_alpha = sup_diff(x, brep.alpha);
    double gap_beta = sup_diff(x, brep.beta);
    double gap_tol = 10.0 * cfg.tol;
    bool gaps_ok = gap_alpha <= gap_tol && gap_beta <= gap_tol;

    double bound_slack = 10.0 * quadrature_tol(*ctx.grid);
    bool bounds_ok = true;
    std::cout << "\n  iter   measured delta      a-priori bound      ratio vs slacked bound\n";
    for (std::size_t i = 0; i < rep.deltas.size(); ++i) {
        double slacked = rep.apriori_bounds[i] + bound_slack;
        double ratio = slacked > 0.0 ? rep.deltas[i] / slacked : (rep.deltas[i] > 0.0 ? 1e300 : 0.0);
        bool ok = ratio <= 1.0;
        bounds_ok = bounds_ok && ok;
        std::cout << "  " << std::setw(4) << (i + 1) << "   " << std::setw(16)
                  << rep.deltas[i] << "    " << std::setw(16) << rep.apriori_bounds[i]
                  << "    " << std::setw(12) << ratio << (ok ? "" : "  EXCEEDS") << "\n";
    }

    // Sector-guarded solve with the configured penalty sign: must stay
    // inside [v, w] and solve the original equation.
    bool penalized_ok = true;
    std::string penalized_note;
    try {
        auto [px, prep] = penalized_solve(f, ctx.k, pair, cfg,
                                          ModifiedKernelConfig{ctx.sc.penalty_sign});
        penalized_note = "contained, residual vs original kernel " + fmt17(prep.residual);
    } catch (const SectorEscape& e) {
        penalized_ok = false;
        penalized_note = e.what();
    }

    bool converged = rep.stop_reason != StopReason::MaxIter;
    std::cout << "\nsolve stop           " << to_string(rep.stop_reason) << "\n"
              << "||x - alpha||        " << gap_alpha << "\n"
              << "||x - beta||         " << gap_beta << "\n"
              << "gap tolerance        " << gap_tol << "\n"
              << "ordering violations  " << brep.ordering_violations.size() << "\n"
              << "penalized solve (" << to_string(ctx.sc.penalty_sign) << "): " << penalized_note
              << "\n";

    bool ok = converged && gaps_ok && bounds_ok && brep.ordering_violations.empty() &&
              penalized_ok;
    std::cout << (ok ? "CONSISTENT" : "INCONSISTENT") << "\n";
    return ok ? 0 : 1;
}

void add_common(CLI::App* sub, CommonOpts& opts) {
    sub->add_option("--scenario", opts.scenario_path, "scenario JSON file")->required();
    sub->add_option("--out-dir", opts.out_dir, "directory for output files");
    sub->add_flag("--strict-monotone", opts.strict_monotone,
                  "treat a failed kernel-monotonicity check as an error");
    sub->add_option("--penalty-sign", opts.penalty_sign_override,
                    "override the scenario's penalty sign (corrected|verbatim)")
        ->check(CLI::IsMember({"corrected", "verbatim"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Volterra integral dynamic equations on time scales"};
    app.require_subcommand(1);

    CommonOpts opts;
    CLI::App* verify = app.add_subcommand("verify", "check lower/upper solution candidates");
    CLI::App* solve = app.add_subcommand("solve", "successive-approximation solve");
    CLI::App* bracket = app.add_subcommand("bracket", "monotone iteration of both bracket chains");
    CLI::App* compare =
        app.add_subcommand("compare", "cross-check the solve against the bracket limits");
    for (CLI::App* sub : {verify, solve, bracket, compare}) add_common(sub, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (verify->parsed()) return cmd_verify(opts);
        if (solve->parsed()) return cmd_solve(opts);
        if (bracket->parsed()) return cmd_bracket(opts);
        return cmd_compare(opts);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SyntaxError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const UnknownIdentifier& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 2;
    }
}
