#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "helpers.hpp"

using namespace tsvolterra;
using tsvtest::grid_of;
using tsvtest::z_recurrence_oracle;

namespace {

SolveConfig config(double tol, int max_iter, double step_h, double L) {
    SolveConfig cfg;
    cfg.tol = tol;
    cfg.max_iter = max_iter;
    cfg.step_h = step_h;
    cfg.lipschitz_L = L;
    return cfg;
}

GridFunction pow2_upper(std::shared_ptr<const Grid> g) {
    return GridFunction::sample(std::move(g), [](double t) { return std::pow(2.0, t + 1.0); });
}

}  // namespace

TEST_CASE("verify_lower") {
    auto g = grid_of(TimeScale::integers(0, 5), 1.0);
    Expr f1 = Expr::parse("1");

    VerifyResult zero = verify_lower(forcing_fn(f1), Expr::parse("x"),
                                     GridFunction::constant(g, 0.0), 1e-9);
    CHECK(zero.ok);
    CHECK(zero.worst_defect == -1.0);  // inequality reads 0 <= 1 at every node

    GridFunction exact(g, {1.0, 2.0, 4.0, 8.0, 16.0, 32.0});
    VerifyResult eq = verify_lower(forcing_fn(f1), Expr::parse("x"), exact, 1e-9);
    CHECK(eq.ok);
    CHECK(std::abs(eq.worst_defect) <= 1e-12);

    VerifyResult bad = verify_lower(forcing_fn(f1), Expr::parse("0"),
                                    GridFunction::constant(g, 10.0), 1e-9);
    CHECK_FALSE(bad.ok);
    CHECK(bad.worst_defect == 9.0);
    CHECK(bad.worst_node == 0.0);
}

TEST_CASE("verify_upper") {
    auto g = grid_of(TimeScale::integers(0, 5), 1.0);
    Expr f1 = Expr::parse("1");

    // Finite-sum oracle: 1 + sum_{s<t} 2^{s+1} = 2^{t+1} - 1 <= 2^{t+1}.
    GridFunction w = pow2_upper(g);
    for (std::size_t i = 0; i < g->size(); ++i) {
        double lhs = 1.0;
        for (std::size_t j = 0; j < i; ++j) lhs += std::pow(2.0, g->node(j) + 1.0);
        REQUIRE(lhs <= w[i]);
    }
    VerifyResult ok = verify_upper(forcing_fn(f1), Expr::parse("x"), w, 1e-9);
    CHECK(ok.ok);
    CHECK(ok.worst_defect == -1.0);

    GridFunction exact(g, {1.0, 2.0, 4.0, 8.0, 16.0, 32.0});
    VerifyResult eq = verify_upper(forcing_fn(f1), Expr::parse("x"), exact, 1e-9);
    CHECK(eq.ok);
    CHECK(std::abs(eq.worst_defect) <= 1e-12);

    VerifyResult bad = verify_upper(forcing_fn(f1), Expr::parse("0"),
                                    GridFunction::constant(g, 0.0), 1e-9);
    CHECK_FALSE(bad.ok);
    CHECK(bad.worst_defect == 1.0);
}

TEST_CASE("bracket pair enforces the sector invariant") {
    auto g = grid_of(TimeScale::integers(0, 5), 1.0);
    GridFunction v = GridFunction::constant(g, 0.0);
    GridFunction w = pow2_upper(g);
    CHECK_NOTHROW(BracketPair(v, w));
    CHECK_THROWS_AS(BracketPair(w, v), InvalidBracket);
}

TEST_CASE("modified kernel branch values") {
    auto g = grid_of(TimeScale::integers(0, 3), 1.0);
    BracketPair pair(GridFunction::constant(g, 0.0), GridFunction::constant(g, 1.0));
    Expr zero = Expr::parse("0");

    auto corrected = modified_kernel(zero, pair, {PenaltySign::Corrected});
    CHECK(corrected(2.0, 1.0, 0.5) == 0.0);   // inside the sector: G = k
    CHECK(corrected(2.0, 1.0, -1.0) == 0.5);  // below v: positive push up
    CHECK(corrected(2.0, 1.0, 2.0) == -0.5);  // above w: push back down

    auto verbatim = modified_kernel(zero, pair, {PenaltySign::Verbatim});
    CHECK(verbatim(2.0, 1.0, 2.0) == 0.5);  // literal sign of the third branch
    CHECK(verbatim(2.0, 1.0, -1.0) == 0.5);
    CHECK(verbatim(2.0, 1.0, 0.5) == 0.0);

    CHECK_THROWS_AS(corrected(2.5, 1.0, 0.5), NodeNotOnGrid);
}

TEST_CASE("modified kernel stays within the sector bound plus one half") {
    auto g = grid_of(TimeScale::integers(0, 4), 1.0);
    Expr k = Expr::parse("sin(x) + 0.25*t*s");
    GridFunction v = GridFunction::sample(g, [](double t) { return -1.0 - 0.1 * t; });
    GridFunction w = GridFunction::sample(g, [](double t) { return 2.0 + 0.1 * t; });
    BracketPair pair(v, w);
    auto G = modified_kernel(k, pair, {PenaltySign::Corrected});

    // Sector sup of |k| by dense sampling in p between v(t) and w(t), plus
    // the frozen lookup values the off-sector branches use. The sampled sup
    // undershoots the true one by at most (p spacing) * sup |dk/dp|.
    double sup_k = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            for (int m = 0; m <= 2000; ++m) {
                double p = v[i] + (w[i] - v[i]) * m / 2000.0;
                sup_k = std::max(sup_k, std::abs(k(g->node(i), g->node(j), p)));
            }
            sup_k = std::max(sup_k, std::abs(k(g->node(i), g->node(j), v[j])));
            sup_k = std::max(sup_k, std::abs(k(g->node(i), g->node(j), w[j])));
        }
    const double sampling_gap = 1e-3;

    std::mt19937 rng(31337);
    std::uniform_int_distribution<std::size_t> node(0, g->size() - 1);
    std::uniform_real_distribution<double> pval(-50.0, 50.0);
    for (int rep = 0; rep < 10000; ++rep) {
        std::size_t i = node(rng), j = node(rng);
        double got = G(g->node(std::max(i, j)), g->node(std::min(i, j)), pval(rng));
        CHECK(std::abs(got) <= sup_k + 0.5 + sampling_gap);
    }
}

TEST_CASE("modified kernel is continuous at the seams for constant brackets") {
    auto g = grid_of(TimeScale::integers(0, 3), 1.0);
    Expr k = Expr::parse("0.5*x + 0.125*t*s");
    BracketPair pair(GridFunction::constant(g, -0.5), GridFunction::constant(g, 1.5));
    auto G = modified_kernel(k, pair, {PenaltySign::Corrected});

    const double eps = 1e-9;
    for (std::size_t i = 0; i < g->size(); ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double t = g->node(i), s = g->node(j);
            CHECK(std::abs(G(t, s, -0.5 - eps) - G(t, s, -0.5)) <= 2.0 * eps);
            CHECK(std::abs(G(t, s, 1.5 + eps) - G(t, s, 1.5)) <= 2.0 * eps);
        }
}

TEST_CASE("penalized solve stays in the sector and solves the original equation") {
    auto g = grid_of(TimeScale::integers(0, 5), 1.0);
    Expr f = Expr::parse("1");
    Expr k = Expr::parse("x");
    BracketPair pair(GridFunction::constant(g, 0.0), pow2_upper(g));

    auto [x, rep] = penalized_solve(forcing_fn(f), k, pair, config(1e-10, 50, 1.0, 1.0));
    std::vector<double> oracle = z_recurrence_oracle(6);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(x[i] == oracle[i]);
        CHECK(x[i] >= pair.v[i] - 1e-9);
        CHECK(x[i] <= pair.w[i] + 1e-9);
    }
    CHECK(rep.residual <= 1e-9);  // measured against the original kernel
}

TEST_CASE("penalized solve with a degenerate sector returns the exact solution") {
    // The off-sector branches compare p against v(t) but freeze the kernel at
    // v(s), so a single-function sector reproduces the solution when it is
    // constant (for increasing v = w the penalty engages for s < t).
    auto g = grid_of(TimeScale::integers(0, 5), 1.0);
    GridFunction exact = GridFunction::constant(g, 3.0);
    BracketPair pair(exact, exact);
    auto [x, rep] = penalized_solve(forcing_fn(Expr::parse("3")), Expr::parse("0"), pair,
                                    config(1e-10, 50, 1.0, 0.0));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i] == exact[i]);
    CHECK(rep.residual == 0.0);
}

TEST_CASE("penalized solve with zero kernel returns f inside any valid sector") {
    auto g = grid_of(TimeScale::integers(0, 4), 1.0);
    BracketPair pair(GridFunction::constant(g, 0.0), GridFunction::constant(g, 2.0));
    auto [x, rep] = penalized_solve(forcing_fn(Expr::parse("1")), Expr::parse("0"), pair,
                                    config(1e-10, 50, 1.0, 0.0));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i] == 1.0);
}

TEST_CASE("sector escape is detected") {
    auto g = grid_of(TimeScale::integers(0, 3), 1.0);
    Expr zero = Expr::parse("0");

    // The solution x = f = 2 lies above w = 1; the bracket is simply wrong.
    BracketPair wrong(GridFunction::constant(g, 0.0), GridFunction::constant(g, 1.0));
    CHECK_THROWS_AS(penalized_solve(forcing_fn(Expr::parse("2")), zero, wrong,
                                    config(1e-10, 200, 1.0, 0.0)),
                    SectorEscape);

    // Verbatim mode pushes an overshooting iterate further up instead of back.
    CHECK_THROWS_AS(penalized_solve(forcing_fn(Expr::parse("1.5")), zero, wrong,
                                    config(1e-10, 200, 1.0, 0.0), {PenaltySign::Verbatim}),
                    SectorEscape);
}

TEST_CASE("monotone iteration with zero kernel collapses to f at level one") {
    auto g = grid_of(TimeScale::integers(0, 4), 1.0);
    BracketPair pair(GridFunction::constant(g, 0.0), GridFunction::constant(g, 2.0));
    BracketReport rep = monotone_iterate(forcing_fn(Expr::parse("1")), Expr::parse("0"), pair, 1);
    CHECK(rep.gap == 0.0);
    CHECK(rep.gaps_per_level()[1] == 0.0);
    for (std::size_t i = 0; i < rep.alpha.size(); ++i) CHECK(rep.alpha[i] == 1.0);
    CHECK(rep.ordering_violations.empty());
}

TEST_CASE("integer-slice monotone chains reach the fixed point") {
    auto g = grid_of(TimeScale::integers(0, 5), 1.0);
    Expr f = Expr::parse("1");
    Expr k = Expr::parse("x");
    BracketPair pair(GridFunction::constant(g, 0.0), pow2_upper(g));

    BracketReport rep = monotone_iterate(forcing_fn(f), k, pair, 8);
    CHECK(rep.ordering_violations.empty());
    CHECK(rep.gap <= 1e-12);

    std::vector<double> gaps = rep.gaps_per_level();
    CHECK(gaps[6] <= 1e-12);  // exact by level 6 on six nodes
    for (std::size_t l = 0; l + 1 < gaps.size(); ++l) CHECK(gaps[l + 1] <= gaps[l] + 1e-12);

    std::vector<double> oracle = z_recurrence_oracle(6);
    for (std::size_t i = 0; i < rep.alpha.size(); ++i) {
        CHECK(rep.alpha[i] == oracle[i]);
        CHECK(rep.beta[i] == oracle[i]);
    }
}

TEST_CASE("real-line monotone chains approach exp(t) from both sides") {
    auto g = grid_of(TimeScale::interval(0.0, 1.0), 1e-3);
    Expr f = Expr::parse("1");
    Expr k = Expr::parse("x");
    GridFunction v = GridFunction::constant(g, 0.0);
    GridFunction w = GridFunction::sample(g, [](double t) { return 4.0 + 4.0 * t; });

    REQUIRE(verify_upper(forcing_fn(f), k, w, default_bracket_slack(*g)).ok);
    BracketPair pair(v, w);
    BracketReport rep = monotone_iterate(forcing_fn(f), k, pair, 20);

    CHECK(rep.ordering_violations.empty());
    CHECK(rep.gap <= 1e-4);
    std::vector<double> gaps = rep.gaps_per_level();
    for (std::size_t l = 0; l + 1 < gaps.size(); ++l) CHECK(gaps[l + 1] <= gaps[l] + 1e-12);

    for (std::size_t i = 0; i < rep.alpha.size(); ++i) {
        double et = std::exp(g->node(i));
        CHECK(std::abs(rep.alpha[i] - et) <= 1e-4);
        CHECK(std::abs(rep.beta[i] - et) <= 1e-4);
    }
}

TEST_CASE("monotone iteration rejects invalid brackets") {
    auto g = grid_of(TimeScale::integers(0, 5), 1.0);
    Expr f = Expr::parse("1");
    Expr k = Expr::parse("x");
    BracketPair bad(GridFunction::constant(g, 10.0), GridFunction::constant(g, 100.0));
    CHECK_THROWS_AS(monotone_iterate(forcing_fn(f), k, bad, 4), InvalidBracket);
}

TEST_CASE("non-monotone kernels warn by default and throw in strict mode") {
    auto g = grid_of(TimeScale::integers(0, 2), 1.0);
    Expr f = Expr::parse("1");
    Expr k = Expr::parse("-x");
    BracketPair pair(GridFunction::constant(g, 0.0), GridFunction::constant(g, 1.0));

    BracketReport rep = monotone_iterate(forcing_fn(f), k, pair, 3, false);
    CHECK(rep.monotone_witness.has_value());

    CHECK_THROWS_AS(monotone_iterate(forcing_fn(f), k, pair, 3, true), KernelNotMonotone);
}

TEST_CASE("bracket limits agree with the picard solution under the lipschitz hypothesis") {
    auto g = grid_of(TimeScale::integers(0, 5), 1.0);
    Expr f = Expr::parse("1");
    Expr k = Expr::parse("x");
    SolveConfig cfg = config(1e-10, 50, 1.0, 1.0);

    auto [x, srep] = picard_solve(forcing_fn(f), k, GridFunction::constant(g, 0.0), cfg);
    BracketPair pair(GridFunction::constant(g, 0.0), pow2_upper(g));
    BracketReport brep = monotone_iterate(forcing_fn(f), k, pair, 8);

    CHECK(sup_diff(brep.alpha, x) <= 10.0 * cfg.tol);
    CHECK(sup_diff(brep.beta, x) <= 10.0 * cfg.tol);

    BracketCheck inside = extremal_bracket_check(x, brep);
    CHECK(inside.inside);

    BracketCheck boundary = extremal_bracket_check(brep.alpha, brep);
    CHECK(boundary.inside);

    std::vector<double> shifted(x.values());
    for (double& v : shifted) v += 1.0;
    BracketCheck outside = extremal_bracket_check(GridFunction(g, shifted), brep);
    CHECK_FALSE(outside.inside);
    CHECK(outside.worst_violation >= 1.0 - 1e-12);

    auto other = grid_of(TimeScale::integers(0, 6), 1.0);
    CHECK_THROWS_AS(extremal_bracket_check(GridFunction::constant(other, 1.0), brep),
                    GridMismatch);
}
