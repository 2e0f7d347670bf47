#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <type_traits>
#include <utility>
#include <vector>

#include "tsvolterra/calculus.hpp"
#include "tsvolterra/errors.hpp"
#include "tsvolterra/expr.hpp"
#include "tsvolterra/grid_function.hpp"
#include "tsvolterra/solver.hpp"

namespace tsvolterra {

/// Nodewise slack for sector-containment checks.
inline constexpr double kSectorSlack = 1e-9;

/// A lower/upper solution candidate pair spanning a nonempty sector:
/// v(t) <= w(t) + 1e-12 at every node.
struct BracketPair {
    GridFunction v;
    GridFunction w;

    BracketPair(GridFunction lower, GridFunction upper)
        : v(std::move(lower)), w(std::move(upper)) {
        require_same_grid(v, w);
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i] > w[i] + 1e-12)
                throw InvalidBracket("sector is empty at t = " + detail::dtos(v.grid().node(i)) +
                                     ": v = " + detail::dtos(v[i]) + " > w = " + detail::dtos(w[i]));
    }
};

/// Sign convention for the out-of-sector penalty above the upper solution.
/// Corrected pushes overshooting iterates back down toward w; Verbatim keeps
/// the literal positive correction for reproduction runs.
enum class PenaltySign { Corrected, Verbatim };

struct ModifiedKernelConfig {
    PenaltySign penalty_sign = PenaltySign::Corrected;
};

struct VerifyResult {
    bool ok = false;
    double worst_defect = 0.0;
    double worst_node = 0.0;
};

/// Lower-solution check: v(t) <= f(t) + ∫_a^t k(t, s, v(s)) Δs up to slack
/// at every node. Returns the maximum defect v - (f + ∫k) and its node.
template <class Forcing, class Kernel>
VerifyResult verify_lower(Forcing&& f, Kernel&& k, const GridFunction& v, double slack) {
    std::vector<double> out, scratch;
    detail::volterra_apply(v.grid(), f, k, v.values(), out, scratch);
    VerifyResult r;
    r.worst_defect = v[0] - out[0];
    r.worst_node = v.grid().node(0);
    for (std::size_t i = 1; i < out.size(); ++i) {
        double d = v[i] - out[i];
        if (d > r.worst_defect) {
            r.worst_defect = d;
            r.worst_node = v.grid().node(i);
        }
    }
    r.ok = r.worst_defect <= slack;
    return r;
}

/// Upper-solution check: w(t) >= f(t) + ∫_a^t k(t, s, w(s)) Δs up to slack.
/// The defect is (f + ∫k) - w.
template <class Forcing, class Kernel>
VerifyResult verify_upper(Forcing&& f, Kernel&& k, const GridFunction& w, double slack) {
    std::vector<double> out, scratch;
    detail::volterra_apply(w.grid(), f, k, w.values(), out, scratch);
    VerifyResult r;
    r.worst_defect = out[0] - w[0];
    r.worst_node = w.grid().node(0);
    for (std::size_t i = 1; i < out.size(); ++i) {
        double d = out[i] - w[i];
        if (d > r.worst_defect) {
            r.worst_defect = d;
            r.worst_node = w.grid().node(i);
        }
    }
    r.ok = r.worst_defect <= slack;
    return r;
}

/// Default verification slack: tight on purely discrete grids where the
/// delta integral is exact, 10x the quadrature tolerance on grids with
/// dense segments so round-off never rejects an analytically valid bracket.
inline double default_bracket_slack(const Grid& g) {
    return g.has_dense_pairs() ? 10.0 * quadrature_tol(g) : 1e-9;
}

/// The kernel modification with respect to a bracket pair: inside the
/// sector G equals k; below v(t) the kernel is frozen at v(s) plus the
/// bounded rational penalty (v(t)-p)/(1+(v(t)-p)^2); above w(t) it is
/// frozen at w(s) with the penalty of the configured sign. |G| never
/// exceeds the sector supremum of |k| by more than 1/2.
template <class Kernel>
class ModifiedKernel {
public:
    ModifiedKernel(Kernel k, GridFunction v, GridFunction w, ModifiedKernelConfig cfg)
        : k_(std::move(k)), v_(std::move(v)), w_(std::move(w)), cfg_(cfg) {
        require_same_grid(v_, w_);
    }

    double operator()(double t, double s, double p) const {
        const Grid& g = v_.grid();
        std::size_t it = g.index_of(t);
        std::size_t is = g.index_of(s);
        double vt = v_[it], wt = w_[it];
        if (p < vt) {
            double z = vt - p;
            return k_(t, s, v_[is]) + z / (1.0 + z * z);
        }
        if (p > wt) {
            double z = wt - p;  // negative
            double penalty = z / (1.0 + z * z);
            return cfg_.penalty_sign == PenaltySign::Corrected ? k_(t, s, w_[is]) + penalty
                                                               : k_(t, s, w_[is]) - penalty;
        }
        return k_(t, s, p);
    }

private:
    Kernel k_;
    GridFunction v_;
    GridFunction w_;
    ModifiedKernelConfig cfg_;
};

template <class Kernel>
ModifiedKernel<std::decay_t<Kernel>> modified_kernel(Kernel&& k, const BracketPair& pair,
                                                     ModifiedKernelConfig cfg = {}) {
    return ModifiedKernel<std::decay_t<Kernel>>(std::forward<Kernel>(k), pair.v, pair.w, cfg);
}

/// Solve the penalized equation phi = f + ∫ G(t, s, phi) Δs seeded with the
/// lower solution, then check the converged iterate stayed in [v, w]. On
/// containment the iterate also solves the original equation, so the
/// reported residual is measured against the original kernel k.
template <class Forcing, class Kernel>
std::pair<GridFunction, SolveReport> penalized_solve(Forcing&& f, Kernel&& k,
                                                     const BracketPair& pair,
                                                     const SolveConfig& cfg,
                                                     ModifiedKernelConfig mk = {}) {
    auto G = modified_kernel(k, pair, mk);
    auto [x, rep] = picard_solve(f, G, pair.v, cfg);

    double worst = 0.0, worst_node = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double out_by = std::max(pair.v[i] - x[i], x[i] - pair.w[i]);
        if (out_by > worst) {
            worst = out_by;
            worst_node = x.grid().node(i);
        }
    }
    if (worst > kSectorSlack) throw SectorEscape(worst_node, worst);

    rep.residual = residual(f, k, x);
    return {std::move(x), std::move(rep)};
}

struct OrderingViolation {
    int level = 0;       ///< position of the left element in the chain v0..vn, wn..w0
    double node = 0.0;
    double magnitude = 0.0;
};

struct BracketReport {
    int n_iters = 0;
    std::vector<GridFunction> v_chain;  ///< v_0 = v, v_1, ..., v_n
    std::vector<GridFunction> w_chain;  ///< w_0 = w, w_1, ..., w_n
    std::vector<OrderingViolation> ordering_violations;
    GridFunction alpha;  ///< last v-iterate
    GridFunction beta;   ///< last w-iterate
    double gap = 0.0;    ///< ||alpha - beta||_inf
    std::optional<MonotoneWitness> monotone_witness;  ///< set when the sampled check failed

    /// ||v_l - w_l||_inf per level, 0..n_iters.
    std::vector<double> gaps_per_level() const {
        std::vector<double> out;
        out.reserve(v_chain.size());
        for (std::size_t l = 0; l < v_chain.size(); ++l)
            out.push_back(sup_diff(v_chain[l], w_chain[l]));
        return out;
    }
};

/// Monotone iteration of both bracket chains:
/// v_n = f + ∫ k(t, s, v_{n-1}) Δs and w_n likewise, for n_iters levels.
///
/// The bracket is verified at level 0 (InvalidBracket on failure) and the
/// kernel is sample-checked for monotonicity in x over the sector's value
/// range; a failed check throws when strict_monotone is set and is recorded
/// as a witness in the report otherwise. Every nodewise violation beyond
/// 1e-9 of the chain ordering v0 <= v1 <= ... <= vn <= wn <= ... <= w0 is
/// recorded with its chain position.
template <class Forcing, class Kernel>
BracketReport monotone_iterate(Forcing&& f, Kernel&& k, const BracketPair& pair, int n_iters,
                               bool strict_monotone = false) {
    if (n_iters < 1) throw Error("monotone iteration needs n_iters >= 1");
    const Grid& g = pair.v.grid();
    double slack = default_bracket_slack(g);

    VerifyResult lo = verify_lower(f, k, pair.v, slack);
    if (!lo.ok)
        throw InvalidBracket("v is not a lower solution: defect " + detail::dtos(lo.worst_defect) +
                             " at t = " + detail::dtos(lo.worst_node));
    VerifyResult hi = verify_upper(f, k, pair.w, slack);
    if (!hi.ok)
        throw InvalidBracket("w is not an upper solution: defect " + detail::dtos(hi.worst_defect) +
                             " at t = " + detail::dtos(hi.worst_node));

    MonotoneCheck mono = check_monotone_in_x(k, g, min_value(pair.v), max_value(pair.w), 17);
    if (!mono.monotone && strict_monotone) {
        const MonotoneWitness& wit = *mono.witness;
        throw KernelNotMonotone(wit.t, wit.s, wit.x1, wit.x2);
    }

    std::vector<GridFunction> v_chain{pair.v};
    std::vector<GridFunction> w_chain{pair.w};
    std::vector<double> out, scratch;
    for (int l = 1; l <= n_iters; ++l) {
        detail::volterra_apply(g, f, k, v_chain.back().values(), out, scratch);
        detail::require_finite_iterate(g, out, l);
        v_chain.emplace_back(pair.v.grid_ptr(), out);
        detail::volterra_apply(g, f, k, w_chain.back().values(), out, scratch);
        detail::require_finite_iterate(g, out, l);
        w_chain.emplace_back(pair.w.grid_ptr(), out);
    }

    // Chain ordering: adjacent pairs of [v0..vn, wn..w0].
    std::vector<OrderingViolation> violations;
    auto check_pair = [&](const GridFunction& lo_fn, const GridFunction& hi_fn, int level) {
        for (std::size_t i = 0; i < lo_fn.size(); ++i)
            if (lo_fn[i] - hi_fn[i] > 1e-9)
                violations.push_back({level, g.node(i), lo_fn[i] - hi_fn[i]});
    };
    int level = 0;
    for (int l = 0; l < n_iters; ++l) check_pair(v_chain[l], v_chain[l + 1], level++);
    check_pair(v_chain[n_iters], w_chain[n_iters], level++);
    for (int l = n_iters; l > 0; --l) check_pair(w_chain[l], w_chain[l - 1], level++);

    GridFunction alpha = v_chain.back();
    GridFunction beta = w_chain.back();
    double gap = sup_diff(alpha, beta);
    return BracketReport{n_iters,
                         std::move(v_chain),
                         std::move(w_chain),
                         std::move(violations),
                         std::move(alpha),
                         std::move(beta),
                         gap,
                         mono.monotone ? std::nullopt : mono.witness};
}

struct BracketCheck {
    bool inside = false;
    double worst_violation = 0.0;
    double worst_node = 0.0;
};

/// Check that x lies between the extremal iterates of a bracket run:
/// min(alpha, beta) - 1e-9 <= x <= max(alpha, beta) + 1e-9 nodewise.
inline BracketCheck extremal_bracket_check(const GridFunction& x, const BracketReport& rep) {
    require_same_grid(x, rep.alpha);
    require_same_grid(x, rep.beta);
    BracketCheck out;
    out.worst_node = x.grid().node(0);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i) {
        double lo = std::min(rep.alpha[i], rep.beta[i]);
        double hi = std::max(rep.alpha[i], rep.beta[i]);
        double v = std::max(lo - x[i], x[i] - hi);
        if (v > worst) {
            worst = v;
            out.worst_node = x.grid().node(i);
        }
    }
    out.worst_violation = worst;
    out.inside = worst <= kSectorSlack;
    return out;
}

}  // namespace tsvolterra
