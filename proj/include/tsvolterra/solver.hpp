#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "tsvolterra/calculus.hpp"
#include "tsvolterra/errors.hpp"
#include "tsvolterra/grid_function.hpp"
#include "tsvolterra/timescale.hpp"

namespace tsvolterra {

struct SolveConfig {
    double tol = 1e-10;       ///< sup-norm stop threshold
    int max_iter = 50;        ///< hard iteration cap
    double step_h = 1e-3;     ///< target sub-step inside intervals
    double lipschitz_L = 0.0; ///< user-supplied or estimated Lipschitz constant of k in x

    void validate() const {
        if (!(tol > 0.0)) throw Error("solve config needs tol > 0");
        if (max_iter < 1) throw Error("solve config needs max_iter >= 1");
        if (!(step_h > 0.0)) throw Error("solve config needs step_h > 0");
        if (!(lipschitz_L >= 0.0)) throw Error("solve config needs lipschitz_L >= 0");
    }
};

enum class StopReason { Converged, MaxIter, BoundTail };

inline const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::Converged: return "Converged";
        case StopReason::MaxIter: return "MaxIter";
        case StopReason::BoundTail: return "BoundTail";
    }
    return "?";
}

struct SolveReport {
    int iterations = 0;
    std::vector<double> deltas;          ///< sup-norm ||x_n - x_{n-1}|| per iteration
    std::vector<double> apriori_bounds;  ///< M L^n (b-a)^n / n! per iteration
    double residual = 0.0;
    StopReason stop_reason = StopReason::MaxIter;
    double lipschitz_L = 0.0;
    double initial_gap = 0.0;  ///< M = sup |x_0 - seed|
};

/// Factorial a-priori estimate M L^k span^k / k! on successive iterate
/// differences. Computed as a running product, so large k underflows to 0
/// instead of overflowing in the numerator.
inline double apriori_bound(double M, double L, double span, int k) {
    double b = M;
    for (int i = 1; i <= k; ++i) b *= L * span / static_cast<double>(i);
    return b;
}

/// Tail of the bound series after n iterations: M * sum_{j>n} c^j / j! with
/// c = L (b-a). When this drops below the stop tolerance the current iterate
/// is certified within tol of the limit.
inline double apriori_tail(double M, double c, int n) {
    double partial = 1.0, term = 1.0;
    for (int j = 1; j <= n; ++j) {
        term *= c / static_cast<double>(j);
        partial += term;
    }
    double tail = std::exp(c) - partial;
    return tail > 0.0 ? M * tail : 0.0;
}

namespace detail {

/// One application of the Volterra map:
/// out[i] = f(t_i) + ∫_a^{t_i} k(t_i, s, u(s)) Δs, with the integrand
/// sampled exactly at grid nodes and segments accumulated left to right.
/// Shared by the solver, the residual, bracket verification, and the
/// monotone chains so all of them integrate identically.
template <class Forcing, class Kernel>
void volterra_apply(const Grid& g, Forcing& f, Kernel& k, const std::vector<double>& u,
                    std::vector<double>& out, std::vector<double>& scratch) {
    const std::size_t n = g.size();
    out.resize(n);
    scratch.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double t = g.node(i);
        if (i == 0) {
            out[0] = f(t);
            continue;
        }
        for (std::size_t j = 0; j <= i; ++j) scratch[j] = k(t, g.node(j), u[j]);
        double acc = 0.0;
        for (std::size_t j = 0; j < i; ++j) {
            double dt = g.node(j + 1) - g.node(j);
            acc += g.is_jump(j) ? dt * scratch[j] : dt * 0.5 * (scratch[j] + scratch[j + 1]);
        }
        out[i] = f(t) + acc;
    }
}

inline void require_finite_iterate(const Grid& g, const std::vector<double>& v, int iteration) {
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i])) throw NonFiniteIterate(iteration, g.node(i));
}

}  // namespace detail

/// Sup-norm defect of a candidate solution: max over grid nodes t of
/// |x(t) - f(t) - ∫_a^t k(t, s, x(s)) Δs|.
template <class Forcing, class Kernel>
double residual(Forcing&& f, Kernel&& k, const GridFunction& x) {
    std::vector<double> out, scratch;
    detail::volterra_apply(x.grid(), f, k, x.values(), out, scratch);
    double r = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) r = std::max(r, std::abs(x[i] - out[i]));
    return r;
}

/// Successive approximations for x(t) = f(t) + ∫_a^t k(t, s, x(s)) Δs.
///
/// x_0 is one application of the map to the seed; each following iterate
/// applies the map to its predecessor. Stops when the sup-norm delta falls
/// to cfg.tol (Converged), when the a-priori tail certifies the limit is
/// within tol (BoundTail), or at cfg.max_iter (MaxIter). The report carries
/// per-iteration deltas, the factorial bounds, the realized M, and the
/// final residual.
template <class Forcing, class Kernel>
std::pair<GridFunction, SolveReport> picard_solve(Forcing&& f, Kernel&& k,
                                                  const GridFunction& seed,
                                                  const SolveConfig& cfg) {
    cfg.validate();
    const Grid& g = seed.grid();
    SolveReport rep;
    rep.lipschitz_L = cfg.lipschitz_L;
    const double span = g.b() - g.a();
    const double c = cfg.lipschitz_L * span;

    std::vector<double> prev = seed.values();
    std::vector<double> cur, scratch;

    detail::volterra_apply(g, f, k, prev, cur, scratch);  // x_0 from the seed
    detail::require_finite_iterate(g, cur, 0);
    double M = 0.0;
    for (std::size_t i = 0; i < cur.size(); ++i) M = std::max(M, std::abs(cur[i] - prev[i]));
    rep.initial_gap = M;
    prev.swap(cur);

    for (int n = 1; n <= cfg.max_iter; ++n) {
        detail::volterra_apply(g, f, k, prev, cur, scratch);
        detail::require_finite_iterate(g, cur, n);
        double delta = 0.0;
        for (std::size_t i = 0; i < cur.size(); ++i)
            delta = std::max(delta, std::abs(cur[i] - prev[i]));
        rep.deltas.push_back(delta);
        rep.apriori_bounds.push_back(apriori_bound(M, cfg.lipschitz_L, span, n));
        prev.swap(cur);
        if (delta <= cfg.tol) {
            rep.stop_reason = StopReason::Converged;
            break;
        }
        if (apriori_tail(M, c, n) <= cfg.tol) {
            rep.stop_reason = StopReason::BoundTail;
            break;
        }
    }
    rep.iterations = static_cast<int>(rep.deltas.size());

    GridFunction x(seed.grid_ptr(), std::move(prev));
    rep.residual = residual(f, k, x);
    return {std::move(x), std::move(rep)};
}

/// Solve from two seeds and return the sup-norm gap of the results. Under
/// the Lipschitz hypothesis both runs approach the unique solution, so the
/// gap stays within a small multiple of the stop tolerance.
template <class Forcing, class Kernel>
double uniqueness_crosscheck(Forcing&& f, Kernel&& k, const GridFunction& seed_a,
                             const GridFunction& seed_b, const SolveConfig& cfg) {
    require_same_grid(seed_a, seed_b);
    auto [xa, ra] = picard_solve(f, k, seed_a, cfg);
    auto [xb, rb] = picard_solve(f, k, seed_b, cfg);
    return sup_diff(xa, xb);
}

}  // namespace tsvolterra
