#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

#include "tsvolterra/errors.hpp"
#include "tsvolterra/grid_function.hpp"
#include "tsvolterra/timescale.hpp"

namespace tsvolterra {

/// Regressivity tolerance: |1 + p*mu| at or below this counts as the
/// excluded case 1 + p*mu = 0.
inline constexpr double kRegressivityTol = 1e-12;

/// Quadrature constant for the composite trapezoid rule on dense segments:
/// the per-run quadrature tolerance is kQuadratureC * h^2. Calibrated on the
/// linear real-line scenario, where the measured error sits well below h^2
/// (see the calibration test in the solver suite).
inline constexpr double kQuadratureC = 1.0;

/// Quadrature tolerance C * h^2 for a grid, with h the largest dense
/// sub-step. Zero on purely discrete grids, where the delta integral is an
/// exact finite sum.
inline double quadrature_tol(const Grid& g) {
    double h = g.max_dense_step();
    return kQuadratureC * h * h;
}

/// Delta integral of g over [from, to], both grid nodes.
///
/// Each right-scattered node t contributes mu(t) * g(t); each dense node
/// pair contributes a trapezoid. Contributions are accumulated left to
/// right, so the result is deterministic and additive over adjacent
/// subranges by construction.
inline double delta_integral(const GridFunction& g, double from, double to) {
    const Grid& gr = g.grid();
    std::size_t i0 = gr.index_of(from);
    std::size_t i1 = gr.index_of(to);
    if (i1 < i0) throw ReversedBounds(from, to);
    double acc = 0.0;
    for (std::size_t i = i0; i < i1; ++i) {
        double dt = gr.node(i + 1) - gr.node(i);
        acc += gr.is_jump(i) ? dt * g[i] : dt * 0.5 * (g[i] + g[i + 1]);
    }
    return acc;
}

/// Delta derivative of g at node t < b: the scattered-point quotient
/// (g(sigma(t)) - g(t)) / mu(t) at right-scattered nodes, and the forward
/// difference to the next grid node at right-dense ones. The same quotient
/// covers both classes because the next node of a scattered t is sigma(t).
inline double delta_derivative(const GridFunction& g, double t) {
    const Grid& gr = g.grid();
    std::size_t i = gr.index_of(t);
    if (i + 1 == gr.size()) throw AtRightEndpoint(t);
    return (g[i + 1] - g[i]) / (gr.node(i + 1) - gr.node(i));
}

struct RegressivityCheck {
    bool regressive = false;
    bool positively_regressive = false;
    double worst_node = 0.0;
    double worst_value = 0.0;
};

/// Check 1 + p(t)*mu(t) != 0 (regressive) and > 0 (positively regressive)
/// at every node. worst_node/value record the node closest to violating the
/// failed (or nearest) condition: the minimizer of |1 + p*mu| when
/// regressivity fails, the minimizer of 1 + p*mu otherwise.
inline RegressivityCheck check_regressive(const GridFunction& p) {
    const Grid& gr = p.grid();
    RegressivityCheck out;
    out.regressive = true;
    bool positive = true;
    double abs_min = std::numeric_limits<double>::infinity();
    double sgn_min = std::numeric_limits<double>::infinity();
    std::size_t abs_arg = 0, sgn_arg = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double v = 1.0 + p[i] * gr.mu(i);
        if (std::abs(v) < abs_min) {
            abs_min = std::abs(v);
            abs_arg = i;
        }
        if (v < sgn_min) {
            sgn_min = v;
            sgn_arg = i;
        }
        if (std::abs(v) <= kRegressivityTol) out.regressive = false;
        if (!(v > 0.0)) positive = false;
    }
    out.positively_regressive = out.regressive && positive;
    std::size_t arg = out.regressive ? sgn_arg : abs_arg;
    out.worst_node = gr.node(arg);
    out.worst_value = 1.0 + p[arg] * gr.mu(arg);
    return out;
}

/// Generalized exponential e_p(t, s) = exp(∫_s^t xi_{mu(tau)}(p(tau)) Δtau)
/// for s <= t, via the cylinder transformation xi_h(z) = log(1 + h z)/h for
/// h != 0 and xi_0(z) = z. Requires p positively regressive on the closed
/// node range [s, t]; outside R+ the real-valued exponential is undefined
/// and the call errors instead of switching to complex arithmetic.
inline double exp_fn(const GridFunction& p, double t, double s) {
    const Grid& gr = p.grid();
    std::size_t is = gr.index_of(s);
    std::size_t it = gr.index_of(t);
    if (it < is) throw ReversedBounds(s, t);

    auto cylinder = [&](std::size_t i) {
        double h = gr.mu(i);
        if (h == 0.0) return p[i];
        double one_plus = 1.0 + h * p[i];
        if (std::abs(one_plus) <= kRegressivityTol) throw NotRegressive(gr.node(i), one_plus);
        if (one_plus < 0.0) throw NotPositivelyRegressive(gr.node(i), one_plus);
        return std::log1p(h * p[i]) / h;
    };

    double acc = 0.0;
    for (std::size_t i = is; i < it; ++i) {
        double dt = gr.node(i + 1) - gr.node(i);
        acc += gr.is_jump(i) ? dt * cylinder(i) : dt * 0.5 * (cylinder(i) + cylinder(i + 1));
    }
    return std::exp(acc);  // empty range gives exp(0) = 1
}

/// Riemann-minus-delta integral gap over [lo, hi] for a nondecreasing grid
/// function: the Riemann side treats the nodes as a partition of the real
/// interval [lo, hi] and bridges gaps linearly (trapezoid on every pair).
/// Nonnegative, up to quadrature round-off, whenever hfun is nondecreasing.
inline double delta_vs_riemann_gap(const GridFunction& hfun, double lo, double hi) {
    const Grid& gr = hfun.grid();
    std::size_t i0 = gr.index_of(lo);
    std::size_t i1 = gr.index_of(hi);
    if (i1 < i0) throw ReversedBounds(lo, hi);
    for (std::size_t i = 0; i + 1 < hfun.size(); ++i)
        if (hfun[i + 1] < hfun[i]) throw NotNondecreasing(gr.node(i + 1), hfun[i] - hfun[i + 1]);

    double riemann = 0.0;
    double delta = 0.0;
    for (std::size_t i = i0; i < i1; ++i) {
        double dt = gr.node(i + 1) - gr.node(i);
        double trap = dt * 0.5 * (hfun[i] + hfun[i + 1]);
        riemann += trap;
        delta += gr.is_jump(i) ? dt * hfun[i] : trap;
    }
    return riemann - delta;
}

}  // namespace tsvolterra
