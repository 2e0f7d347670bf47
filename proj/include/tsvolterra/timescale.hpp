#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tsvolterra/errors.hpp"

namespace tsvolterra {

/// Absolute tolerance used for "is this real number a member / a node"
/// tests throughout the library. Guards float round-off on node arithmetic.
inline constexpr double kMembershipTol = 1e-12;

/// One maximal piece of a time scale: a closed interval [lo, hi] with
/// lo < hi, or an isolated point (stored with lo == hi). Degenerate
/// intervals are normalized to points at construction.
class Component {
public:
    static Component interval(double lo, double hi) {
        if (!(lo < hi)) throw Error("interval needs lo < hi, got [" + detail::dtos(lo) + ", " + detail::dtos(hi) + "]");
        return Component(lo, hi);
    }
    static Component point(double t) { return Component(t, t); }

    bool is_point() const { return lo_ == hi_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }

private:
    Component(double lo, double hi) : lo_(lo), hi_(hi) {
        if (!std::isfinite(lo) || !std::isfinite(hi)) throw NonFiniteValue("time scale component");
    }
    double lo_;
    double hi_;
};

/// Point topology at one member of the time scale. The dense flags are the
/// complements of the scattered ones; sigma(b) = b and rho(a) = a make the
/// endpoints right-dense / left-dense respectively.
struct PointClass {
    bool right_dense = false;
    bool right_scattered = false;
    bool left_dense = false;
    bool left_scattered = false;
};

/// Discretization of a bounded time scale: the strictly increasing node
/// list, plus per-node time-scale graininess (positive exactly at nodes
/// that sit on the left side of a gap between components).
///
/// Every isolated point and every interval endpoint of the source time
/// scale is a node; inside an interval the nodes are uniform with spacing
/// at most step_h. Construction is deterministic: identical inputs give
/// bitwise-identical node lists.
class Grid {
public:
    Grid(std::vector<double> nodes, std::vector<double> mu, double step_h)
        : nodes_(std::move(nodes)), mu_(std::move(mu)), step_h_(step_h) {}

    std::size_t size() const { return nodes_.size(); }
    double node(std::size_t i) const { return nodes_[i]; }
    const std::vector<double>& nodes() const { return nodes_; }
    double step_h() const { return step_h_; }

    double a() const { return nodes_.front(); }
    double b() const { return nodes_.back(); }

    /// Time-scale graininess at node i: the gap to the next component when
    /// node i is right-scattered, 0 at right-dense nodes and at b.
    double mu(std::size_t i) const { return mu_[i]; }

    /// True when the segment (i, i+1) crosses a gap between components
    /// (a scattered jump) rather than subdividing an interval.
    bool is_jump(std::size_t i) const { return mu_[i] > 0.0; }

    bool has_dense_pairs() const {
        for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
            if (!is_jump(i)) return true;
        return false;
    }

    /// Largest spacing of any dense (within-interval) node pair; 0 when the
    /// grid is purely discrete.
    double max_dense_step() const {
        double m = 0.0;
        for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
            if (!is_jump(i)) m = std::max(m, nodes_[i + 1] - nodes_[i]);
        return m;
    }

    /// Index of the node equal to t within kMembershipTol.
    std::size_t index_of(double t) const {
        auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t - kMembershipTol);
        if (it == nodes_.end() || std::abs(*it - t) > kMembershipTol) throw NodeNotOnGrid(t);
        return static_cast<std::size_t>(it - nodes_.begin());
    }

    bool same_nodes(const Grid& other) const { return nodes_ == other.nodes_; }

private:
    std::vector<double> nodes_;
    std::vector<double> mu_;
    double step_h_;
};

/// A bounded time scale [a, b] ∩ T stored as an ordered, pairwise disjoint
/// list of components with strictly positive gaps between them. Immutable
/// after construction; all operations are pure.
class TimeScale {
public:
    explicit TimeScale(std::vector<Component> components) : components_(std::move(components)) {
        if (components_.empty()) throw Error("time scale needs at least one component");
        for (std::size_t i = 0; i + 1 < components_.size(); ++i) {
            if (!(components_[i].hi() < components_[i + 1].lo()))
                throw Error("time scale components overlap or are out of order near " +
                            detail::dtos(components_[i].hi()));
        }
    }

    /// The real interval [lo, hi] as a time scale.
    static TimeScale interval(double lo, double hi) {
        return TimeScale({Component::interval(lo, hi)});
    }

    /// The integer slice {lo, lo+1, ..., hi} as isolated points.
    static TimeScale integers(long lo, long hi) {
        std::vector<Component> cs;
        for (long t = lo; t <= hi; ++t) cs.push_back(Component::point(static_cast<double>(t)));
        return TimeScale(std::move(cs));
    }

    static TimeScale points(const std::vector<double>& ts) {
        std::vector<Component> cs;
        cs.reserve(ts.size());
        for (double t : ts) cs.push_back(Component::point(t));
        return TimeScale(std::move(cs));
    }

    const std::vector<Component>& components() const { return components_; }
    double a() const { return components_.front().lo(); }
    double b() const { return components_.back().hi(); }
    double span() const { return b() - a(); }

    bool contains(double t) const {
        std::size_t ci;
        return locate(t, ci);
    }

    /// Forward jump operator: the least member strictly greater than t,
    /// clamped to b when none exists.
    double sigma(double t) const {
        std::size_t ci;
        double tt = member(t, ci);
        const Component& c = components_[ci];
        if (!c.is_point() && tt < c.hi()) return tt;  // right-dense interior
        return ci + 1 < components_.size() ? components_[ci + 1].lo() : b();
    }

    /// Backward jump operator: the greatest member strictly less than t,
    /// clamped to a when none exists.
    double rho(double t) const {
        std::size_t ci;
        double tt = member(t, ci);
        const Component& c = components_[ci];
        if (!c.is_point() && tt > c.lo()) return tt;  // left-dense interior
        return ci > 0 ? components_[ci - 1].hi() : a();
    }

    /// Graininess mu(t) = sigma(t) - t. Zero exactly at right-dense points.
    double graininess(double t) const {
        std::size_t ci;
        double tt = member(t, ci);
        const Component& c = components_[ci];
        if (!c.is_point() && tt < c.hi()) return 0.0;
        return (ci + 1 < components_.size() ? components_[ci + 1].lo() : b()) - tt;
    }

    PointClass classify(double t) const {
        std::size_t ci;
        double tt = member(t, ci);
        bool rs = sigma(tt) > tt;
        bool ls = rho(tt) < tt;
        return PointClass{!rs, rs, !ls, ls};
    }

    /// Discretize for quadrature: every point and interval endpoint becomes a
    /// node; each interval [lo, hi] carries ceil((hi-lo)/step_h) + 1 uniform
    /// nodes with the last one pinned to hi.
    Grid discretize(double step_h) const {
        if (!(step_h > 0.0)) throw InvalidStep(step_h);
        std::vector<double> nodes;
        std::vector<double> mu;
        for (std::size_t ci = 0; ci < components_.size(); ++ci) {
            const Component& c = components_[ci];
            double gap =
                ci + 1 < components_.size() ? components_[ci + 1].lo() - c.hi() : 0.0;
            if (c.is_point()) {
                nodes.push_back(c.lo());
                mu.push_back(gap);
            } else {
                double lo = c.lo(), hi = c.hi();
                auto nseg = static_cast<std::size_t>(std::ceil((hi - lo) / step_h));
                if (nseg == 0) nseg = 1;
                for (std::size_t i = 0; i <= nseg; ++i) {
                    nodes.push_back(i == nseg ? hi : lo + (hi - lo) * static_cast<double>(i) /
                                                              static_cast<double>(nseg));
                    mu.push_back(i == nseg ? gap : 0.0);
                }
            }
        }
        return Grid(std::move(nodes), std::move(mu), step_h);
    }

private:
    // Component index holding t (within kMembershipTol), or false.
    bool locate(double t, std::size_t& ci) const {
        auto it = std::lower_bound(
            components_.begin(), components_.end(), t,
            [](const Component& c, double val) { return c.hi() < val - kMembershipTol; });
        if (it == components_.end()) return false;
        if (t < it->lo() - kMembershipTol) return false;
        ci = static_cast<std::size_t>(it - components_.begin());
        return true;
    }

    // Membership check plus snap of t onto the exact stored endpoint when
    // within tolerance, so downstream comparisons are exact.
    double member(double t, std::size_t& ci) const {
        if (!locate(t, ci)) throw PointNotInTimeScale(t);
        const Component& c = components_[ci];
        if (std::abs(t - c.lo()) <= kMembershipTol) return c.lo();
        if (std::abs(t - c.hi()) <= kMembershipTol) return c.hi();
        return t;
    }

    std::vector<Component> components_;
};

namespace detail {

inline void skip_ws(std::string_view text, std::size_t& pos) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
}

inline double parse_number(std::string_view text, std::size_t& pos) {
    skip_ws(text, pos);
    double value = 0.0;
    const char* first = text.data() + pos;
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr == first) throw SyntaxError(pos, "number");
    pos += static_cast<std::size_t>(ptr - first);
    return value;
}

inline void expect_char(std::string_view text, std::size_t& pos, char c) {
    skip_ws(text, pos);
    if (pos >= text.size() || text[pos] != c)
        throw SyntaxError(pos, std::string("'") + c + "'");
    ++pos;
}

}  // namespace detail

/// Parse a time-scale literal: a semicolon-separated list of `[lo,hi]`
/// intervals and `{t1,t2,...}` point sets, e.g. `[0,1];{2};[3,4]`.
/// Whitespace is ignored. Elements must be in increasing order with
/// strictly positive gaps; overlap or disorder is a parse error.
inline TimeScale parse_timescale(std::string_view text) {
    using detail::expect_char;
    using detail::parse_number;
    using detail::skip_ws;

    std::vector<Component> cs;
    std::size_t pos = 0;
    skip_ws(text, pos);
    if (pos >= text.size()) throw SyntaxError(pos, "'[' or '{'", "empty time-scale literal");

    while (true) {
        skip_ws(text, pos);
        if (pos >= text.size()) throw SyntaxError(pos, "'[' or '{'");
        std::size_t elem_pos = pos;
        if (text[pos] == '[') {
            ++pos;
            double lo = parse_number(text, pos);
            expect_char(text, pos, ',');
            double hi = parse_number(text, pos);
            expect_char(text, pos, ']');
            if (hi < lo) throw SyntaxError(elem_pos, "lo <= hi", "interval bounds out of order");
            cs.push_back(lo == hi ? Component::point(lo) : Component::interval(lo, hi));
        } else if (text[pos] == '{') {
            ++pos;
            while (true) {
                std::size_t num_pos = pos;
                detail::skip_ws(text, num_pos);
                double t = parse_number(text, pos);
                if (!cs.empty() && !(cs.back().hi() < t))
                    throw SyntaxError(num_pos, "increasing point", "points overlap or are out of order");
                cs.push_back(Component::point(t));
                skip_ws(text, pos);
                if (pos < text.size() && text[pos] == ',') {
                    ++pos;
                    continue;
                }
                expect_char(text, pos, '}');
                break;
            }
            skip_ws(text, pos);
            if (pos < text.size() && text[pos] == ';') {
                ++pos;
                continue;
            }
            if (pos >= text.size()) break;
            throw SyntaxError(pos, "';' or end of literal");
        } else {
            throw SyntaxError(pos, "'[' or '{'");
        }

        // Ordering across elements (the point-set branch checks as it goes).
        if (cs.size() >= 2 && !(cs[cs.size() - 2].hi() < cs.back().lo()))
            throw SyntaxError(elem_pos, "disjoint increasing element",
                              "elements overlap or are out of order");

        skip_ws(text, pos);
        if (pos >= text.size()) break;
        expect_char(text, pos, ';');
    }

    // Adjacent point-set/interval elements may have produced touching pieces.
    for (std::size_t i = 0; i + 1 < cs.size(); ++i)
        if (!(cs[i].hi() < cs[i + 1].lo()))
            throw SyntaxError(0, "disjoint elements", "elements overlap or are out of order");

    return TimeScale(std::move(cs));
}

}  // namespace tsvolterra
