#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <utility>
#include <vector>

#include "tsvolterra/errors.hpp"
#include "tsvolterra/timescale.hpp"

namespace tsvolterra {

/// A function sampled on the nodes of a Grid. Immutable after construction;
/// values are checked finite. The grid is shared, so copies are cheap on the
/// grid side and GridFunctions from the same discretization compare grids by
/// pointer first.
class GridFunction {
public:
    GridFunction(std::shared_ptr<const Grid> grid, std::vector<double> values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        if (!grid_) throw Error("grid function needs a grid");
        if (values_.size() != grid_->size())
            throw Error("grid function needs one value per node (" +
                        std::to_string(values_.size()) + " values, " +
                        std::to_string(grid_->size()) + " nodes)");
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (!std::isfinite(values_[i]))
                throw NonFiniteValue("grid function at t = " + detail::dtos(grid_->node(i)));
    }

    template <class Fn>
    static GridFunction sample(std::shared_ptr<const Grid> grid, Fn&& fn) {
        std::vector<double> values;
        values.reserve(grid->size());
        for (std::size_t i = 0; i < grid->size(); ++i) values.push_back(fn(grid->node(i)));
        return GridFunction(std::move(grid), std::move(values));
    }

    static GridFunction constant(std::shared_ptr<const Grid> grid, double c) {
        return GridFunction(std::move(grid), std::vector<double>(grid->size(), c));
    }

    const Grid& grid() const { return *grid_; }
    const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    const std::vector<double>& values() const { return values_; }

    /// Value at the node equal to t (within kMembershipTol).
    double at(double t) const { return values_[grid_->index_of(t)]; }

    bool same_grid(const GridFunction& other) const {
        return grid_ == other.grid_ || grid_->same_nodes(*other.grid_);
    }

private:
    std::shared_ptr<const Grid> grid_;
    std::vector<double> values_;
};

inline void require_same_grid(const GridFunction& a, const GridFunction& b) {
    if (!a.same_grid(b)) throw GridMismatch();
}

/// Sup-norm of a - b over the shared grid.
inline double sup_diff(const GridFunction& a, const GridFunction& b) {
    require_same_grid(a, b);
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double sup_abs(const GridFunction& g) {
    double m = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) m = std::max(m, std::abs(g[i]));
    return m;
}

inline double min_value(const GridFunction& g) {
    double m = g[0];
    for (std::size_t i = 1; i < g.size(); ++i) m = std::min(m, g[i]);
    return m;
}

inline double max_value(const GridFunction& g) {
    double m = g[0];
    for (std::size_t i = 1; i < g.size(); ++i) m = std::max(m, g[i]);
    return m;
}

}  // namespace tsvolterra
