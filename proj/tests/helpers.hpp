#pragma once

#include <memory>
#include <random>
#include <vector>

#include "tsvolterra/tsvolterra.hpp"

namespace tsvtest {

using namespace tsvolterra;

inline std::shared_ptr<const Grid> grid_of(const TimeScale& ts, double h) {
    return std::make_shared<const Grid>(ts.discretize(h));
}

/// Random bounded time scale mixing intervals and isolated points, with
/// gaps in [0.1, 1] so unit-magnitude functions stay positively regressive.
inline TimeScale random_timescale(std::mt19937& rng) {
    std::uniform_int_distribution<int> ncomp(1, 4);
    std::uniform_real_distribution<double> gap(0.1, 1.0);
    std::uniform_real_distribution<double> len(0.2, 1.5);
    std::uniform_real_distribution<double> origin(-2.0, 2.0);
    std::bernoulli_distribution interval(0.5);

    std::vector<Component> cs;
    double cursor = origin(rng);
    int n = ncomp(rng);
    for (int i = 0; i < n; ++i) {
        if (interval(rng)) {
            double hi = cursor + len(rng);
            cs.push_back(Component::interval(cursor, hi));
            cursor = hi + gap(rng);
        } else {
            cs.push_back(Component::point(cursor));
            cursor += gap(rng);
        }
    }
    return TimeScale(std::move(cs));
}

inline GridFunction random_nondecreasing(std::mt19937& rng, std::shared_ptr<const Grid> g) {
    std::uniform_real_distribution<double> start(-3.0, 3.0);
    std::uniform_real_distribution<double> inc(0.0, 0.7);
    std::vector<double> vals(g->size());
    double acc = start(rng);
    for (std::size_t i = 0; i < vals.size(); ++i) {
        vals[i] = acc;
        acc += inc(rng);
    }
    return GridFunction(std::move(g), std::move(vals));
}

/// Independent oracle for the integer-slice equation x = 1 + sum_{s<t} x(s):
/// the literal recurrence, evaluated left to right.
inline std::vector<double> z_recurrence_oracle(int n_nodes) {
    std::vector<double> x(n_nodes);
    for (int t = 0; t < n_nodes; ++t) {
        double acc = 1.0;
        for (int s = 0; s < t; ++s) acc += x[s];
        x[t] = acc;
    }
    return x;
}

}  // namespace tsvtest
