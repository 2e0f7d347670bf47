#pragma once

// Volterra integral dynamic equations x(t) = f(t) + ∫_a^t k(t,s,x(s)) Δs on
// bounded time scales: delta calculus, successive approximations with
// a-priori error bounds, and upper/lower-solution bracketing.

#include "tsvolterra/bracketing.hpp"
#include "tsvolterra/calculus.hpp"
#include "tsvolterra/errors.hpp"
#include "tsvolterra/expr.hpp"
#include "tsvolterra/grid_function.hpp"
#include "tsvolterra/solver.hpp"
#include "tsvolterra/timescale.hpp"
