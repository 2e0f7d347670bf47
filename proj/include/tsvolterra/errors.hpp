#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsvolterra {

namespace detail {

// %.17g round-trips a double exactly through parse.
inline std::string dtos(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

/// Base of every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class PointNotInTimeScale : public Error {
public:
    explicit PointNotInTimeScale(double t)
        : Error("point not in time scale: t = " + detail::dtos(t)), t_(t) {}
    double point() const { return t_; }

private:
    double t_;
};

class InvalidStep : public Error {
public:
    explicit InvalidStep(double h)
        : Error("discretization step must be positive, got " + detail::dtos(h)) {}
};

class NodeNotOnGrid : public Error {
public:
    explicit NodeNotOnGrid(double t)
        : Error("value is not a grid node: t = " + detail::dtos(t)), t_(t) {}
    double point() const { return t_; }

private:
    double t_;
};

class ReversedBounds : public Error {
public:
    ReversedBounds(double from, double to)
        : Error("reversed bounds: from = " + detail::dtos(from) + " > to = " + detail::dtos(to)) {}
};

class AtRightEndpoint : public Error {
public:
    explicit AtRightEndpoint(double t)
        : Error("delta derivative undefined at the right endpoint t = " + detail::dtos(t)) {}
};

class NotRegressive : public Error {
public:
    NotRegressive(double node, double value)
        : Error("function is not regressive: 1 + p*mu = " + detail::dtos(value) +
                " at t = " + detail::dtos(node)) {}
};

class NotPositivelyRegressive : public Error {
public:
    NotPositivelyRegressive(double node, double value)
        : Error("function is not positively regressive: 1 + p*mu = " + detail::dtos(value) +
                " at t = " + detail::dtos(node)) {}
};

class NotNondecreasing : public Error {
public:
    NotNondecreasing(double node, double drop)
        : Error("grid function decreases at t = " + detail::dtos(node) +
                " (drop " + detail::dtos(drop) + ")") {}
};

class NonFiniteValue : public Error {
public:
    explicit NonFiniteValue(const std::string& where)
        : Error("non-finite value in " + where) {}
};

/// Parse failure in an expression or time-scale literal. Carries the byte
/// offset of the offending token and the tokens that would have been accepted.
class SyntaxError : public Error {
public:
    SyntaxError(std::size_t offset, std::string expected, const std::string& detail = "")
        : Error("syntax error at offset " + std::to_string(offset) + ": expected " + expected +
                (detail.empty() ? "" : " (" + detail + ")")),
          offset_(offset),
          expected_(std::move(expected)) {}

    std::size_t offset() const { return offset_; }
    const std::string& expected() const { return expected_; }

private:
    std::size_t offset_;
    std::string expected_;
};

class UnknownIdentifier : public Error {
public:
    UnknownIdentifier(std::size_t offset, const std::string& name)
        : Error("unknown identifier '" + name + "' at offset " + std::to_string(offset)),
          offset_(offset),
          name_(name) {}

    std::size_t offset() const { return offset_; }
    const std::string& name() const { return name_; }

private:
    std::size_t offset_;
    std::string name_;
};

/// Expression evaluation left its real domain (log of a nonpositive value,
/// division by zero, ...) or produced a non-finite result.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("domain error: " + what) {}
};

class NonFiniteIterate : public Error {
public:
    NonFiniteIterate(int iteration, double node)
        : Error("iterate " + std::to_string(iteration) + " became non-finite at t = " +
                detail::dtos(node)),
          iteration_(iteration),
          node_(node) {}

    int iteration() const { return iteration_; }
    double node() const { return node_; }

private:
    int iteration_;
    double node_;
};

class InvalidBracket : public Error {
public:
    explicit InvalidBracket(const std::string& what) : Error("invalid bracket: " + what) {}
};

class KernelNotMonotone : public Error {
public:
    KernelNotMonotone(double t, double s, double x1, double x2)
        : Error("kernel decreases in x between x = " + detail::dtos(x1) + " and x = " +
                detail::dtos(x2) + " at (t, s) = (" + detail::dtos(t) + ", " + detail::dtos(s) + ")") {}
};

class SectorEscape : public Error {
public:
    SectorEscape(double node, double magnitude)
        : Error("converged iterate leaves the bracket sector at t = " + detail::dtos(node) +
                " by " + detail::dtos(magnitude)),
          node_(node),
          magnitude_(magnitude) {}

    double node() const { return node_; }
    double magnitude() const { return magnitude_; }

private:
    double node_;
    double magnitude_;
};

class GridMismatch : public Error {
public:
    GridMismatch() : Error("grid functions live on different grids") {}
};

/// Scenario / CLI configuration problem (bad field, unknown key, unparsable
/// expression inside a scenario file).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config error: " + what) {}
};

}  // namespace tsvolterra
