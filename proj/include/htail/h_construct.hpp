#pragma once

#include "htail/distribution.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace htail {

using HFunction = std::function<double(double)>;

/// The breakpoint sequence x_1 < ... < x_N behind a constructed insensitivity
/// function. Each x_n satisfies x_n >= 2 x_{n-1} and certifies that shifting the
/// argument by ±n^(1+delta) changes the tail by at most a factor 1 ± 1/n for
/// every probed x >= x_n.
struct Breakpoints {
    std::vector<double> xs;
    double delta = 1.0;
    std::string source;
};

/// Thrown when no breakpoint can be certified below the search cap, which is
/// what happens for tails that are not long-tailed (e.g. exponential).
class NotLongTailedError : public std::runtime_error {
public:
    NotLongTailedError(std::string what, int level, double cap)
        : std::runtime_error(std::move(what)), level_(level), cap_(cap) {}
    int level() const { return level_; }
    double cap() const { return cap_; }

private:
    int level_;
    double cap_;
};

struct BreakpointSearch {
    std::size_t probe_points = 50;   // certification grid size
    double probe_span = 1e3;         // grid covers [x_n, probe_span·x_n]
    double cap_factor = 1e15;        // give up beyond cap_factor·scale
};

/// max(|F̄(x+s)/F̄(x) - 1|, |F̄(x-s)/F̄(x) - 1|).
double shift_deviation(const Distribution& d, double x, double s);

/// Smallest certified x_1..x_count. Requires delta > 0 and count >= 2.
Breakpoints find_breakpoints(const Distribution& d, double delta = 1.0, std::size_t count = 20,
                             const BreakpointSearch& search = {});

/// Piecewise-linear, concave, nondecreasing h with h(x) = 2x/x_1 on (0, x_1)
/// and h(x_{n-1}) = n. Beyond x_N the last segment is continued.
class InsensitivityFunction {
public:
    explicit InsensitivityFunction(Breakpoints breakpoints);

    double operator()(double x) const;

    const Breakpoints& breakpoints() const { return bp_; }
    const std::vector<double>& knots() const { return bp_.xs; }

    /// Formula of segment `seg` evaluated at x, without locating x. Segment 0
    /// is (0, x_1); segment k is [x_k, x_{k+1}); segment N is the extrapolation.
    double segment_value(std::size_t seg, double x) const;

private:
    Breakpoints bp_;
};

double eval_h(const InsensitivityFunction& h, double x);

/// Pointwise minimum of several insensitivity functions.
class MinInsensitivity {
public:
    explicit MinInsensitivity(std::vector<InsensitivityFunction> parts);

    double operator()(double x) const;
    /// Union of the parts' knots, sorted.
    std::vector<double> knots() const;
    const std::vector<InsensitivityFunction>& parts() const { return parts_; }

private:
    std::vector<InsensitivityFunction> parts_;
};

MinInsensitivity min_h(std::vector<InsensitivityFunction> hs);

struct ShapeCheck {
    std::size_t checked = 0;
    std::size_t violations = 0;
    double worst_margin = 0.0;  // most negative slack seen; >= 0 means all held
};

struct ShapeReport {
    ShapeCheck continuity;
    ShapeCheck monotonicity;
    ShapeCheck concavity;         // midpoint test on all grid pairs
    ShapeCheck subhomogeneity;    // h(x) <= c·h(x/c), c >= 1
    ShapeCheck ratio_decreasing;  // h(x)/x nonincreasing
    ShapeCheck doubling;          // h(2x) <= h(x) + 2

    bool ok() const;
    std::size_t total_violations() const;
};

/// Shape checks on an x-grid and a c-grid (c >= 1). Knots are where continuity is tested.
ShapeReport verify_shape(const HFunction& h, const std::vector<double>& knots, const std::vector<double>& x_grid,
                         const std::vector<double>& c_grid);
/// Same, with exact one-sided limits at the breakpoints.
ShapeReport verify_shape(const InsensitivityFunction& h, const std::vector<double>& x_grid,
                         const std::vector<double>& c_grid);

/// Weight band [a, b] = [h^(-delta), h^(1/2)].
struct WeightBand {
    double a;
    double b;
    bool empty() const { return a > b; }
};

WeightBand weight_band_for(double h_value, double delta);
WeightBand weight_band(const HFunction& h, double delta, double x);

}  // namespace htail
