#pragma once

#include "htail/distribution.hpp"
#include "htail/weighted_sums.hpp"

#include <functional>
#include <string>
#include <vector>

namespace htail {

enum class Verdict { ConvergesToOne, Bounded, Diverges, Inconclusive };

std::string to_string(Verdict v);

/// Finite-evidence protocol for reading an asymptotic limit off a ratio profile.
struct ProfileRules {
    std::size_t window = 5;         // trailing points that must agree
    double tolerance = 1e-2;        // closeness to 1 (or stability of the running sup)
    double divergence_cap = 1e6;    // last ratio above this reads as divergence
};

struct RatioProfile {
    std::vector<double> x;
    std::vector<double> ratio;
    std::vector<double> log_ratio;
    std::vector<double> running_sup;
    std::vector<double> excluded;  // grid points dropped because F̄(x) == 0
    Verdict verdict = Verdict::Inconclusive;
    double tolerance = 0.0;
};

/// n points geometrically spaced on [from, to].
std::vector<double> geometric_grid(double from, double to, std::size_t n);
/// 40 points from 10·scale to 1e8·scale.
std::vector<double> default_grid(const Distribution& d);

/// F̄(x+y)/F̄(x) along the grid (class L).
RatioProfile long_tail_ratio(const Distribution& d, double y, const std::vector<double>& grid,
                             const ProfileRules& rules = {});

/// F̄(yx)/F̄(x) for y in (0,1) (class D).
RatioProfile dominated_variation_ratio(const Distribution& d, double y, const std::vector<double>& grid,
                                       const ProfileRules& rules = {});

struct ConsistencyEntry {
    double y;
    double limsup;     // sup of the ratio over the trailing window
    bool stabilized;   // trailing window spread within tolerance
    RatioProfile profile;
};

struct ConsistencyProfile {
    std::vector<ConsistencyEntry> entries;
    bool decreasing = false;  // limsup estimates decrease as y increases to 1
    Verdict verdict = Verdict::Inconclusive;
};

/// limsup_x F̄(yx)/F̄(x) for each y, with y increasing toward 1 (class C).
ConsistencyProfile consistent_variation_profile(const Distribution& d, const std::vector<double>& ys,
                                                const std::vector<double>& grid, const ProfileRules& rules = {});

/// F̄*²(x) / (2F̄(x)) on the positive part, with the two-fold tail from the convolution oracle (class S).
RatioProfile subexponential_ratio(const Distribution& d, const std::vector<double>& grid,
                                  const OracleOptions& oracle = {}, const ProfileRules& rules = {});

struct InsensitivityProfile {
    std::vector<double> x;
    std::vector<double> h;
    std::vector<double> deviation;  // sup over |y| <= h(x) of |F̄(x+y)/F̄(x) - 1|
    std::vector<bool> flagged;      // x - h(x) crosses the left edge of the support
};

/// Worst relative tail change over shifts |y| <= h(x): the endpoints ±h(x) and 9 interior offsets.
InsensitivityProfile insensitivity_profile(const Distribution& d, const std::function<double(double)>& h,
                                           const std::vector<double>& grid);

}  // namespace htail
