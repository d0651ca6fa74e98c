#include "htail/tail_classes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace htail {

namespace {

void require_increasing(const std::vector<double>& grid) {
    if (grid.empty()) throw std::invalid_argument("ratio profile: empty grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("ratio profile: grid must be strictly increasing");
}

void fill_running_sup(RatioProfile& p) {
    p.running_sup.resize(p.ratio.size());
    double sup = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.ratio.size(); ++i) {
        sup = std::max(sup, p.ratio[i]);
        p.running_sup[i] = sup;
    }
}

bool converges_to_one(const RatioProfile& p, const ProfileRules& r) {
    const std::size_t n = p.ratio.size();
    if (n < r.window) return false;
    for (std::size_t i = n - r.window; i < n; ++i) {
        const double dev = std::abs(p.ratio[i] - 1.0);
        if (!(dev <= r.tolerance)) return false;
        if (i > n - r.window && dev > std::abs(p.ratio[i - 1] - 1.0)) return false;
    }
    return true;
}

bool diverges(const RatioProfile& p, const ProfileRules& r) {
    return !p.log_ratio.empty() && p.log_ratio.back() > std::log(r.divergence_cap);
}

// Running sup over the trailing window moves by at most the tolerance, relatively.
bool sup_stabilized(const RatioProfile& p, const ProfileRules& r) {
    const std::size_t n = p.running_sup.size();
    if (n < r.window) return false;
    const double first = p.running_sup[n - r.window];
    const double last = p.running_sup.back();
    return std::isfinite(last) && (last - first) <= r.tolerance * std::abs(first);
}

// Evaluates F̄(num(x))/F̄(x) along the grid, keeping the log channel alongside.
template <class Arg>
RatioProfile ratio_profile(const Distribution& d, const std::vector<double>& grid, Arg numerator,
                           const ProfileRules& rules) {
    require_increasing(grid);
    RatioProfile p;
    p.tolerance = rules.tolerance;
    for (double x : grid) {
        if (d.tail(x) == 0.0 && !std::isfinite(d.log_tail(x))) {
            p.excluded.push_back(x);
            continue;
        }
        const double lr = d.log_tail_ratio(numerator(x), x);
        p.x.push_back(x);
        p.log_ratio.push_back(lr);
        p.ratio.push_back(d.tail_ratio(numerator(x), x));
    }
    fill_running_sup(p);
    return p;
}

}  // namespace

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::ConvergesToOne: return "converges-to-1";
        case Verdict::Bounded: return "bounded";
        case Verdict::Diverges: return "diverges";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

std::vector<double> geometric_grid(double from, double to, std::size_t n) {
    if (!(from > 0 && to > from) || n < 2) throw std::invalid_argument("geometric_grid: need 0 < from < to, n >= 2");
    std::vector<double> g(n);
    const double ratio = std::log(to / from);
    for (std::size_t i = 0; i < n; ++i) g[i] = from * std::exp(ratio * static_cast<double>(i) / (n - 1));
    g.front() = from;
    g.back() = to;
    return g;
}

std::vector<double> default_grid(const Distribution& d) { return geometric_grid(10 * d.scale(), 1e8 * d.scale(), 40); }

RatioProfile long_tail_ratio(const Distribution& d, double y, const std::vector<double>& grid,
                             const ProfileRules& rules) {
    auto p = ratio_profile(d, grid, [y](double x) { return x + y; }, rules);
    if (converges_to_one(p, rules))
        p.verdict = Verdict::ConvergesToOne;
    else if (diverges(p, rules))
        p.verdict = Verdict::Diverges;
    return p;
}

RatioProfile dominated_variation_ratio(const Distribution& d, double y, const std::vector<double>& grid,
                                       const ProfileRules& rules) {
    if (!(y > 0 && y < 1)) throw std::domain_error("dominated_variation_ratio: y must lie in (0,1)");
    auto p = ratio_profile(d, grid, [y](double x) { return y * x; }, rules);
    if (diverges(p, rules))
        p.verdict = Verdict::Diverges;
    else if (sup_stabilized(p, rules))
        p.verdict = Verdict::Bounded;
    return p;
}

ConsistencyProfile consistent_variation_profile(const Distribution& d, const std::vector<double>& ys,
                                                const std::vector<double>& grid, const ProfileRules& rules) {
    if (ys.empty()) throw std::invalid_argument("consistent_variation_profile: no y values");
    for (std::size_t i = 0; i < ys.size(); ++i) {
        if (!(ys[i] > 0 && ys[i] < 1)) throw std::domain_error("consistent_variation_profile: y must lie in (0,1)");
        if (i > 0 && !(ys[i] > ys[i - 1]))
            throw std::invalid_argument("consistent_variation_profile: ys must increase toward 1");
    }
    ConsistencyProfile out;
    bool all_stable = true;
    bool any_diverging = false;
    for (double y : ys) {
        auto profile = dominated_variation_ratio(d, y, grid, rules);
        const std::size_t n = profile.ratio.size();
        const std::size_t from = n > rules.window ? n - rules.window : 0;
        double sup = -std::numeric_limits<double>::infinity();
        for (std::size_t i = from; i < n; ++i) sup = std::max(sup, profile.ratio[i]);
        const bool stable = sup_stabilized(profile, rules);
        all_stable = all_stable && stable;
        any_diverging = any_diverging || profile.verdict == Verdict::Diverges;
        out.entries.push_back({y, sup, stable, std::move(profile)});
    }
    out.decreasing = true;
    for (std::size_t i = 1; i < out.entries.size(); ++i)
        if (!(out.entries[i].limsup < out.entries[i - 1].limsup)) out.decreasing = false;
    const double last = out.entries.back().limsup;
    if (all_stable && out.decreasing && std::abs(last - 1.0) <= rules.tolerance)
        out.verdict = Verdict::ConvergesToOne;
    else if (any_diverging)
        out.verdict = Verdict::Diverges;
    return out;
}

RatioProfile subexponential_ratio(const Distribution& d, const std::vector<double>& grid, const OracleOptions& oracle,
                                  const ProfileRules& rules) {
    require_increasing(grid);
    WeightedSumProblem two{{d, d}, {1.0, 1.0}, DependenceSpec::independent()};
    RatioProfile p;
    p.tolerance = rules.tolerance;
    for (double x : grid) {
        const TailValue single = d.tail_pair(x);
        if (single.value == 0.0) {
            p.excluded.push_back(x);
            continue;
        }
        const auto conv = convolution_oracle_detail(two, x, oracle);
        const double lr = std::log(conv.value) - std::log(2.0) - single.log_value;
        p.x.push_back(x);
        p.log_ratio.push_back(lr);
        p.ratio.push_back(std::exp(lr));
    }
    fill_running_sup(p);
    if (converges_to_one(p, rules))
        p.verdict = Verdict::ConvergesToOne;
    else if (diverges(p, rules))
        p.verdict = Verdict::Diverges;
    return p;
}

InsensitivityProfile insensitivity_profile(const Distribution& d, const std::function<double(double)>& h,
                                           const std::vector<double>& grid) {
    constexpr int kOffsets = 11;  // endpoints ±h plus 9 interior points
    InsensitivityProfile out;
    for (double x : grid) {
        const double hx = h(x);
        if (!(hx >= 0)) throw std::domain_error("insensitivity_profile: h must be nonnegative");
        double worst = 0.0;
        for (int k = 0; k < kOffsets; ++k) {
            const double y = -hx + 2.0 * hx * k / (kOffsets - 1);
            worst = std::max(worst, std::abs(d.tail_ratio(x + y, x) - 1.0));
        }
        out.x.push_back(x);
        out.h.push_back(hx);
        out.deviation.push_back(worst);
        out.flagged.push_back(x - hx < d.support_lower());
    }
    return out;
}

}  // namespace htail
