#include "htail/h_construct.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

namespace htail {

namespace {

bool certified(const Distribution& d, double x, double shift, double bound, const BreakpointSearch& s) {
    const auto points = std::max<std::size_t>(s.probe_points, 2);
    for (std::size_t k = 0; k < points; ++k) {
        const double g = k == 0 ? x : x * std::pow(s.probe_span, static_cast<double>(k) / (points - 1));
        if (!(shift_deviation(d, g, shift) <= bound)) return false;
    }
    return true;
}

// Slack tolerance for floating-point rounding in the shape checks.
bool holds(double lhs_minus_rhs, double scale, ShapeCheck& check) {
    ++check.checked;
    check.worst_margin = std::min(check.worst_margin, -lhs_minus_rhs);
    if (lhs_minus_rhs > 1e-12 * (1.0 + std::abs(scale))) {
        ++check.violations;
        return false;
    }
    return true;
}

void shape_checks(const HFunction& h, const std::vector<double>& xs_in, const std::vector<double>& cs,
                  ShapeReport& r) {
    std::vector<double> xs = xs_in;
    std::sort(xs.begin(), xs.end());
    std::vector<double> hx(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) hx[i] = h(xs[i]);

    for (std::size_t i = 1; i < xs.size(); ++i) {
        holds(hx[i - 1] - hx[i], hx[i], r.monotonicity);
        holds(hx[i] / xs[i] - hx[i - 1] / xs[i - 1], hx[i - 1] / xs[i - 1], r.ratio_decreasing);
    }
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = i + 1; j < xs.size(); ++j) {
            const double mid = h(0.5 * (xs[i] + xs[j]));
            holds(0.5 * (hx[i] + hx[j]) - mid, mid, r.concavity);
        }
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (double c : cs) {
            if (c < 1.0) continue;
            const double rhs = c * h(xs[i] / c);
            holds(hx[i] - rhs, rhs, r.subhomogeneity);
        }
        holds(h(2.0 * xs[i]) - (hx[i] + 2.0), hx[i], r.doubling);
    }
}

}  // namespace

double shift_deviation(const Distribution& d, double x, double s) {
    const double up = std::abs(d.tail_ratio(x + s, x) - 1.0);
    const double down = std::abs(d.tail_ratio(x - s, x) - 1.0);
    return std::max(up, down);
}

Breakpoints find_breakpoints(const Distribution& d, double delta, std::size_t count, const BreakpointSearch& search) {
    if (!(delta > 0)) throw std::invalid_argument("find_breakpoints: delta must be > 0");
    if (count < 2) throw std::invalid_argument("find_breakpoints: need at least 2 breakpoints");

    Breakpoints bp;
    bp.delta = delta;
    bp.source = d.describe();
    const double cap = search.cap_factor * d.scale();

    for (std::size_t n = 1; n <= count; ++n) {
        const double shift = std::pow(static_cast<double>(n), 1.0 + delta);
        const double bound = 1.0 / static_cast<double>(n);
        // Keep x - shift inside the support, and respect the doubling constraint.
        double lo = d.support_lower() + shift;
        if (n > 1) lo = std::max(lo, 2.0 * bp.xs.back());

        if (certified(d, lo, shift, bound, search)) {
            bp.xs.push_back(lo);
            continue;
        }
        double hi = lo;
        do {
            hi *= 2.0;
            if (hi > cap)
                throw NotLongTailedError(
                    fmt::format("not-long-tailed within search horizon: no x <= {:g} certifies level {} of {}", cap,
                                n, d.describe()),
                    static_cast<int>(n), cap);
        } while (!certified(d, hi, shift, bound, search));

        // Bisect down to adjacent doubles; hi stays certified.
        for (;;) {
            const double mid = lo + 0.5 * (hi - lo);
            if (mid <= lo || mid >= hi) break;
            if (certified(d, mid, shift, bound, search))
                hi = mid;
            else
                lo = mid;
        }
        bp.xs.push_back(hi);
    }
    return bp;
}

InsensitivityFunction::InsensitivityFunction(Breakpoints breakpoints) : bp_(std::move(breakpoints)) {
    if (bp_.xs.empty()) throw std::invalid_argument("insensitivity function: no breakpoints");
    if (!(bp_.xs.front() > 0)) throw std::invalid_argument("insensitivity function: breakpoints must be positive");
    for (std::size_t i = 1; i < bp_.xs.size(); ++i)
        if (!(bp_.xs[i] > bp_.xs[i - 1]))
            throw std::invalid_argument("insensitivity function: breakpoints must increase strictly");
}

double InsensitivityFunction::segment_value(std::size_t seg, double x) const {
    const auto& xs = bp_.xs;
    const std::size_t n = xs.size();
    if (seg == 0 || (seg >= n && n == 1)) return 2.0 * x / xs[0];
    if (seg >= n) seg = n - 1;  // extrapolate the last segment [x_{N-1}, x_N)
    // On [x_seg, x_{seg+1}) (1-based) the value is (seg+1) + (x - x_seg)/(x_{seg+1} - x_seg).
    const double left = xs[seg - 1];
    const double right = xs[seg];
    return static_cast<double>(seg + 1) + (x - left) / (right - left);
}

double InsensitivityFunction::operator()(double x) const {
    if (!(x > 0)) throw std::domain_error(fmt::format("eval_h: x must be > 0 (got {})", x));
    const auto& xs = bp_.xs;
    const auto seg = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
    return segment_value(seg, x);
}

double eval_h(const InsensitivityFunction& h, double x) { return h(x); }

MinInsensitivity::MinInsensitivity(std::vector<InsensitivityFunction> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) throw std::invalid_argument("min_h: empty sequence");
}

double MinInsensitivity::operator()(double x) const {
    double v = std::numeric_limits<double>::infinity();
    for (const auto& h : parts_) v = std::min(v, h(x));
    return v;
}

std::vector<double> MinInsensitivity::knots() const {
    std::vector<double> k;
    for (const auto& h : parts_) k.insert(k.end(), h.knots().begin(), h.knots().end());
    std::sort(k.begin(), k.end());
    k.erase(std::unique(k.begin(), k.end()), k.end());
    return k;
}

MinInsensitivity min_h(std::vector<InsensitivityFunction> hs) { return MinInsensitivity(std::move(hs)); }

bool ShapeReport::ok() const { return total_violations() == 0; }

std::size_t ShapeReport::total_violations() const {
    return continuity.violations + monotonicity.violations + concavity.violations + subhomogeneity.violations +
           ratio_decreasing.violations + doubling.violations;
}

ShapeReport verify_shape(const HFunction& h, const std::vector<double>& knots, const std::vector<double>& x_grid,
                         const std::vector<double>& c_grid) {
    ShapeReport r;
    for (double k : knots) {
        const double right = h(k);
        const double left = h(std::nextafter(k, 0.0));
        // A Lipschitz jump across one ulp is at most slope·ulp; anything larger is a break.
        holds(std::abs(right - left), right * 1e3, r.continuity);
    }
    shape_checks(h, x_grid, c_grid, r);
    return r;
}

ShapeReport verify_shape(const InsensitivityFunction& h, const std::vector<double>& x_grid,
                         const std::vector<double>& c_grid) {
    ShapeReport r;
    const auto& xs = h.knots();
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double left = h.segment_value(k, xs[k]);
        const double right = h.segment_value(k + 1, xs[k]);
        ++r.continuity.checked;
        r.continuity.worst_margin = std::min(r.continuity.worst_margin, -std::abs(left - right));
        if (left != right) ++r.continuity.violations;
    }
    shape_checks([&h](double x) { return h(x); }, x_grid, c_grid, r);
    return r;
}

WeightBand weight_band_for(double h_value, double delta) {
    if (!(h_value > 0)) throw std::domain_error("weight_band: h(x) must be > 0");
    return {std::pow(h_value, -delta), std::sqrt(h_value)};
}

WeightBand weight_band(const HFunction& h, double delta, double x) {
    if (!(x > 0)) throw std::domain_error("weight_band: x must be > 0");
    return weight_band_for(h(x), delta);
}

}  // namespace htail
