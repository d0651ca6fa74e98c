#include "htail/h_construct.hpp"
#include "htail/tail_classes.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace htail;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double ratio_at(const RatioProfile& p, double x) {
    for (std::size_t i = 0; i < p.x.size(); ++i)
        if (p.x[i] == x) return p.ratio[i];
    FAIL("grid point missing");
    return 0.0;
}

// Two-fold Pareto(1,1) convolution tail, by partial fractions.
double pareto1_two_fold(double x) { return 2.0 / x + 2.0 * std::log(x - 1.0) / (x * x); }

}  // namespace

TEST_CASE("long-tail ratio") {
    const auto p2 = Distribution::pareto(2.0, 1.0);
    const std::vector<double> grid{10.0, 100.0, 1000.0};
    CHECK_THAT(ratio_at(long_tail_ratio(p2, 1.0, grid), 100.0), WithinRel(std::pow(100.0 / 101.0, 2.0), 1e-14));
    CHECK_THAT(ratio_at(long_tail_ratio(p2, 1.0, grid), 100.0), WithinRel(0.9802960, 1e-7));

    for (const auto& d : {p2, Distribution::weibull(0.5, 1.0), Distribution::lognormal(0.0, 1.0)}) {
        const auto zero = long_tail_ratio(d, 0.0, default_grid(d));
        for (double r : zero.ratio) CHECK(r == 1.0);
    }

    const auto w = Distribution::weibull(0.5, 1.0);
    const double expected = std::exp(-(std::sqrt(1e6 + 1.0) - 1e3));
    CHECK_THAT(ratio_at(long_tail_ratio(w, 1.0, {1e6}), 1e6), WithinRel(expected, 1e-9));
    CHECK_THAT(ratio_at(long_tail_ratio(w, 1.0, {1e6}), 1e6), WithinRel(0.9995001, 1e-7));
}

TEST_CASE("long-tail verdicts follow declared memberships") {
    for (double y : {0.5, 1.0, 10.0}) {
        CHECK(long_tail_ratio(Distribution::pareto(2.0, 1.0), y, default_grid(Distribution::pareto(2.0, 1.0))).verdict ==
              Verdict::ConvergesToOne);
        const auto w = Distribution::weibull(0.5, 1.0);
        CHECK(long_tail_ratio(w, y, default_grid(w)).verdict == Verdict::ConvergesToOne);
    }
    const auto e = Distribution::exponential(1.0);
    CHECK(long_tail_ratio(e, 1.0, default_grid(e)).verdict != Verdict::ConvergesToOne);
}

TEST_CASE("dominated-variation ratio") {
    const auto p2 = Distribution::pareto(2.0, 1.0);
    const auto prof = dominated_variation_ratio(p2, 0.5, geometric_grid(4.0, 1e8, 40));
    for (double r : prof.ratio) CHECK(r == 4.0);
    CHECK(prof.verdict == Verdict::Bounded);

    const auto w = Distribution::weibull(0.5, 1.0);
    const auto wp = dominated_variation_ratio(w, 0.5, {1e4});
    CHECK_THAT(wp.log_ratio[0], WithinRel(100.0 * (1.0 - std::sqrt(0.5)), 1e-12));
    CHECK_THAT(wp.ratio[0], WithinRel(std::exp(29.289321881345245), 1e-9));
    CHECK(dominated_variation_ratio(w, 0.5, default_grid(w)).verdict == Verdict::Diverges);

    // Burr(1,2,1): F̄(x) = (1+x)^-2, so F̄(x/2)/F̄(x) = ((1+x)/(1+x/2))^2 -> 4.
    const auto burr = Distribution::burr(1.0, 2.0, 1.0);
    const auto bp = dominated_variation_ratio(burr, 0.5, default_grid(burr));
    for (std::size_t i = 0; i < bp.x.size(); ++i) {
        const double x = bp.x[i];
        CHECK_THAT(bp.ratio[i], WithinRel(std::pow((1.0 + x) / (1.0 + 0.5 * x), 2.0), 1e-10));
    }
    CHECK_THAT(bp.ratio.back(), WithinAbs(4.0, 1e-7));
    CHECK(bp.verdict == Verdict::Bounded);

    CHECK_THROWS_AS(dominated_variation_ratio(p2, 1.0, {10.0}), std::domain_error);
    CHECK_THROWS_AS(dominated_variation_ratio(p2, 0.0, {10.0}), std::domain_error);
}

TEST_CASE("consistent-variation profile") {
    const auto p2 = Distribution::pareto(2.0, 1.0);
    const auto prof = consistent_variation_profile(p2, {0.9, 0.99, 0.999}, default_grid(p2));
    REQUIRE(prof.entries.size() == 3);
    CHECK_THAT(prof.entries[0].limsup, WithinRel(std::pow(0.9, -2.0), 1e-12));
    CHECK_THAT(prof.entries[0].limsup, WithinAbs(1.2346, 5e-5));
    CHECK_THAT(prof.entries[1].limsup, WithinAbs(1.0203, 5e-5));
    CHECK_THAT(prof.entries[2].limsup, WithinAbs(1.0020, 5e-5));
    CHECK(prof.decreasing);
    CHECK(prof.verdict == Verdict::ConvergesToOne);

    const auto ln = Distribution::lognormal(0.0, 1.0);
    const auto lp = consistent_variation_profile(ln, {0.9}, geometric_grid(10.0, 1e8, 40));
    CHECK_FALSE(lp.entries[0].stabilized);
    CHECK(lp.verdict != Verdict::ConvergesToOne);
    // The ratio keeps growing along the grid.
    const auto& r = lp.entries[0].profile.ratio;
    for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i] > r[i - 1]);

    CHECK_THROWS_AS(consistent_variation_profile(p2, {0.99, 0.9}, default_grid(p2)), std::invalid_argument);
}

TEST_CASE("subexponential ratio") {
    const auto p1 = Distribution::pareto(1.0, 1.0);
    const auto prof = subexponential_ratio(p1, {10.0, 1e4});
    CHECK_THAT(prof.ratio[0], WithinRel(pareto1_two_fold(10.0) / (2.0 / 10.0), 2e-4));
    CHECK_THAT(prof.ratio[0], WithinRel(1.219722, 2e-4));
    CHECK_THAT(prof.ratio[1], WithinRel(1.0 + std::log(9999.0) / 1e4, 2e-4));
    CHECK_THAT(prof.ratio[1], WithinRel(1.000921, 2e-4));

    const auto e = Distribution::exponential(1.0);
    const auto ep = subexponential_ratio(e, {5.0, 10.0, 15.0, 20.0});
    CHECK_THAT(ep.ratio.back(), WithinRel(10.5, 2e-4));
    CHECK(ep.verdict != Verdict::ConvergesToOne);

    const auto pp = subexponential_ratio(p1, geometric_grid(10.0, 1e5, 9));
    CHECK(pp.verdict == Verdict::ConvergesToOne);
}

TEST_CASE("insensitivity profile") {
    const auto p2 = Distribution::pareto(2.0, 1.0);
    const auto prof = insensitivity_profile(p2, [](double x) { return std::log(x); }, {1e4});
    const double expected = std::abs(std::pow(1.0 - std::log(1e4) / 1e4, -2.0) - 1.0);
    CHECK_THAT(prof.deviation[0], WithinRel(expected, 1e-9));
    CHECK_THAT(prof.deviation[0], WithinRel(1.842e-3, 2e-3));

    for (const auto& d : {p2, Distribution::weibull(0.5, 1.0), Distribution::lognormal(0.0, 1.0)}) {
        const auto zero = insensitivity_profile(d, [](double) { return 0.0; }, default_grid(d));
        for (double v : zero.deviation) CHECK(v == 0.0);
    }

    const auto w = Distribution::weibull(0.5, 1.0);
    const double x = 1e6;
    const auto wp = insensitivity_profile(w, [](double t) { return std::pow(t, 0.6); }, {x});
    const double closed = std::exp(std::sqrt(x) - std::sqrt(x - std::pow(x, 0.6))) - 1.0;
    CHECK_THAT(wp.deviation[0], WithinRel(closed, 1e-9));
    CHECK(wp.deviation[0] > 0.5);

    const auto flagged = insensitivity_profile(p2, [](double t) { return t; }, {2.0});
    CHECK(flagged.flagged[0]);
    CHECK_FALSE(prof.flagged[0]);
}

TEST_CASE("constructed h meets its deviation bound") {
    for (const auto& d : {Distribution::pareto(1.0, 1.0), Distribution::weibull(0.5, 1.0),
                          Distribution::lognormal(0.0, 1.0), Distribution::burr(1.0, 2.0, 1.0)}) {
        INFO(d.describe());
        const InsensitivityFunction h(find_breakpoints(d, 1.0, 12));
        const auto& xs = h.knots();
        const auto prof = insensitivity_profile(d, h, geometric_grid(xs[1], xs.back() * 10.0, 60));
        for (std::size_t i = 0; i < prof.x.size(); ++i) {
            const auto n = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), prof.x[i]) - xs.begin());
            if (n < 2) continue;
            CHECK(prof.deviation[i] <= 1.0 / static_cast<double>(n));
        }
    }
}

TEST_CASE("log channel agrees with direct division") {
    for (const auto& d : {Distribution::pareto(2.0, 1.0), Distribution::weibull(0.5, 1.0),
                          Distribution::lognormal(0.0, 1.0), Distribution::burr(1.0, 2.0, 1.0)}) {
        const auto grid = default_grid(d);
        for (const auto& p : {long_tail_ratio(d, 3.0, grid), dominated_variation_ratio(d, 0.7, grid)}) {
            for (std::size_t i = 0; i < p.x.size(); ++i) {
                if (!std::isfinite(p.ratio[i]) || p.ratio[i] == 0.0) continue;
                CHECK_THAT(std::exp(p.log_ratio[i]), WithinRel(p.ratio[i], 1e-10));
            }
        }
        CHECK(geometric_grid(10.0, 1e8, 40).size() == 40);
    }
}

TEST_CASE("grid validation and underflow") {
    const auto p2 = Distribution::pareto(2.0, 1.0);
    CHECK_THROWS_AS(long_tail_ratio(p2, 1.0, {10.0, 5.0}), std::invalid_argument);
    CHECK_THROWS_AS(long_tail_ratio(p2, 1.0, {}), std::invalid_argument);
    const auto e = Distribution::exponential(1.0);
    // F̄(1e4) underflows but the log channel still carries the ratio.
    const auto prof = long_tail_ratio(e, 1.0, {10.0, 1e4});
    CHECK(e.tail(1e4) == 0.0);
    CHECK(prof.excluded.empty());
    CHECK_THAT(prof.ratio[1], WithinRel(std::exp(-1.0), 1e-12));
}
