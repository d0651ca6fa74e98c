// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "htail/h_construct.hpp"
#include "htail/ruin.hpp"
#include "htail/tail_classes.hpp"
#include "htail/weighted_sums.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

using namespace htail;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
    std::string digest;  // serialized outputs, compared across worker counts

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string hex(double v) { return fmt::format("{:a}", v); }

void digest(Outcome& o, const TailEstimate& e) { o.digest += hex(e.value) + " " + hex(e.std_error) + "\n"; }

WeightedSumProblem iid(const Distribution& d, std::vector<double> weights,
                       DependenceSpec dep = DependenceSpec::independent()) {
    return {std::vector<Distribution>(weights.size(), d), std::move(weights), dep};
}

McOptions mc(std::uint64_t samples, std::uint64_t seed, unsigned workers) {
    McOptions o;
    o.samples = samples;
    o.seed = seed;
    o.workers = workers;
    return o;
}

std::vector<Distribution> four_families() {
    return {Distribution::pareto(1.0, 1.0), Distribution::weibull(0.5, 1.0), Distribution::lognormal(0.0, 1.0),
            Distribution::burr(1.0, 2.0, 1.0)};
}

double pareto1_two_fold(double x) { return 2.0 / x + 2.0 * std::log(x - 1.0) / (x * x); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome breakpoints_certified(unsigned) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const auto bp = find_breakpoints(Distribution::pareto(1.0, 1.0), 1.0, 2);
    o.require(bp.xs[0] == 2.0 && bp.xs[1] == 12.0, fmt::format("Pareto(1,1) x1={} x2={}", bp.xs[0], bp.xs[1]));
    double worst = 0.0;
    for (const auto& d : four_families()) {
        const auto b = find_breakpoints(d, 1.0, 10);
        for (std::size_t n = 1; n <= 10; ++n) {
            const double xn = b.xs[n - 1];
            for (double x : geometric_grid(xn, 1e3 * xn, 50)) {
                const double dev = shift_deviation(d, x, std::pow(static_cast<double>(n), 2.0)) * n;
                worst = std::max(worst, dev);
            }
        }
    }
    o.require(worst <= 1.0, fmt::format("n*deviation reached {:.4f}", worst));
    const double t = seconds_since(t0);
    o.require(t < 10.0, fmt::format("took {:.1f}s", t));
    o.note(fmt::format("max n*deviation {:.4f}, {:.2f}s", worst, t));
    return o;
}

Outcome h_shape(unsigned) {
    Outcome o;
    std::size_t violations = 0;
    for (const auto& d : four_families()) {
        const InsensitivityFunction h(find_breakpoints(d));
        const auto& xs = h.knots();
        const auto r = verify_shape(h, geometric_grid(xs.front() / 100.0, xs.back(), 100), geometric_grid(1.0, 100.0, 20));
        const std::size_t v = r.continuity.violations + r.monotonicity.violations + r.concavity.violations +
                              r.subhomogeneity.violations + r.doubling.violations;
        o.require(v == 0, fmt::format("{}: {} violations", d.describe(), v));
        violations += v;
    }
    o.note(fmt::format("{} violations over four families", violations));
    return o;
}

Outcome oracle_certificate(unsigned) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const auto expo = iid(Distribution::exponential(1.0), {1.0, 1.0});
    double worst_rel = 0.0;
    for (double x : {1.0, 5.0, 10.0, 20.0}) {
        const auto r = convolution_oracle_detail(expo, x);
        const double exact = (1.0 + x) * std::exp(-x);
        o.require(std::abs(r.value - exact) <= r.error_bound, fmt::format("Erlang x={} off by {:.3g} > {:.3g}", x,
                                                                           std::abs(r.value - exact), r.error_bound));
        worst_rel = std::max(worst_rel, r.error_bound / r.value);
    }
    o.require(worst_rel <= 1e-4, fmt::format("relative error bound {:.3g}", worst_rel));
    const auto pareto = iid(Distribution::pareto(1.0, 1.0), {1.0, 1.0});
    for (double x : {10.0, 100.0, 1000.0}) {
        const auto r = convolution_oracle_detail(pareto, x);
        o.require(std::abs(r.value - pareto1_two_fold(x)) <= r.error_bound,
                  fmt::format("Pareto x={} off by {:.3g} > {:.3g}", x, std::abs(r.value - pareto1_two_fold(x)),
                              r.error_bound));
    }
    const double t = seconds_since(t0);
    o.require(t < 60.0, fmt::format("took {:.1f}s", t));
    o.note(fmt::format("Erlang relative bound {:.2g}, {:.2f}s", worst_rel, t));
    return o;
}

Outcome uniform_shift(unsigned) {
    Outcome o;
    const auto d = Distribution::pareto(1.0, 1.0);
    const InsensitivityFunction h(find_breakpoints(d));
    const auto r = shift_insensitivity_check(iid(d, {1.0, 1.0}), h, {1e2, 1e3, 1e4});
    const auto& m = r.max_deviation;
    o.require(m[2] <= 0.05, fmt::format("deviation {:.4f} at 1e4", m[2]));
    o.require(m[0] > m[1] && m[1] > m[2], "deviation not decreasing");
    o.note(fmt::format("max deviation {:.4f}, {:.4f}, {:.4f}", m[0], m[1], m[2]));
    return o;
}

Outcome equivalence_common_numbers(unsigned workers) {
    Outcome o;
    EquivalenceOptions opt;
    opt.mc = mc(1'000'000, 7, workers);
    opt.tolerance = 0.05;
    const auto r = equivalence_report(iid(Distribution::pareto(2.0, 1.0), {1.0, 1.0}), {300.0}, opt);
    const auto& row = r.rows[0];
    o.require(r.ordering_holds && row.sum.value <= row.max_partial.value &&
                  row.max_partial.value <= row.positive_sum.value,
              "pathwise ordering broken");
    std::string ratios;
    for (const auto& q : row.ratios) {
        o.require(std::abs(q.value - 1.0) <= std::max(0.05, 3.0 * q.std_error),
                  fmt::format("{} = {:.4f} (se {:.4f})", q.name, q.value, q.std_error));
        ratios += fmt::format(" {}={:.4f}", q.name, q.value);
        o.digest += hex(q.value) + "\n";
    }
    digest(o, row.sum);
    digest(o, row.max_partial);
    digest(o, row.positive_sum);
    o.note("ratios" + ratios);
    return o;
}

Outcome dependent_equivalence(unsigned workers) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& dep : {DependenceSpec::fgm(0.5), DependenceSpec::gaussian(0.5)}) {
        EquivalenceOptions opt;
        opt.mc = mc(10'000'000, 11, workers);
        opt.tolerance = 0.10;
        const auto r = equivalence_report(iid(Distribution::pareto(2.0, 1.0), {1.0, 1.0}, dep), {300.0}, opt);
        const auto& row = r.rows[0];
        double worst = 0.0;
        for (const auto& q : row.ratios) {
            o.require(std::abs(q.value - 1.0) <= std::max(0.10, 3.0 * q.std_error),
                      fmt::format("{} {} = {:.4f} (se {:.4f})", dep.describe(), q.name, q.value, q.std_error));
            worst = std::max(worst, std::abs(q.value - 1.0));
            o.digest += hex(q.value) + "\n";
        }
        digest(o, row.sum);
        digest(o, row.max_partial);
        digest(o, row.positive_sum);
        o.note(fmt::format("{} worst |ratio-1| {:.4f}", dep.describe(), worst));
    }
    const double t = seconds_since(t0);
    o.require(t < 300.0, fmt::format("took {:.1f}s", t));
    o.note(fmt::format("{:.1f}s", t));
    return o;
}

Outcome estimator_consistency(unsigned workers) {
    Outcome o;
    const auto p = iid(Distribution::pareto(1.5, 1.0), {1.0, 1.0, 1.0});
    const auto oracle = convolution_oracle_detail(p, 1e3);
    const auto bj = big_jump_mc(p, Functional::Sum, 1e3, mc(100'000, 5, workers));
    const auto crude = crude_mc(p, Functional::Sum, 1e3, mc(100'000, 5, workers));
    const double gap = std::abs(bj.value - oracle.value);
    o.require(gap <= 3.0 * bj.std_error + oracle.error_bound,
              fmt::format("big jump {:.6g} vs oracle {:.6g}", bj.value, oracle.value));
    o.require(bj.relative_error() <= 0.5 * crude.relative_error(),
              fmt::format("relative SE {:.3g} vs crude {:.3g}", bj.relative_error(), crude.relative_error()));
    digest(o, bj);
    digest(o, crude);
    o.note(fmt::format("gap {:.2f} SE, relative SE ratio {:.3g}", gap / bj.std_error,
                       bj.relative_error() / crude.relative_error()));
    return o;
}

Outcome ruin_equivalence(unsigned workers) {
    Outcome o;
    RiskModel m;
    m.initial_surplus = 100.0;
    m.rates = {0.05, 0.05};
    m.losses.assign(2, Distribution::pareto(2.0, 1.0));
    const double asym = ruin_asymptotic(m);
    o.require(std::abs(asym - 1.729732e-4) <= 5e-11, fmt::format("asymptotic {:.7e}", asym));
    const auto psi = simulate_ruin(m, mc(1'000'000, 3, workers));
    o.require(std::abs(psi.value / asym - 1.0) <= 0.10, fmt::format("psi ratio {:.4f}", psi.value / asym));
    digest(o, psi);

    const auto grid = geometric_grid(10.0, 1e3, 11);
    const auto rows = ruin_sweep(m, grid, mc(1'000'000, 3, workers));
    std::size_t entered = rows.size();
    for (std::size_t i = rows.size(); i-- > 0;) {
        if (rows[i].ratio < 0.9 || rows[i].ratio > 1.1) break;
        entered = i;
    }
    o.require(entered < rows.size() && rows[entered].x <= 100.0 + 1e-9,
              entered < rows.size() ? fmt::format("band entered only at x={:.1f}", rows[entered].x)
                                    : std::string("ratio never stays in band"));
    for (const auto& r : rows) o.digest += hex(r.psi.value) + " " + hex(r.ratio) + "\n";
    o.note(fmt::format("psi/asym {:.4f}; in band from x={:.1f}", psi.value / asym,
                       entered < rows.size() ? rows[entered].x : NAN));
    return o;
}

Outcome band_negative_control(unsigned) {
    Outcome o;
    const auto d = Distribution::weibull(0.5, 1.0);
    const InsensitivityFunction h(find_breakpoints(d));
    const auto xs = geometric_grid(10.0, 1e6, 25);
    // Deviation of the scaled summand cX at weight c, shifted by ±h(x).
    auto scaled = [&d](double c, double x, double s) {
        const double up = std::expm1(d.log_tail_ratio((x + s) / c, x / c));
        const double down = std::expm1(d.log_tail_ratio((x - s) / c, x / c));
        return std::max(std::abs(up), std::abs(down));
    };
    const double x = xs.back();
    const double hx = h(x);
    const double outside = scaled(std::exp(-hx), x, hx);
    const double inside = scaled(weight_band_for(hx, 1.0).a, x, hx);
    o.require(outside > 0.5, fmt::format("deviation {:.4f} at a*(x)", outside));
    o.note(fmt::format("x={:.0e}: deviation {:.3g} at exp(-h), {:.3g} at h^-1", x, outside, inside));
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome(unsigned)> run;
    };
    const std::vector<Criterion> criteria{
        {"breakpoint construction", breakpoints_certified},
        {"h shape", h_shape},
        {"convolution oracle certificate", oracle_certificate},
        {"uniform shift insensitivity", uniform_shift},
        {"equivalence with common random numbers", equivalence_common_numbers},
        {"equivalence under pSQAI copulas", dependent_equivalence},
        {"big-jump estimator consistency", estimator_consistency},
        {"ruin asymptotics", ruin_equivalence},
        {"weight band negative control", band_negative_control},
    };

    int failures = 0;
    std::vector<std::string> digests(criteria.size());
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome out;
        try {
            out = criteria[i].run(1);
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = fmt::format("threw: {}", e.what());
        }
        digests[i] = out.digest;
        failures += !out.pass;
        fmt::print("{} {:2} {}: {}\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, out.detail);
        std::fflush(stdout);
    }

    Outcome determinism;
    for (std::size_t i = 4; i < 8; ++i) {
        try {
            const auto again = criteria[i].run(4);
            determinism.require(!digests[i].empty() && again.digest == digests[i],
                                fmt::format("criterion {} differs with 4 workers", i + 1));
        } catch (const std::exception& e) {
            determinism.require(false, fmt::format("criterion {} threw: {}", i + 1, e.what()));
        }
    }
    if (determinism.pass) determinism.note("criteria 5-8 identical with 1 and 4 workers");
    failures += !determinism.pass;
    fmt::print("{} 10 determinism across worker counts: {}\n", determinism.pass ? "PASS" : "FAIL", determinism.detail);
    return failures == 0 ? 0 : 1;
}
