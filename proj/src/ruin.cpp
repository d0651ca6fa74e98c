#include "htail/ruin.hpp"

#include "htail/random.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace htail {

namespace {

bool nonnegative_losses(const RiskModel& m) {
    return std::all_of(m.losses.begin(), m.losses.end(),
                       [](const Distribution& d) { return d.support_lower() >= 0.0; });
}

constexpr std::uint64_t kRecursionCheckPaths = 10'000;

}  // namespace

std::vector<double> discount_factors(std::span<const double> rates) {
    std::vector<double> c;
    c.reserve(rates.size());
    double log_c = 0.0;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        if (!(rates[i] > -1.0) || !std::isfinite(rates[i]))
            throw std::domain_error(fmt::format("discount_factors: rate {} is {}; rates must exceed -1", i, rates[i]));
        log_c -= std::log1p(rates[i]);
        c.push_back(std::exp(log_c));
    }
    return c;
}

void RiskModel::validate() const {
    if (rates.empty()) throw std::invalid_argument("risk model: horizon must be >= 1");
    if (losses.size() != rates.size())
        throw std::invalid_argument(
            fmt::format("risk model: {} loss distributions for a horizon of {}", losses.size(), rates.size()));
    if (!(initial_surplus >= 0.0) || !std::isfinite(initial_surplus))
        throw std::domain_error(fmt::format("risk model: initial surplus must be >= 0 (got {})", initial_surplus));
    discount_factors(rates);
    dependence.validate(losses.size());
}

WeightedSumProblem RiskModel::discounted_problem() const {
    validate();
    return {losses, discount_factors(rates), dependence};
}

TailEstimate simulate_ruin(const RiskModel& m, const McOptions& mc, RuinMethod method) {
    const auto problem = m.discounted_problem();
    const bool big_jump_valid = m.dependence.is_independent() && nonnegative_losses(m);
    if (method == RuinMethod::BigJump && !big_jump_valid)
        throw std::invalid_argument("simulate_ruin: big-jump needs independent losses with nonnegative support");
    if (method == RuinMethod::Auto) method = big_jump_valid ? RuinMethod::BigJump : RuinMethod::Crude;

    const auto mismatches =
        surplus_recursion_mismatches(m, std::min<std::uint64_t>(mc.samples, kRecursionCheckPaths), mc.seed);
    if (mismatches != 0)
        throw std::logic_error(
            fmt::format("simulate_ruin: surplus recursion disagrees with discounted sums on {} paths", mismatches));

    // With nonnegative losses the partial sums increase, so M = S.
    if (method == RuinMethod::BigJump) {
        auto e = big_jump_mc(problem, Functional::Sum, m.initial_surplus, mc);
        e.method = "big_jump_mc";
        return e;
    }
    return crude_mc(problem, Functional::MaxPartial, m.initial_surplus, mc);
}

double ruin_asymptotic(const RiskModel& m) { return ruin_asymptotic(m, m.initial_surplus); }

double ruin_asymptotic(const RiskModel& m, double x) { return asymptotic_approx(m.discounted_problem(), x); }

std::uint64_t surplus_recursion_mismatches(const RiskModel& m, std::uint64_t paths, std::uint64_t seed) {
    m.validate();
    const auto c = discount_factors(m.rates);
    const std::size_t n = m.horizon();
    const BlockPlan plan{paths};
    std::uint64_t mismatches = 0;
    VectorSampler sampler(m.dependence, m.losses);
    std::vector<double> x(n);
    for (std::uint64_t b = 0; b < plan.blocks(); ++b) {
        Stream stream(seed, b);
        for (std::uint64_t r = 0; r < plan.size(b); ++r) {
            sampler.sample(stream, x);
            double u = m.initial_surplus, partial = 0.0;
            double closest = std::numeric_limits<double>::infinity();
            bool ruined_u = false, ruined_sum = false;
            for (std::size_t k = 0; k < n; ++k) {
                u = u * (1.0 + m.rates[k]) - x[k];
                partial += c[k] * x[k];
                ruined_u = ruined_u || u < 0.0;
                ruined_sum = ruined_sum || partial > m.initial_surplus;
                closest = std::min(closest, std::abs(partial - m.initial_surplus));
            }
            // Floating-point rounding can only matter on the boundary itself.
            if (ruined_u != ruined_sum && closest > 1e-9 * (1.0 + m.initial_surplus)) ++mismatches;
        }
    }
    return mismatches;
}

std::vector<RuinRow> ruin_sweep(const RiskModel& m, const std::vector<double>& xs, const McOptions& mc,
                                RuinMethod method) {
    std::vector<RuinRow> rows;
    for (double x : xs) {
        RiskModel at = m;
        at.initial_surplus = x;
        const auto psi = simulate_ruin(at, mc, method);
        const double asym = ruin_asymptotic(at);
        rows.push_back({x, psi, asym, psi.value / asym});
    }
    return rows;
}

}  // namespace htail
