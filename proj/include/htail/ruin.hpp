#pragma once

#include "htail/dependence.hpp"
#include "htail/weighted_sums.hpp"

#include <span>
#include <vector>

namespace htail {

/// c_i = Π_{j<=i} (1 + r_j)^(-1). Every rate must exceed -1.
std::vector<double> discount_factors(std::span<const double> rates);

/// Discrete-time surplus U_0 = x, U_k = U_{k-1}(1 + r_k) - X_k over rates.size() periods.
struct RiskModel {
    double initial_surplus = 0.0;
    std::vector<double> rates;
    std::vector<Distribution> losses;
    DependenceSpec dependence;

    std::size_t horizon() const { return rates.size(); }
    void validate() const;
    /// Σ c_i X_i with the discount factors as weights.
    WeightedSumProblem discounted_problem() const;
};

enum class RuinMethod { Auto, Crude, BigJump };

/// ψ(x; n) = P(max_k Σ_{i<=k} c_i X_i > x). Auto uses the big-jump estimator
/// when losses are independent with nonnegative support (then the maximum is
/// the full sum), and crude Monte Carlo otherwise.
TailEstimate simulate_ruin(const RiskModel& m, const McOptions& mc, RuinMethod method = RuinMethod::Auto);

/// Σ_i F̄_i(x / c_i) at x = initial surplus.
double ruin_asymptotic(const RiskModel& m);
double ruin_asymptotic(const RiskModel& m, double x);

/// Number of paths on which the undiscounted recursion and the discounted
/// partial sums disagree about ruin. Zero is expected.
std::uint64_t surplus_recursion_mismatches(const RiskModel& m, std::uint64_t paths, std::uint64_t seed);

struct RuinRow {
    double x;
    TailEstimate psi;
    double asymptotic;
    double ratio;
};

std::vector<RuinRow> ruin_sweep(const RiskModel& m, const std::vector<double>& xs, const McOptions& mc,
                                RuinMethod method = RuinMethod::Auto);

}  // namespace htail
