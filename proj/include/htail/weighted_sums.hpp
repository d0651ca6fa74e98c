#pragma once

#include "htail/dependence.hpp"
#include "htail/distribution.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace htail {

/// Σ c_i X_i with the X_i drawn from `margins` under `dependence`.
struct WeightedSumProblem {
    std::vector<Distribution> margins;
    std::vector<double> weights;
    DependenceSpec dependence;

    std::size_t size() const { return margins.size(); }
    void validate() const;
    WeightedSumProblem with_weights(std::vector<double> w) const;
};

/// S = Σ c_i X_i, M = max_k Σ_{i<=k} c_i X_i, S⁺ = Σ c_i X_i⁺.
enum class Functional { Sum, MaxPartial, PositiveSum };

std::string to_string(Functional f);

struct TailEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::string method;
    std::uint64_t replicates = 0;
    std::uint64_t seed = 0;
    std::optional<double> error_bound;  // deterministic methods only

    double relative_error() const { return value > 0 ? std_error / value : 0.0; }
};

struct McOptions {
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

/// Indicator-mean estimate of P(functional > x).
TailEstimate crude_mc(const WeightedSumProblem& p, Functional f, double x, const McOptions& mc);

/// Conditional single-big-jump estimator for independent summands:
/// Σ_i P(c_i X_i > max(max_{j≠i} c_j X_j, x - Σ_{j≠i} c_j X_j)), averaged over replicates.
TailEstimate big_jump_mc(const WeightedSumProblem& p, Functional f, double x, const McOptions& mc);

/// Σ_i P(c_i X_i > x).
double asymptotic_approx(const WeightedSumProblem& p, double x);

struct OracleOptions {
    double rel_tol = 1e-4;                 // target half-width of the bracket, relative
    std::size_t max_points = 1u << 22;     // lattice size limit
};

class OracleError : public std::runtime_error {
public:
    OracleError(std::string what, double error_bound, std::size_t required_points)
        : std::runtime_error(std::move(what)), error_bound_(error_bound), required_points_(required_points) {}
    double error_bound() const { return error_bound_; }
    std::size_t required_points() const { return required_points_; }

private:
    double error_bound_;
    std::size_t required_points_;
};

struct OracleResult {
    double value = 0.0;   // bracket midpoint
    double lower = 0.0;
    double upper = 0.0;
    double error_bound = 0.0;  // half-width plus floating-point allowance
    double step = 0.0;
    std::size_t points = 0;
    double mass_defect = 0.0;  // |Σ pmf + lattice tail - 1| over the computed partial sums

    TailEstimate estimate() const;
};

/// Deterministic P(Σ c_i X_i⁺ > x) for independent summands (n <= 6), bracketed
/// by rounding every summand down and up to a common lattice.
OracleResult convolution_oracle_detail(const WeightedSumProblem& p, double x, const OracleOptions& options = {});
TailEstimate convolution_oracle(const WeightedSumProblem& p, double x, const OracleOptions& options = {});

enum class ShiftBackend { Oracle, BigJump };

struct ShiftOptions {
    ShiftBackend backend = ShiftBackend::Oracle;
    OracleOptions oracle;
    McOptions mc;
    double delta = 1.0;                              // band a = h^-delta, b = h^(1/2)
    std::optional<std::vector<double>> fixed_weights;  // skip the band scan
};

struct ShiftRow {
    double x;
    double h;
    double a;
    double b;
    std::vector<double> weights;
    double tail;        // P(S > x)
    double ratio_minus;  // P(S > x - h) / P(S > x)
    double ratio_plus;   // P(S > x + h) / P(S > x)
    double deviation;
};

struct ShiftReport {
    std::vector<ShiftRow> rows;
    std::vector<double> x;
    std::vector<double> max_deviation;  // per x, over the weight lattice
};

/// Worst |P(S > x ± h(x)) / P(S > x) - 1| over the corners and midpoints of
/// the weight band at each x (3^n weight vectors, n <= 4).
ShiftReport shift_insensitivity_check(const WeightedSumProblem& p, const std::function<double(double)>& h,
                                      const std::vector<double>& xs, const ShiftOptions& options = {});

/// Weight vectors spanned by per-coordinate values {a, (a+b)/2, b}.
std::vector<std::vector<double>> weight_lattice(double a, double b, std::size_t n);

enum class Assertion { Equivalence, LowerBound, None };

struct RatioEstimate {
    std::string name;
    double value;
    double std_error;
    Assertion assertion;
    bool ok;
};

struct EquivalenceRow {
    double x;
    std::vector<double> weights;
    TailEstimate sum;
    TailEstimate max_partial;
    TailEstimate positive_sum;
    double big_jump;
    std::vector<RatioEstimate> ratios;
    bool verdict;
};

struct EquivalenceReport {
    std::vector<EquivalenceRow> rows;
    bool ordering_holds = true;   // counts S <= M <= S⁺ on every row
    bool verdict = true;
};

struct EquivalenceOptions {
    McOptions mc;
    double tolerance = 0.05;  // pairwise ratios within max(tolerance, 3 SE) of 1
    std::optional<double> band_delta;  // scan the band from h instead of the fixed weights
};

/// Common-random-number estimates of S, M and S⁺ together with Σ P(c_i X_i > x).
/// With band_delta set, `h` supplies the band and every x scans its weight lattice.
EquivalenceReport equivalence_report(const WeightedSumProblem& p, const std::vector<double>& xs,
                                     const EquivalenceOptions& options,
                                     const std::function<double(double)>& h = {});

}  // namespace htail
