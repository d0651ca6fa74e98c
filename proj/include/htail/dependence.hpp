#pragma once

#include "htail/distribution.hpp"
#include "htail/random.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace htail {

enum class DependenceKind { Independent, Gaussian, Fgm };

/// Joint structure of a random vector: independence, an equicorrelated
/// Gaussian copula, or the pairwise Farlie-Gumbel-Morgenstern copula.
struct DependenceSpec {
    DependenceKind kind = DependenceKind::Independent;
    double parameter = 0.0;  // rho for Gaussian, theta for FGM

    static DependenceSpec independent() { return {}; }
    static DependenceSpec gaussian(double rho) { return {DependenceKind::Gaussian, rho}; }
    static DependenceSpec fgm(double theta) { return {DependenceKind::Fgm, theta}; }

    /// Throws std::invalid_argument when the parameter is outside the range
    /// that yields a valid copula in `dimension` dimensions.
    void validate(std::size_t dimension) const;
    bool is_independent() const { return kind == DependenceKind::Independent; }
    std::string describe() const;
};

/// Draws vectors with given marginals and copula. Holds scratch space, so use
/// one instance per worker.
class VectorSampler {
public:
    VectorSampler(DependenceSpec spec, std::vector<Distribution> margins);

    std::size_t dimension() const { return margins_.size(); }

    /// Survival levels q_i = F̄_i(X_i), jointly distributed by the copula.
    void sample_levels(Stream& stream, std::span<double> levels);
    /// One vector X with X_i = F̄_i^{-1}(q_i).
    void sample(Stream& stream, std::span<double> out);

private:
    DependenceSpec spec_;
    std::vector<Distribution> margins_;
    std::vector<double> cholesky_;  // lower-triangular, row-major, Gaussian only
    std::vector<double> normals_;
};

std::vector<double> sample_vector(const DependenceSpec& spec, const std::vector<Distribution>& margins,
                                  Stream& stream);

/// P(U > u | V > v) for an FGM(theta) pair on the uniform scale: (1-u)(1+theta·u·v).
double fgm_conditional_exceedance(double theta, double u, double v);

/// Draws the survival level of component i given the survival level of
/// component j, for the bivariate margin of the spec.
double conditional_level(const DependenceSpec& spec, double level_j, Stream& stream);

class InsufficientTailSamples : public std::runtime_error {
public:
    InsufficientTailSamples(std::string what, std::uint64_t achieved)
        : std::runtime_error(std::move(what)), achieved_(achieved) {}
    std::uint64_t achieved() const { return achieved_; }

private:
    std::uint64_t achieved_;
};

struct PsqaiOptions {
    std::uint64_t samples = 1'000'000;  // conditioned draws per (pair, threshold)
    std::uint64_t seed = 1;
    unsigned workers = 1;
    double tolerance = 0.05;  // final conditional probability must fall below this
};

struct PsqaiEntry {
    std::size_t i;
    std::size_t j;
    double threshold;
    double estimate;  // P(|X_i| > t | X_j > t)
    double std_error;
    std::uint64_t hits;                  // conditioning-event draws
    std::optional<double> closed_form;   // available for independent and FGM
};

struct PsqaiReport {
    std::vector<PsqaiEntry> entries;
    bool verdict = false;  // every pair trends down and ends below tolerance
};

/// Conditional exceedance estimates, sampling X_j > t directly through the
/// conditional copula so that every draw lands in the conditioning event.
PsqaiReport psqai_diagnostic(const DependenceSpec& spec, const std::vector<Distribution>& margins,
                             const std::vector<double>& thresholds, const PsqaiOptions& options = {});

}  // namespace htail
