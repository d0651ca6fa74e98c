#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <variant>

namespace htail {

class Stream;

/// Distribution classes from heavy-tail theory, used as a bitmask.
enum class TailClass : std::uint8_t {
    Long = 1u << 0,        // L
    Dominated = 1u << 1,   // D
    Consistent = 1u << 2,  // C
    Subexponential = 1u << 3,  // S
};

class ClassSet {
public:
    constexpr ClassSet() = default;
    constexpr ClassSet(std::initializer_list<TailClass> classes) {
        for (auto c : classes) bits_ |= static_cast<std::uint8_t>(c);
    }
    constexpr bool contains(TailClass c) const { return (bits_ & static_cast<std::uint8_t>(c)) != 0; }
    constexpr bool operator==(const ClassSet&) const = default;

    /// C subset of D∩L subset of S subset of L.
    constexpr bool respects_inclusions() const {
        using enum TailClass;
        if (contains(Consistent) && !(contains(Dominated) && contains(Long))) return false;
        if (contains(Dominated) && contains(Long) && !contains(Subexponential)) return false;
        if (contains(Subexponential) && !contains(Long)) return false;
        return true;
    }

    std::string to_string() const;

private:
    std::uint8_t bits_ = 0;
};

/// A tail probability together with its natural logarithm. The log channel
/// stays finite long after the value underflows to zero.
struct TailValue {
    double value;
    double log_value;
};

struct Pareto {
    double alpha;
    double scale;  // x_m, the left endpoint
};

/// Weibull with tail exp(-rate * x^shape), shape in (0,1).
struct Weibull {
    double shape;
    double rate;
};

struct Lognormal {
    double mu;
    double sigma;
};

/// Burr type XII: tail (1 + (x/scale)^c)^(-k).
struct Burr {
    double c;
    double k;
    double scale;
};

/// Light-tailed reference family, used only to self-test the machinery.
struct Exponential {
    double rate;
};

using Family = std::variant<Pareto, Weibull, Lognormal, Burr, Exponential>;

/// Immutable parametric marginal with closed-form tail and quantile.
///
/// Parameters are validated at construction; every query is a pure function
/// and safe to call concurrently.
class Distribution {
public:
    explicit Distribution(Family family);

    static Distribution pareto(double alpha, double scale);
    static Distribution weibull(double shape, double rate);
    static Distribution lognormal(double mu, double sigma);
    static Distribution burr(double c, double k, double scale);
    static Distribution exponential(double rate);

    const Family& family() const { return family_; }
    std::string name() const;
    std::string describe() const;

    /// Declared class memberships from standard theory.
    ClassSet memberships() const;

    double tail(double x) const;
    double log_tail(double x) const;
    TailValue tail_pair(double x) const;
    double cdf(double x) const;

    /// F̄(a) / F̄(b), evaluated so that tiny tails do not underflow.
    double tail_ratio(double a, double b) const;
    /// log(F̄(a) / F̄(b)).
    double log_tail_ratio(double a, double b) const;

    /// Smallest x with cdf(x) >= p; p in (0,1).
    double quantile(double p) const;
    /// Inverse of the tail: x with tail(x) = q; q in (0,1).
    double tail_quantile(double q) const;

    /// Inverse-transform draw x = F̄^{-1}(u) from one uniform of the stream.
    double sample(Stream& stream) const;

    /// Infimum of the support.
    double support_lower() const;
    /// Natural scale of the family, used to size search grids.
    double scale() const;

private:
    Family family_;
};

/// The law of c·X for X ~ base.
class WeightedMarginal {
public:
    WeightedMarginal(Distribution base, double weight);

    const Distribution& base() const { return base_; }
    double weight() const { return weight_; }

    double tail(double x) const { return base_.tail(x / weight_); }
    double log_tail(double x) const { return base_.log_tail(x / weight_); }

private:
    Distribution base_;
    double weight_;
};

/// Tail of the weighted marginal: exactly tail(base, x / c).
double weighted_tail(const WeightedMarginal& m, double x);

}  // namespace htail
