#include "htail/distribution.hpp"

#include "htail/normal.hpp"
#include "htail/random.hpp"

#include <cmath>
#include <fmt/format.h>
#include <stdexcept>

namespace htail {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

void require(bool ok, const char* family, const char* field, const char* rule, double got) {
    if (!ok) throw std::invalid_argument(fmt::format("{}: {} must be {} (got {})", family, field, rule, got));
}

void validate(const Family& f) {
    std::visit(Overloaded{
                   [](const Pareto& d) {
                       require(d.alpha > 0 && std::isfinite(d.alpha), "pareto", "alpha", "> 0", d.alpha);
                       require(d.scale > 0 && std::isfinite(d.scale), "pareto", "scale", "> 0", d.scale);
                   },
                   [](const Weibull& d) {
                       require(d.shape > 0 && d.shape < 1, "weibull", "shape", "in (0,1)", d.shape);
                       require(d.rate > 0 && std::isfinite(d.rate), "weibull", "rate", "> 0", d.rate);
                   },
                   [](const Lognormal& d) {
                       require(std::isfinite(d.mu), "lognormal", "mu", "finite", d.mu);
                       require(d.sigma > 0 && std::isfinite(d.sigma), "lognormal", "sigma", "> 0", d.sigma);
                   },
                   [](const Burr& d) {
                       require(d.c > 0 && std::isfinite(d.c), "burr", "c", "> 0", d.c);
                       require(d.k > 0 && std::isfinite(d.k), "burr", "k", "> 0", d.k);
                       require(d.scale > 0 && std::isfinite(d.scale), "burr", "scale", "> 0", d.scale);
                   },
                   [](const Exponential& d) {
                       require(d.rate > 0 && std::isfinite(d.rate), "exponential", "rate", "> 0", d.rate);
                   },
               },
               f);
}

void require_probability(double p, const char* what) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error(fmt::format("{}: level must lie in (0,1) (got {})", what, p));
}

// log(1 + e^t) without overflow.
double log1p_exp(double t) { return t > 30.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

}  // namespace

std::string ClassSet::to_string() const {
    std::string out;
    auto add = [&](TailClass c, const char* tag) {
        if (!contains(c)) return;
        if (!out.empty()) out += ',';
        out += tag;
    };
    add(TailClass::Long, "L");
    add(TailClass::Dominated, "D");
    add(TailClass::Consistent, "C");
    add(TailClass::Subexponential, "S");
    return out;
}

Distribution::Distribution(Family family) : family_(family) { validate(family_); }

Distribution Distribution::pareto(double alpha, double scale) { return Distribution(Pareto{alpha, scale}); }
Distribution Distribution::weibull(double shape, double rate) { return Distribution(Weibull{shape, rate}); }
Distribution Distribution::lognormal(double mu, double sigma) { return Distribution(Lognormal{mu, sigma}); }
Distribution Distribution::burr(double c, double k, double scale) { return Distribution(Burr{c, k, scale}); }
Distribution Distribution::exponential(double rate) { return Distribution(Exponential{rate}); }

std::string Distribution::name() const {
    return std::visit(Overloaded{
                          [](const Pareto&) { return std::string("pareto"); },
                          [](const Weibull&) { return std::string("weibull"); },
                          [](const Lognormal&) { return std::string("lognormal"); },
                          [](const Burr&) { return std::string("burr"); },
                          [](const Exponential&) { return std::string("exponential"); },
                      },
                      family_);
}

std::string Distribution::describe() const {
    return std::visit(
        Overloaded{
            [](const Pareto& d) { return fmt::format("pareto(alpha={}, scale={})", d.alpha, d.scale); },
            [](const Weibull& d) { return fmt::format("weibull(shape={}, rate={})", d.shape, d.rate); },
            [](const Lognormal& d) { return fmt::format("lognormal(mu={}, sigma={})", d.mu, d.sigma); },
            [](const Burr& d) { return fmt::format("burr(c={}, k={}, scale={})", d.c, d.k, d.scale); },
            [](const Exponential& d) { return fmt::format("exponential(rate={})", d.rate); },
        },
        family_);
}

ClassSet Distribution::memberships() const {
    using enum TailClass;
    return std::visit(Overloaded{
                          [](const Pareto&) { return ClassSet{Long, Dominated, Consistent, Subexponential}; },
                          [](const Weibull&) { return ClassSet{Long, Subexponential}; },
                          [](const Lognormal&) { return ClassSet{Long, Subexponential}; },
                          [](const Burr&) { return ClassSet{Long, Dominated, Consistent, Subexponential}; },
                          [](const Exponential&) { return ClassSet{}; },
                      },
                      family_);
}

double Distribution::log_tail(double x) const {
    return std::visit(Overloaded{
                          [x](const Pareto& d) { return x <= d.scale ? 0.0 : -d.alpha * std::log(x / d.scale); },
                          [x](const Weibull& d) { return x <= 0 ? 0.0 : -d.rate * std::pow(x, d.shape); },
                          [x](const Lognormal& d) {
                              return x <= 0 ? 0.0 : normal::log_tail((std::log(x) - d.mu) / d.sigma);
                          },
                          [x](const Burr& d) {
                              return x <= 0 ? 0.0 : -d.k * log1p_exp(d.c * std::log(x / d.scale));
                          },
                          [x](const Exponential& d) { return x <= 0 ? 0.0 : -d.rate * x; },
                      },
                      family_);
}

double Distribution::tail(double x) const {
    return std::visit(Overloaded{
                          [x](const Pareto& d) { return x <= d.scale ? 1.0 : std::pow(x / d.scale, -d.alpha); },
                          [x](const Lognormal& d) {
                              return x <= 0 ? 1.0 : normal::tail((std::log(x) - d.mu) / d.sigma);
                          },
                          [this, x](const auto&) { return std::exp(log_tail(x)); },
                      },
                      family_);
}

TailValue Distribution::tail_pair(double x) const { return {tail(x), log_tail(x)}; }

double Distribution::cdf(double x) const { return 1.0 - tail(x); }

double Distribution::tail_ratio(double a, double b) const {
    if (const auto* d = std::get_if<Pareto>(&family_)) {
        if (a <= d->scale && b <= d->scale) return 1.0;
        if (b <= d->scale) return tail(a);
        if (a <= d->scale) return std::pow(b / d->scale, d->alpha);
        return std::pow(b / a, d->alpha);
    }
    if (const auto* d = std::get_if<Weibull>(&family_)) {
        const double pa = a <= 0 ? 0.0 : std::pow(a, d->shape);
        const double pb = b <= 0 ? 0.0 : std::pow(b, d->shape);
        return std::exp(-d->rate * (pa - pb));
    }
    return std::exp(log_tail(a) - log_tail(b));
}

double Distribution::log_tail_ratio(double a, double b) const {
    if (const auto* d = std::get_if<Pareto>(&family_)) {
        if (a <= d->scale && b <= d->scale) return 0.0;
        if (b <= d->scale) return log_tail(a);
        if (a <= d->scale) return d->alpha * std::log(b / d->scale);
        return d->alpha * std::log(b / a);
    }
    if (const auto* d = std::get_if<Weibull>(&family_)) {
        const double pa = a <= 0 ? 0.0 : std::pow(a, d->shape);
        const double pb = b <= 0 ? 0.0 : std::pow(b, d->shape);
        return -d->rate * (pa - pb);
    }
    return log_tail(a) - log_tail(b);
}

double Distribution::quantile(double p) const {
    require_probability(p, "quantile");
    return std::visit(Overloaded{
                          [p](const Pareto& d) {
                              // 1 - p is exact for p >= 1/2
                              if (p >= 0.5) return d.scale * std::pow(1.0 - p, -1.0 / d.alpha);
                              return d.scale * std::exp(-std::log1p(-p) / d.alpha);
                          },
                          [p](const Weibull& d) { return std::pow(-std::log1p(-p) / d.rate, 1.0 / d.shape); },
                          [p](const Lognormal& d) { return std::exp(d.mu + d.sigma * normal::quantile(p)); },
                          [p](const Burr& d) {
                              return d.scale * std::pow(std::expm1(-std::log1p(-p) / d.k), 1.0 / d.c);
                          },
                          [p](const Exponential& d) { return -std::log1p(-p) / d.rate; },
                      },
                      family_);
}

double Distribution::tail_quantile(double q) const {
    require_probability(q, "tail_quantile");
    return std::visit(Overloaded{
                          [q](const Pareto& d) { return d.scale * std::pow(q, -1.0 / d.alpha); },
                          [q](const Weibull& d) { return std::pow(-std::log(q) / d.rate, 1.0 / d.shape); },
                          [q](const Lognormal& d) { return std::exp(d.mu + d.sigma * normal::tail_inverse(q)); },
                          [q](const Burr& d) {
                              return d.scale * std::pow(std::expm1(-std::log(q) / d.k), 1.0 / d.c);
                          },
                          [q](const Exponential& d) { return -std::log(q) / d.rate; },
                      },
                      family_);
}

double Distribution::sample(Stream& stream) const { return tail_quantile(stream.uniform()); }

double Distribution::support_lower() const {
    if (const auto* d = std::get_if<Pareto>(&family_)) return d->scale;
    return 0.0;
}

double Distribution::scale() const {
    return std::visit(Overloaded{
                          [](const Pareto& d) { return d.scale; },
                          [](const Weibull& d) { return std::pow(1.0 / d.rate, 1.0 / d.shape); },
                          [](const Lognormal& d) { return std::exp(d.mu); },
                          [](const Burr& d) { return d.scale; },
                          [](const Exponential& d) { return 1.0 / d.rate; },
                      },
                      family_);
}

WeightedMarginal::WeightedMarginal(Distribution base, double weight) : base_(std::move(base)), weight_(weight) {
    if (!(weight > 0.0) || !std::isfinite(weight))
        throw std::domain_error(fmt::format("weighted marginal: weight must be > 0 (got {})", weight));
}

double weighted_tail(const WeightedMarginal& m, double x) { return m.tail(x); }

}  // namespace htail
