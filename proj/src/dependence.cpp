#include "htail/dependence.hpp"

#include "htail/normal.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace htail {

namespace {

// Inverse of the FGM conditional CDF v + a·v(1-v) = w, in the cancellation-free form.
double fgm_conditional_inverse(double a, double w) {
    a = std::clamp(a, -1.0, 1.0);
    const double b = 1.0 + a;
    return 2.0 * w / (b + std::sqrt(b * b - 4.0 * a * w));
}

std::vector<double> equicorrelation_cholesky(double rho, std::size_t n) {
    std::vector<double> l(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = (i == j) ? 1.0 : rho;
            for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
            if (i == j) {
                if (!(s > 0)) throw std::invalid_argument(fmt::format("gaussian copula: rho={} is not positive definite in {} dimensions", rho, n));
                l[i * n + i] = std::sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    return l;
}

}  // namespace

void DependenceSpec::validate(std::size_t dimension) const {
    if (dimension < 1) throw std::invalid_argument("dependence: dimension must be >= 1");
    const auto n = static_cast<double>(dimension);
    switch (kind) {
        case DependenceKind::Independent: return;
        case DependenceKind::Gaussian:
            if (!(parameter > -1.0 && parameter < 1.0))
                throw std::invalid_argument(fmt::format("gaussian copula: rho must lie in (-1,1) (got {})", parameter));
            if (dimension > 1 && !(parameter > -1.0 / (n - 1.0)))
                throw std::invalid_argument(
                    fmt::format("gaussian copula: rho must exceed {} in {} dimensions (got {})", -1.0 / (n - 1.0), dimension, parameter));
            return;
        case DependenceKind::Fgm: {
            if (!(parameter >= -1.0 && parameter <= 1.0))
                throw std::invalid_argument(fmt::format("fgm copula: theta must lie in [-1,1] (got {})", parameter));
            // Density 1 + theta·Σ_{i<j} e_i e_j over sign vectors e must stay >= 0.
            const double pair_max = n * (n - 1.0) / 2.0;
            const double pair_min = -std::floor(n / 2.0);
            const bool ok = dimension < 2 || (1.0 + parameter * pair_max >= 0 && 1.0 + parameter * pair_min >= 0);
            if (!ok)
                throw std::invalid_argument(
                    fmt::format("fgm copula: theta={} gives a negative density in {} dimensions", parameter, dimension));
            return;
        }
    }
}

std::string DependenceSpec::describe() const {
    switch (kind) {
        case DependenceKind::Independent: return "independent";
        case DependenceKind::Gaussian: return fmt::format("gaussian(rho={})", parameter);
        case DependenceKind::Fgm: return fmt::format("fgm(theta={})", parameter);
    }
    return "independent";
}

VectorSampler::VectorSampler(DependenceSpec spec, std::vector<Distribution> margins)
    : spec_(spec), margins_(std::move(margins)) {
    spec_.validate(margins_.size());
    if (spec_.kind == DependenceKind::Gaussian) {
        cholesky_ = equicorrelation_cholesky(spec_.parameter, margins_.size());
        normals_.resize(margins_.size());
    }
}

void VectorSampler::sample_levels(Stream& stream, std::span<double> levels) {
    const std::size_t n = margins_.size();
    if (levels.size() != n) throw std::invalid_argument("sample_levels: dimension mismatch");
    switch (spec_.kind) {
        case DependenceKind::Independent:
            for (auto& q : levels) q = stream.uniform();
            return;
        case DependenceKind::Gaussian:
            for (auto& z : normals_) z = normal::quantile(stream.uniform());
            for (std::size_t i = 0; i < n; ++i) {
                double z = 0.0;
                for (std::size_t k = 0; k <= i; ++k) z += cholesky_[i * n + k] * normals_[k];
                levels[i] = normal::tail(z);
            }
            return;
        case DependenceKind::Fgm: {
            // Sequential conditional inversion. The survival copula of the
            // pairwise FGM is the same FGM, so levels can be drawn directly.
            const double theta = spec_.parameter;
            double sum = 0.0;    // Σ_{i<k} e_i
            double pairs = 0.0;  // Σ_{i<j<k} e_i e_j
            for (std::size_t k = 0; k < n; ++k) {
                const double denom = 1.0 + theta * pairs;
                const double a = denom > 0.0 ? theta * sum / denom : 0.0;
                const double q = fgm_conditional_inverse(a, stream.uniform());
                const double e = 1.0 - 2.0 * q;
                pairs += e * sum;
                sum += e;
                levels[k] = q;
            }
            return;
        }
    }
}

void VectorSampler::sample(Stream& stream, std::span<double> out) {
    sample_levels(stream, out);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = margins_[i].tail_quantile(out[i]);
}

std::vector<double> sample_vector(const DependenceSpec& spec, const std::vector<Distribution>& margins,
                                  Stream& stream) {
    if (margins.empty()) throw std::invalid_argument("sample_vector: no margins");
    VectorSampler sampler(spec, margins);
    std::vector<double> x(margins.size());
    sampler.sample(stream, x);
    return x;
}

double fgm_conditional_exceedance(double theta, double u, double v) { return (1.0 - u) * (1.0 + theta * u * v); }

double conditional_level(const DependenceSpec& spec, double level_j, Stream& stream) {
    switch (spec.kind) {
        case DependenceKind::Independent: return stream.uniform();
        case DependenceKind::Gaussian: {
            const double rho = spec.parameter;
            const double zj = normal::tail_inverse(level_j);
            const double zi = rho * zj + std::sqrt(1.0 - rho * rho) * normal::quantile(stream.uniform());
            return normal::tail(zi);
        }
        case DependenceKind::Fgm:
            return fgm_conditional_inverse(spec.parameter * (1.0 - 2.0 * level_j), stream.uniform());
    }
    return stream.uniform();
}

PsqaiReport psqai_diagnostic(const DependenceSpec& spec, const std::vector<Distribution>& margins,
                             const std::vector<double>& thresholds, const PsqaiOptions& options) {
    const std::size_t n = margins.size();
    spec.validate(n);
    if (n < 2) throw std::invalid_argument("psqai_diagnostic: need at least two components");
    for (std::size_t k = 1; k < thresholds.size(); ++k)
        if (!(thresholds[k] > thresholds[k - 1]))
            throw std::invalid_argument("psqai_diagnostic: thresholds must increase");
    if (options.samples < 100)
        throw InsufficientTailSamples(
            fmt::format("insufficient-tail-samples: {} conditioned draws, need at least 100", options.samples),
            options.samples);

    PsqaiReport report;
    report.verdict = true;
    std::uint64_t stream_index = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            std::vector<PsqaiEntry> pair;
            for (double t : thresholds) {
                const double qj = margins[j].tail(t);
                if (qj <= 0.0)
                    throw InsufficientTailSamples(
                        fmt::format("insufficient-tail-samples: P(X_{} > {}) underflows; no conditioned draws", j, t), 0);

                const BlockPlan plan{options.samples};
                std::vector<std::uint64_t> counts(plan.blocks(), 0);
                const std::uint64_t base = stream_index++;
                for_each_block(plan.blocks(), options.workers, [&](std::uint64_t b) {
                    Stream stream(options.seed, (base << 32) | b);
                    std::uint64_t hits = 0;
                    for (std::uint64_t r = 0; r < plan.size(b); ++r) {
                        const double level_j = qj * stream.uniform();
                        const double level_i = conditional_level(spec, level_j, stream);
                        const double xi = margins[i].tail_quantile(level_i);
                        if (std::abs(xi) > t) ++hits;
                    }
                    counts[b] = hits;
                });
                std::uint64_t hits = 0;
                for (auto c : counts) hits += c;
                const double p = static_cast<double>(hits) / static_cast<double>(options.samples);

                PsqaiEntry e{i, j, t, p, std::sqrt(p * (1.0 - p) / static_cast<double>(options.samples)),
                             options.samples, std::nullopt};
                const double ti = margins[i].tail(t) + margins[i].cdf(-t);
                if (spec.kind == DependenceKind::Independent) e.closed_form = ti;
                if (spec.kind == DependenceKind::Fgm && margins[i].cdf(-t) == 0.0)
                    e.closed_form = fgm_conditional_exceedance(spec.parameter, margins[i].cdf(t), margins[j].cdf(t));
                pair.push_back(e);
            }
            for (std::size_t k = 1; k < pair.size(); ++k) {
                const double se = std::hypot(pair[k].std_error, pair[k - 1].std_error);
                if (pair[k].estimate > pair[k - 1].estimate + 3.0 * se) report.verdict = false;
            }
            if (!pair.empty() && !(pair.back().estimate <= options.tolerance)) report.verdict = false;
            report.entries.insert(report.entries.end(), pair.begin(), pair.end());
        }
    }
    return report;
}

}  // namespace htail
