#include "htail/weighted_sums.hpp"

#include "htail/h_construct.hpp"
#include "htail/random.hpp"

#include <fftw3.h>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

namespace htail {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

bool all_in(const std::vector<Distribution>& margins, std::initializer_list<TailClass> classes) {
    return std::all_of(margins.begin(), margins.end(), [&](const Distribution& d) {
        return std::all_of(classes.begin(), classes.end(), [&](TailClass c) { return d.memberships().contains(c); });
    });
}

TailEstimate binomial_estimate(std::uint64_t hits, const McOptions& mc, std::string method) {
    const auto n = static_cast<double>(mc.samples);
    const double p = static_cast<double>(hits) / n;
    return {p, std::sqrt(p * (1.0 - p) / n), std::move(method), mc.samples, mc.seed, std::nullopt};
}

// ---------------------------------------------------------------- crude, CRN

struct WeightGroup {
    std::vector<double> weights;
    std::vector<std::size_t> cases;  // indices into the case list
};

struct Counts {
    std::vector<std::uint64_t> sum, max_partial, positive_sum;
    explicit Counts(std::size_t n = 0) : sum(n, 0), max_partial(n, 0), positive_sum(n, 0) {}
};

// All functionals at all (weights, x) cases from one set of sampled vectors.
Counts crude_counts(const WeightedSumProblem& p, const std::vector<WeightGroup>& groups, const std::vector<double>& xs,
                    const McOptions& mc) {
    if (mc.samples < 1) throw std::invalid_argument("crude_mc: need at least one sample");
    const BlockPlan plan{mc.samples};
    std::vector<Counts> per_block(plan.blocks());
    for_each_block(plan.blocks(), mc.workers, [&](std::uint64_t b) {
        VectorSampler sampler(p.dependence, p.margins);
        Stream stream(mc.seed, b);
        std::vector<double> v(p.size());
        Counts c(xs.size());
        for (std::uint64_t r = 0; r < plan.size(b); ++r) {
            sampler.sample(stream, v);
            for (const auto& g : groups) {
                double sum = 0.0, max_partial = -std::numeric_limits<double>::infinity(), positive = 0.0;
                for (std::size_t i = 0; i < v.size(); ++i) {
                    const double y = g.weights[i] * v[i];
                    sum += y;
                    max_partial = std::max(max_partial, sum);
                    positive += std::max(y, 0.0);
                }
                for (auto k : g.cases) {
                    c.sum[k] += sum > xs[k];
                    c.max_partial[k] += max_partial > xs[k];
                    c.positive_sum[k] += positive > xs[k];
                }
            }
        }
        per_block[b] = std::move(c);
    });
    Counts total(xs.size());
    for (const auto& c : per_block)
        for (std::size_t k = 0; k < xs.size(); ++k) {
            total.sum[k] += c.sum[k];
            total.max_partial[k] += c.max_partial[k];
            total.positive_sum[k] += c.positive_sum[k];
        }
    return total;
}

// ---------------------------------------------------------------- oracle

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwBuffer {
    void* ptr;
    explicit FftwBuffer(std::size_t bytes) : ptr(fftw_malloc(bytes)) {
        if (!ptr) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(ptr); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
};

double l2_norm(const std::vector<double>& a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

// c = (a * b)[0, len). abs_err receives a per-entry absolute error bound.
std::vector<double> convolve_fft(const std::vector<double>& a, const std::vector<double>& b, std::size_t len,
                                 double& abs_err) {
    std::size_t n = 1;
    while (n < 2 * len) n <<= 1;
    const std::size_t half = n / 2 + 1;
    FftwBuffer in(sizeof(double) * n), fa(sizeof(fftw_complex) * half), fb(sizeof(fftw_complex) * half);
    auto* x = static_cast<double*>(in.ptr);
    auto* ca = static_cast<fftw_complex*>(fa.ptr);
    auto* cb = static_cast<fftw_complex*>(fb.ptr);

    fftw_plan fwd_a, fwd_b, inv;
    {
        std::lock_guard lock(fftw_planner_mutex());
        fwd_a = fftw_plan_dft_r2c_1d(static_cast<int>(n), x, ca, FFTW_ESTIMATE);
        fwd_b = fftw_plan_dft_r2c_1d(static_cast<int>(n), x, cb, FFTW_ESTIMATE);
        inv = fftw_plan_dft_c2r_1d(static_cast<int>(n), ca, x, FFTW_ESTIMATE);
    }
    auto load = [&](const std::vector<double>& v) {
        std::fill(x, x + n, 0.0);
        std::copy_n(v.begin(), std::min(len, v.size()), x);
    };
    load(a);
    fftw_execute(fwd_a);
    load(b);
    fftw_execute(fwd_b);
    for (std::size_t k = 0; k < half; ++k) {
        const double re = ca[k][0] * cb[k][0] - ca[k][1] * cb[k][1];
        const double im = ca[k][0] * cb[k][1] + ca[k][1] * cb[k][0];
        ca[k][0] = re;
        ca[k][1] = im;
    }
    fftw_execute(inv);
    std::vector<double> c(len);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < len; ++k) c[k] = std::max(0.0, x[k] * scale);
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(fwd_a);
        fftw_destroy_plan(fwd_b);
        fftw_destroy_plan(inv);
    }
    // Forward/inverse transform error, 2-norm based, with unit-mass inputs.
    abs_err = 30.0 * kEps * std::log2(static_cast<double>(n)) * (l2_norm(a) + l2_norm(b));
    return c;
}

std::vector<double> convolve_direct(const std::vector<double>& a, const std::vector<double>& b, std::size_t len) {
    std::vector<double> c(len, 0.0);
    for (std::size_t i = 0; i < len; ++i) {
        if (a[i] == 0.0) continue;
        const double ai = a[i];
        for (std::size_t j = 0; i + j < len; ++j) c[i + j] += ai * b[j];
    }
    return c;
}

struct Lattice {
    std::vector<double> tail;  // P(ceil(c X⁺ / step) > j)
    std::vector<double> pmf;   // P(ceil(c X⁺ / step) = j)
};

Lattice lattice_for(const Distribution& d, double weight, double step, std::size_t top) {
    Lattice l;
    l.tail.resize(top + 1);
    l.pmf.resize(top + 1);
    for (std::size_t j = 0; j <= top; ++j) l.tail[j] = d.tail(static_cast<double>(j) * step / weight);
    l.pmf[0] = 1.0 - l.tail[0];
    for (std::size_t j = 1; j <= top; ++j) l.pmf[j] = l.tail[j - 1] - l.tail[j];
    return l;
}

// Upper and lower brackets for a lattice with x at index m_hi - 1 ... see oracle_bracket.
OracleResult oracle_bracket(const WeightedSumProblem& p, double x, std::size_t m) {
    const std::size_t n = p.size();
    const double step = x / static_cast<double>(m);
    // x / step lies within rounding of m: the event S_up > x is contained in
    // {J >= m} and S_lo > x contains {J > m + n + 1}.
    const std::size_t upper_idx = m - 1;
    const std::size_t lower_idx = m + n + 1;
    const std::size_t top = lower_idx;
    const std::size_t len = top + 1;

    std::vector<Lattice> lat;
    lat.reserve(n);
    for (std::size_t i = 0; i < n; ++i) lat.push_back(lattice_for(p.margins[i], p.weights[i], step, top));

    OracleResult r;
    r.step = step;
    r.points = len;

    std::vector<double> pmf = lat[0].pmf;
    double pmf_abs_err = 0.0;
    double pmf_rel_err = 2.0 * kEps;
    double t_hi = lat[0].tail[upper_idx], t_lo = lat[0].tail[lower_idx];
    double err_hi = kEps * t_hi, err_lo = kEps * t_lo;

    auto mass_defect = [&](const std::vector<double>& q, double tail_top) {
        double s = tail_top;
        for (double v : q) s += v;
        return std::abs(s - 1.0);
    };
    r.mass_defect = mass_defect(pmf, t_lo);

    for (std::size_t k = 1; k < n; ++k) {
        const auto& y = lat[k];
        auto tail_through = [&](std::size_t idx, double t_prev, double& err) {
            double s = 0.0, tail_mass = 0.0;
            for (std::size_t j = 0; j <= idx; ++j) {
                s += pmf[j] * y.tail[idx - j];
                tail_mass += y.tail[idx - j];
            }
            const double t = s + t_prev;
            err += pmf_abs_err * tail_mass + (pmf_rel_err + static_cast<double>(idx + 2) * kEps) * t;
            return t;
        };
        const double new_hi = tail_through(upper_idx, t_hi, err_hi);
        const double new_lo = tail_through(lower_idx, t_lo, err_lo);
        t_hi = new_hi;
        t_lo = new_lo;
        if (k + 1 < n) {
            if (len <= 4096) {
                pmf = convolve_direct(pmf, y.pmf, len);
                pmf_rel_err += static_cast<double>(len) * kEps;
            } else {
                double fft_err = 0.0;
                pmf = convolve_fft(pmf, y.pmf, len, fft_err);
                pmf_abs_err = pmf_abs_err + fft_err + pmf_rel_err;
            }
            r.mass_defect = std::max(r.mass_defect, mass_defect(pmf, t_lo));
        }
    }
    r.upper = std::min(1.0, t_hi + err_hi);
    r.lower = std::max(0.0, t_lo - err_lo);
    r.value = 0.5 * (r.upper + r.lower);
    r.error_bound = 0.5 * (r.upper - r.lower);
    return r;
}

}  // namespace

void WeightedSumProblem::validate() const {
    if (margins.empty()) throw std::invalid_argument("weighted sum: no margins");
    if (weights.size() != margins.size())
        throw std::invalid_argument(
            fmt::format("weighted sum: {} weights for {} margins", weights.size(), margins.size()));
    for (double c : weights)
        if (!(c > 0) || !std::isfinite(c))
            throw std::domain_error(fmt::format("weighted sum: weights must be > 0 (got {})", c));
    dependence.validate(margins.size());
}

WeightedSumProblem WeightedSumProblem::with_weights(std::vector<double> w) const {
    WeightedSumProblem q{margins, std::move(w), dependence};
    q.validate();
    return q;
}

std::string to_string(Functional f) {
    switch (f) {
        case Functional::Sum: return "S";
        case Functional::MaxPartial: return "M";
        case Functional::PositiveSum: return "S+";
    }
    return "S";
}

TailEstimate crude_mc(const WeightedSumProblem& p, Functional f, double x, const McOptions& mc) {
    p.validate();
    const auto counts = crude_counts(p, {{p.weights, {0}}}, {x}, mc);
    const std::uint64_t hits = f == Functional::Sum          ? counts.sum[0]
                               : f == Functional::MaxPartial ? counts.max_partial[0]
                                                             : counts.positive_sum[0];
    return binomial_estimate(hits, mc, "crude_mc");
}

TailEstimate big_jump_mc(const WeightedSumProblem& p, Functional f, double x, const McOptions& mc) {
    p.validate();
    if (f == Functional::MaxPartial) throw std::invalid_argument("big_jump_mc: functional must be S or S+");
    if (!p.dependence.is_independent()) throw std::invalid_argument("estimator-requires-independence");
    if (mc.samples < 2) throw std::invalid_argument("big_jump_mc: need at least two replicates");
    const bool positive = f == Functional::PositiveSum;
    const std::size_t n = p.size();

    // Certain event: the functional's smallest possible value already exceeds x.
    double floor_value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = p.margins[i].support_lower();
        floor_value += p.weights[i] * (positive ? std::max(lo, 0.0) : lo);
    }
    if (x < floor_value) return {1.0, 0.0, "big_jump_mc", mc.samples, mc.seed, std::nullopt};

    auto summand_tail = [&](std::size_t i, double t) {
        if (positive && t < 0) return 1.0;
        return p.margins[i].tail(t / p.weights[i]);
    };
    if (n == 1) return {summand_tail(0, x), 0.0, "big_jump_mc", mc.samples, mc.seed, std::nullopt};

    const BlockPlan plan{mc.samples};
    std::vector<std::pair<double, double>> moments(plan.blocks());
    for_each_block(plan.blocks(), mc.workers, [&](std::uint64_t b) {
        Stream stream(mc.seed, b);
        std::vector<double> y(n), prefix_sum(n + 1), suffix_sum(n + 1), prefix_max(n + 1), suffix_max(n + 1);
        constexpr double kLow = -std::numeric_limits<double>::infinity();
        double s1 = 0.0, s2 = 0.0;
        for (std::uint64_t r = 0; r < plan.size(b); ++r) {
            for (std::size_t i = 0; i < n; ++i) {
                const double v = p.weights[i] * p.margins[i].sample(stream);
                y[i] = positive ? std::max(v, 0.0) : v;
            }
            prefix_sum[0] = 0.0;
            prefix_max[0] = kLow;
            for (std::size_t i = 0; i < n; ++i) {
                prefix_sum[i + 1] = prefix_sum[i] + y[i];
                prefix_max[i + 1] = std::max(prefix_max[i], y[i]);
            }
            suffix_sum[n] = 0.0;
            suffix_max[n] = kLow;
            for (std::size_t i = n; i-- > 0;) {
                suffix_sum[i] = suffix_sum[i + 1] + y[i];
                suffix_max[i] = std::max(suffix_max[i + 1], y[i]);
            }
            double z = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double others_max = std::max(prefix_max[i], suffix_max[i + 1]);
                const double others_sum = prefix_sum[i] + suffix_sum[i + 1];
                z += summand_tail(i, std::max(others_max, x - others_sum));
            }
            s1 += z;
            s2 += z * z;
        }
        moments[b] = {s1, s2};
    });
    double s1 = 0.0, s2 = 0.0;
    for (const auto& [a, b] : moments) {
        s1 += a;
        s2 += b;
    }
    const auto N = static_cast<double>(mc.samples);
    const double mean = s1 / N;
    const double var = std::max(0.0, (s2 - s1 * mean) / (N - 1.0));
    return {mean, std::sqrt(var / N), "big_jump_mc", mc.samples, mc.seed, std::nullopt};
}

double asymptotic_approx(const WeightedSumProblem& p, double x) {
    p.validate();
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += weighted_tail(WeightedMarginal(p.margins[i], p.weights[i]), x);
    return s;
}

TailEstimate OracleResult::estimate() const {
    return {value, 0.0, "convolution_oracle", points, 0, error_bound};
}

OracleResult convolution_oracle_detail(const WeightedSumProblem& p, double x, const OracleOptions& options) {
    p.validate();
    if (!p.dependence.is_independent()) throw std::invalid_argument("convolution_oracle: requires independent summands");
    if (p.size() > 6) throw std::invalid_argument("convolution_oracle: at most 6 summands");
    if (!std::isfinite(x)) throw std::domain_error("convolution_oracle: x must be finite");

    double floor_value = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) floor_value += p.weights[i] * std::max(0.0, p.margins[i].support_lower());
    if (x < floor_value) {
        OracleResult r;
        r.value = r.lower = r.upper = 1.0;
        return r;
    }
    if (p.size() == 1) {
        OracleResult r;
        r.value = p.margins[0].tail(x / p.weights[0]);
        r.error_bound = 4.0 * kEps * r.value;
        r.lower = r.value - r.error_bound;
        r.upper = r.value + r.error_bound;
        return r;
    }

    std::size_t m = 1024;
    OracleResult r;
    for (int iter = 0; iter < 12; ++iter) {
        r = oracle_bracket(p, x, m);
        const double rel = r.value > 0 ? r.error_bound / r.value : std::numeric_limits<double>::infinity();
        if (rel <= options.rel_tol) return r;
        const double grow = std::isfinite(rel) ? rel / options.rel_tol * 1.1 : 16.0;
        const auto next = static_cast<std::size_t>(std::ceil(static_cast<double>(m) * std::max(grow, 1.5)));
        if (next > options.max_points)
            throw OracleError(fmt::format("convolution_oracle: lattice too coarse at x={}; relative error bound {:.3g} "
                                          "exceeds {:.3g}, needs about {} points (limit {})",
                                          x, rel, options.rel_tol, next, options.max_points),
                              r.error_bound, next);
        m = next;
    }
    throw OracleError(fmt::format("convolution_oracle: no convergence at x={}", x), r.error_bound, m);
}

TailEstimate convolution_oracle(const WeightedSumProblem& p, double x, const OracleOptions& options) {
    return convolution_oracle_detail(p, x, options).estimate();
}

std::vector<std::vector<double>> weight_lattice(double a, double b, std::size_t n) {
    if (n > 4) throw std::invalid_argument("weight_lattice: band scans are limited to n <= 4");
    std::vector<double> values{a, 0.5 * (a + b), b};
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    std::vector<std::vector<double>> out{{}};
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::vector<double>> next;
        for (const auto& prefix : out)
            for (double v : values) {
                auto w = prefix;
                w.push_back(v);
                next.push_back(std::move(w));
            }
        out = std::move(next);
    }
    return out;
}

ShiftReport shift_insensitivity_check(const WeightedSumProblem& p, const std::function<double(double)>& h,
                                      const std::vector<double>& xs, const ShiftOptions& options) {
    p.validate();
    if (!p.dependence.is_independent())
        throw std::invalid_argument("shift_insensitivity_check: requires independent summands");
    auto evaluate = [&](const WeightedSumProblem& q, double at) {
        if (options.backend == ShiftBackend::Oracle) return convolution_oracle_detail(q, at, options.oracle).value;
        return big_jump_mc(q, Functional::Sum, at, options.mc).value;
    };

    ShiftReport report;
    for (double x : xs) {
        const double hx = h(x);
        std::vector<std::vector<double>> lattice;
        WeightBand band{1.0, 1.0};
        if (options.fixed_weights) {
            lattice.push_back(*options.fixed_weights);
        } else {
            band = weight_band_for(hx, options.delta);
            if (band.empty()) throw std::domain_error(fmt::format("shift check: empty weight band at x={}", x));
            lattice = weight_lattice(band.a, band.b, p.size());
        }
        double worst = 0.0;
        for (const auto& w : lattice) {
            const auto q = p.with_weights(w);
            const double base = evaluate(q, x);
            const double minus = hx == 0.0 ? base : evaluate(q, x - hx);
            const double plus = hx == 0.0 ? base : evaluate(q, x + hx);
            ShiftRow row{x, hx, band.a, band.b, w, base, minus / base, plus / base, 0.0};
            row.deviation = std::max(std::abs(row.ratio_minus - 1.0), std::abs(row.ratio_plus - 1.0));
            worst = std::max(worst, row.deviation);
            report.rows.push_back(std::move(row));
        }
        report.x.push_back(x);
        report.max_deviation.push_back(worst);
    }
    return report;
}

EquivalenceReport equivalence_report(const WeightedSumProblem& p, const std::vector<double>& xs,
                                     const EquivalenceOptions& options, const std::function<double(double)>& h) {
    p.validate();
    for (std::size_t k = 1; k < xs.size(); ++k)
        if (!(xs[k] > xs[k - 1])) throw std::invalid_argument("equivalence_report: x grid must increase");
    if (options.band_delta && !h) throw std::invalid_argument("equivalence_report: band scan needs an h function");

    // Cases are (x, weights); CRN groups share the weight vector.
    std::vector<double> case_x;
    std::vector<std::vector<double>> case_w;
    for (double x : xs) {
        if (options.band_delta) {
            const auto band = weight_band_for(h(x), *options.band_delta);
            if (band.empty()) throw std::domain_error(fmt::format("equivalence_report: empty weight band at x={}", x));
            for (auto& w : weight_lattice(band.a, band.b, p.size())) {
                case_x.push_back(x);
                case_w.push_back(std::move(w));
            }
        } else {
            case_x.push_back(x);
            case_w.push_back(p.weights);
        }
    }
    std::map<std::vector<double>, std::size_t> group_index;
    std::vector<WeightGroup> groups;
    for (std::size_t k = 0; k < case_x.size(); ++k) {
        auto [it, inserted] = group_index.try_emplace(case_w[k], groups.size());
        if (inserted) groups.push_back({case_w[k], {}});
        groups[it->second].cases.push_back(k);
    }
    const auto counts = crude_counts(p, groups, case_x, options.mc);

    const bool all_long = all_in(p.margins, {TailClass::Long});
    const bool all_dl = all_in(p.margins, {TailClass::Dominated, TailClass::Long});
    const Assertion among_functionals =
        (p.dependence.is_independent() ? all_long : all_dl) ? Assertion::Equivalence : Assertion::None;
    const Assertion against_big_jump =
        all_dl ? Assertion::Equivalence : (all_long ? Assertion::LowerBound : Assertion::None);

    EquivalenceReport report;
    for (std::size_t k = 0; k < case_x.size(); ++k) {
        EquivalenceRow row;
        row.x = case_x[k];
        row.weights = case_w[k];
        row.sum = binomial_estimate(counts.sum[k], options.mc, "crude_mc");
        row.max_partial = binomial_estimate(counts.max_partial[k], options.mc, "crude_mc");
        row.positive_sum = binomial_estimate(counts.positive_sum[k], options.mc, "crude_mc");
        row.big_jump = asymptotic_approx(p.with_weights(row.weights), row.x);
        if (!(counts.sum[k] <= counts.max_partial[k] && counts.max_partial[k] <= counts.positive_sum[k]))
            report.ordering_holds = false;

        auto ratio = [&](std::string name, const TailEstimate& a, double b_value, double b_rel, Assertion assertion) {
            RatioEstimate r{std::move(name), a.value / b_value, 0.0, assertion, true};
            r.std_error = std::abs(r.value) * std::hypot(a.relative_error(), b_rel);
            const double allowance = std::max(options.tolerance, 3.0 * r.std_error);
            switch (assertion) {
                case Assertion::Equivalence: r.ok = std::abs(r.value - 1.0) <= allowance; break;
                case Assertion::LowerBound: r.ok = r.value >= 1.0 - allowance; break;
                case Assertion::None: r.ok = true; break;
            }
            return r;
        };
        const auto& s = row.sum;
        const auto& m = row.max_partial;
        const auto& sp = row.positive_sum;
        row.ratios.push_back(ratio("S/M", s, m.value, m.relative_error(), among_functionals));
        row.ratios.push_back(ratio("S/S+", s, sp.value, sp.relative_error(), among_functionals));
        row.ratios.push_back(ratio("M/S+", m, sp.value, sp.relative_error(), among_functionals));
        row.ratios.push_back(ratio("S/BJ", s, row.big_jump, 0.0, against_big_jump));
        row.ratios.push_back(ratio("M/BJ", m, row.big_jump, 0.0, against_big_jump));
        row.ratios.push_back(ratio("S+/BJ", sp, row.big_jump, 0.0, against_big_jump));
        row.verdict = std::all_of(row.ratios.begin(), row.ratios.end(), [](const RatioEstimate& r) { return r.ok; });
        report.verdict = report.verdict && row.verdict;
        report.rows.push_back(std::move(row));
    }
    report.verdict = report.verdict && report.ordering_holds;
    return report;
}

}  // namespace htail
