#include "htail/cli.hpp"

#include "htail/h_construct.hpp"
#include "htail/ruin.hpp"
#include "htail/tail_classes.hpp"
#include "htail/weighted_sums.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#ifndef HTAIL_VERSION
#define HTAIL_VERSION "0.0.0"
#endif

namespace htail::cli {

namespace {

using json = nlohmann::json;
using ordered = nlohmann::ordered_json;

// ------------------------------------------------------------ config access

std::string child(const std::string& ptr, const std::string& key) {
    std::string escaped;
    for (char c : key) {
        if (c == '~')
            escaped += "~0";
        else if (c == '/')
            escaped += "~1";
        else
            escaped += c;
    }
    return ptr + "/" + escaped;
}

std::string child(const std::string& ptr, std::size_t index) { return ptr + "/" + std::to_string(index); }

const json& require(const json& obj, const std::string& ptr, const char* key) {
    if (!obj.is_object()) throw ConfigError(ptr, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(child(ptr, key), fmt::format("missing required field \"{}\"", key));
    return *it;
}

double as_number(const json& v, const std::string& ptr) {
    if (!v.is_number()) throw ConfigError(ptr, "expected a number");
    return v.get<double>();
}

double number(const json& obj, const std::string& ptr, const char* key) {
    return as_number(require(obj, ptr, key), child(ptr, key));
}

double number_or(const json& obj, const std::string& ptr, const char* key, double fallback) {
    return obj.contains(key) ? number(obj, ptr, key) : fallback;
}

std::uint64_t count_or(const json& obj, const std::string& ptr, const char* key, std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        throw ConfigError(child(ptr, key), "expected a nonnegative integer");
    return v.get<std::uint64_t>();
}

std::vector<double> numbers(const json& obj, const std::string& ptr, const char* key) {
    const auto& v = require(obj, ptr, key);
    const auto p = child(ptr, key);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array() || v.empty()) throw ConfigError(p, "expected a nonempty array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], child(p, i)));
    return out;
}

std::string text_or(const json& obj, const std::string& ptr, const char* key, std::string fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_string()) throw ConfigError(child(ptr, key), "expected a string");
    return v.get<std::string>();
}

// Runs a library constructor, pinning any rejection to the config location.
template <class Fn>
auto located(const std::string& ptr, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(ptr, e.what());
    } catch (const std::domain_error& e) {
        throw ConfigError(ptr, e.what());
    }
}

Distribution parse_distribution(const json& v, const std::string& ptr) {
    if (!v.is_object()) throw ConfigError(ptr, "expected a distribution record");
    const auto family = text_or(v, ptr, "family", "");
    auto positive = [&](const char* key) {
        const double x = number(v, ptr, key);
        if (!(x > 0)) throw ConfigError(child(ptr, key), fmt::format("{} must be > 0 (got {})", key, x));
        return x;
    };
    if (family == "pareto") {
        const double alpha = positive("alpha");
        return located(ptr, [&] { return Distribution::pareto(alpha, positive("scale")); });
    }
    if (family == "weibull") {
        const double tau = number(v, ptr, "tau");
        if (!(tau > 0 && tau < 1)) throw ConfigError(child(ptr, "tau"), fmt::format("tau must lie in (0,1) (got {})", tau));
        return located(ptr, [&] { return Distribution::weibull(tau, positive("c")); });
    }
    if (family == "lognormal") {
        const double mu = number(v, ptr, "mu");
        return located(ptr, [&] { return Distribution::lognormal(mu, positive("sigma")); });
    }
    if (family == "burr") {
        const double c = positive("c");
        const double k = positive("k");
        return located(ptr, [&] { return Distribution::burr(c, k, positive("scale")); });
    }
    if (family == "exponential") return located(ptr, [&] { return Distribution::exponential(positive("rate")); });
    throw ConfigError(child(ptr, "family"),
                      fmt::format("unknown family \"{}\" (pareto, weibull, lognormal, burr, exponential)", family));
}

std::vector<Distribution> parse_margins(const json& obj, const std::string& ptr, const char* key) {
    const auto& v = require(obj, ptr, key);
    const auto p = child(ptr, key);
    if (!v.is_array() || v.empty()) throw ConfigError(p, "expected a nonempty array of distributions");
    std::vector<Distribution> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(parse_distribution(v[i], child(p, i)));
    return out;
}

DependenceSpec parse_dependence(const json& obj, const std::string& ptr, std::size_t dimension) {
    if (!obj.contains("dependence")) return DependenceSpec::independent();
    const auto& v = obj.at("dependence");
    const auto p = child(ptr, "dependence");
    const auto kind = text_or(v, p, "kind", "");
    DependenceSpec spec;
    if (kind == "independent")
        spec = DependenceSpec::independent();
    else if (kind == "gaussian")
        spec = DependenceSpec::gaussian(number(v, p, "rho"));
    else if (kind == "fgm")
        spec = DependenceSpec::fgm(number(v, p, "theta"));
    else
        throw ConfigError(child(p, "kind"), fmt::format("unknown dependence \"{}\" (independent, gaussian, fgm)", kind));
    located(p, [&] { spec.validate(dimension); });
    return spec;
}

// Weights default to 1; a single value is broadcast.
std::vector<double> parse_weights(const json& obj, const std::string& ptr, std::size_t n) {
    if (!obj.contains("weights")) return std::vector<double>(n, 1.0);
    auto w = numbers(obj, ptr, "weights");
    if (w.size() == 1) w.assign(n, w[0]);
    if (w.size() != n) throw ConfigError(child(ptr, "weights"), fmt::format("expected {} weights, got {}", n, w.size()));
    for (std::size_t i = 0; i < n; ++i)
        if (!(w[i] > 0)) throw ConfigError(child(child(ptr, "weights"), i), fmt::format("weight must be > 0 (got {})", w[i]));
    return w;
}

std::vector<double> parse_grid(const json& obj, const std::string& ptr, const char* key, std::vector<double> fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    const auto p = child(ptr, key);
    std::vector<double> grid;
    if (v.is_object()) {
        const double from = number(v, p, "from"), to = number(v, p, "to");
        const auto points = count_or(v, p, "points", 40);
        grid = located(p, [&] { return geometric_grid(from, to, points); });
    } else {
        grid = numbers(obj, ptr, key);
    }
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw ConfigError(p, "grid must be strictly increasing");
    return grid;
}

// Line of every JSON pointer in a syntactically valid document.
class PointerLines {
public:
    explicit PointerLines(const std::string& text) : s_(text) { value(""); }
    std::optional<int> find(std::string ptr) const {
        // Fall back to the nearest enclosing location.
        for (;;) {
            auto it = lines_.find(ptr);
            if (it != lines_.end()) return it->second;
            if (ptr.empty()) return std::nullopt;
            ptr.erase(ptr.rfind('/'));
        }
    }

private:
    void ws() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) {
            if (s_[i_] == '\n') ++line_;
            ++i_;
        }
    }
    std::string str() {
        std::string r;
        ++i_;
        while (i_ < s_.size() && s_[i_] != '"') {
            if (s_[i_] == '\\') ++i_;
            r += s_[i_++];
        }
        ++i_;
        return r;
    }
    void value(const std::string& ptr) {
        ws();
        lines_.emplace(ptr, line_);
        if (i_ >= s_.size()) return;
        const char c = s_[i_];
        if (c == '{' || c == '[') {
            const char close = c == '{' ? '}' : ']';
            ++i_;
            ws();
            std::size_t index = 0;
            while (i_ < s_.size() && s_[i_] != close) {
                if (c == '{') {
                    const auto key = str();
                    ws();
                    ++i_;  // ':'
                    value(child(ptr, key));
                } else {
                    value(child(ptr, index++));
                }
                ws();
                if (i_ < s_.size() && s_[i_] == ',') ++i_;
                ws();
            }
            ++i_;
        } else if (c == '"') {
            str();
        } else {
            while (i_ < s_.size() && !std::strchr(",]} \t\r\n", s_[i_])) ++i_;
        }
    }

    const std::string& s_;
    std::size_t i_ = 0;
    int line_ = 1;
    std::map<std::string, int> lines_;
};

// ------------------------------------------------------------ artifacts

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{}", v);
}

std::string join(const std::vector<double>& v, const char* sep = ";") {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + num(v[i]);
    return out;
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

struct Context {
    std::string command;
    std::string config_hash;
    std::uint64_t seed;
    std::uint64_t samples;
    double tolerance;
    unsigned workers;
};

class Csv {
public:
    Csv(const Context& ctx, const std::vector<std::string>& columns) {
        out_ << fmt::format("# htail {} command={} config_hash={} seed={} samples={}\n", version(), ctx.command,
                            ctx.config_hash, ctx.seed, ctx.samples);
        row(columns);
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }
    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
};

ordered meta(const Context& ctx) {
    ordered m;
    m["tool"] = "htail";
    m["version"] = version();
    m["command"] = ctx.command;
    m["config_hash"] = ctx.config_hash;
    m["seed"] = ctx.seed;
    m["samples"] = ctx.samples;
    m["tolerance"] = ctx.tolerance;
    return m;
}

struct Output {
    std::string csv;
    ordered report;
    bool verdict = true;
};

// ------------------------------------------------------------ commands

InsensitivityFunction build_h(const Distribution& d, const json& cfg, const std::string& ptr) {
    const double delta = number_or(cfg, ptr, "delta", 1.0);
    const auto count = count_or(cfg, ptr, "count", 20);
    return InsensitivityFunction(located(ptr, [&] { return find_breakpoints(d, delta, count); }));
}

MinInsensitivity build_min_h(const std::vector<Distribution>& margins, const json& cfg, const std::string& ptr) {
    std::vector<InsensitivityFunction> parts;
    for (const auto& d : margins) parts.push_back(build_h(d, cfg, ptr));
    return min_h(std::move(parts));
}

Output diagnose(const json& cfg, const Context& ctx) {
    const auto d = parse_distribution(require(cfg, "", "distribution"), "/distribution");
    const auto grid = parse_grid(cfg, "", "grid", default_grid(d));
    std::vector<std::string> checks{"long_tail", "dominated", "consistent", "subexponential", "insensitivity"};
    if (cfg.contains("checks")) {
        checks.clear();
        const auto& v = cfg.at("checks");
        if (!v.is_array()) throw ConfigError("/checks", "expected an array of check names");
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_string()) throw ConfigError(child("/checks", i), "expected a string");
            checks.push_back(v[i].get<std::string>());
        }
    }
    ProfileRules rules;
    rules.tolerance = ctx.tolerance;

    Csv csv(ctx, {"check", "y", "x", "ratio", "running_sup"});
    Output out;
    out.report["meta"] = meta(ctx);
    out.report["distribution"] = d.describe();
    out.report["declared"] = d.memberships().to_string();
    ordered verdicts = ordered::object();

    auto emit = [&](const std::string& name, double y, const RatioProfile& p) {
        for (std::size_t i = 0; i < p.x.size(); ++i)
            csv.row({name, num(y), num(p.x[i]), num(p.ratio[i]), num(p.running_sup[i])});
    };
    for (std::size_t c = 0; c < checks.size(); ++c) {
        const auto& check = checks[c];
        if (check == "long_tail") {
            const double y = number_or(cfg, "", "shift", 1.0);
            const auto p = long_tail_ratio(d, y, grid, rules);
            emit(check, y, p);
            verdicts[check] = to_string(p.verdict);
        } else if (check == "dominated") {
            const double y = number_or(cfg, "", "contraction", 0.5);
            const auto p = located("/contraction", [&] { return dominated_variation_ratio(d, y, grid, rules); });
            emit(check, y, p);
            verdicts[check] = to_string(p.verdict);
        } else if (check == "consistent") {
            std::vector<double> ys{0.5, 0.9, 0.99};
            if (cfg.contains("contractions")) ys = numbers(cfg, "", "contractions");
            const auto prof =
                located("/contractions", [&] { return consistent_variation_profile(d, ys, grid, rules); });
            for (const auto& e : prof.entries) emit(check, e.y, e.profile);
            verdicts[check] = to_string(prof.verdict);
        } else if (check == "subexponential") {
            const auto sgrid =
                parse_grid(cfg, "", "subexponential_grid", geometric_grid(10 * d.scale(), 1e4 * d.scale(), 7));
            try {
                const auto p = subexponential_ratio(d, sgrid, {}, rules);
                emit(check, 0.0, p);
                verdicts[check] = to_string(p.verdict);
            } catch (const OracleError& e) {
                verdicts[check] = fmt::format("inconclusive ({})", e.what());
            }
        } else if (check == "insensitivity") {
            try {
                const auto h = build_h(d, cfg.value("h", json::object()), "/h");
                const auto p = insensitivity_profile(d, h, grid);
                double sup = 0.0;
                for (std::size_t i = 0; i < p.x.size(); ++i) {
                    sup = std::max(sup, p.deviation[i]);
                    csv.row({check, num(p.h[i]), num(p.x[i]), num(p.deviation[i]), num(sup)});
                }
                verdicts[check] = p.deviation.empty() || p.deviation.back() <= ctx.tolerance ? "insensitive" : "sensitive";
            } catch (const ConfigError& e) {
                if (std::string(e.what()).find("not-long-tailed") == std::string::npos) throw;
                verdicts[check] = "not-long-tailed";
            }
        } else {
            throw ConfigError(child("/checks", c), fmt::format("unknown check \"{}\"", check));
        }
    }
    out.report["verdicts"] = verdicts;
    out.csv = csv.str();
    return out;
}

Output construct_h(const json& cfg, const Context& ctx) {
    const auto d = parse_distribution(require(cfg, "", "distribution"), "/distribution");
    const double delta = number_or(cfg, "", "delta", 1.0);
    const auto h = build_h(d, cfg, "");
    const auto& xs = h.knots();
    const auto grid = parse_grid(cfg, "", "eval", geometric_grid(xs.front() / 2, xs.back(), 100));
    const auto report = verify_shape(h, grid, geometric_grid(1.0, 100.0, 20));

    Csv csv(ctx, {"x", "h", "a", "b"});
    for (double x : grid) {
        const double hx = h(x);
        const auto band = weight_band_for(hx, delta);
        csv.row({num(x), num(hx), num(band.a), num(band.b)});
    }
    Output out;
    out.report["meta"] = meta(ctx);
    out.report["distribution"] = d.describe();
    out.report["delta"] = delta;
    out.report["xs"] = xs;
    ordered shape;
    auto put = [&](const char* name, const ShapeCheck& c) { shape[name] = {{"checked", c.checked}, {"violations", c.violations}}; };
    put("continuity", report.continuity);
    put("monotonicity", report.monotonicity);
    put("concavity", report.concavity);
    put("subhomogeneity", report.subhomogeneity);
    put("ratio_decreasing", report.ratio_decreasing);
    put("doubling", report.doubling);
    out.report["shape"] = shape;
    out.report["verdict"] = report.ok();
    out.verdict = report.ok();
    out.csv = csv.str();
    return out;
}

WeightedSumProblem parse_problem(const json& cfg) {
    WeightedSumProblem p;
    p.margins = parse_margins(cfg, "", "margins");
    p.weights = parse_weights(cfg, "", p.size());
    p.dependence = parse_dependence(cfg, "", p.size());
    return p;
}

std::string assertion_text(Assertion a) {
    switch (a) {
        case Assertion::Equivalence: return "asserted";
        case Assertion::LowerBound: return "lower bound only";
        case Assertion::None: return "not asserted by the paper";
    }
    return "";
}

Output equivalence(const json& cfg, const Context& ctx) {
    const auto p = parse_problem(cfg);
    const auto xs = parse_grid(cfg, "", "x", {});
    if (xs.empty()) throw ConfigError("/x", "missing required field \"x\"");
    EquivalenceOptions options;
    options.mc = {ctx.samples, ctx.seed, ctx.workers};
    options.tolerance = ctx.tolerance;
    std::function<double(double)> h;
    if (cfg.contains("band_delta")) {
        options.band_delta = number(cfg, "", "band_delta");
        h = build_min_h(p.margins, cfg.value("h", json::object()), "/h");
    }
    const auto r = located("", [&] { return equivalence_report(p, xs, options, h); });

    std::vector<std::string> columns{"x", "est_S", "se_S", "est_M", "se_M", "est_Splus", "se_Splus", "bigjump"};
    for (const char* name : {"S/M", "S/S+", "M/S+", "S/BJ", "M/BJ", "S+/BJ"}) columns.push_back(fmt::format("ratio_{}", name));
    columns.insert(columns.end(), {"bigjump_status", "weights", "verdict"});
    Csv csv(ctx, columns);
    ordered rows = ordered::array();
    for (const auto& row : r.rows) {
        std::vector<std::string> cells{num(row.x),
                                       num(row.sum.value),
                                       num(row.sum.std_error),
                                       num(row.max_partial.value),
                                       num(row.max_partial.std_error),
                                       num(row.positive_sum.value),
                                       num(row.positive_sum.std_error),
                                       num(row.big_jump)};
        for (const auto& ratio : row.ratios) cells.push_back(num(ratio.value));
        cells.push_back(assertion_text(row.ratios.back().assertion));
        cells.push_back(join(row.weights));
        cells.push_back(bool_text(row.verdict));
        csv.row(cells);
        ordered ratios = ordered::object();
        for (const auto& ratio : row.ratios)
            ratios[ratio.name] = {{"value", ratio.value}, {"se", ratio.std_error},
                                  {"status", assertion_text(ratio.assertion)}, {"ok", ratio.ok}};
        rows.push_back({{"x", row.x}, {"weights", row.weights}, {"ratios", ratios}, {"verdict", row.verdict}});
    }
    Output out;
    out.report["meta"] = meta(ctx);
    out.report["dependence"] = p.dependence.describe();
    out.report["ordering_holds"] = r.ordering_holds;
    out.report["verdict"] = r.verdict;
    out.report["rows"] = rows;
    out.verdict = r.verdict;
    out.csv = csv.str();
    return out;
}

Output shift_check(const json& cfg, const Context& ctx) {
    const auto p = parse_problem(cfg);
    const auto xs = parse_grid(cfg, "", "x", {});
    if (xs.empty()) throw ConfigError("/x", "missing required field \"x\"");
    ShiftOptions options;
    options.delta = number_or(cfg, "", "delta", 1.0);
    options.mc = {ctx.samples, ctx.seed, ctx.workers};
    const auto backend = text_or(cfg, "", "backend", "oracle");
    if (backend == "oracle")
        options.backend = ShiftBackend::Oracle;
    else if (backend == "big_jump")
        options.backend = ShiftBackend::BigJump;
    else
        throw ConfigError("/backend", fmt::format("unknown backend \"{}\" (oracle, big_jump)", backend));
    if (cfg.contains("fixed_weights") && cfg.at("fixed_weights").get<bool>()) options.fixed_weights = p.weights;
    const auto h = build_min_h(p.margins, cfg, "");
    const auto r = located("", [&] { return shift_insensitivity_check(p, h, xs, options); });

    Csv csv(ctx, {"x", "h", "a", "b", "weights", "tail", "ratio_minus", "ratio_plus", "deviation"});
    for (const auto& row : r.rows)
        csv.row({num(row.x), num(row.h), num(row.a), num(row.b), join(row.weights), num(row.tail), num(row.ratio_minus),
                 num(row.ratio_plus), num(row.deviation)});
    bool decreasing = true;
    for (std::size_t i = 1; i < r.max_deviation.size(); ++i)
        decreasing = decreasing && r.max_deviation[i] <= r.max_deviation[i - 1];
    const bool verdict = !r.max_deviation.empty() && r.max_deviation.back() <= ctx.tolerance;
    Output out;
    out.report["meta"] = meta(ctx);
    out.report["backend"] = backend;
    out.report["x"] = r.x;
    out.report["max_deviation"] = r.max_deviation;
    out.report["decreasing"] = decreasing;
    out.report["verdict"] = verdict;
    out.verdict = verdict;
    out.csv = csv.str();
    return out;
}

Output ruin(const json& cfg, const Context& ctx) {
    RiskModel m;
    m.initial_surplus = number(cfg, "", "x");
    m.rates = numbers(cfg, "", "rates");
    m.losses = parse_margins(cfg, "", "losses");
    const std::size_t horizon = cfg.contains("horizon") ? count_or(cfg, "", "horizon", 0)
                                                        : std::max(m.rates.size(), m.losses.size());
    if (horizon < 1) throw ConfigError("/horizon", "horizon must be >= 1");
    if (m.rates.size() == 1) m.rates.assign(horizon, m.rates[0]);
    if (m.losses.size() == 1) m.losses.assign(horizon, m.losses[0]);
    if (m.rates.size() != horizon)
        throw ConfigError("/rates", fmt::format("expected 1 or {} rates, got {}", horizon, m.rates.size()));
    if (m.losses.size() != horizon)
        throw ConfigError("/losses", fmt::format("expected 1 or {} loss distributions, got {}", horizon, m.losses.size()));
    m.dependence = parse_dependence(cfg, "", horizon);
    located("", [&] { m.validate(); });

    const auto method_name = text_or(cfg, "", "method", "auto");
    RuinMethod method = RuinMethod::Auto;
    if (method_name == "crude")
        method = RuinMethod::Crude;
    else if (method_name == "big_jump")
        method = RuinMethod::BigJump;
    else if (method_name != "auto")
        throw ConfigError("/method", fmt::format("unknown method \"{}\" (auto, crude, big_jump)", method_name));

    const McOptions mc{ctx.samples, ctx.seed, ctx.workers};
    const auto psi = located("", [&] { return simulate_ruin(m, mc, method); });
    const double asym = ruin_asymptotic(m);
    const auto sweep = parse_grid(cfg, "", "sweep", {m.initial_surplus});
    const auto rows = located("/sweep", [&] { return ruin_sweep(m, sweep, mc, method); });

    Csv csv(ctx, {"x", "psi_hat", "se", "psi_asym", "ratio", "method"});
    for (const auto& r : rows)
        csv.row({num(r.x), num(r.psi.value), num(r.psi.std_error), num(r.asymptotic), num(r.ratio), r.psi.method});
    Output out;
    out.report["meta"] = meta(ctx);
    out.report["x"] = m.initial_surplus;
    out.report["discount_factors"] = discount_factors(m.rates);
    out.report["method"] = psi.method;
    out.report["psi_hat"] = psi.value;
    out.report["se"] = psi.std_error;
    out.report["psi_asym"] = asym;
    out.report["ratio"] = psi.value / asym;
    out.csv = csv.str();
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    f << content;
    if (!f) throw std::runtime_error(fmt::format("failed writing {}", path.string()));
}

}  // namespace

const char* version() { return HTAIL_VERSION; }

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

RunResult run(const RunConfig& config) {
    RunResult result;
    const auto& known = kCommands;
    if (std::find(std::begin(known), std::end(known), config.command) == std::end(known)) {
        result.exit_code = 1;
        result.message = fmt::format("error: unknown command \"{}\"", config.command);
        return result;
    }
    std::string text;
    {
        std::ifstream f(config.config_path, std::ios::binary);
        if (!f) {
            result.exit_code = 1;
            result.message = fmt::format("error: cannot open config {}", config.config_path);
            return result;
        }
        std::ostringstream ss;
        ss << f.rdbuf();
        text = ss.str();
    }
    json cfg;
    try {
        cfg = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto upto = text.substr(0, std::min<std::size_t>(e.byte, text.size()));
        const auto line = 1 + std::count(upto.begin(), upto.end(), '\n');
        const auto column = upto.size() - (upto.rfind('\n') == std::string::npos ? 0 : upto.rfind('\n') + 1);
        result.exit_code = 1;
        result.message = fmt::format("{}:{}:{}: config syntax error: {}", config.config_path, line, column, e.what());
        return result;
    }

    try {
        if (!cfg.is_object()) throw ConfigError("", "config must be a JSON object");
        Context ctx;
        ctx.command = config.command;
        ctx.seed = config.seed ? *config.seed : count_or(cfg, "", "seed", 1);
        ctx.samples = config.samples ? *config.samples : count_or(cfg, "", "samples", 1'000'000);
        ctx.tolerance = config.tolerance ? *config.tolerance : number_or(cfg, "", "tolerance", 0.05);
        ctx.workers = config.workers;
        if (ctx.samples < 2) throw ConfigError("/samples", "samples must be >= 2");
        if (!(ctx.tolerance > 0)) throw ConfigError("/tolerance", "tolerance must be > 0");
        const auto canonical =
            fmt::format("{}\n{}\nseed={}\nsamples={}\ntolerance={}", config.command, cfg.dump(), ctx.seed, ctx.samples,
                        num(ctx.tolerance));
        ctx.config_hash = fmt::format("{:016x}", fnv1a64(canonical));

        Output out;
        if (config.command == "diagnose")
            out = diagnose(cfg, ctx);
        else if (config.command == "construct-h")
            out = construct_h(cfg, ctx);
        else if (config.command == "equivalence")
            out = equivalence(cfg, ctx);
        else if (config.command == "shift-check")
            out = shift_check(cfg, ctx);
        else
            out = ruin(cfg, ctx);

        const std::filesystem::path dir(config.out_dir);
        std::filesystem::create_directories(dir);
        const auto stem = fmt::format("{}-{}", config.command, ctx.config_hash);
        write_file(dir / (stem + ".csv"), out.csv);
        write_file(dir / (stem + ".json"), out.report.dump(2) + "\n");
        result.artifacts = {(dir / (stem + ".csv")).string(), (dir / (stem + ".json")).string()};
        result.exit_code = out.verdict ? 0 : 2;
        result.message = out.verdict ? fmt::format("ok: wrote {}.{{csv,json}}", stem)
                                     : fmt::format("verdict negative: wrote {}.{{csv,json}}", stem);
    } catch (const ConfigError& e) {
        const auto line = PointerLines(text).find(e.pointer());
        const auto where = e.pointer().empty() ? std::string("/") : e.pointer();
        result.exit_code = 1;
        result.message = line ? fmt::format("{}:{}: config error at {}: {}", config.config_path, *line, where, e.what())
                              : fmt::format("{}: config error at {}: {}", config.config_path, where, e.what());
    } catch (const std::exception& e) {
        result.exit_code = 1;
        result.message = fmt::format("error: {}", e.what());
    }
    return result;
}

int main(int argc, char** argv) {
    CLI::App app{"Tail asymptotics of weighted heavy-tailed sums"};
    app.set_version_flag("--version", std::string(version()));
    app.require_subcommand(1);
    RunConfig config;
    for (const char* name : kCommands) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config.config_path, "Config JSON")->required();
        sub->add_option("--out", config.out_dir, "Output directory");
        sub->add_option("--seed", config.seed, "Master seed");
        sub->add_option("--samples", config.samples, "Monte Carlo replicates");
        sub->add_option("--workers", config.workers, "Worker threads (does not change results)");
        sub->add_option("--tol", config.tolerance, "Verdict tolerance");
        sub->callback([&config, name] { config.command = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    const auto result = run(config);
    (result.exit_code == 1 ? std::cerr : std::cout) << result.message << '\n';
    return result.exit_code;
}

}  // namespace htail::cli
