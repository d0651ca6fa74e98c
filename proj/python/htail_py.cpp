#include "htail/cli.hpp"
#include "htail/dependence.hpp"
#include "htail/h_construct.hpp"
#include "htail/ruin.hpp"
#include "htail/tail_classes.hpp"
#include "htail/weighted_sums.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace htail;

namespace {

McOptions mc_options(std::uint64_t samples, std::uint64_t seed, unsigned workers) {
    McOptions o;
    o.samples = samples;
    o.seed = seed;
    o.workers = workers;
    return o;
}

Functional functional_from(const std::string& name) {
    if (name == "S") return Functional::Sum;
    if (name == "M") return Functional::MaxPartial;
    if (name == "S+") return Functional::PositiveSum;
    throw py::value_error("functional must be one of 'S', 'M', 'S+'");
}

RuinMethod ruin_method_from(const std::string& name) {
    if (name == "auto") return RuinMethod::Auto;
    if (name == "crude") return RuinMethod::Crude;
    if (name == "big_jump") return RuinMethod::BigJump;
    throw py::value_error("method must be one of 'auto', 'crude', 'big_jump'");
}

}  // namespace

PYBIND11_MODULE(_htail, m) {
    m.doc() = "Tail asymptotics of weighted sums of heavy-tailed random variables";
    m.attr("__version__") = cli::version();

    py::register_exception<NotLongTailedError>(m, "NotLongTailedError", PyExc_RuntimeError);
    py::register_exception<OracleError>(m, "OracleError", PyExc_RuntimeError);
    py::register_exception<InsufficientTailSamples>(m, "InsufficientTailSamples", PyExc_RuntimeError);

    py::class_<Distribution>(m, "Distribution")
        .def_static("pareto", &Distribution::pareto, py::arg("alpha"), py::arg("scale") = 1.0)
        .def_static("weibull", &Distribution::weibull, py::arg("shape"), py::arg("rate") = 1.0)
        .def_static("lognormal", &Distribution::lognormal, py::arg("mu"), py::arg("sigma"))
        .def_static("burr", &Distribution::burr, py::arg("c"), py::arg("k"), py::arg("scale") = 1.0)
        .def_static("exponential", &Distribution::exponential, py::arg("rate") = 1.0)
        .def("tail", &Distribution::tail)
        .def("log_tail", &Distribution::log_tail)
        .def("cdf", &Distribution::cdf)
        .def("quantile", &Distribution::quantile)
        .def("tail_quantile", &Distribution::tail_quantile)
        .def("tail_ratio", &Distribution::tail_ratio)
        .def_property_readonly("name", &Distribution::name)
        .def("__repr__", &Distribution::describe);

    py::class_<DependenceSpec>(m, "Dependence")
        .def_static("independent", &DependenceSpec::independent)
        .def_static("gaussian", &DependenceSpec::gaussian, py::arg("rho"))
        .def_static("fgm", &DependenceSpec::fgm, py::arg("theta"))
        .def("__repr__", &DependenceSpec::describe);

    py::class_<TailEstimate>(m, "TailEstimate")
        .def_readonly("value", &TailEstimate::value)
        .def_readonly("std_error", &TailEstimate::std_error)
        .def_readonly("method", &TailEstimate::method)
        .def_readonly("replicates", &TailEstimate::replicates)
        .def_readonly("seed", &TailEstimate::seed)
        .def_readonly("error_bound", &TailEstimate::error_bound)
        .def("__repr__", [](const TailEstimate& e) {
            return "TailEstimate(value=" + std::to_string(e.value) + ", std_error=" + std::to_string(e.std_error) +
                   ", method='" + e.method + "')";
        });

    py::class_<WeightedSumProblem>(m, "WeightedSum")
        .def(py::init([](std::vector<Distribution> margins, std::vector<double> weights, DependenceSpec dependence) {
                 WeightedSumProblem p{std::move(margins), std::move(weights), dependence};
                 p.validate();
                 return p;
             }),
             py::arg("margins"), py::arg("weights"), py::arg("dependence") = DependenceSpec::independent())
        .def_readonly("margins", &WeightedSumProblem::margins)
        .def_readonly("weights", &WeightedSumProblem::weights)
        .def_readonly("dependence", &WeightedSumProblem::dependence);

    m.def(
        "crude_mc",
        [](const WeightedSumProblem& p, double x, const std::string& functional, std::uint64_t samples,
           std::uint64_t seed, unsigned workers) {
            py::gil_scoped_release release;
            return crude_mc(p, functional_from(functional), x, mc_options(samples, seed, workers));
        },
        py::arg("problem"), py::arg("x"), py::arg("functional") = "S", py::arg("samples") = 1'000'000,
        py::arg("seed") = 1, py::arg("workers") = 1);
    m.def(
        "big_jump_mc",
        [](const WeightedSumProblem& p, double x, const std::string& functional, std::uint64_t samples,
           std::uint64_t seed, unsigned workers) {
            py::gil_scoped_release release;
            return big_jump_mc(p, functional_from(functional), x, mc_options(samples, seed, workers));
        },
        py::arg("problem"), py::arg("x"), py::arg("functional") = "S", py::arg("samples") = 1'000'000,
        py::arg("seed") = 1, py::arg("workers") = 1);
    m.def("asymptotic_approx", &asymptotic_approx, py::arg("problem"), py::arg("x"));
    m.def(
        "convolution_oracle",
        [](const WeightedSumProblem& p, double x, double rel_tol) {
            OracleOptions o;
            o.rel_tol = rel_tol;
            return convolution_oracle(p, x, o);
        },
        py::arg("problem"), py::arg("x"), py::arg("rel_tol") = 1e-4);

    py::class_<InsensitivityFunction>(m, "InsensitivityFunction")
        .def("__call__", &InsensitivityFunction::operator())
        .def_property_readonly("knots", &InsensitivityFunction::knots);
    m.def(
        "construct_h",
        [](const Distribution& d, double delta, std::size_t count) {
            return InsensitivityFunction(find_breakpoints(d, delta, count));
        },
        py::arg("distribution"), py::arg("delta") = 1.0, py::arg("count") = 20);
    m.def("shift_deviation", &shift_deviation, py::arg("distribution"), py::arg("x"), py::arg("shift"));

    m.def(
        "discount_factors", [](const std::vector<double>& rates) { return discount_factors(rates); },
        py::arg("rates"));
    m.def(
        "ruin_asymptotic",
        [](double x, std::vector<double> rates, std::vector<Distribution> losses) {
            RiskModel r{x, std::move(rates), std::move(losses), {}};
            return ruin_asymptotic(r);
        },
        py::arg("x"), py::arg("rates"), py::arg("losses"));
    m.def(
        "simulate_ruin",
        [](double x, std::vector<double> rates, std::vector<Distribution> losses, DependenceSpec dependence,
           std::uint64_t samples, std::uint64_t seed, unsigned workers, const std::string& method) {
            RiskModel r{x, std::move(rates), std::move(losses), dependence};
            py::gil_scoped_release release;
            return simulate_ruin(r, mc_options(samples, seed, workers), ruin_method_from(method));
        },
        py::arg("x"), py::arg("rates"), py::arg("losses"), py::arg("dependence") = DependenceSpec::independent(),
        py::arg("samples") = 1'000'000, py::arg("seed") = 1, py::arg("workers") = 1, py::arg("method") = "auto");

    m.def(
        "run",
        [](const std::string& command, const std::string& config, const std::string& out_dir,
           std::optional<std::uint64_t> seed, std::optional<std::uint64_t> samples, unsigned workers) {
            cli::RunConfig c;
            c.command = command;
            c.config_path = config;
            c.out_dir = out_dir;
            c.seed = seed;
            c.samples = samples;
            c.workers = workers;
            const auto r = cli::run(c);
            return py::make_tuple(r.exit_code, r.artifacts, r.message);
        },
        py::arg("command"), py::arg("config"), py::arg("out_dir") = ".", py::arg("seed") = py::none(),
        py::arg("samples") = py::none(), py::arg("workers") = 1);
}
