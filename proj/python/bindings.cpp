#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gaussalloc/analysis.hpp"
#include "gaussalloc/errors.hpp"
#include "gaussalloc/gaussian_oracle.hpp"
#include "gaussalloc/instances.hpp"
#include "gaussalloc/report_io.hpp"
#include "gaussalloc/solvers.hpp"

namespace py = pybind11;
using namespace gaussalloc;

namespace {

EstimatorConfig make_config(const std::string& method, double tol, std::uint64_t samples,
                            std::uint64_t seed) {
    EstimatorConfig cfg;
    cfg.method = method_from_string(method);
    cfg.quadrature_tolerance = tol;
    cfg.mc_samples = samples;
    cfg.seed = seed;
    cfg.validate();
    return cfg;
}

py::object allocation_object(const Allocation& a) {
    if (const auto* v = std::get_if<AllocationVector>(&a)) return py::cast(v->stddevs());
    return py::cast(std::get<CovarianceSpec>(a).matrix());
}

}  // namespace

PYBIND11_MODULE(_gaussalloc, m) {
    m.doc() = "Expected maxima of Gaussian vectors and variance allocation solvers";

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
    py::register_exception<QuadratureError>(m, "QuadratureError", base.ptr());
    py::register_exception<BudgetExceeded>(m, "BudgetExceeded", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<FactorizationError>(m, "FactorizationError", base.ptr());

    py::class_<EstimatorConfig>(m, "EstimatorConfig")
        .def(py::init(&make_config), py::arg("method") = "auto",
             py::arg("quadrature_tolerance") = 1e-9, py::arg("mc_samples") = 2'000'000,
             py::arg("seed") = 0)
        .def_property_readonly("method", [](const EstimatorConfig& c) { return std::string(to_string(c.method)); })
        .def_readwrite("quadrature_tolerance", &EstimatorConfig::quadrature_tolerance)
        .def_readwrite("mc_samples", &EstimatorConfig::mc_samples)
        .def_readwrite("seed", &EstimatorConfig::seed);

    py::class_<Estimate>(m, "Estimate")
        .def_readonly("value", &Estimate::value)
        .def_readonly("half_width", &Estimate::half_width)
        .def_property_readonly("method", [](const Estimate& e) { return std::string(to_string(e.method_used)); })
        .def("__repr__", [](const Estimate& e) {
            return "Estimate(value=" + shortest_decimal(e.value) +
                   ", half_width=" + shortest_decimal(e.half_width) + ")";
        });

    py::class_<Instance>(m, "Instance")
        .def(py::init<std::vector<double>, std::vector<IndexSet>>(), py::arg("means"), py::arg("sets"))
        .def_property_readonly("n", &Instance::n)
        .def_property_readonly("m", &Instance::m)
        .def_property_readonly("means", &Instance::means)
        .def_property_readonly("sets", &Instance::sets)
        .def("to_json", &serialize_instance)
        .def_static("from_json", [](const std::string& s) { return parse_instance(s); })
        .def("__eq__", [](const Instance& a, const Instance& b) { return a == b; });

    m.def("erdos_renyi_instance",
          [](std::size_t n, std::size_t mm, double p, std::uint64_t seed) {
              return erdos_renyi_instance(n, mm, p, seed);
          },
          py::arg("n"), py::arg("m"), py::arg("p"), py::arg("seed") = 0);
    m.def("cycle_instance", &cycle_instance, py::arg("n"), py::arg("mu") = 0.0);
    m.def("complete_k_subsets_instance", &complete_k_subsets_instance, py::arg("n"), py::arg("k"));

    m.def("expected_max_with_floor", &expected_max_with_floor, py::arg("mu"), py::arg("sigma"),
          py::arg("floor"));
    m.def("expected_max_pair", &expected_max_pair, py::arg("mu1"), py::arg("sigma1"),
          py::arg("mu2"), py::arg("sigma2"));
    m.def("expected_max_independent",
          [](std::vector<double> means, std::vector<double> stddevs, const EstimatorConfig& cfg) {
              return expected_max_independent(GaussianVector(std::move(means), std::move(stddevs)), cfg);
          },
          py::arg("means"), py::arg("stddevs"), py::arg("config") = EstimatorConfig{});
    m.def("expected_max_correlated",
          [](std::vector<double> means, Eigen::MatrixXd sigma, const EstimatorConfig& cfg) {
              return expected_max_correlated(CovarianceSpec(std::move(means), std::move(sigma)), cfg);
          },
          py::arg("means"), py::arg("covariance"), py::arg("config") = EstimatorConfig{});
    m.def("graph_objective",
          [](const Instance& inst, std::vector<double> stddevs, const EstimatorConfig& cfg) {
              return graph_objective(inst, AllocationVector(std::move(stddevs)), cfg);
          },
          py::arg("instance"), py::arg("stddevs"), py::arg("config") = EstimatorConfig{});
    m.def("graph_objective_correlated",
          [](const Instance& inst, Eigen::MatrixXd sigma, const EstimatorConfig& cfg) {
              return graph_objective_correlated(inst, CovarianceSpec(inst.means(), std::move(sigma)), cfg);
          },
          py::arg("instance"), py::arg("covariance"), py::arg("config") = EstimatorConfig{});

    py::class_<SolveReport>(m, "SolveReport")
        .def_property_readonly("allocation", [](const SolveReport& r) { return allocation_object(r.allocation); })
        .def_readonly("objective", &SolveReport::objective)
        .def_property_readonly("algorithm", [](const SolveReport& r) { return std::string(to_string(r.algorithm)); })
        .def_readonly("eps", &SolveReport::eps)
        .def_readonly("grid_step", &SolveReport::grid_step)
        .def_readonly("support_size", &SolveReport::support_size)
        .def_readonly("seed", &SolveReport::seed)
        .def_readonly("nodes_evaluated", &SolveReport::nodes_evaluated)
        .def_property_readonly("elapsed", [](const SolveReport& r) { return r.elapsed.count(); })
        .def("to_json", [](const SolveReport& r, const Instance& inst) { return serialize_report(r, inst); });

    m.def("ptas_independent",
          [](const Instance& inst, double eps, const EstimatorConfig& cfg, std::optional<double> step,
             std::uint64_t budget) { return ptas_independent(inst, eps, cfg, step, {budget}); },
          py::arg("instance"), py::arg("eps"), py::arg("config") = EstimatorConfig{},
          py::arg("grid_step") = py::none(), py::arg("node_budget") = 5'000'000);
    m.def("ptas_correlated",
          [](const Instance& inst, double eps, std::optional<double> step, const EstimatorConfig& cfg,
             std::uint64_t budget) { return ptas_correlated(inst, eps, step, cfg, {budget}); },
          py::arg("instance"), py::arg("eps"), py::arg("grid_step") = py::none(),
          py::arg("config") = EstimatorConfig{}, py::arg("node_budget") = 5'000'000);
    m.def("log_approx_graph",
          [](const Instance& inst, const EstimatorConfig& cfg) { return log_approx_graph(inst, cfg); },
          py::arg("instance"), py::arg("config") = EstimatorConfig{});
    m.def("brute_force_grid", &brute_force_grid, py::arg("instance"), py::arg("grid_step"),
          py::arg("config") = EstimatorConfig{}, py::arg("budget") = 10'000'000);
    m.def("uniform_allocation",
          [](const Instance& inst) { return uniform_allocation(inst).stddevs(); }, py::arg("instance"));
    m.def("greedy_fixed_variance",
          [](const Instance& inst, double level, std::size_t cardinality, const EstimatorConfig& cfg) {
              auto g = greedy_fixed_variance(inst, level, cardinality, cfg);
              return py::make_tuple(g.chosen, g.objective);
          },
          py::arg("instance"), py::arg("variance_level"), py::arg("cardinality"),
          py::arg("config") = EstimatorConfig{});

    py::class_<VerificationReport>(m, "VerificationReport")
        .def_readonly("claim", &VerificationReport::claim)
        .def_readonly("trials", &VerificationReport::trials)
        .def_readonly("violations", &VerificationReport::violations)
        .def_readonly("worst_margin", &VerificationReport::worst_margin)
        .def_readonly("seed", &VerificationReport::seed)
        .def_readonly("summary", &VerificationReport::summary)
        .def_property_readonly("passed", &VerificationReport::passed);

    m.def("verification_claims", &verification_claims);
    m.def("run_verification", &run_verification, py::arg("claim"), py::arg("seed") = 0);
    m.def("concentration_csv",
          [](std::size_t n, std::size_t mm, std::vector<double> p_grid, std::vector<std::uint64_t> seeds) {
              return format_sweep_csv(concentration_profile(n, mm, p_grid, seeds, EstimatorConfig{}));
          },
          py::arg("n"), py::arg("m"), py::arg("p_grid"), py::arg("seeds"));
}
