#include "minstab/pipeline.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace minstab;

namespace {

GridDomain make_grid(const std::vector<double>& lower, const std::vector<double>& upper,
                     const std::vector<int>& resolution) {
  std::vector<std::pair<double, double>> bounds;
  for (std::size_t i = 0; i < lower.size() && i < upper.size(); ++i) bounds.emplace_back(lower[i], upper[i]);
  if (lower.size() != upper.size() || lower.size() != resolution.size()) {
    throw ConfigError("lower, upper and resolution must have the same length");
  }
  return build_grid(static_cast<int>(resolution.size()), bounds, resolution);
}

GraphSample make_graph(const Matrix& values, const std::vector<double>& lower, const std::vector<double>& upper,
                       const std::vector<int>& resolution) {
  return compute_jet(GraphSample(make_grid(lower, upper, resolution), static_cast<int>(values.rows()), values));
}

Matrix coordinates(const std::vector<double>& lower, const std::vector<double>& upper,
                   const std::vector<int>& resolution) {
  const GridDomain d = make_grid(lower, upper, resolution);
  Matrix out(d.dim(), static_cast<Eigen::Index>(d.node_count()));
  for (std::size_t k = 0; k < d.node_count(); ++k) out.col(static_cast<Eigen::Index>(k)) = d.coordinates(k);
  return out;
}

std::string check(const Matrix& values, const std::vector<double>& lower, const std::vector<double>& upper,
                  const std::vector<int>& resolution, const std::string& mode) {
  const GraphSample s = make_graph(values, lower, upper, resolution);
  const CriterionReport r = check_graph(s, analyze_geometry(s), criterion_constants(s.dim(), s.codim()), parse_mode(mode));
  return to_json(r).dump();
}

std::string rayleigh(const Matrix& values, const std::vector<double>& lower, const std::vector<double>& upper,
                     const std::vector<int>& resolution, std::uint64_t seed) {
  const GraphSample s = make_graph(values, lower, upper, resolution);
  EigenConfig config;
  config.seed = seed;
  config.keep_eigenfield = false;
  return to_json(min_rayleigh(s, induced_metric(s), config)).dump();
}

std::pair<Matrix, std::string> flow(const Matrix& values, const std::vector<double>& lower,
                                    const std::vector<double>& upper, const std::vector<int>& resolution,
                                    double residual_target, std::size_t max_steps) {
  FlowConfig config;
  config.residual_target = residual_target;
  config.max_steps = max_steps;
  const FlowResult r = run_flow(make_graph(values, lower, upper, resolution), config);
  return {r.state.sample.values(), to_json(r).dump()};
}

std::string xi_check(int n, int m, std::size_t count, std::uint64_t seed) {
  XiCheckConfig config;
  config.n = n;
  config.m = m;
  config.count = count;
  config.seed = seed;
  return to_json(check_xi_inequality(config)).dump();
}

std::pair<int, std::string> run(const std::string& text, const std::string& subcommand, const std::string& out_dir) {
  RunConfig config = parse_config(text, parse_subcommand(subcommand));
  config.output.dir = out_dir;
  std::ostringstream log;
  const CommandResult r = run_command(config, log);
  return {r.exit_code, r.report.dump()};
}

}  // namespace

PYBIND11_MODULE(_minstab, mod) {
  mod.doc() = "Native core of the minstab package";

  py::register_exception<ConfigError>(mod, "ConfigError", PyExc_ValueError);

  mod.def("criterion_constants", [](int n, int m) { return to_json(criterion_constants(n, m)).dump(); },
          py::arg("n"), py::arg("m"));
  mod.def("grid_coordinates", &coordinates, py::arg("lower"), py::arg("upper"), py::arg("resolution"));
  mod.def("check_graph", &check, py::arg("values"), py::arg("lower"), py::arg("upper"), py::arg("resolution"),
          py::arg("mode") = "slope");
  mod.def("min_rayleigh", &rayleigh, py::arg("values"), py::arg("lower"), py::arg("upper"), py::arg("resolution"),
          py::arg("seed") = 1);
  mod.def("flow", &flow, py::arg("values"), py::arg("lower"), py::arg("upper"), py::arg("resolution"),
          py::arg("residual_target") = 1e-8, py::arg("max_steps") = 1000000);
  mod.def("xi_check", &xi_check, py::arg("n"), py::arg("m"), py::arg("count") = 10000, py::arg("seed") = 1);
  mod.def("run_config", &run, py::arg("text"), py::arg("subcommand"), py::arg("out_dir"));
}
