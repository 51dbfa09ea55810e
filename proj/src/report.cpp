#include "minstab/report.hpp"

#include <fstream>

namespace minstab {

namespace {

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json verdict_json(const ModeVerdict& v) { return Json{{"pass", v.pass}, {"margin", v.margin}}; }

}  // namespace

Json to_json(const CriterionConstants& c) {
  return Json{{"n", c.n},
              {"m", c.m},
              {"c", c.c},
              {"critical_slope", c.slope},
              {"supported_slope", c.supported_slope},
              {"delta", c.delta},
              {"epsilon_star", c.epsilon_star},
              {"omega_threshold_paper", c.omega_threshold_paper},
              {"omega_threshold_derived", c.omega_threshold_derived}};
}

Json to_json(const CriterionReport& r) {
  return Json{{"mode", to_string(r.mode)},
              {"pass", r.pass()},
              {"constants", to_json(r.constants)},
              {"max_df_norm", r.max_df_norm},
              {"min_star_omega", r.min_star_omega},
              {"mean_curvature_residual", r.mean_curvature_residual},
              {"minimality_tolerance", r.minimality_tolerance},
              {"minimal", r.minimal},
              {"modes",
               Json{{"slope", verdict_json(r.slope)},
                    {"omega_paper", verdict_json(r.omega_paper)},
                    {"omega_derived", verdict_json(r.omega_derived)}}}};
}

Json to_json(const QuadraticFormReport& r) {
  return Json{{"verdict", to_string(r.verdict)},
              {"min_eig_estimate", optional_json(r.min_eig_estimate)},
              {"rayleigh", optional_json(r.rayleigh)},
              {"residual", optional_json(r.residual)},
              {"converged", r.converged},
              {"iterations", r.iterations},
              {"tol_eig", r.tol_eig},
              {"shift", r.shift},
              {"gradient_energy", r.gradient_energy},
              {"b_energy", r.b_energy},
              {"q_value", r.q_value},
              {"l2_norm", r.l2_norm},
              {"diagnostics", r.diagnostics}};
}

Json to_json(const TraceRow& row) {
  return Json{{"step", row.step},
              {"t", row.time},
              {"residual", row.residual},
              {"min_star_omega", row.min_star_omega},
              {"dt", row.dt},
              {"below_floor", row.below_floor}};
}

Json to_json(const FlowResult& r) {
  return Json{{"status", to_string(r.status)},
              {"message", r.message},
              {"steps", r.state.steps},
              {"time", r.state.time},
              {"residual", r.state.residual},
              {"min_star_omega", r.state.min_star_omega},
              {"dt_halvings", r.dt_halvings},
              {"initial", to_json(r.trace.front())},
              {"final", to_json(r.trace.back())}};
}

Json to_json(const OmegaMonitorReport& r) {
  return Json{{"initial", r.initial},     {"minimum", r.minimum},
              {"tolerance", r.tolerance}, {"max_drop", r.max_drop},
              {"dropped", r.dropped},     {"floor", optional_json(r.floor)},
              {"below_floor", r.below_floor}};
}

Json to_json(const AlgebraSample& s) {
  Json h = Json::array();
  for (const Matrix& m : s.h) h.push_back(matrix_json(m));
  return Json{{"n", s.n},
              {"m", s.m},
              {"lambda", vector_json(s.lambda)},
              {"normal_value", vector_json(s.normal_value)},
              {"normal_derivative", matrix_json(s.normal_derivative)},
              {"h", std::move(h)},
              {"trace_free", s.trace_free}};
}

Json to_json(const XiBatchReport& r) {
  Json out{{"n", r.n},
           {"m", r.m},
           {"lambda_cap", r.lambda_cap},
           {"delta", r.delta},
           {"tolerance", r.tolerance},
           {"seed", r.seed},
           {"count", r.count},
           {"violations", r.violations},
           {"ok", r.ok()},
           {"min_margin", r.min_margin},
           {"argmin", to_json(r.argmin)}};
  out["first_violation"] = r.first_violation ? to_json(*r.first_violation) : Json(nullptr);
  return out;
}

Json to_json(const OracleEquivalenceReport& r) {
  return Json{{"n", r.n},
              {"m", r.m},
              {"count", r.count},
              {"seed", r.seed},
              {"lambda_cap", r.lambda_cap},
              {"xi_vs_expanded", r.xi_vs_expanded},
              {"expanded_vs_direct", r.expanded_vs_direct},
              {"flipped_vs_direct", r.flipped_vs_direct},
              {"tn_twice_vs_direct", r.tn_twice_vs_direct}};
}

Json to_json(const EigenConfig& c) {
  return Json{{"block_size", c.block_size},
              {"max_iterations", c.max_iterations},
              {"residual_tolerance", c.residual_tolerance},
              {"seed", c.seed},
              {"tol_eig", optional_json(c.tol_eig)}};
}

Json to_json(const RunConfig& c) {
  Json out;
  out["subcommand"] = to_string(c.subcommand);
  if (c.domain) {
    Json res = Json::array();
    for (int r : c.domain->resolution) res.push_back(r);
    out["domain"] = Json{{"n", c.domain->n}, {"lower", c.domain->lower}, {"upper", c.domain->upper},
                         {"resolution", std::move(res)}};
  }
  if (c.function) {
    const FunctionSpec& f = *c.function;
    Json fn{{"m", f.m}, {"builtin", f.builtin}};
    if (f.a) fn["A"] = matrix_json(*f.a);
    if (f.b) fn["b"] = vector_json(*f.b);
    if (!f.quadratic.empty()) {
      Json q = Json::array();
      for (const Matrix& m : f.quadratic) q.push_back(matrix_json(m));
      fn["Q"] = std::move(q);
    }
    if (f.amplitude) fn["amplitude"] = vector_json(*f.amplitude);
    if (f.frequency) fn["frequency"] = vector_json(*f.frequency);
    if (f.phase) fn["phase"] = vector_json(*f.phase);
    if (f.builtin == "random_fourier") {
      fn["seed"] = f.seed.value_or(c.constants.seed);
      fn["modes"] = f.modes;
    }
    out["function"] = std::move(fn);
  }
  out["constants"] = Json{{"mode", to_string(c.constants.mode)},
                          {"seed", c.constants.seed},
                          {"tol_eig", optional_json(c.constants.tol_eig)},
                          {"eig_residual", c.constants.eig_residual},
                          {"eig_block", c.constants.eig_block},
                          {"eig_max_iterations", c.constants.eig_max_iterations}};
  const FlowConfig& fc = c.flow.config;
  out["flow"] = Json{{"dt_safety", fc.dt_safety},
                     {"max_steps", fc.max_steps},
                     {"residual_target", fc.residual_target},
                     {"omega_floor", optional_json(fc.omega_floor)},
                     {"scaling", optional_json(fc.scaling)},
                     {"log_interval", fc.log_interval},
                     {"scale_to_criterion", c.flow.scale_to_criterion},
                     {"omega_tolerance", optional_json(c.flow.omega_tolerance)}};
  Json pairs = Json::array();
  for (const auto& [n, m] : c.algebra.pairs) pairs.push_back(std::to_string(n) + "x" + std::to_string(m));
  out["algebra"] = Json{{"pairs", std::move(pairs)},
                        {"count", c.algebra.count},
                        {"seed", c.algebra.seed.value_or(c.constants.seed)},
                        {"tolerance", c.algebra.tolerance},
                        {"oracle_count", c.algebra.oracle_count}};
  out["output"] = Json{{"dir", c.output.dir}};
  return out;
}

void write_json(const std::string& path, const Json& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << report.dump(2) << '\n';
}

}  // namespace minstab
