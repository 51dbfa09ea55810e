#include "minstab/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

namespace minstab {

namespace {

namespace fs = std::filesystem;

fs::path prepare_output(const RunConfig& config) {
  const fs::path dir(config.output.dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

Json base_report(const RunConfig& config) {
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["subcommand"] = to_string(config.subcommand);
  out["seed"] = config.constants.seed;
  out["config"] = to_json(config);
  return out;
}

EigenConfig eigen_config(const RunConfig& config) {
  EigenConfig e;
  e.block_size = config.constants.eig_block;
  e.max_iterations = config.constants.eig_max_iterations;
  e.residual_tolerance = config.constants.eig_residual;
  e.seed = config.constants.seed;
  e.tol_eig = config.constants.tol_eig;
  return e;
}

void write_fields(const fs::path& path, const GraphSample& sample, const Geometry& geometry,
                  const QuadraticFormReport* eigen = nullptr) {
  std::vector<FieldColumn> columns = geometry_columns(sample, geometry);
  if (eigen && eigen->eigenfield) {
    const Matrix& v = eigen->eigenfield->values;
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      FieldColumn col{"eigenfield_v" + std::to_string(r + 1), {}};
      col.values.resize(static_cast<std::size_t>(v.cols()));
      for (Eigen::Index k = 0; k < v.cols(); ++k) col.values[static_cast<std::size_t>(k)] = v(r, k);
      columns.push_back(std::move(col));
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  write_field_csv(out, sample, columns);
}

int verdict_exit(StabilityVerdict v) {
  switch (v) {
    case StabilityVerdict::stable_numerically: return kExitStable;
    case StabilityVerdict::unstable_numerically: return kExitUnstable;
    case StabilityVerdict::inconclusive: return kExitInconclusive;
  }
  return kExitInconclusive;
}

struct Scaled {
  GraphSample sample;
  Json report;
};

Scaled scale_initial(const RunConfig& config, GraphSample sample, const CriterionConstants& constants) {
  const FlowSpec& spec = config.flow;
  if (spec.config.scaling) {
    const double factor = *spec.config.scaling;
    sample.set_values(factor * sample.values());
    return {std::move(sample), Json{{"method", "fixed"}, {"factor", factor}}};
  }
  if (spec.scale_to_criterion) {
    ScaledSample s = scale_to_criterion(sample, constants, config.constants.mode);
    Json rep{{"method", "criterion"}, {"mode", to_string(config.constants.mode)}, {"factor", s.factor},
             {"criterion", to_json(s.report)}};
    return {std::move(s.sample), std::move(rep)};
  }
  return {std::move(sample), Json{{"method", "none"}, {"factor", 1.0}}};
}

FlowResult flow_stage(const RunConfig& config, const fs::path& dir, std::ostream& log, Json& report) {
  GraphSample initial = make_sample(config);
  const CriterionConstants constants = criterion_constants(initial.dim(), initial.codim());
  Scaled scaled = scale_initial(config, std::move(initial), constants);
  report["scaling"] = scaled.report;
  log << "scaling: " << scaled.report["method"].get<std::string>() << ", factor "
      << scaled.report["factor"].get<double>() << '\n';

  {
    const GraphSample with_jet = compute_jet(scaled.sample);
    write_fields(dir / "field_initial.csv", with_jet, analyze_geometry(with_jet));
  }

  FlowResult flow = run_flow(std::move(scaled.sample), config.flow.config);
  const double h = flow.state.sample.domain().max_spacing();
  const double tolerance = config.flow.omega_tolerance.value_or(10.0 * h * h);
  const OmegaMonitorReport monitor = monitor_omega(flow.trace, tolerance, config.flow.config.omega_floor);
  {
    std::ofstream out(dir / "trace.csv", std::ios::binary);
    write_trace_csv(out, flow.trace);
  }
  report["flow"] = to_json(flow);
  report["omega_monitor"] = to_json(monitor);
  log << "flow: " << to_string(flow.status) << " after " << flow.state.steps << " steps, residual "
      << flow.state.residual << '\n';
  if (monitor.dropped) {
    log << "flow: min *Omega dropped by " << monitor.max_drop << " (tolerance " << tolerance << ")\n";
  }
  return flow;
}

CommandResult run_criterion(const RunConfig& config, const fs::path& dir, std::ostream& log, bool analyze) {
  CommandResult result{kExitError, base_report(config)};
  const GraphSample sample = compute_jet(make_sample(config));
  const Geometry geometry = analyze_geometry(sample);
  const CriterionConstants constants = criterion_constants(sample.dim(), sample.codim());
  const CriterionReport criterion = check_graph(sample, geometry, constants, config.constants.mode);
  result.report["criterion"] = to_json(criterion);
  log << "criterion (" << to_string(criterion.mode) << "): " << (criterion.pass() ? "pass" : "fail")
      << ", max |df| " << criterion.max_df_norm << ", min *Omega " << criterion.min_star_omega << '\n';
  if (!criterion.minimal) {
    log << "note: mean curvature residual " << criterion.mean_curvature_residual
        << " exceeds the minimality tolerance " << criterion.minimality_tolerance << '\n';
  }
  if (!analyze) {
    write_fields(dir / "field.csv", sample, geometry);
    result.exit_code = criterion.pass() ? kExitStable : kExitUnstable;
    return result;
  }
  const EigenConfig eig = eigen_config(config);
  const QuadraticFormReport spectrum = min_rayleigh(sample, geometry.metric, eig);
  result.report["eigen_config"] = to_json(eig);
  result.report["second_variation"] = to_json(spectrum);
  write_fields(dir / "field.csv", sample, geometry, &spectrum);
  log << "second variation: " << to_string(spectrum.verdict) << ", mu_min "
      << spectrum.min_eig_estimate.value_or(std::nan("")) << '\n';
  result.exit_code = verdict_exit(spectrum.verdict);
  return result;
}

CommandResult run_flow_command(const RunConfig& config, const fs::path& dir, std::ostream& log, bool full) {
  CommandResult result{kExitError, base_report(config)};
  const FlowResult flow = flow_stage(config, dir, log, result.report);
  const GraphSample& final_sample = flow.state.sample;
  const Geometry geometry = analyze_geometry(final_sample);
  if (!full) {
    write_fields(dir / "field_final.csv", final_sample, geometry);
    result.exit_code = flow.converged() ? kExitStable : kExitInconclusive;
    return result;
  }

  const CriterionConstants constants = criterion_constants(final_sample.dim(), final_sample.codim());
  const CriterionReport criterion = check_graph(final_sample, geometry, constants, config.constants.mode);
  result.report["criterion"] = to_json(criterion);
  log << "criterion (" << to_string(criterion.mode) << "): " << (criterion.pass() ? "pass" : "fail") << '\n';

  const EigenConfig eig = eigen_config(config);
  const QuadraticFormReport spectrum = min_rayleigh(final_sample, geometry.metric, eig);
  result.report["eigen_config"] = to_json(eig);
  result.report["second_variation"] = to_json(spectrum);
  write_fields(dir / "field_final.csv", final_sample, geometry, &spectrum);
  log << "second variation: " << to_string(spectrum.verdict) << ", mu_min "
      << spectrum.min_eig_estimate.value_or(std::nan("")) << '\n';

  if (!flow.converged()) {
    result.report["verdict"] = to_string(StabilityVerdict::inconclusive);
    result.exit_code = kExitInconclusive;
  } else {
    result.report["verdict"] = to_string(spectrum.verdict);
    result.exit_code = verdict_exit(spectrum.verdict);
  }
  return result;
}

CommandResult run_verify_algebra(const RunConfig& config, std::ostream& log) {
  CommandResult result{kExitError, base_report(config)};
  const AlgebraSpec& spec = config.algebra;
  const std::uint64_t seed = spec.seed.value_or(config.constants.seed);
  Json suites = Json::array();
  Json oracles = Json::array();
  bool ok = true;
  for (const auto& [n, m] : spec.pairs) {
    XiCheckConfig check;
    check.n = n;
    check.m = m;
    check.count = spec.count;
    check.seed = seed;
    check.tolerance = spec.tolerance;
    const XiBatchReport batch = check_xi_inequality(check);
    ok = ok && batch.ok();
    suites.push_back(to_json(batch));
    log << "xi inequality (" << n << ", " << m << "): " << batch.violations << " violations in "
        << batch.count << " samples, min margin " << batch.min_margin << '\n';
    if (spec.oracle_count > 0) oracles.push_back(to_json(oracle_equivalence(n, m, spec.oracle_count, seed)));
  }
  result.report["xi_inequality"] = std::move(suites);
  result.report["oracle_equivalence"] = std::move(oracles);

  // Above the critical slope the bound is expected to fail somewhere.
  AdversarialScanConfig scan;
  scan.tolerance = spec.tolerance;
  const XiBatchReport negative = adversarial_scan(scan);
  result.report["negative_control"] = to_json(negative);
  log << "negative control at lambda = " << scan.lambda_value << ": " << negative.violations
      << " violations in " << negative.count << " points\n";

  result.exit_code = ok ? kExitStable : kExitUnstable;
  return result;
}

}  // namespace

CommandResult run_command(const RunConfig& config, std::ostream& log) {
  const fs::path dir = prepare_output(config);
  CommandResult result;
  switch (config.subcommand) {
    case Subcommand::criterion: result = run_criterion(config, dir, log, false); break;
    case Subcommand::analyze: result = run_criterion(config, dir, log, true); break;
    case Subcommand::flow: result = run_flow_command(config, dir, log, false); break;
    case Subcommand::pipeline: result = run_flow_command(config, dir, log, true); break;
    case Subcommand::verify_algebra: result = run_verify_algebra(config, log); break;
  }
  result.report["exit_code"] = result.exit_code;
  write_json((dir / "report.json").string(), result.report);
  return result;
}

}  // namespace minstab
