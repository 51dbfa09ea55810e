#include "minstab/mcf_flow.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace minstab {

namespace {

// Consecutive residual decreases before a halved dt is doubled again.
constexpr std::size_t kRelaxAfter = 20;
constexpr double kMinDtFactor = 1.0 / 1024.0;
constexpr double kBlowUpGrowth = 1e6;

double min_star_omega_of(const GraphSample& sample) {
  double best = 1.0;
  for (std::size_t k : sample.domain().interior_nodes()) {
    best = std::min(best, metric_at(sample.jet(k).df).star_omega);
  }
  return best;
}

}  // namespace

FlowState make_flow_state(GraphSample sample, double time, std::size_t steps) {
  GraphSample with_jet = compute_jet(std::move(sample));
  const double residual = minimal_surface_residual(with_jet);
  const double omega = min_star_omega_of(with_jet);
  return FlowState{std::move(with_jet), time, residual, omega, steps};
}

double stable_time_step(const FlowState& state, const FlowConfig& config) {
  if (!(config.dt_safety > 0.0 && config.dt_safety <= 1.0)) {
    throw ConfigError("flow: dt_safety must lie in (0, 1]");
  }
  const GridDomain& domain = state.sample.domain();
  double lambda = 1.0;
  for (std::size_t k : domain.interior_nodes()) {
    // g = I + df^T df >= I, so the spectral norm of g^{-1} is at most 1; it is
    // computed anyway so the bound follows the stated formula.
    const Matrix g_inv = metric_at(state.sample.jet(k).df).g_inv;
    lambda = std::max(lambda, Eigen::SelfAdjointEigenSolver<Matrix>(g_inv).eigenvalues().maxCoeff());
  }
  if (domain.interior_nodes().empty()) lambda = 1.0;
  const double h = domain.min_spacing();
  return config.dt_safety * h * h / (2.0 * domain.dim() * lambda);
}

FlowState mcf_step(const FlowState& state, const FlowConfig& config, std::optional<double> dt) {
  const double step = dt ? *dt : stable_time_step(state, config);
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("flow: time step must be positive");
  const GraphSample& sample = state.sample;
  Matrix values = sample.values();
  for (std::size_t k : sample.domain().interior_nodes()) {
    const NodeJet& jet = sample.jet(k);
    values.col(static_cast<Eigen::Index>(k)) += step * minimal_surface_operator(jet, metric_at(jet.df).g_inv);
  }
  if (!values.allFinite()) {
    throw FlowBlowUpError("flow: non-finite values after step " + std::to_string(state.steps + 1), state);
  }
  GraphSample next = sample;
  next.set_values(std::move(values));
  FlowState out = [&] {
    try {
      return make_flow_state(std::move(next), state.time + step, state.steps + 1);
    } catch (const ConsistencyError& e) {
      // Overflowing but finite values can break the metric factorization.
      throw FlowBlowUpError("flow: " + std::string(e.what()) + " after step " +
                                std::to_string(state.steps + 1),
                            state);
    }
  }();
  if (!std::isfinite(out.residual)) {
    throw FlowBlowUpError("flow: non-finite residual after step " + std::to_string(out.steps), state);
  }
  return out;
}

std::string to_string(FlowStatus status) {
  switch (status) {
    case FlowStatus::converged: return "converged";
    case FlowStatus::budget_exhausted: return "budget_exhausted";
    case FlowStatus::blow_up: return "blow_up";
  }
  return "blow_up";
}

FlowResult run_flow(GraphSample initial, const FlowConfig& config) {
  if (!(config.residual_target > 0.0)) throw ConfigError("flow: residual_target must be > 0");
  if (config.log_interval == 0) throw ConfigError("flow: log_interval must be >= 1");

  FlowResult result{make_flow_state(std::move(initial)), {}, FlowStatus::budget_exhausted, {}, 0};
  FlowState& state = result.state;
  const double initial_residual = state.residual;
  const auto record = [&](double dt) {
    const bool below = config.omega_floor && state.min_star_omega < *config.omega_floor;
    result.trace.push_back({state.steps, state.time, state.residual, state.min_star_omega, dt, below});
  };
  record(0.0);

  double factor = 1.0;
  std::size_t decreases = 0;
  double last_dt = 0.0;
  while (state.residual > config.residual_target && state.steps < config.max_steps) {
    last_dt = factor * stable_time_step(state, config);
    FlowState next = [&] {
      try {
        return mcf_step(state, config, last_dt);
      } catch (const FlowBlowUpError& e) {
        result.status = FlowStatus::blow_up;
        result.message = e.what();
        return state;
      }
    }();
    if (result.status == FlowStatus::blow_up) break;
    if (next.residual > kBlowUpGrowth * std::max(initial_residual, config.residual_target)) {
      std::ostringstream msg;
      msg << "flow: residual grew to " << next.residual << " from " << initial_residual << " at step "
          << next.steps;
      result.status = FlowStatus::blow_up;
      result.message = msg.str();
      break;
    }
    if (next.residual > state.residual) {
      if (factor > kMinDtFactor) {
        factor *= 0.5;
        ++result.dt_halvings;
      }
      decreases = 0;
    } else if (++decreases >= kRelaxAfter && factor < 1.0) {
      factor = std::min(1.0, 2.0 * factor);
      decreases = 0;
    }
    state = std::move(next);
    if (state.steps % config.log_interval == 0) record(last_dt);
  }

  if (result.status != FlowStatus::blow_up) {
    if (state.residual <= config.residual_target) {
      result.status = FlowStatus::converged;
      result.message = "residual target reached after " + std::to_string(state.steps) + " steps";
    } else {
      result.message = "step budget of " + std::to_string(config.max_steps) + " exhausted";
    }
  }
  if (result.trace.back().step != state.steps) record(last_dt);
  return result;
}

OmegaMonitorReport monitor_omega(const std::vector<TraceRow>& trace, double tolerance,
                                 std::optional<double> floor) {
  if (trace.empty()) throw ConfigError("monitor_omega: trace is empty");
  OmegaMonitorReport report;
  report.initial = trace.front().min_star_omega;
  report.minimum = report.initial;
  report.tolerance = tolerance;
  report.floor = floor;
  for (const TraceRow& row : trace) {
    report.minimum = std::min(report.minimum, row.min_star_omega);
    if (floor && row.min_star_omega < *floor) report.below_floor = true;
  }
  report.max_drop = std::max(0.0, report.initial - report.minimum);
  report.dropped = report.max_drop > tolerance;
  return report;
}

ScaledSample scale_to_criterion(const GraphSample& phi, const CriterionConstants& constants,
                                CriterionMode mode, double tolerance) {
  if (!(tolerance > 0.0)) throw ConfigError("scale_to_criterion: tolerance must be > 0");
  const auto evaluate = [&](double t) {
    GraphSample scaled = phi;
    scaled.set_values(t * phi.values());
    scaled = compute_jet(std::move(scaled));
    const Geometry geometry = analyze_geometry(scaled);
    CriterionReport report = check_graph(scaled, geometry, constants, mode);
    return ScaledSample{std::move(scaled), t, std::move(report)};
  };

  ScaledSample full = evaluate(1.0);
  if (full.report.pass() || phi.values().isZero(0.0)) return full;

  // t = 0 gives the flat graph, which passes every mode.
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (evaluate(mid).report.pass()) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return evaluate(lo);
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
  const auto old = os.precision(17);
  os << "step,t,residual,min_star_omega,dt\n";
  for (const TraceRow& row : trace) {
    os << row.step << ',' << row.time << ',' << row.residual << ',' << row.min_star_omega << ','
       << row.dt << '\n';
  }
  os.precision(old);
}

}  // namespace minstab
