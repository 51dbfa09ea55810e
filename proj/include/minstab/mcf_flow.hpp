#pragma once

#include "minstab/errors.hpp"
#include "minstab/grid_geometry.hpp"
#include "minstab/stability_criterion.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace minstab {

struct FlowState {
  GraphSample sample;
  double time = 0.0;
  /// max over interior nodes of |g^{ij} d^2 f / dx^i dx^j|.
  double residual = 0.0;
  double min_star_omega = 1.0;
  std::size_t steps = 0;
};

/// Recomputes the jet, residual and min_star_omega of f.
FlowState make_flow_state(GraphSample sample, double time = 0.0, std::size_t steps = 0);

struct FlowConfig {
  double dt_safety = 0.9;
  std::size_t max_steps = 1000000;
  double residual_target = 1e-8;
  /// Alarm threshold for min_star_omega; crossings are flagged in the trace.
  std::optional<double> omega_floor;
  /// Multiplier applied to the initial data by the pipeline instead of
  /// scale_to_criterion. run_flow itself never rescales.
  std::optional<double> scaling;
  std::size_t log_interval = 100;
};

/// Raised by mcf_step; carries the state before the failed step.
class FlowBlowUpError : public BlowUpError {
 public:
  FlowBlowUpError(const std::string& what, FlowState snapshot)
      : BlowUpError(what), snapshot_(std::move(snapshot)) {}
  const FlowState& snapshot() const { return snapshot_; }

 private:
  FlowState snapshot_;
};

/// dt_safety * h_min^2 / (2 n Lambda), Lambda = max node spectral norm of g^{-1}.
double stable_time_step(const FlowState& state, const FlowConfig& config);

/// One explicit Euler step f <- f + dt g^{ij} f_ij on the interior nodes; the
/// boundary ring is copied unchanged. Uses stable_time_step unless dt is given.
FlowState mcf_step(const FlowState& state, const FlowConfig& config,
                   std::optional<double> dt = std::nullopt);

struct TraceRow {
  std::size_t step = 0;
  double time = 0.0;
  double residual = 0.0;
  double min_star_omega = 1.0;
  double dt = 0.0;
  bool below_floor = false;
};

enum class FlowStatus { converged, budget_exhausted, blow_up };

std::string to_string(FlowStatus status);

struct FlowResult {
  FlowState state;
  std::vector<TraceRow> trace;
  FlowStatus status = FlowStatus::budget_exhausted;
  std::string message;
  /// Number of times dt was halved after a residual increase.
  std::size_t dt_halvings = 0;

  bool converged() const { return status == FlowStatus::converged; }
};

/// Steps until the residual reaches residual_target or max_steps is spent.
/// dt is halved whenever the residual grows and relaxed back toward the
/// stability bound after a run of decreases. Blow-ups are reported through
/// the status with the last good state, not thrown.
FlowResult run_flow(GraphSample initial, const FlowConfig& config);

struct OmegaMonitorReport {
  double initial = 1.0;
  double minimum = 1.0;
  double tolerance = 0.0;
  /// Largest drop of min_star_omega below its initial value.
  double max_drop = 0.0;
  bool dropped = false;  // max_drop > tolerance
  std::optional<double> floor;
  bool below_floor = false;
};

/// Empirical check that min_star_omega does not decrease along the flow.
/// Throws ConfigError on an empty trace.
OmegaMonitorReport monitor_omega(const std::vector<TraceRow>& trace, double tolerance,
                                 std::optional<double> floor = std::nullopt);

struct ScaledSample {
  GraphSample sample;
  double factor = 1.0;
  CriterionReport report;
};

/// Largest t in [0, 1] (to bisection tolerance) with check_graph passing on
/// t * phi in the given mode. A passing phi, or phi identically zero, is
/// returned unchanged with t = 1.
ScaledSample scale_to_criterion(const GraphSample& phi, const CriterionConstants& constants,
                                CriterionMode mode, double tolerance = 1e-9);

/// `step,t,residual,min_star_omega,dt` rows.
void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace);

}  // namespace minstab
