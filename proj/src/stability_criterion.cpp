#include "minstab/stability_criterion.hpp"

#include "minstab/errors.hpp"

#include <algorithm>
#include <cmath>

namespace minstab {

std::string to_string(CriterionMode mode) {
  switch (mode) {
    case CriterionMode::slope:
      return "slope";
    case CriterionMode::omega_paper:
      return "omega_paper";
    case CriterionMode::omega_derived:
      return "omega_derived";
  }
  return "slope";
}

CriterionMode parse_mode(std::string_view text) {
  if (text == "slope") return CriterionMode::slope;
  if (text == "omega_paper") return CriterionMode::omega_paper;
  if (text == "omega_derived") return CriterionMode::omega_derived;
  throw ConfigError("unknown criterion mode '" + std::string(text) +
                    "' (expected slope, omega_paper or omega_derived)");
}

double c_constant(int n, int m) {
  if (n < 1 || m < 1) throw ConfigError("c_constant: n and m must be >= 1");
  if (m <= 2 || n <= 2) return 1.0;
  return static_cast<double>(std::min(m - 1, n - 1));
}

namespace {

void require_c(double c, const char* where) {
  if (!(c >= 1.0) || !std::isfinite(c)) {
    throw ConfigError(std::string(where) + ": c must be a finite real >= 1");
  }
}

}  // namespace

double critical_slope(double c) {
  require_c(c, "critical_slope");
  return (std::sqrt(1.0 + c) - 1.0) / std::sqrt(c);
}

double epsilon_curve(double eps, double c) {
  require_c(c, "epsilon_curve");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("epsilon_curve: eps must lie in (0, 1)");
  return eps * (1.0 - eps) / (1.0 + c * eps);
}

EpsilonMaximum epsilon_star(double c) {
  require_c(c, "epsilon_star");
  const double root = std::sqrt(1.0 + c);
  EpsilonMaximum out;
  out.epsilon = (root - 1.0) / c;
  out.reference_max = (root - 1.0) * (root - 1.0) / c;
  out.attained_max = epsilon_curve(out.epsilon, c);
  return out;
}

double supported_slope(double c) {
  require_c(c, "supported_slope");
  return (std::sqrt(1.0 + c) - 1.0) / c;
}

OmegaThresholds omega_thresholds(double c) {
  require_c(c, "omega_thresholds");
  const double root = std::sqrt(1.0 + c);
  const double slope = critical_slope(c);
  OmegaThresholds t;
  t.closed_form = c / (2.0 * (c + 1.0 - root));
  t.derived = 1.0 / std::sqrt(1.0 + slope * slope);
  return t;
}

CriterionConstants criterion_constants(int n, int m) {
  CriterionConstants k;
  k.n = n;
  k.m = m;
  k.c = c_constant(n, m);
  k.slope = critical_slope(k.c);
  k.supported_slope = supported_slope(k.c);
  k.epsilon_star = epsilon_star(k.c).epsilon;
  k.delta = k.epsilon_star;
  const OmegaThresholds t = omega_thresholds(k.c);
  k.omega_threshold_paper = t.closed_form;
  k.omega_threshold_derived = t.derived;
  return k;
}

const ModeVerdict& CriterionReport::verdict(CriterionMode m) const {
  switch (m) {
    case CriterionMode::slope:
      return slope;
    case CriterionMode::omega_paper:
      return omega_paper;
    case CriterionMode::omega_derived:
      return omega_derived;
  }
  return slope;
}

CriterionReport check_graph(const GraphSample& sample, const Geometry& geometry,
                            const CriterionConstants& constants, CriterionMode mode) {
  if (!sample.has_jet()) throw StateError("check_graph: jet has not been computed");
  const GridDomain& domain = sample.domain();
  if (geometry.metric.nodes.size() != domain.node_count() ||
      geometry.frames.size() != domain.node_count() ||
      geometry.sff.nodes.size() != domain.node_count()) {
    throw StateError("check_graph: geometry was not computed for this sample");
  }
  if (constants.n != sample.dim() || constants.m != sample.codim()) {
    throw ConfigError("check_graph: constants were built for a different (n, m)");
  }

  CriterionReport report;
  report.constants = constants;
  report.mode = mode;
  for (std::size_t k : domain.interior_nodes()) {
    const Vector& lambda = geometry.frames[k].lambda;
    if (lambda.size() > 0) report.max_df_norm = std::max(report.max_df_norm, lambda[0]);
    report.min_star_omega = std::min(report.min_star_omega, geometry.metric.nodes[k].star_omega);
    report.mean_curvature_residual =
        std::max(report.mean_curvature_residual, geometry.sff.nodes[k].mean_curvature.norm());
  }
  const double h = domain.max_spacing();
  report.minimality_tolerance = 10.0 * h * h;
  report.minimal = report.mean_curvature_residual <= report.minimality_tolerance;

  report.slope.margin = constants.slope - report.max_df_norm;
  report.slope.pass = report.slope.margin >= 0.0;
  report.omega_paper.margin = report.min_star_omega - constants.omega_threshold_paper;
  report.omega_paper.pass = report.omega_paper.margin >= 0.0;
  report.omega_derived.margin = report.min_star_omega - constants.omega_threshold_derived;
  report.omega_derived.pass = report.omega_derived.margin >= 0.0;
  return report;
}

}  // namespace minstab
