#pragma once

#include "minstab/grid_geometry.hpp"

#include <string>
#include <string_view>

namespace minstab {

/// Which closed-form condition check_graph decides on.
enum class CriterionMode { slope, omega_paper, omega_derived };

std::string to_string(CriterionMode mode);
/// Accepts "slope", "omega_paper", "omega_derived"; throws ConfigError otherwise.
CriterionMode parse_mode(std::string_view text);

/// 1 when m <= 2 or n <= 2, otherwise min(m-1, n-1).
double c_constant(int n, int m);

/// Gradient bound (sqrt(1+c) - 1) / sqrt(c) under which the graph is stable.
double critical_slope(double c);

/// eps (1 - eps) / (1 + c eps), the admissible squared slope for a given split.
double epsilon_curve(double eps, double c);

/// The maximizer eps* = (sqrt(1+c) - 1) / c of epsilon_curve together with two
/// readings of the maximum: `reference_max` = (sqrt(c+1) - 1)^2 / c, which equals
/// critical_slope(c)^2, and `attained_max` = epsilon_curve(eps*, c). The two
/// agree only for c = 1.
struct EpsilonMaximum {
  double epsilon = 0.0;
  double reference_max = 0.0;
  double attained_max = 0.0;
};

EpsilonMaximum epsilon_star(double c);

/// Square root of EpsilonMaximum::attained_max, i.e. (sqrt(1+c) - 1) / c.
double supported_slope(double c);

/// Lower bounds on *Omega. `closed_form` is c / (2(c + 1 - sqrt(1+c))), used
/// by the omega_paper mode; `derived` is
/// 1 / sqrt(1 + slope^2), the smallest value for which *Omega >= t forces every
/// singular value below critical_slope via prod(1 + lambda_i^2) = (*Omega)^-2.
struct OmegaThresholds {
  double closed_form = 0.0;
  double derived = 0.0;
};

OmegaThresholds omega_thresholds(double c);

struct CriterionConstants {
  int n = 0;
  int m = 0;
  double c = 1.0;
  double slope = 0.0;
  double supported_slope = 0.0;
  double delta = 0.0;
  double epsilon_star = 0.0;
  double omega_threshold_paper = 0.0;
  double omega_threshold_derived = 0.0;
};

CriterionConstants criterion_constants(int n, int m);

struct ModeVerdict {
  bool pass = false;
  /// Criterion value minus attained value; non-negative iff the mode passes.
  double margin = 0.0;
};

struct CriterionReport {
  CriterionConstants constants;
  CriterionMode mode = CriterionMode::slope;
  double max_df_norm = 0.0;
  double min_star_omega = 1.0;
  double mean_curvature_residual = 0.0;
  double minimality_tolerance = 0.0;
  bool minimal = true;
  ModeVerdict slope;
  ModeVerdict omega_paper;
  ModeVerdict omega_derived;

  const ModeVerdict& verdict(CriterionMode m) const;
  bool pass() const { return verdict(mode).pass; }
};

/// Evaluates every mode on the interior nodes. Non-minimal inputs are not
/// rejected; the mean-curvature residual is reported against a 10 h^2 scale.
CriterionReport check_graph(const GraphSample& sample, const Geometry& geometry,
                            const CriterionConstants& constants, CriterionMode mode);

}  // namespace minstab
