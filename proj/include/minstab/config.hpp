#pragma once

#include "minstab/errors.hpp"
#include "minstab/grid_geometry.hpp"
#include "minstab/mcf_flow.hpp"
#include "minstab/stability_criterion.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace minstab {

enum class Subcommand { criterion, analyze, flow, verify_algebra, pipeline };

std::string to_string(Subcommand command);
/// Accepts the CLI spelling (e.g. "verify-algebra"). Throws ConfigError.
Subcommand parse_subcommand(const std::string& text);

struct DomainSpec {
  int n = 0;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<int> resolution;
};

/// A builtin map f : R^n -> R^m and its parameters. Matrices are row-major.
///   zero
///   linear          f = A x + b
///   quadratic       f^a = x^T Q_a x / 2 + (A x + b)^a
///   sinusoidal      f^a = amplitude_a prod_i sin(frequency_i pi x_i + phase_i)
///   random_fourier  seeded sum of cosine products over the normalized box
///                   coordinates, coefficients decaying like 1/|k|^2, times amplitude
struct FunctionSpec {
  int m = 0;
  std::string builtin;
  std::optional<Matrix> a;          // m x n
  std::optional<Vector> b;          // m
  std::vector<Matrix> quadratic;    // Q1..Qm, n x n symmetric
  std::optional<Vector> amplitude;  // sinusoidal: m values; random_fourier: first entry
  std::optional<Vector> frequency;  // n
  std::optional<Vector> phase;      // n
  std::optional<std::uint64_t> seed;
  int modes = 3;
};

struct ConstantsSpec {
  CriterionMode mode = CriterionMode::slope;
  std::uint64_t seed = 1;
  std::optional<double> tol_eig;
  double eig_residual = 1e-8;
  int eig_block = 6;
  std::size_t eig_max_iterations = 2000;
};

struct FlowSpec {
  FlowConfig config;
  /// Shrink the initial data with scale_to_criterion before flowing. Ignored
  /// when config.scaling is set.
  bool scale_to_criterion = true;
  /// Tolerance for the *Omega monitor; defaults to 10 h^2.
  std::optional<double> omega_tolerance;
};

struct AlgebraSpec {
  std::vector<std::pair<int, int>> pairs{{2, 2}, {3, 3}, {3, 4}, {4, 3}};
  std::size_t count = 100000;
  std::optional<std::uint64_t> seed;
  double tolerance = 1e-10;
  std::size_t oracle_count = 1000;
};

struct OutputSpec {
  std::string dir = "minstab_out";
};

struct RunConfig {
  Subcommand subcommand = Subcommand::pipeline;
  std::optional<DomainSpec> domain;
  std::optional<FunctionSpec> function;
  ConstantsSpec constants;
  FlowSpec flow;
  AlgebraSpec algebra;
  OutputSpec output;
};

/// Every problem found while parsing, in file order.
class ConfigErrors : public ConfigError {
 public:
  explicit ConfigErrors(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Parses the INI-style text for a subcommand. Sections [domain], [function],
/// [constants], [flow], [algebra], [output]; `key = value` lines; `#` and `;`
/// start comments; lists are comma separated. Throws ConfigErrors listing
/// unknown sections and keys, malformed values and missing required fields.
RunConfig parse_config(const std::string& text, Subcommand subcommand);

RunConfig load_config(const std::string& path, Subcommand subcommand);

GridDomain make_domain(const DomainSpec& spec);
/// Throws ConfigError when the parameters do not fit (n, m).
Evaluator make_evaluator(const FunctionSpec& spec, const GridDomain& domain,
                         std::uint64_t fallback_seed);

/// The sampled initial data described by the config (without jet).
GraphSample make_sample(const RunConfig& config);

}  // namespace minstab
