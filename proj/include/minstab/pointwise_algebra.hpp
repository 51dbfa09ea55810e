#pragma once

#include "minstab/grid_geometry.hpp"
#include "minstab/random.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace minstab {

/// A synthetic pointwise configuration in the adapted frames at one point of
/// a graph: singular values, the normal components V^alpha of V, the normal
/// covariant derivatives V_i^alpha and the second fundamental form h_{alpha ij}.
/// Normal indices alpha run over 0..m-1 and stand for n+1..n+m.
struct AlgebraSample {
  int n = 0;
  int m = 0;
  Vector lambda;               // n, lambda_i = 0 for i >= m
  Vector normal_value;         // m, V^alpha
  Matrix normal_derivative;    // n x m, entry (i, alpha) = V_i^alpha
  std::vector<Matrix> h;       // m symmetric n x n
  bool trace_free = false;     // sum_i h_{alpha ii} = 0 for every alpha
};

/// Checks shapes, lambda >= 0, padding, symmetry and (if flagged) the trace
/// constraint. Throws DomainError.
void validate(const AlgebraSample& sample);

/// Omega = dx^1 ^ ... ^ dx^n evaluated on the columns of `vectors`
/// ((n+m) x n): the determinant of their first n coordinates.
double omega_eval(const Matrix& vectors);

struct FrameVectors {
  Matrix e_tangent;  // (n+m) x n
  Matrix e_normal;   // (n+m) x m
};

/// Frames for the canonical singular system a_i = i-th basis vector of R^n,
/// a_{n+i} = i-th basis vector of R^m.
FrameVectors build_frame_vectors(const Vector& lambda, int n, int m);

/// Column i holds (nabla_{e_i} V)^T or (nabla_{e_i} V)^N in R^{n+m}.
struct CovariantParts {
  Matrix tangent;
  Matrix normal;
};

CovariantParts covariant_parts(const AlgebraSample& sample);

/// The three cross-term families subtracted from *Omega |nabla^N V|^2.
/// `derivation` uses {T,N}, {N,T}, {N,N}, the families that come out of
/// differentiating Omega twice; `tn_twice` uses {T,N}, {N,N}, {T,N}, which
/// repeats the mixed family and drops {N,T}.
enum class CrossTermVariant { derivation, tn_twice };

/// Integrand evaluated by filling Omega slots with frame vectors and taking
/// determinants.
double integrand_direct(const AlgebraSample& sample,
                        CrossTermVariant variant = CrossTermVariant::derivation);

/// Sign carried by the four h-coupling sums of the expanded bracket.
/// `standard` puts + on h_{alpha ii} and - on h_{alpha ij}; `flipped` negates
/// all four.
enum class HCouplingSign { standard, flipped };

/// Frame expansion of the integrand: *Omega times the bracket.
double integrand_expanded(const AlgebraSample& sample, HCouplingSign sign = HCouplingSign::standard);

/// Xi, the bracket after the trace constraint merges the h_{alpha ii} sum into
/// the full sum over (i, j).
double xi(const AlgebraSample& sample);

/// delta [ sum (V_i^alpha)^2 - sum_{ij} (sum_alpha V^alpha h_{alpha ij})^2 ].
double rhs_bound(const AlgebraSample& sample, double delta);

/// prod 1 / sqrt(1 + lambda_i^2).
double star_omega(const Vector& lambda);

/// sum (V_i^alpha)^2 + sum_{ij} (sum_alpha V^alpha h_{alpha ij})^2 + 1.
double sample_scale(const AlgebraSample& sample);

/// (r-1) sum_i (V_i^{n+i})^2 - sum_{i != j} |V_i^{n+i}| |V_j^{n+j}| with
/// r = min(n, m); non-negative by Cauchy-Schwarz.
double diagonal_pairing_gap(const AlgebraSample& sample);

/// sum_{i != j} (V_i^{n+j})^2 - sum_{i != j} |V_i^{n+j}| |V_j^{n+i}|.
double offdiagonal_pairing_gap(const AlgebraSample& sample);

/// Left side minus right side of the eps-split of the h-coupling term:
/// -2 sum V^a h_{aij} V_j^{n+i} lambda_i
///   + eps sum (sum_a V^a h_{aij})^2 + (1/eps) sum (V_j^{n+i} lambda_i)^2.
double epsilon_split_gap(const AlgebraSample& sample, double eps);

/// Draws V^alpha, V_i^alpha, h entries uniformly on [-1, 1] and lambda_i
/// uniformly on [0, lambda_cap]; h is symmetrized and, if requested,
/// trace-projected per alpha.
class AlgebraSampleGenerator {
 public:
  AlgebraSampleGenerator(int n, int m, double lambda_cap, std::uint64_t seed, bool trace_free = true);
  AlgebraSample next();

 private:
  int n_;
  int m_;
  double lambda_cap_;
  bool trace_free_;
  Rng rng_;
};

struct XiCheckConfig {
  int n = 2;
  int m = 2;
  /// Defaults to critical_slope(c(n, m)) when unset.
  std::optional<double> lambda_cap;
  std::size_t count = 100000;
  std::uint64_t seed = 1;
  double tolerance = 1e-10;
  /// Defaults to delta(c(n, m)) when unset.
  std::optional<double> delta;
};

struct XiBatchReport {
  int n = 0;
  int m = 0;
  double lambda_cap = 0.0;
  double delta = 0.0;
  double tolerance = 0.0;
  std::uint64_t seed = 0;
  std::size_t count = 0;
  std::size_t violations = 0;
  /// min over samples of (Xi - rhs_bound) / sample_scale.
  double min_margin = 0.0;
  AlgebraSample argmin;
  std::optional<AlgebraSample> first_violation;

  bool ok() const { return violations == 0; }
};

/// Randomized check of Xi >= rhs_bound(delta) - tolerance * sample_scale.
/// Throws ConfigError when lambda_cap exceeds critical_slope(c(n, m)).
XiBatchReport check_xi_inequality(const XiCheckConfig& config);

struct AdversarialScanConfig {
  int n = 2;
  int m = 2;
  double lambda_value = 1.0;
  std::vector<double> levels{-1.0, 0.0, 1.0};
  std::optional<double> delta;
  double tolerance = 1e-10;
  /// Upper bound on the number of grid points visited.
  std::size_t max_points = 5000000;
};

/// Exhaustive scan with every lambda_i = lambda_value and (V, dV, trace-free
/// h) on a coarse lattice. Violations are expected when lambda exceeds the
/// critical slope; the report records how many were found.
XiBatchReport adversarial_scan(const AdversarialScanConfig& config);

/// Worst relative disagreements between the integrand evaluations over a
/// seeded batch of trace-free samples.
struct OracleEquivalenceReport {
  int n = 0;
  int m = 0;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  double lambda_cap = 0.0;
  double xi_vs_expanded = 0.0;          // *Omega Xi vs expanded (standard sign)
  double expanded_vs_direct = 0.0;      // expanded (standard sign) vs direct
  double flipped_vs_direct = 0.0;       // expanded (flipped) vs direct (derivation)
  double tn_twice_vs_direct = 0.0;  // direct (tn_twice) vs direct (derivation)
};

OracleEquivalenceReport oracle_equivalence(int n, int m, std::size_t count, std::uint64_t seed,
                                           double lambda_cap = 0.5);

}  // namespace minstab
