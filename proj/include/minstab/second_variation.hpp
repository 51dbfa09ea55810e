#pragma once

#include "minstab/grid_geometry.hpp"

#include <Eigen/Sparse>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace minstab {

/// Ambient variation field V, one column in R^{n+m} per node, normal to the
/// graph on supported nodes and zero on the boundary ring.
struct NormalField {
  Matrix values;              // (n+m) x node_count
  std::vector<char> support;  // 1 on interior nodes
};

/// Pointwise orthogonal projection onto the normal space; the boundary ring
/// is zeroed.
NormalField project_normal(const Matrix& ambient, const GraphSample& sample, const MetricField& metric);

/// Smooth compactly supported test field: a seeded sum of products of
/// sin(k pi t) over the normalized coordinates t in [0, 1]^n with modes
/// k_a <= max_mode and coefficients decaying like 1/|k|^2, then projected.
NormalField random_normal_field(const GraphSample& sample, const MetricField& metric,
                                std::uint64_t seed, int max_mode = 3);

/// B(V, V) per node (NaN off the support).
std::vector<double> b_form(const NormalField& v, const GraphSample& sample, const MetricField& metric);

/// |nabla^N V|^2 per node (NaN off the support). Derivatives of V are one-sided
/// differences averaged over the 2^n orthants around the node; an edge to the
/// boundary ring contributes its full energy to its interior endpoint.
std::vector<double> grad_normal_energy(const NormalField& v, const GraphSample& sample,
                                       const MetricField& metric);

enum class StabilityVerdict { stable_numerically, unstable_numerically, inconclusive };

std::string to_string(StabilityVerdict verdict);

struct QuadraticFormReport {
  double gradient_energy = 0.0;  // integral of |nabla^N V|^2 dv
  double b_energy = 0.0;         // integral of B(V, V) dv
  double q_value = 0.0;          // gradient_energy - b_energy
  double l2_norm = 0.0;          // integral of |V|^2 dv
  std::optional<double> rayleigh;
  std::optional<double> min_eig_estimate;
  std::optional<double> residual;
  std::size_t iterations = 0;
  double tol_eig = 0.0;
  double shift = 0.0;
  bool converged = false;
  StabilityVerdict verdict = StabilityVerdict::inconclusive;
  std::string diagnostics;
  std::optional<NormalField> eigenfield;

  /// Throws DegenerateInputError when l2_norm is zero.
  double rayleigh_quotient() const;
};

/// Q(V) = integral (|nabla^N V|^2 - B(V, V)) dv over the supported nodes with
/// the product rule and density sqrt(det g).
QuadraticFormReport quadratic_form(const NormalField& v, const GraphSample& sample,
                                   const MetricField& metric);

/// Symmetric bilinear form whose diagonal is quadratic_form(V).q_value.
double quadratic_form_bilinear(const NormalField& v, const NormalField& w, const GraphSample& sample,
                               const MetricField& metric);

/// Straight-line variation F_s = F + s V of the graph immersion F(x) = (x, f(x)).
struct VariationPath {
  const GraphSample* base = nullptr;
  NormalField field;
  /// Step for the central second difference; 1e-3 / sup|V| when unset.
  std::optional<double> step;
};

/// Volume of an immersion given by node positions ((n+m) x node_count):
/// trapezoid weights with the integrand averaged over the one-sided
/// difference orthants that stay inside the grid.
double discrete_volume(const GridDomain& domain, const Matrix& positions);

/// Node positions (x_k, f(x_k)).
Matrix graph_embedding(const GraphSample& sample);

struct SecondDifference {
  double value = 0.0;       // step s0
  double half_step = 0.0;   // step s0 / 2 (Richardson check)
  double step = 0.0;
  std::optional<std::string> warning;
};

/// (Vol(s0) - 2 Vol(0) + Vol(-s0)) / s0^2. Warns when the base is not minimal
/// to 10 h^2, since the identity with Q presumes minimality.
SecondDifference volume_second_derivative(const VariationPath& path);

/// Second difference of C(s) = integral det(I + s D V_h) dX, V_h the first n
/// components of V; expected to vanish for compactly supported V.
SecondDifference pullback_constancy(const VariationPath& path);

struct EigenConfig {
  int block_size = 6;
  std::size_t max_iterations = 2000;
  /// Relative residual |K x - mu M x| / (|M x| max(1, |mu|)) for convergence.
  double residual_tolerance = 1e-8;
  std::uint64_t seed = 1;
  /// Defaults to 10 h^2 (mass-normalized).
  std::optional<double> tol_eig;
  bool keep_eigenfield = true;
};

/// Smallest eigenvalue of Q(V) = mu M(V) over normal fields supported on the
/// interior nodes, M the L2 mass with density sqrt(det g). Uses block inverse
/// iteration with a shift strictly below the spectrum and Rayleigh-Ritz.
QuadraticFormReport min_rayleigh(const GraphSample& sample, const MetricField& metric,
                                 const EigenConfig& config = {});

/// The assembled operators in the coordinates V = sum_b w_b (-df^T e_b, e_b)
/// on interior nodes (m unknowns per node, in interior_nodes() order).
struct AssembledForm {
  Eigen::SparseMatrix<double> stiffness;
  Eigen::SparseMatrix<double> mass;
  double lower_bound = 0.0;  // strict lower bound on the smallest eigenvalue
};

AssembledForm assemble_quadratic_form(const GraphSample& sample, const MetricField& metric);

/// Maps interior-node coordinates w to the ambient normal field N w.
NormalField normal_field_from_coordinates(const Vector& w, const GraphSample& sample);

}  // namespace minstab
