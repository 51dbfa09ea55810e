#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace minstab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Uniform rectangular grid over a box D in R^n. Nodes are ordered
/// lexicographically with the first axis varying slowest.
class GridDomain {
 public:
  GridDomain(std::vector<double> lower, std::vector<double> upper, std::vector<int> resolution);

  int dim() const { return static_cast<int>(resolution_.size()); }
  double lower(int axis) const { return lower_[axis]; }
  double upper(int axis) const { return upper_[axis]; }
  int resolution(int axis) const { return resolution_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  const std::vector<double>& spacing() const { return spacing_; }
  double min_spacing() const;
  double max_spacing() const;
  /// Product of the spacings, the volume of one grid cell.
  double cell_volume() const;

  std::size_t node_count() const { return node_count_; }
  std::size_t stride(int axis) const { return strides_[axis]; }
  int axis_index(std::size_t node, int axis) const;
  std::vector<int> multi_index(std::size_t node) const;
  Vector coordinates(std::size_t node) const;

  /// True for the boundary ring: some axis index is 0 or resolution-1.
  bool is_boundary(std::size_t node) const { return boundary_[node] != 0; }
  const std::vector<std::size_t>& interior_nodes() const { return interior_; }

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<int> resolution_;
  std::vector<double> spacing_;
  std::vector<std::size_t> strides_;
  std::size_t node_count_ = 0;
  std::vector<char> boundary_;
  std::vector<std::size_t> interior_;
};

/// Validates bounds (a_i < b_i) and resolution (>= 5 per axis).
GridDomain build_grid(int n, const std::vector<std::pair<double, double>>& bounds,
                      const std::vector<int>& resolution);

/// First and second derivatives of f at one interior node.
struct NodeJet {
  Matrix df;                    // m x n
  std::vector<Matrix> hessian;  // m symmetric n x n matrices
};

/// f : D -> R^m sampled at every node of a grid, with an optional jet.
class GraphSample {
 public:
  GraphSample(GridDomain domain, int codim, Matrix values);

  const GridDomain& domain() const { return domain_; }
  int dim() const { return domain_.dim(); }
  int codim() const { return codim_; }

  /// Column k holds f(x_k).
  const Matrix& values() const { return values_; }
  /// Replaces the values and drops the jet.
  void set_values(Matrix values);

  bool has_jet() const { return !jet_.empty(); }
  /// Jet at an interior node. Throws StateError if the jet is unset or the
  /// node is on the boundary ring.
  const NodeJet& jet(std::size_t node) const;
  void set_jet(std::vector<NodeJet> jet);

 private:
  GridDomain domain_;
  int codim_;
  Matrix values_;
  std::vector<NodeJet> jet_;
};

using Evaluator = std::function<Vector(const Vector&)>;

GraphSample sample_function(const GridDomain& domain, int m, const Evaluator& f);

/// Second-order central differences for df and Hess f at one interior node.
NodeJet jet_at(const GridDomain& domain, const Matrix& values, std::size_t node);

/// Populates the jet at every interior node.
GraphSample compute_jet(GraphSample sample);

struct NodeMetric {
  Matrix g;      // I + df^T df
  Matrix g_inv;
  double sqrt_det_g = 1.0;
  double star_omega = 1.0;  // 1 / sqrt(det g)
};

/// Per-node induced metric; entries on the boundary ring are left empty.
struct MetricField {
  std::vector<NodeMetric> nodes;
};

NodeMetric metric_at(const Matrix& df);
MetricField induced_metric(const GraphSample& sample);

/// Singular values of df and the adapted orthonormal frames at one point.
/// Columns of a_tangent are the a_i, columns of a_normal the a_{n+i}
/// followed by their completion to a basis of R^m. The e frames live in
/// R^{n+m} with the first n coordinates horizontal.
struct PointFrame {
  Vector lambda;       // n, non-increasing, zero-padded when m < n
  Matrix a_tangent;    // n x n
  Matrix a_normal;     // m x m
  Matrix e_tangent;    // (n+m) x n
  Matrix e_normal;     // (n+m) x m
};

PointFrame svd_frames(const Matrix& df);

/// Builds the e frames from singular values and orthonormal bases satisfying
/// df a_i = lambda_i a_{n+i}.
PointFrame frame_from_singular_system(const Vector& lambda, const Matrix& a_tangent,
                                      const Matrix& a_normal);

std::vector<PointFrame> frame_field(const GraphSample& sample);

/// [I; df], whose columns span the tangent space of the graph.
Matrix tangent_basis(const Matrix& df);
/// Orthogonal projector of R^{n+m} onto the normal space.
Matrix normal_projector(const Matrix& df, const Matrix& g_inv);

/// Normal part of the ambient second derivative (0, d^2 f / dx^i dx^j).
Vector ambient_second_fundamental_form(const NodeJet& jet, const NodeMetric& metric, int i, int j);

struct NodeSff {
  std::vector<Matrix> h;  // m matrices n x n, h[alpha](i, j) = h_{alpha ij}
  Vector mean_curvature;  // m, trace of h over the tangent indices
};

struct SffField {
  std::vector<NodeSff> nodes;
};

NodeSff sff_at(const NodeJet& jet, const PointFrame& frame);
SffField second_fundamental_form(const GraphSample& sample, const MetricField& metric,
                                 const std::vector<PointFrame>& frames);

/// max over interior nodes of |g^{ij} d^2 f / dx^i dx^j|, the velocity of the
/// nonparametric mean curvature flow; zero exactly for discrete minimal graphs.
double minimal_surface_residual(const GraphSample& sample);

/// g^{ij} d^2 f / dx^i dx^j at one interior node.
Vector minimal_surface_operator(const NodeJet& jet, const Matrix& g_inv);

/// Largest singular value of df over interior nodes.
double df_norm(const GraphSample& sample);

/// Everything derived from the jet, computed in one pass.
struct Geometry {
  MetricField metric;
  std::vector<PointFrame> frames;
  SffField sff;
};

Geometry analyze_geometry(const GraphSample& sample);

/// One named per-node column of a CSV snapshot; NaN where undefined.
struct FieldColumn {
  std::string name;
  std::vector<double> values;
};

/// Writes `node_index,x1..xn,f1..fm,<columns>` with one row per node.
void write_field_csv(std::ostream& os, const GraphSample& sample,
                     const std::vector<FieldColumn>& columns);

/// star_omega, sqrt_det_g, lambda1..n, mean_curvature_norm.
std::vector<FieldColumn> geometry_columns(const GraphSample& sample, const Geometry& geometry);

}  // namespace minstab
