#include "minstab/grid_geometry.hpp"

#include "minstab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace minstab {

GridDomain::GridDomain(std::vector<double> lower, std::vector<double> upper,
                       std::vector<int> resolution)
    : lower_(std::move(lower)), upper_(std::move(upper)), resolution_(std::move(resolution)) {
  const std::size_t n = resolution_.size();
  if (n == 0 || lower_.size() != n || upper_.size() != n) {
    throw ConfigError("grid: bounds and resolution must have the same positive length");
  }
  spacing_.resize(n);
  strides_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]) || !(lower_[i] < upper_[i])) {
      std::ostringstream msg;
      msg << "grid: axis " << i << " bounds must satisfy a < b, got (" << lower_[i] << ", "
          << upper_[i] << ")";
      throw ConfigError(msg.str());
    }
    if (resolution_[i] < 5) {
      std::ostringstream msg;
      msg << "grid: axis " << i << " resolution must be >= 5, got " << resolution_[i];
      throw ConfigError(msg.str());
    }
    spacing_[i] = (upper_[i] - lower_[i]) / (resolution_[i] - 1);
  }
  std::size_t stride = 1;
  for (std::size_t i = n; i-- > 0;) {
    strides_[i] = stride;
    stride *= static_cast<std::size_t>(resolution_[i]);
  }
  node_count_ = stride;

  boundary_.assign(node_count_, 0);
  for (std::size_t k = 0; k < node_count_; ++k) {
    for (int a = 0; a < dim(); ++a) {
      const int idx = axis_index(k, a);
      if (idx == 0 || idx == resolution_[a] - 1) {
        boundary_[k] = 1;
        break;
      }
    }
    if (!boundary_[k]) interior_.push_back(k);
  }
}

double GridDomain::min_spacing() const { return *std::min_element(spacing_.begin(), spacing_.end()); }

double GridDomain::max_spacing() const { return *std::max_element(spacing_.begin(), spacing_.end()); }

double GridDomain::cell_volume() const {
  double v = 1.0;
  for (double h : spacing_) v *= h;
  return v;
}

int GridDomain::axis_index(std::size_t node, int axis) const {
  return static_cast<int>((node / strides_[axis]) % static_cast<std::size_t>(resolution_[axis]));
}

std::vector<int> GridDomain::multi_index(std::size_t node) const {
  std::vector<int> idx(resolution_.size());
  for (int a = 0; a < dim(); ++a) idx[a] = axis_index(node, a);
  return idx;
}

Vector GridDomain::coordinates(std::size_t node) const {
  Vector x(dim());
  for (int a = 0; a < dim(); ++a) x[a] = lower_[a] + axis_index(node, a) * spacing_[a];
  return x;
}

GridDomain build_grid(int n, const std::vector<std::pair<double, double>>& bounds,
                      const std::vector<int>& resolution) {
  if (n < 1) throw ConfigError("grid: dimension n must be >= 1");
  if (bounds.size() != static_cast<std::size_t>(n) ||
      resolution.size() != static_cast<std::size_t>(n)) {
    throw ConfigError("grid: expected " + std::to_string(n) + " bounds and resolutions");
  }
  std::vector<double> lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    lo[i] = bounds[i].first;
    hi[i] = bounds[i].second;
  }
  return GridDomain(std::move(lo), std::move(hi), resolution);
}

GraphSample::GraphSample(GridDomain domain, int codim, Matrix values)
    : domain_(std::move(domain)), codim_(codim), values_(std::move(values)) {
  if (codim_ < 1) throw ConfigError("graph: codimension m must be >= 1");
  if (values_.rows() != codim_ ||
      static_cast<std::size_t>(values_.cols()) != domain_.node_count()) {
    throw ConfigError("graph: values must be an m x node_count matrix");
  }
}

void GraphSample::set_values(Matrix values) {
  if (values.rows() != values_.rows() || values.cols() != values_.cols()) {
    throw ConfigError("graph: replacement values have the wrong shape");
  }
  values_ = std::move(values);
  jet_.clear();
}

const NodeJet& GraphSample::jet(std::size_t node) const {
  if (jet_.empty()) throw StateError("graph: jet has not been computed");
  if (domain_.is_boundary(node)) {
    throw StateError("graph: jet is undefined on the boundary ring (node " +
                     std::to_string(node) + ")");
  }
  return jet_[node];
}

void GraphSample::set_jet(std::vector<NodeJet> jet) {
  if (jet.size() != domain_.node_count()) throw StateError("graph: jet size mismatch");
  jet_ = std::move(jet);
}

GraphSample sample_function(const GridDomain& domain, int m, const Evaluator& f) {
  if (m < 1) throw ConfigError("graph: codimension m must be >= 1");
  Matrix values(m, static_cast<Eigen::Index>(domain.node_count()));
  for (std::size_t k = 0; k < domain.node_count(); ++k) {
    const Vector fx = f(domain.coordinates(k));
    if (fx.size() != m) {
      throw DataError("graph: evaluator returned " + std::to_string(fx.size()) +
                      " components at node " + std::to_string(k) + ", expected " +
                      std::to_string(m));
    }
    if (!fx.allFinite()) {
      throw DataError("graph: evaluator returned a non-finite value at node " + std::to_string(k));
    }
    values.col(static_cast<Eigen::Index>(k)) = fx;
  }
  return GraphSample(domain, m, std::move(values));
}

NodeJet jet_at(const GridDomain& domain, const Matrix& values, std::size_t node) {
  const int n = domain.dim();
  const auto m = values.rows();
  const auto at = [&](std::size_t k) { return values.col(static_cast<Eigen::Index>(k)); };

  NodeJet jet;
  jet.df.resize(m, n);
  jet.hessian.assign(static_cast<std::size_t>(m), Matrix::Zero(n, n));
  for (int i = 0; i < n; ++i) {
    const std::size_t si = domain.stride(i);
    const double hi = domain.spacing(i);
    jet.df.col(i) = (at(node + si) - at(node - si)) / (2.0 * hi);
    const Vector dii = (at(node + si) - 2.0 * at(node) + at(node - si)) / (hi * hi);
    for (Eigen::Index b = 0; b < m; ++b) jet.hessian[b](i, i) = dii[b];
    for (int j = i + 1; j < n; ++j) {
      const std::size_t sj = domain.stride(j);
      const Vector dij = (at(node + si + sj) - at(node + si - sj) - at(node - si + sj) +
                          at(node - si - sj)) /
                         (4.0 * hi * domain.spacing(j));
      for (Eigen::Index b = 0; b < m; ++b) {
        jet.hessian[b](i, j) = dij[b];
        jet.hessian[b](j, i) = dij[b];
      }
    }
  }
  return jet;
}

GraphSample compute_jet(GraphSample sample) {
  const GridDomain& domain = sample.domain();
  std::vector<NodeJet> jet(domain.node_count());
  for (std::size_t k : domain.interior_nodes()) {
    jet[k] = jet_at(domain, sample.values(), k);
    if (!jet[k].df.allFinite()) {
      throw DataError("graph: non-finite derivative at node " + std::to_string(k));
    }
  }
  sample.set_jet(std::move(jet));
  return sample;
}

NodeMetric metric_at(const Matrix& df) {
  const auto n = df.cols();
  NodeMetric metric;
  metric.g = Matrix::Identity(n, n) + df.transpose() * df;
  Eigen::LLT<Matrix> llt(metric.g);
  if (llt.info() != Eigen::Success) {
    throw ConsistencyError("metric: I + df^T df is not positive definite");
  }
  metric.g_inv = llt.solve(Matrix::Identity(n, n));
  const Matrix& l = llt.matrixLLT();
  double sqrt_det = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) sqrt_det *= l(i, i);
  if (!(sqrt_det >= 1.0 - 1e-12)) {
    throw ConsistencyError("metric: det g < 1, which is impossible for I + df^T df");
  }
  metric.sqrt_det_g = sqrt_det;
  metric.star_omega = 1.0 / sqrt_det;
  return metric;
}

MetricField induced_metric(const GraphSample& sample) {
  if (!sample.has_jet()) throw StateError("metric: jet has not been computed");
  MetricField field;
  field.nodes.resize(sample.domain().node_count());
  for (std::size_t k : sample.domain().interior_nodes()) field.nodes[k] = metric_at(sample.jet(k).df);
  return field;
}

namespace {

// Orthonormal basis of span(candidates-projected) chosen deterministically:
// standard basis vectors are visited in index order and the first one whose
// residual is at least half the largest remaining residual is accepted.
Matrix deterministic_basis(const Matrix& subspace, const Matrix& exclude, Eigen::Index count) {
  const auto dim = subspace.rows();
  Matrix chosen(dim, 0);
  const Matrix proj = subspace * subspace.transpose();
  while (chosen.cols() < count) {
    Matrix residuals(dim, dim);
    Vector norms(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
      Vector r = proj.col(k);
      for (int pass = 0; pass < 2; ++pass) {
        if (exclude.cols() > 0) r -= exclude * (exclude.transpose() * r);
        if (chosen.cols() > 0) r -= chosen * (chosen.transpose() * r);
      }
      residuals.col(k) = r;
      norms[k] = r.norm();
    }
    const double best = norms.maxCoeff();
    Eigen::Index pick = 0;
    while (norms[pick] < 0.5 * best) ++pick;
    chosen.conservativeResize(Eigen::NoChange, chosen.cols() + 1);
    chosen.col(chosen.cols() - 1) = residuals.col(pick) / norms[pick];
  }
  return chosen;
}

double leading_sign(const Vector& v) {
  const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-12 * scale) return v[i] > 0 ? 1.0 : -1.0;
  }
  return 1.0;
}

}  // namespace

PointFrame svd_frames(const Matrix& df) {
  const auto m = df.rows();
  const auto n = df.cols();
  const auto r = std::min(m, n);
  if (!df.allFinite()) throw DomainError("svd_frames: df has non-finite entries");

  Eigen::JacobiSVD<Matrix> svd(df, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vector lambda = Vector::Zero(n);
  lambda.head(r) = svd.singularValues();
  const Matrix& u = svd.matrixU();
  const Matrix& v = svd.matrixV();

  const double scale = std::max(1.0, lambda.size() > 0 ? lambda[0] : 0.0);
  const double tie_tol = 1e-12 * scale;
  const auto is_zero = [&](Eigen::Index i) { return lambda[i] <= tie_tol; };

  Matrix a_tangent(n, n);
  Matrix a_normal = Matrix::Zero(m, m);
  std::vector<bool> normal_set(static_cast<std::size_t>(m), false);

  // Groups of (numerically) equal singular values; the zero group also
  // contains the padded indices i >= m.
  for (Eigen::Index start = 0; start < n;) {
    Eigen::Index end = start + 1;
    while (end < n && std::abs(lambda[end] - lambda[end - 1]) <= tie_tol) ++end;
    const Eigen::Index count = end - start;
    const Matrix group = v.middleCols(start, count);
    const Matrix basis = deterministic_basis(group, Matrix(n, 0), count);
    const Matrix rotation = group.transpose() * basis;
    a_tangent.middleCols(start, count) = basis;
    if (!is_zero(start)) {
      const Matrix left = u.middleCols(start, count) * rotation;
      for (Eigen::Index i = 0; i < count; ++i) {
        a_normal.col(start + i) = left.col(i);
        normal_set[static_cast<std::size_t>(start + i)] = true;
      }
    }
    start = end;
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = leading_sign(a_tangent.col(i));
    a_tangent.col(i) *= s;
    if (i < m && normal_set[static_cast<std::size_t>(i)]) a_normal.col(i) *= s;
  }

  // Complete the a_{n+i} with lambda_i > 0 to an orthonormal basis of R^m.
  Matrix known(m, 0);
  for (Eigen::Index i = 0; i < r; ++i) {
    if (normal_set[static_cast<std::size_t>(i)]) {
      known.conservativeResize(Eigen::NoChange, known.cols() + 1);
      known.col(known.cols() - 1) = a_normal.col(i);
    }
  }
  const Matrix completion =
      deterministic_basis(Matrix::Identity(m, m), known, m - known.cols());
  Eigen::Index next = 0;
  for (Eigen::Index a = 0; a < m; ++a) {
    if (normal_set[static_cast<std::size_t>(a)]) continue;
    Vector c = completion.col(next++);
    a_normal.col(a) = c * leading_sign(c);
  }

  return frame_from_singular_system(lambda, a_tangent, a_normal);
}

PointFrame frame_from_singular_system(const Vector& lambda, const Matrix& a_tangent,
                                      const Matrix& a_normal) {
  const auto n = a_tangent.rows();
  const auto m = a_normal.rows();
  PointFrame frame;
  frame.lambda = lambda;
  frame.a_tangent = a_tangent;
  frame.a_normal = a_normal;
  frame.e_tangent = Matrix::Zero(n + m, n);
  frame.e_normal = Matrix::Zero(n + m, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = std::sqrt(1.0 + lambda[i] * lambda[i]);
    frame.e_tangent.col(i).head(n) = a_tangent.col(i) / s;
    if (i < m) frame.e_tangent.col(i).tail(m) = lambda[i] * a_normal.col(i) / s;
  }
  for (Eigen::Index a = 0; a < m; ++a) {
    if (a < n) {
      const double s = std::sqrt(1.0 + lambda[a] * lambda[a]);
      frame.e_normal.col(a).head(n) = -lambda[a] * a_tangent.col(a) / s;
      frame.e_normal.col(a).tail(m) = a_normal.col(a) / s;
    } else {
      frame.e_normal.col(a).tail(m) = a_normal.col(a);
    }
  }
  return frame;
}

std::vector<PointFrame> frame_field(const GraphSample& sample) {
  if (!sample.has_jet()) throw StateError("frames: jet has not been computed");
  std::vector<PointFrame> frames(sample.domain().node_count());
  for (std::size_t k : sample.domain().interior_nodes()) frames[k] = svd_frames(sample.jet(k).df);
  return frames;
}

Matrix tangent_basis(const Matrix& df) {
  const auto m = df.rows();
  const auto n = df.cols();
  Matrix t(n + m, n);
  t.topRows(n).setIdentity();
  t.bottomRows(m) = df;
  return t;
}

Matrix normal_projector(const Matrix& df, const Matrix& g_inv) {
  const Matrix t = tangent_basis(df);
  return Matrix::Identity(t.rows(), t.rows()) - t * g_inv * t.transpose();
}

Vector ambient_second_fundamental_form(const NodeJet& jet, const NodeMetric& metric, int i, int j) {
  const auto m = jet.df.rows();
  const auto n = jet.df.cols();
  Vector v = Vector::Zero(n + m);
  for (Eigen::Index b = 0; b < m; ++b) v[n + b] = jet.hessian[b](i, j);
  return normal_projector(jet.df, metric.g_inv) * v;
}

NodeSff sff_at(const NodeJet& jet, const PointFrame& frame) {
  const auto m = jet.df.rows();
  const auto n = jet.df.cols();
  // Coordinate coefficients of the tangent frame: e_i = sum_k c(k, i) d_k F.
  Matrix c = frame.a_tangent;
  for (Eigen::Index i = 0; i < n; ++i) c.col(i) /= std::sqrt(1.0 + frame.lambda[i] * frame.lambda[i]);

  std::vector<Matrix> along(static_cast<std::size_t>(m));
  for (Eigen::Index b = 0; b < m; ++b) along[b] = c.transpose() * jet.hessian[b] * c;

  NodeSff sff;
  sff.h.assign(static_cast<std::size_t>(m), Matrix::Zero(n, n));
  sff.mean_curvature = Vector::Zero(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) sff.h[a] += frame.e_normal(n + b, a) * along[b];
    sff.mean_curvature[a] = sff.h[a].trace();
  }
  return sff;
}

SffField second_fundamental_form(const GraphSample& sample, const MetricField& metric,
                                 const std::vector<PointFrame>& frames) {
  if (!sample.has_jet()) throw StateError("sff: jet has not been computed");
  const std::size_t count = sample.domain().node_count();
  if (metric.nodes.size() != count || frames.size() != count) {
    throw StateError("sff: metric and frames must be computed for this sample");
  }
  SffField field;
  field.nodes.resize(count);
  for (std::size_t k : sample.domain().interior_nodes()) field.nodes[k] = sff_at(sample.jet(k), frames[k]);
  return field;
}

Vector minimal_surface_operator(const NodeJet& jet, const Matrix& g_inv) {
  const auto m = jet.df.rows();
  Vector out(m);
  for (Eigen::Index b = 0; b < m; ++b) out[b] = (g_inv.cwiseProduct(jet.hessian[b])).sum();
  return out;
}

double minimal_surface_residual(const GraphSample& sample) {
  if (!sample.has_jet()) throw StateError("residual: jet has not been computed");
  double best = 0.0;
  for (std::size_t k : sample.domain().interior_nodes()) {
    const NodeJet& jet = sample.jet(k);
    best = std::max(best, minimal_surface_operator(jet, metric_at(jet.df).g_inv).norm());
  }
  return best;
}

double df_norm(const GraphSample& sample) {
  if (!sample.has_jet()) throw StateError("df_norm: jet has not been computed");
  double best = 0.0;
  for (std::size_t k : sample.domain().interior_nodes()) {
    const Matrix& df = sample.jet(k).df;
    Eigen::JacobiSVD<Matrix> svd(df);
    if (svd.singularValues().size() > 0) best = std::max(best, svd.singularValues()[0]);
  }
  return best;
}

Geometry analyze_geometry(const GraphSample& sample) {
  Geometry geometry;
  geometry.metric = induced_metric(sample);
  geometry.frames = frame_field(sample);
  geometry.sff = second_fundamental_form(sample, geometry.metric, geometry.frames);
  return geometry;
}

void write_field_csv(std::ostream& os, const GraphSample& sample,
                     const std::vector<FieldColumn>& columns) {
  const GridDomain& domain = sample.domain();
  const auto old_precision = os.precision(17);
  os << "node_index";
  for (int i = 0; i < domain.dim(); ++i) os << ",x" << i + 1;
  for (int a = 0; a < sample.codim(); ++a) os << ",f" << a + 1;
  for (const auto& c : columns) os << ',' << c.name;
  os << '\n';
  for (std::size_t k = 0; k < domain.node_count(); ++k) {
    os << k;
    const Vector x = domain.coordinates(k);
    for (int i = 0; i < domain.dim(); ++i) os << ',' << x[i];
    for (int a = 0; a < sample.codim(); ++a) os << ',' << sample.values()(a, static_cast<Eigen::Index>(k));
    for (const auto& c : columns) {
      const double v = c.values.at(k);
      os << ',';
      if (std::isnan(v)) {
        os << "nan";
      } else {
        os << v;
      }
    }
    os << '\n';
  }
  os.precision(old_precision);
}

std::vector<FieldColumn> geometry_columns(const GraphSample& sample, const Geometry& geometry) {
  const GridDomain& domain = sample.domain();
  const std::size_t count = domain.node_count();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<FieldColumn> cols;
  cols.push_back({"star_omega", std::vector<double>(count, nan)});
  cols.push_back({"sqrt_det_g", std::vector<double>(count, nan)});
  for (int i = 0; i < domain.dim(); ++i) {
    cols.push_back({"lambda" + std::to_string(i + 1), std::vector<double>(count, nan)});
  }
  cols.push_back({"mean_curvature_norm", std::vector<double>(count, nan)});
  for (std::size_t k : domain.interior_nodes()) {
    cols[0].values[k] = geometry.metric.nodes[k].star_omega;
    cols[1].values[k] = geometry.metric.nodes[k].sqrt_det_g;
    for (int i = 0; i < domain.dim(); ++i) cols[2 + i].values[k] = geometry.frames[k].lambda[i];
    cols.back().values[k] = geometry.sff.nodes[k].mean_curvature.norm();
  }
  return cols;
}

}  // namespace minstab
