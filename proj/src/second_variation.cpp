#include "minstab/second_variation.hpp"

#include "minstab/errors.hpp"
#include "minstab/random.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace minstab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// One one-sided difference pattern at a node: sigma[a] is +1 or -1 and
// neighbour[a] is the node reached by stepping sigma[a] along axis a.
struct Orthant {
  std::vector<int> sigma;
  std::vector<std::size_t> neighbour;
};

// The orthants at `node` whose neighbours all lie inside the grid.
std::vector<Orthant> orthants_at(const GridDomain& domain, std::size_t node) {
  const int n = domain.dim();
  std::vector<Orthant> out;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    Orthant o;
    o.sigma.resize(n);
    o.neighbour.resize(n);
    bool inside = true;
    for (int a = 0; a < n; ++a) {
      const int s = (mask >> a) & 1u ? -1 : 1;
      const int idx = domain.axis_index(node, a) + s;
      if (idx < 0 || idx >= domain.resolution(a)) {
        inside = false;
        break;
      }
      o.sigma[a] = s;
      o.neighbour[a] = s > 0 ? node + domain.stride(a) : node - domain.stride(a);
    }
    if (inside) out.push_back(std::move(o));
  }
  return out;
}

// Trapezoid weight of a node: the cell volume halved once per axis on which
// the node sits at an end.
double trapezoid_weight(const GridDomain& domain, std::size_t node) {
  double w = domain.cell_volume();
  for (int a = 0; a < domain.dim(); ++a) {
    const int idx = domain.axis_index(node, a);
    if (idx == 0 || idx == domain.resolution(a) - 1) w *= 0.5;
  }
  return w;
}

// Column a: sigma_a (X[neighbour_a] - X[node]) / h_a.
Matrix one_sided(const GridDomain& domain, const Matrix& x, std::size_t node, const Orthant& o) {
  const int n = domain.dim();
  Matrix d(x.rows(), n);
  const auto k = static_cast<Eigen::Index>(node);
  for (int a = 0; a < n; ++a) {
    d.col(a) = o.sigma[a] * (x.col(static_cast<Eigen::Index>(o.neighbour[a])) - x.col(k)) /
               domain.spacing(a);
  }
  return d;
}

// Per interior node: number of directions in which the neighbour is on the
// boundary ring, weighted by g^{aa} / h_a^2.
double closure_weight(const GridDomain& domain, std::size_t node, const Matrix& g_inv) {
  double w = 0.0;
  for (int a = 0; a < domain.dim(); ++a) {
    const int idx = domain.axis_index(node, a);
    const double h2 = domain.spacing(a) * domain.spacing(a);
    if (idx == 1) w += g_inv(a, a) / h2;
    if (idx == domain.resolution(a) - 2) w += g_inv(a, a) / h2;
  }
  return 0.5 * w;
}

void require_ready(const GraphSample& sample, const MetricField& metric) {
  if (!sample.has_jet()) throw StateError("second variation: jet has not been computed");
  if (metric.nodes.size() != sample.domain().node_count()) {
    throw StateError("second variation: metric does not match the grid");
  }
}

void require_field(const NormalField& v, const GraphSample& sample) {
  const auto rows = sample.dim() + sample.codim();
  if (v.values.rows() != rows ||
      static_cast<std::size_t>(v.values.cols()) != sample.domain().node_count()) {
    throw ConfigError("second variation: field must be (n+m) x node_count");
  }
  if (!v.values.allFinite()) throw DataError("second variation: field has non-finite entries");
}

// Symmetric matrix sum_beta f^beta_ij V_{n+beta}.
Matrix contracted_hessian(const NodeJet& jet, const Vector& vertical) {
  const auto n = jet.df.cols();
  Matrix out = Matrix::Zero(n, n);
  for (std::size_t b = 0; b < jet.hessian.size(); ++b) out += vertical[static_cast<Eigen::Index>(b)] * jet.hessian[b];
  return out;
}

double b_pair(const NodeJet& jet, const NodeMetric& metric, const Vector& v, const Vector& w) {
  const auto m = jet.df.rows();
  const Matrix mv = metric.g_inv * contracted_hessian(jet, v.tail(m));
  const Matrix mw = metric.g_inv * contracted_hessian(jet, w.tail(m));
  return (mv * mw).trace();
}

double gradient_pair(const GraphSample& sample, const NodeMetric& metric, const Matrix& projector,
                     const Matrix& v, const Matrix& w, std::size_t node) {
  const GridDomain& domain = sample.domain();
  const auto orthants = orthants_at(domain, node);
  double sum = 0.0;
  for (const Orthant& o : orthants) {
    const Matrix yv = projector * one_sided(domain, v, node, o);
    const Matrix yw = projector * one_sided(domain, w, node, o);
    sum += (metric.g_inv * (yv.transpose() * yw)).trace();
  }
  sum /= static_cast<double>(orthants.size());
  const auto k = static_cast<Eigen::Index>(node);
  sum += closure_weight(domain, node, metric.g_inv) *
         (projector * v.col(k)).dot(projector * w.col(k));
  return sum;
}

std::vector<Matrix> projectors(const GraphSample& sample, const MetricField& metric) {
  std::vector<Matrix> out(sample.domain().node_count());
  for (std::size_t k : sample.domain().interior_nodes()) {
    out[k] = normal_projector(sample.jet(k).df, metric.nodes[k].g_inv);
  }
  return out;
}

// N_k = [-df^T; I_m], the normal field basis used for the coordinates w.
Matrix normal_basis(const Matrix& df) {
  const auto m = df.rows();
  const auto n = df.cols();
  Matrix nb(n + m, m);
  nb.topRows(n) = -df.transpose();
  nb.bottomRows(m) = Matrix::Identity(m, m);
  return nb;
}

double default_tol_eig(const GridDomain& domain) {
  const double h = domain.max_spacing();
  return 10.0 * h * h;
}

double sup_norm(const NormalField& v) {
  double best = 0.0;
  for (Eigen::Index k = 0; k < v.values.cols(); ++k) best = std::max(best, v.values.col(k).norm());
  return best;
}

// Sum over nodes and orthants of weight * (phi(s) - 2 phi(0) + phi(-s)) / s^2
// where phi maps the one-sided difference matrix of base + s dir to a scalar.
template <class Phi>
double second_difference(const GridDomain& domain, const Matrix& base, const Matrix& dir, double s,
                         Phi&& phi) {
  double total = 0.0;
  for (std::size_t k = 0; k < domain.node_count(); ++k) {
    const auto orthants = orthants_at(domain, k);
    double node_sum = 0.0;
    for (const Orthant& o : orthants) {
      const Matrix d0 = one_sided(domain, base, k, o);
      const Matrix dv = one_sided(domain, dir, k, o);
      node_sum += phi(d0 + s * dv) - 2.0 * phi(d0) + phi(d0 - s * dv);
    }
    total += trapezoid_weight(domain, k) * node_sum / static_cast<double>(orthants.size());
  }
  return total / (s * s);
}

double volume_density(const Matrix& d) {
  return std::sqrt(std::max(0.0, (d.transpose() * d).determinant()));
}

double resolve_step(const VariationPath& path) {
  if (path.step) {
    if (!(*path.step > 0.0) || !std::isfinite(*path.step)) {
      throw ConfigError("variation: step must be positive and finite");
    }
    return *path.step;
  }
  const double sup = sup_norm(path.field);
  return sup > 0.0 ? 1e-3 / sup : 1e-3;
}

}  // namespace

NormalField project_normal(const Matrix& ambient, const GraphSample& sample, const MetricField& metric) {
  require_ready(sample, metric);
  const GridDomain& domain = sample.domain();
  const auto rows = sample.dim() + sample.codim();
  if (ambient.rows() != rows || static_cast<std::size_t>(ambient.cols()) != domain.node_count()) {
    throw ConfigError("project_normal: ambient field must be (n+m) x node_count");
  }
  NormalField out;
  out.values = Matrix::Zero(rows, ambient.cols());
  out.support.assign(domain.node_count(), 0);
  for (std::size_t k : domain.interior_nodes()) {
    const auto c = static_cast<Eigen::Index>(k);
    out.values.col(c) = normal_projector(sample.jet(k).df, metric.nodes[k].g_inv) * ambient.col(c);
    out.support[k] = 1;
  }
  return out;
}

NormalField random_normal_field(const GraphSample& sample, const MetricField& metric,
                                std::uint64_t seed, int max_mode) {
  if (max_mode < 1) throw ConfigError("random_normal_field: max_mode must be >= 1");
  const GridDomain& domain = sample.domain();
  const int n = domain.dim();
  const auto rows = n + sample.codim();
  Rng rng(seed);

  // Enumerate the mode multi-indices k in {1..max_mode}^n.
  std::vector<std::vector<int>> modes;
  std::vector<int> k(n, 1);
  while (true) {
    modes.push_back(k);
    int a = n - 1;
    while (a >= 0 && k[a] == max_mode) k[a--] = 1;
    if (a < 0) break;
    ++k[a];
  }
  Matrix coeff(rows, static_cast<Eigen::Index>(modes.size()));
  for (Eigen::Index j = 0; j < coeff.cols(); ++j) {
    double k2 = 0.0;
    for (int v : modes[j]) k2 += v * v;
    for (Eigen::Index r = 0; r < rows; ++r) coeff(r, j) = rng.uniform(-1.0, 1.0) / k2;
  }

  Matrix ambient = Matrix::Zero(rows, static_cast<Eigen::Index>(domain.node_count()));
  for (std::size_t node : domain.interior_nodes()) {
    Vector basis(coeff.cols());
    for (Eigen::Index j = 0; j < coeff.cols(); ++j) {
      double p = 1.0;
      for (int a = 0; a < n; ++a) {
        const double t = static_cast<double>(domain.axis_index(node, a)) / (domain.resolution(a) - 1);
        p *= std::sin(modes[j][a] * M_PI * t);
      }
      basis[j] = p;
    }
    ambient.col(static_cast<Eigen::Index>(node)) = coeff * basis;
  }
  return project_normal(ambient, sample, metric);
}

std::vector<double> b_form(const NormalField& v, const GraphSample& sample, const MetricField& metric) {
  require_ready(sample, metric);
  require_field(v, sample);
  std::vector<double> out(sample.domain().node_count(), kNaN);
  for (std::size_t k : sample.domain().interior_nodes()) {
    const Vector col = v.values.col(static_cast<Eigen::Index>(k));
    out[k] = b_pair(sample.jet(k), metric.nodes[k], col, col);
  }
  return out;
}

std::vector<double> grad_normal_energy(const NormalField& v, const GraphSample& sample,
                                       const MetricField& metric) {
  require_ready(sample, metric);
  require_field(v, sample);
  const auto proj = projectors(sample, metric);
  std::vector<double> out(sample.domain().node_count(), kNaN);
  for (std::size_t k : sample.domain().interior_nodes()) {
    out[k] = gradient_pair(sample, metric.nodes[k], proj[k], v.values, v.values, k);
  }
  return out;
}

std::string to_string(StabilityVerdict verdict) {
  switch (verdict) {
    case StabilityVerdict::stable_numerically: return "stable_numerically";
    case StabilityVerdict::unstable_numerically: return "unstable_numerically";
    case StabilityVerdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

double QuadraticFormReport::rayleigh_quotient() const {
  if (!(l2_norm > 0.0)) throw DegenerateInputError("rayleigh quotient: field has zero L2 norm");
  return q_value / l2_norm;
}

QuadraticFormReport quadratic_form(const NormalField& v, const GraphSample& sample,
                                   const MetricField& metric) {
  require_ready(sample, metric);
  require_field(v, sample);
  const GridDomain& domain = sample.domain();
  const auto proj = projectors(sample, metric);
  QuadraticFormReport report;
  for (std::size_t k : domain.interior_nodes()) {
    const NodeMetric& g = metric.nodes[k];
    const double weight = domain.cell_volume() * g.sqrt_det_g;
    const Vector col = v.values.col(static_cast<Eigen::Index>(k));
    report.gradient_energy += weight * gradient_pair(sample, g, proj[k], v.values, v.values, k);
    report.b_energy += weight * b_pair(sample.jet(k), g, col, col);
    report.l2_norm += weight * col.squaredNorm();
  }
  report.q_value = report.gradient_energy - report.b_energy;
  report.tol_eig = default_tol_eig(domain);
  if (report.l2_norm > 0.0) {
    report.rayleigh = report.rayleigh_quotient();
    report.verdict = *report.rayleigh < -report.tol_eig ? StabilityVerdict::unstable_numerically
                                                        : StabilityVerdict::inconclusive;
    report.diagnostics = report.verdict == StabilityVerdict::unstable_numerically
                             ? "a single field with negative Rayleigh quotient proves instability"
                             : "a single field cannot certify stability";
  } else {
    report.diagnostics = "field has zero L2 norm";
  }
  return report;
}

double quadratic_form_bilinear(const NormalField& v, const NormalField& w, const GraphSample& sample,
                               const MetricField& metric) {
  require_ready(sample, metric);
  require_field(v, sample);
  require_field(w, sample);
  const GridDomain& domain = sample.domain();
  const auto proj = projectors(sample, metric);
  double total = 0.0;
  for (std::size_t k : domain.interior_nodes()) {
    const NodeMetric& g = metric.nodes[k];
    const double weight = domain.cell_volume() * g.sqrt_det_g;
    const auto c = static_cast<Eigen::Index>(k);
    total += weight * (gradient_pair(sample, g, proj[k], v.values, w.values, k) -
                       b_pair(sample.jet(k), g, v.values.col(c), w.values.col(c)));
  }
  return total;
}

double discrete_volume(const GridDomain& domain, const Matrix& positions) {
  if (static_cast<std::size_t>(positions.cols()) != domain.node_count() ||
      positions.rows() < domain.dim()) {
    throw ConfigError("discrete_volume: positions must be (n+m) x node_count");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < domain.node_count(); ++k) {
    const auto orthants = orthants_at(domain, k);
    double node_sum = 0.0;
    for (const Orthant& o : orthants) node_sum += volume_density(one_sided(domain, positions, k, o));
    total += trapezoid_weight(domain, k) * node_sum / static_cast<double>(orthants.size());
  }
  return total;
}

Matrix graph_embedding(const GraphSample& sample) {
  const GridDomain& domain = sample.domain();
  const int n = domain.dim();
  Matrix out(n + sample.codim(), static_cast<Eigen::Index>(domain.node_count()));
  for (std::size_t k = 0; k < domain.node_count(); ++k) {
    const auto c = static_cast<Eigen::Index>(k);
    out.col(c).head(n) = domain.coordinates(k);
    out.col(c).tail(sample.codim()) = sample.values().col(c);
  }
  return out;
}

SecondDifference volume_second_derivative(const VariationPath& path) {
  if (path.base == nullptr) throw ConfigError("variation: base graph is missing");
  const GraphSample& base = *path.base;
  require_field(path.field, base);
  const GridDomain& domain = base.domain();
  const Matrix positions = graph_embedding(base);

  SecondDifference out;
  out.step = resolve_step(path);
  out.value = second_difference(domain, positions, path.field.values, out.step, volume_density);
  out.half_step = second_difference(domain, positions, path.field.values, 0.5 * out.step, volume_density);

  const double residual = base.has_jet() ? minimal_surface_residual(base)
                                         : minimal_surface_residual(compute_jet(base));
  const double h = domain.max_spacing();
  if (residual > 10.0 * h * h) {
    std::ostringstream msg;
    msg << "base graph is not minimal (residual " << residual << " > 10 h^2 = " << 10.0 * h * h
        << "); the second derivative of volume differs from Q by first-variation terms";
    out.warning = msg.str();
  }
  return out;
}

SecondDifference pullback_constancy(const VariationPath& path) {
  if (path.base == nullptr) throw ConfigError("variation: base graph is missing");
  const GraphSample& base = *path.base;
  require_field(path.field, base);
  const GridDomain& domain = base.domain();
  const int n = domain.dim();
  const Matrix positions = graph_embedding(base).topRows(n);
  const Matrix horizontal = path.field.values.topRows(n);

  const auto det = [](const Matrix& d) { return d.determinant(); };
  SecondDifference out;
  out.step = resolve_step(path);
  out.value = second_difference(domain, positions, horizontal, out.step, det);
  out.half_step = second_difference(domain, positions, horizontal, 0.5 * out.step, det);
  return out;
}

AssembledForm assemble_quadratic_form(const GraphSample& sample, const MetricField& metric) {
  require_ready(sample, metric);
  const GridDomain& domain = sample.domain();
  const int n = domain.dim();
  const int m = sample.codim();
  const auto& interior = domain.interior_nodes();

  std::vector<Eigen::Index> slot(domain.node_count(), -1);
  for (std::size_t i = 0; i < interior.size(); ++i) slot[interior[i]] = static_cast<Eigen::Index>(i);
  const Eigen::Index size = static_cast<Eigen::Index>(interior.size()) * m;

  std::vector<Eigen::Triplet<double>> k_entries;
  std::vector<Eigen::Triplet<double>> m_entries;
  const auto add_block = [m](std::vector<Eigen::Triplet<double>>& out, Eigen::Index r, Eigen::Index c,
                             const Matrix& block) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        if (block(i, j) != 0.0) out.emplace_back(r * m + i, c * m + j, block(i, j));
      }
    }
  };

  std::vector<Matrix> bases(domain.node_count());
  for (std::size_t k : interior) bases[k] = normal_basis(sample.jet(k).df);

  double max_b = 0.0;
  for (std::size_t k : interior) {
    const NodeJet& jet = sample.jet(k);
    const NodeMetric& g = metric.nodes[k];
    const double weight = domain.cell_volume() * g.sqrt_det_g;
    const Matrix proj = normal_projector(jet.df, g.g_inv);
    const Matrix& nk = bases[k];
    const Eigen::Index row = slot[k];

    // Curvature block S_{bc} = tr(g^{-1} H_b g^{-1} H_c).
    Matrix s(m, m);
    for (int b = 0; b < m; ++b) {
      for (int c = 0; c < m; ++c) s(b, c) = (g.g_inv * jet.hessian[b] * g.g_inv * jet.hessian[c]).trace();
    }
    max_b = std::max(max_b, Eigen::SelfAdjointEigenSolver<Matrix>(s).eigenvalues().maxCoeff());

    Matrix diag = weight * (closure_weight(domain, k, g.g_inv) * (nk.transpose() * proj * nk) - s);

    const auto orthants = orthants_at(domain, k);
    const double share = weight / static_cast<double>(orthants.size());
    for (const Orthant& o : orthants) {
      // Y_a = A_a w_{neighbour_a} + C_a w_k.
      std::vector<Matrix> a_blocks(n), c_blocks(n);
      for (int a = 0; a < n; ++a) {
        const double scale = o.sigma[a] / domain.spacing(a);
        c_blocks[a] = -scale * (proj * nk);
        if (slot[o.neighbour[a]] >= 0) a_blocks[a] = scale * (proj * bases[o.neighbour[a]]);
      }
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          const double gab = g.g_inv(a, b) * share;
          diag += gab * c_blocks[a].transpose() * c_blocks[b];
          if (a_blocks[b].size() > 0) {
            const Matrix cross = gab * c_blocks[a].transpose() * a_blocks[b];
            add_block(k_entries, row, slot[o.neighbour[b]], cross);
            add_block(k_entries, slot[o.neighbour[b]], row, cross.transpose());
          }
          if (a_blocks[a].size() > 0 && a_blocks[b].size() > 0) {
            add_block(k_entries, slot[o.neighbour[a]], slot[o.neighbour[b]],
                      gab * a_blocks[a].transpose() * a_blocks[b]);
          }
        }
      }
    }
    add_block(k_entries, row, row, diag);
    add_block(m_entries, row, row, weight * (nk.transpose() * nk));
  }

  AssembledForm form;
  form.stiffness.resize(size, size);
  form.stiffness.setFromTriplets(k_entries.begin(), k_entries.end());
  form.mass.resize(size, size);
  form.mass.setFromTriplets(m_entries.begin(), m_entries.end());
  // The gradient part is positive semidefinite and N^T N >= I, so -max_b
  // bounds the spectrum from below.
  form.lower_bound = -max_b;
  return form;
}

NormalField normal_field_from_coordinates(const Vector& w, const GraphSample& sample) {
  if (!sample.has_jet()) throw StateError("normal field: jet has not been computed");
  const GridDomain& domain = sample.domain();
  const int m = sample.codim();
  const auto& interior = domain.interior_nodes();
  if (w.size() != static_cast<Eigen::Index>(interior.size()) * m) {
    throw ConfigError("normal field: coordinate vector has the wrong length");
  }
  NormalField out;
  out.values = Matrix::Zero(domain.dim() + m, static_cast<Eigen::Index>(domain.node_count()));
  out.support.assign(domain.node_count(), 0);
  for (std::size_t i = 0; i < interior.size(); ++i) {
    const std::size_t k = interior[i];
    out.values.col(static_cast<Eigen::Index>(k)) =
        normal_basis(sample.jet(k).df) * w.segment(static_cast<Eigen::Index>(i) * m, m);
    out.support[k] = 1;
  }
  return out;
}

QuadraticFormReport min_rayleigh(const GraphSample& sample, const MetricField& metric,
                                 const EigenConfig& config) {
  if (config.block_size < 1) throw ConfigError("min_rayleigh: block_size must be >= 1");
  if (!(config.residual_tolerance > 0.0)) throw ConfigError("min_rayleigh: residual_tolerance must be > 0");
  const AssembledForm form = assemble_quadratic_form(sample, metric);
  const Eigen::Index size = form.stiffness.rows();

  QuadraticFormReport report;
  report.tol_eig = config.tol_eig ? *config.tol_eig : default_tol_eig(sample.domain());
  report.shift = form.lower_bound - 1.0;

  using Sparse = Eigen::SparseMatrix<double>;
  const Sparse shifted = form.stiffness - report.shift * form.mass;
  Eigen::SimplicialLLT<Sparse> solver(shifted);
  if (solver.info() != Eigen::Success) {
    report.diagnostics = "factorization of the shifted operator failed";
    return report;
  }

  const Eigen::Index p = std::min<Eigen::Index>(config.block_size, size);
  Rng rng(config.seed);
  Matrix x(size, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i < size; ++i) x(i, j) = rng.uniform(-1.0, 1.0);
  }

  double mu = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  Vector best;
  std::size_t it = 0;
  while (it < config.max_iterations) {
    ++it;
    const Matrix y = solver.solve(form.mass * x);
    const Matrix q = Eigen::HouseholderQR<Matrix>(y).householderQ() * Matrix::Identity(size, p);
    const Matrix kr = q.transpose() * (form.stiffness * q);
    const Matrix mr = q.transpose() * (form.mass * q);
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ritz(0.5 * (kr + kr.transpose()),
                                                          0.5 * (mr + mr.transpose()));
    if (ritz.info() != Eigen::Success) {
      report.diagnostics = "Rayleigh-Ritz step failed";
      break;
    }
    x = q * ritz.eigenvectors();
    mu = ritz.eigenvalues()[0];
    best = x.col(0);
    const Vector mx = form.mass * best;
    residual = (form.stiffness * best - mu * mx).norm() / (mx.norm() * std::max(1.0, std::abs(mu)));
    if (residual < config.residual_tolerance) {
      report.converged = true;
      break;
    }
  }

  report.iterations = it;
  report.residual = residual;
  report.min_eig_estimate = mu;
  report.rayleigh = mu;
  if (best.size() > 0) {
    best /= std::sqrt(best.dot(form.mass * best));
    report.l2_norm = 1.0;
    report.q_value = mu;
    NormalField field = normal_field_from_coordinates(best, sample);
    const auto b = b_form(field, sample, metric);
    for (std::size_t k : sample.domain().interior_nodes()) {
      report.b_energy += sample.domain().cell_volume() * metric.nodes[k].sqrt_det_g * b[k];
    }
    report.gradient_energy = mu + report.b_energy;
    if (config.keep_eigenfield) report.eigenfield = std::move(field);
  }

  std::ostringstream msg;
  if (report.converged) {
    report.verdict = mu >= -report.tol_eig ? StabilityVerdict::stable_numerically
                                           : StabilityVerdict::unstable_numerically;
    msg << "converged after " << it << " iterations, residual " << residual;
  } else {
    report.verdict = StabilityVerdict::inconclusive;
    if (report.diagnostics.empty()) msg << "not converged after " << it << " iterations, residual " << residual;
  }
  if (report.diagnostics.empty()) report.diagnostics = msg.str();
  return report;
}

}  // namespace minstab
