#include "minstab/pointwise_algebra.hpp"

#include "minstab/errors.hpp"
#include "minstab/stability_criterion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace minstab {

namespace {

// V_i^{n+a} with the convention that components beyond R^m vanish.
double dv(const AlgebraSample& s, int i, int a) {
  return a < s.m ? s.normal_derivative(i, a) : 0.0;
}

// Sum_alpha V^alpha h_{alpha ij} as an n x n matrix.
Matrix contracted_h(const AlgebraSample& s) {
  Matrix out = Matrix::Zero(s.n, s.n);
  for (int a = 0; a < s.m; ++a) out += s.normal_value[a] * s.h[a];
  return out;
}

double relative_gap(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
}

}  // namespace

void validate(const AlgebraSample& s) {
  if (s.n < 1 || s.m < 1) throw DomainError("algebra sample: n and m must be >= 1");
  if (s.lambda.size() != s.n || s.normal_value.size() != s.m ||
      s.normal_derivative.rows() != s.n || s.normal_derivative.cols() != s.m ||
      s.h.size() != static_cast<std::size_t>(s.m)) {
    throw DomainError("algebra sample: component shapes do not match (n, m)");
  }
  for (int i = 0; i < s.n; ++i) {
    if (!(s.lambda[i] >= 0.0)) throw DomainError("algebra sample: lambda must be non-negative");
    if (i >= s.m && s.lambda[i] != 0.0) {
      throw DomainError("algebra sample: lambda_i must vanish for i > m");
    }
  }
  for (const Matrix& h : s.h) {
    if (h.rows() != s.n || h.cols() != s.n) throw DomainError("algebra sample: h must be n x n");
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw DomainError("algebra sample: h must be symmetric");
    }
    if (s.trace_free && std::abs(h.trace()) > 1e-12 * scale * s.n) {
      throw DomainError("algebra sample: trace_free is set but h has nonzero trace");
    }
  }
}

double omega_eval(const Matrix& vectors) {
  const auto n = vectors.cols();
  if (vectors.rows() < n) throw DomainError("omega_eval: need n vectors in R^{n+m}");
  if (n == 0) return 1.0;
  return vectors.topRows(n).determinant();
}

FrameVectors build_frame_vectors(const Vector& lambda, int n, int m) {
  if (lambda.size() != n) throw DomainError("build_frame_vectors: lambda must have n entries");
  for (int i = 0; i < n; ++i) {
    if (!(lambda[i] >= 0.0)) throw DomainError("build_frame_vectors: negative lambda");
  }
  const PointFrame frame =
      frame_from_singular_system(lambda, Matrix::Identity(n, n), Matrix::Identity(m, m));
  return {frame.e_tangent, frame.e_normal};
}

CovariantParts covariant_parts(const AlgebraSample& s) {
  const FrameVectors f = build_frame_vectors(s.lambda, s.n, s.m);
  CovariantParts parts;
  // (nabla_{e_i} V)^N = sum_a V_i^a e_a
  parts.normal = f.e_normal * s.normal_derivative.transpose();
  // (nabla_{e_i} V)^T = -sum_{a,j} V^a h_{aij} e_j
  parts.tangent = -f.e_tangent * contracted_h(s);
  return parts;
}

double star_omega(const Vector& lambda) {
  double p = 1.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) p /= std::sqrt(1.0 + lambda[i] * lambda[i]);
  return p;
}

double integrand_direct(const AlgebraSample& s, CrossTermVariant variant) {
  validate(s);
  const FrameVectors f = build_frame_vectors(s.lambda, s.n, s.m);
  const CovariantParts parts = covariant_parts(s);
  const double so = omega_eval(f.e_tangent);

  // sum_{i<j} Omega(e_1, .., x_i, .., y_j, .., e_n)
  const auto family = [&](const Matrix& x, const Matrix& y) {
    double total = 0.0;
    for (int i = 0; i < s.n; ++i) {
      for (int j = i + 1; j < s.n; ++j) {
        Matrix slots = f.e_tangent;
        slots.col(i) = x.col(i);
        slots.col(j) = y.col(j);
        total += omega_eval(slots);
      }
    }
    return total;
  };

  double value = so * s.normal_derivative.squaredNorm();
  if (variant == CrossTermVariant::derivation) {
    value -= 2.0 * (family(parts.tangent, parts.normal) + family(parts.normal, parts.tangent) +
                    family(parts.normal, parts.normal));
  } else {
    value -= 2.0 * (family(parts.tangent, parts.normal) + family(parts.normal, parts.normal) +
                    family(parts.tangent, parts.normal));
  }
  return value;
}

double integrand_expanded(const AlgebraSample& s, HCouplingSign sign) {
  validate(s);
  const double hs = sign == HCouplingSign::standard ? 1.0 : -1.0;
  const auto& lam = s.lambda;
  double bracket = s.normal_derivative.squaredNorm();
  for (int i = 0; i < s.n; ++i) {
    for (int j = 0; j < s.n; ++j) {
      if (i == j) continue;
      bracket -= lam[i] * lam[j] * dv(s, i, i) * dv(s, j, j);
      bracket += lam[i] * lam[j] * dv(s, i, j) * dv(s, j, i);
      for (int a = 0; a < s.m; ++a) {
        const double va = s.normal_value[a];
        bracket += hs * 2.0 * va * s.h[a](i, i) * dv(s, j, j) * lam[j];
        bracket -= hs * 2.0 * va * s.h[a](i, j) * dv(s, j, i) * lam[i];
      }
    }
  }
  return star_omega(lam) * bracket;
}

double xi(const AlgebraSample& s) {
  validate(s);
  const auto& lam = s.lambda;
  const Matrix hv = contracted_h(s);
  double value = s.normal_derivative.squaredNorm();
  for (int i = 0; i < s.n; ++i) {
    for (int j = 0; j < s.n; ++j) {
      if (i != j) {
        value -= lam[i] * lam[j] * dv(s, i, i) * dv(s, j, j);
        value += lam[i] * lam[j] * dv(s, i, j) * dv(s, j, i);
      }
      value -= 2.0 * hv(i, j) * dv(s, j, i) * lam[i];
    }
  }
  return value;
}

double rhs_bound(const AlgebraSample& s, double delta) {
  return delta * (s.normal_derivative.squaredNorm() - contracted_h(s).squaredNorm());
}

double sample_scale(const AlgebraSample& s) {
  return s.normal_derivative.squaredNorm() + contracted_h(s).squaredNorm() + 1.0;
}

double diagonal_pairing_gap(const AlgebraSample& s) {
  const int r = std::min(s.n, s.m);
  double squares = 0.0;
  double pairs = 0.0;
  for (int i = 0; i < r; ++i) {
    squares += dv(s, i, i) * dv(s, i, i);
    for (int j = 0; j < r; ++j) {
      if (i != j) pairs += std::abs(dv(s, i, i)) * std::abs(dv(s, j, j));
    }
  }
  return (r - 1) * squares - pairs;
}

double offdiagonal_pairing_gap(const AlgebraSample& s) {
  const int r = std::min(s.n, s.m);
  double squares = 0.0;
  double pairs = 0.0;
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) {
      if (i == j) continue;
      squares += dv(s, i, j) * dv(s, i, j);
      pairs += std::abs(dv(s, i, j)) * std::abs(dv(s, j, i));
    }
  }
  return squares - pairs;
}

double epsilon_split_gap(const AlgebraSample& s, double eps) {
  if (!(eps > 0.0)) throw DomainError("epsilon_split_gap: eps must be positive");
  const Matrix hv = contracted_h(s);
  double coupling = 0.0;
  double weighted = 0.0;
  for (int i = 0; i < s.n; ++i) {
    for (int j = 0; j < s.n; ++j) {
      const double w = dv(s, j, i) * s.lambda[i];
      coupling += hv(i, j) * w;
      weighted += w * w;
    }
  }
  return -2.0 * coupling + eps * hv.squaredNorm() + weighted / eps;
}

AlgebraSampleGenerator::AlgebraSampleGenerator(int n, int m, double lambda_cap, std::uint64_t seed,
                                               bool trace_free)
    : n_(n), m_(m), lambda_cap_(lambda_cap), trace_free_(trace_free), rng_(seed) {
  if (n < 1 || m < 1) throw ConfigError("sample generator: n and m must be >= 1");
  if (!(lambda_cap >= 0.0)) throw ConfigError("sample generator: lambda cap must be >= 0");
}

AlgebraSample AlgebraSampleGenerator::next() {
  AlgebraSample s;
  s.n = n_;
  s.m = m_;
  s.trace_free = trace_free_;
  s.lambda = Vector::Zero(n_);
  for (int i = 0; i < n_; ++i) {
    const double l = rng_.uniform(0.0, lambda_cap_);
    if (i < m_) s.lambda[i] = l;
  }
  s.normal_value.resize(m_);
  for (int a = 0; a < m_; ++a) s.normal_value[a] = rng_.uniform(-1.0, 1.0);
  s.normal_derivative.resize(n_, m_);
  for (int i = 0; i < n_; ++i) {
    for (int a = 0; a < m_; ++a) s.normal_derivative(i, a) = rng_.uniform(-1.0, 1.0);
  }
  s.h.resize(static_cast<std::size_t>(m_));
  for (int a = 0; a < m_; ++a) {
    Matrix h(n_, n_);
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) h(i, j) = rng_.uniform(-1.0, 1.0);
    }
    h = 0.5 * (h + h.transpose()).eval();
    if (trace_free_) h -= (h.trace() / n_) * Matrix::Identity(n_, n_);
    s.h[a] = h;
  }
  return s;
}

namespace {

struct MarginTracker {
  XiBatchReport report;
  bool first = true;

  void observe(const AlgebraSample& s) {
    const double margin = (xi(s) - rhs_bound(s, report.delta)) / sample_scale(s);
    ++report.count;
    if (first || margin < report.min_margin) {
      report.min_margin = margin;
      report.argmin = s;
      first = false;
    }
    if (margin < -report.tolerance) {
      if (report.violations == 0) report.first_violation = s;
      ++report.violations;
    }
  }
};

}  // namespace

XiBatchReport check_xi_inequality(const XiCheckConfig& config) {
  const double c = c_constant(config.n, config.m);
  const double slope = critical_slope(c);
  MarginTracker t;
  t.report.n = config.n;
  t.report.m = config.m;
  t.report.lambda_cap = config.lambda_cap.value_or(slope);
  t.report.delta = config.delta.value_or(epsilon_star(c).epsilon);
  t.report.tolerance = config.tolerance;
  t.report.seed = config.seed;
  if (t.report.lambda_cap > slope * (1.0 + 1e-15)) {
    throw ConfigError("xi check: lambda cap exceeds critical_slope(c(n, m))");
  }
  AlgebraSampleGenerator gen(config.n, config.m, t.report.lambda_cap, config.seed, true);
  for (std::size_t k = 0; k < config.count; ++k) t.observe(gen.next());
  return t.report;
}

XiBatchReport adversarial_scan(const AdversarialScanConfig& config) {
  const int n = config.n;
  const int m = config.m;
  if (n < 1 || m < 1) throw ConfigError("adversarial scan: n and m must be >= 1");
  if (config.levels.empty()) throw ConfigError("adversarial scan: need at least one level");
  const double c = c_constant(n, m);

  // Parameters: V^a (m), V_i^a (n m), and per alpha a trace-free symmetric h
  // described by its first n-1 diagonal entries and its upper off-diagonals.
  const int h_params = (n - 1) + n * (n - 1) / 2;
  const int dims = m + n * m + m * h_params;
  double points = 1.0;
  for (int d = 0; d < dims; ++d) points *= static_cast<double>(config.levels.size());
  if (points > static_cast<double>(config.max_points)) {
    throw ConfigError("adversarial scan: lattice has too many points for (n, m) and levels");
  }

  MarginTracker t;
  t.report.n = n;
  t.report.m = m;
  t.report.lambda_cap = config.lambda_value;
  t.report.delta = config.delta.value_or(epsilon_star(c).epsilon);
  t.report.tolerance = config.tolerance;

  AlgebraSample s;
  s.n = n;
  s.m = m;
  s.trace_free = true;
  s.lambda = Vector::Zero(n);
  for (int i = 0; i < std::min(n, m); ++i) s.lambda[i] = config.lambda_value;
  s.normal_value.resize(m);
  s.normal_derivative.resize(n, m);
  s.h.assign(static_cast<std::size_t>(m), Matrix::Zero(n, n));

  std::vector<std::size_t> odometer(static_cast<std::size_t>(dims), 0);
  const auto level = [&](int d) { return config.levels[odometer[static_cast<std::size_t>(d)]]; };
  while (true) {
    int d = 0;
    for (int a = 0; a < m; ++a) s.normal_value[a] = level(d++);
    for (int i = 0; i < n; ++i) {
      for (int a = 0; a < m; ++a) s.normal_derivative(i, a) = level(d++);
    }
    for (int a = 0; a < m; ++a) {
      Matrix& h = s.h[a];
      double trace = 0.0;
      for (int i = 0; i + 1 < n; ++i) {
        h(i, i) = level(d++);
        trace += h(i, i);
      }
      h(n - 1, n - 1) = -trace;
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          h(i, j) = level(d++);
          h(j, i) = h(i, j);
        }
      }
    }
    t.observe(s);

    int carry = 0;
    while (carry < dims) {
      auto& digit = odometer[static_cast<std::size_t>(carry)];
      if (++digit < config.levels.size()) break;
      digit = 0;
      ++carry;
    }
    if (carry == dims) break;
  }
  return t.report;
}

OracleEquivalenceReport oracle_equivalence(int n, int m, std::size_t count, std::uint64_t seed,
                                           double lambda_cap) {
  OracleEquivalenceReport r;
  r.n = n;
  r.m = m;
  r.count = count;
  r.seed = seed;
  r.lambda_cap = lambda_cap;
  AlgebraSampleGenerator gen(n, m, lambda_cap, seed, true);
  for (std::size_t k = 0; k < count; ++k) {
    const AlgebraSample s = gen.next();
    const double direct = integrand_direct(s, CrossTermVariant::derivation);
    const double tn_twice_variant = integrand_direct(s, CrossTermVariant::tn_twice);
    const double expanded = integrand_expanded(s, HCouplingSign::standard);
    const double flipped = integrand_expanded(s, HCouplingSign::flipped);
    const double xi_scaled = star_omega(s.lambda) * xi(s);
    r.xi_vs_expanded = std::max(r.xi_vs_expanded, relative_gap(xi_scaled, expanded));
    r.expanded_vs_direct = std::max(r.expanded_vs_direct, relative_gap(expanded, direct));
    r.flipped_vs_direct = std::max(r.flipped_vs_direct, relative_gap(flipped, direct));
    r.tn_twice_vs_direct =
        std::max(r.tn_twice_vs_direct, relative_gap(tn_twice_variant, direct));
  }
  return r;
}

}  // namespace minstab
