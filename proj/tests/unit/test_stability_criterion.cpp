#include "minstab/errors.hpp"
#include "minstab/stability_criterion.hpp"
#include "minstab/random.hpp"

#include <doctest.h>

#include <cmath>

using namespace minstab;

namespace {

GraphSample linear(int n, int m, const Matrix& a) {
  std::vector<std::pair<double, double>> bounds(static_cast<std::size_t>(n), {0.0, 1.0});
  const GridDomain d = build_grid(n, bounds, std::vector<int>(static_cast<std::size_t>(n), 5));
  return compute_jet(sample_function(d, m, [&](const Vector& x) { return Vector(a * x); }));
}

CriterionReport check(const GraphSample& s, CriterionMode mode = CriterionMode::slope) {
  return check_graph(s, analyze_geometry(s), criterion_constants(s.dim(), s.codim()), mode);
}

}  // namespace

TEST_CASE("c constant") {
  CHECK(c_constant(3, 2) == 1.0);
  CHECK(c_constant(2, 7) == 1.0);
  CHECK(c_constant(3, 3) == 2.0);
  CHECK(c_constant(5, 4) == 3.0);
  CHECK(c_constant(1, 1) == 1.0);
  CHECK_THROWS_AS(c_constant(0, 2), ConfigError);
  CHECK_THROWS_AS(c_constant(2, 0), ConfigError);
}

TEST_CASE("critical slope") {
  CHECK(critical_slope(1) == doctest::Approx(std::sqrt(2.0) - 1).epsilon(1e-14));
  CHECK(critical_slope(2) == doctest::Approx((std::sqrt(3.0) - 1) / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(critical_slope(2) == doctest::Approx(0.5176381).epsilon(1e-7));
  CHECK(critical_slope(3) == doctest::Approx(1 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK_THROWS_AS(critical_slope(0.5), ConfigError);
  for (int c = 1; c < 10; ++c) {
    CHECK(critical_slope(c + 1) > critical_slope(c));
    CHECK(critical_slope(c) > 0.0);
    CHECK(critical_slope(c) < 1.0);
  }
}

TEST_CASE("epsilon curve and its maximum") {
  CHECK_THROWS_AS(epsilon_curve(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(epsilon_curve(1.0, 1.0), DomainError);
  const EpsilonMaximum one = epsilon_star(1.0);
  CHECK(one.epsilon == doctest::Approx(std::sqrt(2.0) - 1).epsilon(1e-14));
  CHECK(one.reference_max == doctest::Approx(3 - 2 * std::sqrt(2.0)).epsilon(1e-14));
  CHECK(one.attained_max == doctest::Approx(3 - 2 * std::sqrt(2.0)).epsilon(1e-14));

  for (int c = 1; c <= 6; ++c) {
    const EpsilonMaximum e = epsilon_star(c);
    // Brute-force maximization of the curve.
    double best = 0.0, arg = 0.0;
    for (int k = 1; k < 100000; ++k) {
      const double eps = k * 1e-5;
      const double v = epsilon_curve(eps, c);
      if (v > best) {
        best = v;
        arg = eps;
      }
    }
    CHECK(best == doctest::Approx(e.attained_max).epsilon(1e-8));
    CHECK(std::abs(arg - e.epsilon) < 1e-3);
    CHECK(epsilon_curve(e.epsilon, c) == doctest::Approx(supported_slope(c) * supported_slope(c)).epsilon(1e-12));
    CHECK(e.reference_max == doctest::Approx(critical_slope(c) * critical_slope(c)).epsilon(1e-12));
    CHECK(supported_slope(c) <= critical_slope(c) + 1e-15);
  }
  CHECK(epsilon_curve(epsilon_star(1).epsilon, 1) == doctest::Approx(critical_slope(1) * critical_slope(1)).epsilon(1e-12));
}

TEST_CASE("omega thresholds") {
  const OmegaThresholds one = omega_thresholds(1);
  CHECK(one.closed_form == doctest::Approx((2 + std::sqrt(2.0)) / 4).epsilon(1e-14));
  CHECK(one.derived == doctest::Approx(std::sqrt((2 + std::sqrt(2.0)) / 4)).epsilon(1e-14));
  CHECK(one.derived == doctest::Approx(0.9238795).epsilon(1e-7));
  CHECK(omega_thresholds(2).closed_form == doctest::Approx(1 / (3 - std::sqrt(3.0))).epsilon(1e-14));
  for (int c = 1; c <= 10; ++c) {
    const OmegaThresholds t = omega_thresholds(c);
    const double s = critical_slope(c);
    CHECK(t.derived == doctest::Approx(1 / std::sqrt(1 + s * s)).epsilon(1e-13));
    CHECK(t.closed_form > 0.0);
    CHECK(t.derived < 1.0);
    if (c > 1) {
      // Both thresholds move monotonically with c; the slope grows with c
      // so the admissible *Omega decreases.
      CHECK(t.closed_form < omega_thresholds(c - 1).closed_form);
      CHECK(t.derived < omega_thresholds(c - 1).derived);
    }
  }
}

TEST_CASE("constants bundle") {
  const CriterionConstants k = criterion_constants(3, 3);
  CHECK(k.c == 2.0);
  CHECK(k.slope == doctest::Approx(critical_slope(2)));
  CHECK(k.delta == doctest::Approx((std::sqrt(3.0) - 1) / 2));
  CHECK(k.delta == k.epsilon_star);
  CHECK(k.supported_slope == doctest::Approx(supported_slope(2)));
  CHECK(k.omega_threshold_paper == doctest::Approx(omega_thresholds(2).closed_form));
  CHECK(k.omega_threshold_derived == doctest::Approx(omega_thresholds(2).derived));
}

TEST_CASE("mode names round trip") {
  for (CriterionMode m : {CriterionMode::slope, CriterionMode::omega_paper, CriterionMode::omega_derived}) {
    CHECK(parse_mode(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_mode("steep"), ConfigError);
}

TEST_CASE("check_graph examples") {
  SUBCASE("flat graph passes with full margins") {
    const CriterionReport r = check(linear(2, 2, Matrix::Zero(2, 2)));
    CHECK(r.slope.pass);
    CHECK(r.omega_paper.pass);
    CHECK(r.omega_derived.pass);
    CHECK(r.slope.margin == doctest::Approx(critical_slope(1)));
    CHECK(r.omega_paper.margin == doctest::Approx(1 - omega_thresholds(1).closed_form));
    CHECK(r.minimal);
  }
  SUBCASE("n = m = 3 linear maps around the slope") {
    Matrix a = Matrix::Zero(3, 3);
    a(0, 0) = 0.3;
    a(1, 1) = 0.1;
    CHECK(check(linear(3, 3, a)).slope.pass);
    a(0, 0) = 0.6;
    const CriterionReport r = check(linear(3, 3, a));
    CHECK_FALSE(r.slope.pass);
    CHECK(r.slope.margin == doctest::Approx(critical_slope(2) - 0.6));
    CHECK(r.max_df_norm == doctest::Approx(0.6));
  }
  SUBCASE("derived threshold implies the slope bound pointwise") {
    Rng rng(17);
    const double c = 1.0;
    const double t = omega_thresholds(c).derived;
    for (int trial = 0; trial < 2000; ++trial) {
      Matrix df(2, 2);
      for (int i = 0; i < 4; ++i) df(i / 2, i % 2) = rng.uniform(-0.5, 0.5);
      const double omega = metric_at(df).star_omega;
      const double top = svd_frames(df).lambda[0];
      if (omega >= t) CHECK(top <= critical_slope(c) + 1e-12);
    }
  }
  SUBCASE("missing geometry is a state error") {
    const GraphSample s = linear(2, 2, Matrix::Zero(2, 2));
    CHECK_THROWS_AS(check_graph(s, Geometry{}, criterion_constants(2, 2), CriterionMode::slope), StateError);
    CHECK_THROWS_AS(check_graph(s, analyze_geometry(s), criterion_constants(3, 3), CriterionMode::slope),
                    ConfigError);
  }
  SUBCASE("non-minimal inputs are reported, not refused") {
    const GridDomain d = build_grid(2, {{0, 1}, {0, 1}}, {9, 9});
    const GraphSample bowl = compute_jet(sample_function(d, 1, [](const Vector& x) { return Vector::Constant(1, 0.1 * x.squaredNorm()).eval(); }));
    const CriterionReport r = check(bowl);
    CHECK_FALSE(r.minimal);
    CHECK(r.mean_curvature_residual > r.minimality_tolerance);
    CHECK(r.slope.pass);
  }
}
