#include "minstab/errors.hpp"
#include "minstab/grid_geometry.hpp"
#include "minstab/random.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace minstab;

namespace {

Matrix random_matrix(Rng& rng, int rows, int cols) {
  Matrix a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
  return a;
}

GraphSample linear_sample(const GridDomain& d, const Matrix& a) {
  return compute_jet(sample_function(d, static_cast<int>(a.rows()), [&](const Vector& x) { return Vector(a * x); }));
}

void check_frame_invariants(const Matrix& df, const PointFrame& f) {
  const auto n = df.cols();
  const auto m = df.rows();
  Matrix all(n + m, n + m);
  all << f.e_tangent, f.e_normal;
  CHECK((all.transpose() * all - Matrix::Identity(n + m, n + m)).norm() < 1e-10);
  for (Eigen::Index i = 0; i < std::min(n, m); ++i) {
    CHECK((df * f.a_tangent.col(i) - f.lambda[i] * f.a_normal.col(i)).norm() < 1e-10);
  }
  for (Eigen::Index i = m; i < n; ++i) CHECK(f.lambda[i] == 0.0);
  for (Eigen::Index i = 1; i < n; ++i) CHECK(f.lambda[i] <= f.lambda[i - 1]);
  const Matrix t = tangent_basis(df);
  const Matrix proj_t = t * (t.transpose() * t).inverse() * t.transpose();
  CHECK((proj_t * f.e_tangent - f.e_tangent).norm() < 1e-10);
  CHECK((t.transpose() * f.e_normal).norm() < 1e-10);
}

}  // namespace

TEST_CASE("build_grid computes spacing and validates input") {
  CHECK(build_grid(1, {{0, 1}}, {5}).spacing(0) == doctest::Approx(0.25));
  const GridDomain d = build_grid(2, {{-1, 1}, {-1, 1}}, {33, 33});
  CHECK(d.spacing(0) == doctest::Approx(0.0625));
  CHECK(d.spacing(1) == doctest::Approx(0.0625));
  CHECK(d.node_count() == 33u * 33u);
  CHECK(d.interior_nodes().size() == 31u * 31u);
  CHECK_THROWS_AS(build_grid(1, {{0, 1}}, {3}), ConfigError);
  CHECK_THROWS_AS(build_grid(1, {{1, 0}}, {5}), ConfigError);
  CHECK_THROWS_AS(build_grid(2, {{0, 1}}, {5}), ConfigError);
}

TEST_CASE("node ordering is lexicographic with the last axis fastest") {
  const GridDomain d = build_grid(2, {{0, 1}, {0, 2}}, {5, 6});
  CHECK(d.stride(1) == 1u);
  CHECK(d.stride(0) == 6u);
  const Vector x = d.coordinates(7);
  CHECK(x[0] == doctest::Approx(0.25));
  CHECK(x[1] == doctest::Approx(0.4));
  CHECK(d.is_boundary(0));
  CHECK_FALSE(d.is_boundary(7));
}

TEST_CASE("sample_function fills values and rejects non-finite output") {
  const GridDomain d = build_grid(2, {{-1, 1}, {0, 1}}, {5, 7});
  const GraphSample zero = sample_function(d, 2, [](const Vector&) { return Vector(Vector::Zero(2)); });
  CHECK(zero.values().isZero(0.0));
  CHECK_FALSE(zero.has_jet());

  const GraphSample bowl = sample_function(d, 1, [](const Vector& x) { return Vector::Constant(1, x.squaredNorm() / 4).eval(); });
  for (std::size_t k = 0; k < d.node_count(); ++k) {
    CHECK(bowl.values()(0, static_cast<Eigen::Index>(k)) == doctest::Approx(d.coordinates(k).squaredNorm() / 4));
  }
  CHECK_THROWS_AS(sample_function(d, 1, [](const Vector& x) { return Vector::Constant(1, 1.0 / x[1]).eval(); }),
                  DataError);
  CHECK_THROWS_AS(sample_function(d, 2, [](const Vector&) { return Vector(Vector::Zero(1)); }), DataError);
}

TEST_CASE("jet is exact for polynomials of degree two") {
  const GridDomain d = build_grid(2, {{-1, 1}, {-0.5, 1.5}}, {9, 7});
  Rng rng(3);
  const Matrix a = random_matrix(rng, 2, 2);
  const GraphSample lin = linear_sample(d, a);
  for (std::size_t k : d.interior_nodes()) {
    CHECK((lin.jet(k).df - a).norm() < 1e-12);
    for (const Matrix& h : lin.jet(k).hessian) CHECK(h.norm() < 1e-10);
  }

  const GraphSample cross = compute_jet(sample_function(d, 1, [](const Vector& x) { return Vector::Constant(1, x[0] * x[1]).eval(); }));
  Matrix expected(2, 2);
  expected << 0, 1, 1, 0;
  for (std::size_t k : d.interior_nodes()) CHECK((cross.jet(k).hessian[0] - expected).norm() < 1e-12);

  // General quadratic: f = x^T Q x / 2 + b.x
  Matrix q(2, 2);
  q << 1.5, -0.3, -0.3, 0.7;
  const Vector b = Vector::LinSpaced(2, 0.2, -0.4);
  const GraphSample quad = compute_jet(sample_function(d, 1, [&](const Vector& x) {
    return Vector::Constant(1, 0.5 * x.dot(q * x) + b.dot(x)).eval();
  }));
  for (std::size_t k : d.interior_nodes()) {
    const Vector x = d.coordinates(k);
    CHECK((quad.jet(k).df.row(0).transpose() - (q * x + b)).norm() < 1e-12);
    CHECK((quad.jet(k).hessian[0] - q).norm() < 1e-10);
  }
}

TEST_CASE("jet derivative error is second order") {
  auto max_error = [](int res) {
    const GridDomain d = build_grid(1, {{0, 2}}, {res});
    const GraphSample s = compute_jet(sample_function(d, 1, [](const Vector& x) { return Vector::Constant(1, std::sin(x[0])).eval(); }));
    double err = 0.0;
    for (std::size_t k : d.interior_nodes()) err = std::max(err, std::abs(s.jet(k).df(0, 0) - std::cos(d.coordinates(k)[0])));
    return err;
  };
  const double ratio = max_error(33) / max_error(65);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("jet access is guarded") {
  const GridDomain d = build_grid(1, {{0, 1}}, {5});
  GraphSample s = sample_function(d, 1, [](const Vector&) { return Vector(Vector::Zero(1)); });
  CHECK_THROWS_AS(s.jet(2), StateError);
  s = compute_jet(s);
  CHECK_NOTHROW(s.jet(2));
  CHECK_THROWS_AS(s.jet(0), StateError);
  CHECK_THROWS_AS(induced_metric(sample_function(d, 1, [](const Vector&) { return Vector(Vector::Zero(1)); })),
                  StateError);
}

TEST_CASE("induced metric") {
  const NodeMetric flat = metric_at(Matrix::Zero(2, 2));
  CHECK((flat.g - Matrix::Identity(2, 2)).norm() == 0.0);
  CHECK(flat.star_omega == 1.0);

  const NodeMetric diag = metric_at(Matrix::Identity(2, 2));
  CHECK(diag.sqrt_det_g * diag.sqrt_det_g == doctest::Approx(4.0));
  CHECK(diag.star_omega == doctest::Approx(0.5));

  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 4;
    const int m = 1 + (trial / 4) % 4;
    const Matrix df = random_matrix(rng, m, n) * 2.0;
    const NodeMetric g = metric_at(df);
    const PointFrame f = svd_frames(df);
    double prod = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) prod *= 1.0 + f.lambda[i] * f.lambda[i];
    CHECK(g.star_omega == doctest::Approx(1.0 / std::sqrt(prod)).epsilon(1e-12));
    CHECK(g.star_omega * g.sqrt_det_g == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(g.g).eigenvalues().minCoeff() >= 1.0 - 1e-12);
  }
}

TEST_CASE("svd frames") {
  SUBCASE("zero differential gives standard bases") {
    const PointFrame f = svd_frames(Matrix::Zero(3, 2));
    CHECK(f.lambda.isZero(0.0));
    CHECK((f.a_tangent - Matrix::Identity(2, 2)).norm() < 1e-14);
    CHECK((f.a_normal - Matrix::Identity(3, 3)).norm() < 1e-14);
  }
  SUBCASE("diagonal case n=2, m=3") {
    Matrix df = Matrix::Zero(3, 2);
    df(0, 0) = 1.0;
    df(1, 1) = 2.0;
    const PointFrame f = svd_frames(df);
    CHECK(f.lambda[0] == doctest::Approx(2.0));
    CHECK(f.lambda[1] == doctest::Approx(1.0));
    check_frame_invariants(df, f);
  }
  SUBCASE("random 3x3 reconstruction") {
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
      const Matrix df = random_matrix(rng, 3, 3);
      const PointFrame f = svd_frames(df);
      Matrix rebuilt = Matrix::Zero(3, 3);
      for (int i = 0; i < 3; ++i) rebuilt += f.lambda[i] * f.a_normal.col(i) * f.a_tangent.col(i).transpose();
      CHECK((rebuilt - df).norm() < 1e-12);
    }
  }
  SUBCASE("invariants for every shape including m < n padding") {
    Rng rng(9);
    for (int n = 1; n <= 4; ++n) {
      for (int m = 1; m <= 4; ++m) {
        const Matrix df = random_matrix(rng, m, n);
        check_frame_invariants(df, svd_frames(df));
      }
    }
  }
  SUBCASE("repeated singular values are resolved deterministically") {
    const Matrix df = 0.7 * Matrix::Identity(2, 2);
    const PointFrame a = svd_frames(df);
    const PointFrame b = svd_frames(df);
    CHECK((a.a_tangent - b.a_tangent).norm() == 0.0);
    CHECK((a.a_tangent - Matrix::Identity(2, 2)).norm() < 1e-12);
    check_frame_invariants(df, a);
  }
  SUBCASE("first nonzero entry of each a_i is positive") {
    Rng rng(21);
    const PointFrame f = svd_frames(random_matrix(rng, 3, 3));
    for (int i = 0; i < 3; ++i) {
      for (int r = 0; r < 3; ++r) {
        if (std::abs(f.a_tangent(r, i)) > 1e-12) {
          CHECK(f.a_tangent(r, i) > 0.0);
          break;
        }
      }
    }
  }
}

TEST_CASE("second fundamental form") {
  SUBCASE("linear graphs are totally geodesic") {
    const GridDomain d = build_grid(2, {{0, 1}, {0, 1}}, {7, 7});
    Matrix a(2, 2);
    a << 0.4, -0.2, 0.1, 0.3;
    const GraphSample s = linear_sample(d, a);
    const Geometry g = analyze_geometry(s);
    for (std::size_t k : d.interior_nodes()) {
      for (const Matrix& h : g.sff.nodes[k].h) CHECK(h.norm() < 1e-10);
      CHECK(g.sff.nodes[k].mean_curvature.norm() < 1e-10);
    }
  }
  SUBCASE("parabola vertex has curvature one") {
    const GridDomain d = build_grid(1, {{-1, 1}}, {9});
    const GraphSample s = compute_jet(sample_function(d, 1, [](const Vector& x) { return Vector::Constant(1, x[0] * x[0] / 2).eval(); }));
    const Geometry g = analyze_geometry(s);
    const std::size_t centre = 4;
    CHECK(std::abs(g.sff.nodes[centre].h[0](0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("symmetry and agreement with the ambient projection") {
    const GridDomain d = build_grid(2, {{0, 1}, {0, 1}}, {9, 9});
    const GraphSample s = compute_jet(sample_function(d, 2, [](const Vector& x) {
      Vector f(2);
      f << std::sin(x[0]) * x[1], 0.5 * x[0] * x[0] - x[1] * x[1];
      return f;
    }));
    const Geometry g = analyze_geometry(s);
    for (std::size_t k : d.interior_nodes()) {
      const PointFrame& fr = g.frames[k];
      const NodeSff& sff = g.sff.nodes[k];
      // h_{a ij} = <e_a, A(E_i, E_j)> with E_i the tangent frame in coordinates.
      const Matrix c = fr.e_tangent.topRows(2);
      for (int a = 0; a < 2; ++a) {
        CHECK((sff.h[a] - sff.h[a].transpose()).norm() < 1e-12);
        for (int i = 0; i < 2; ++i) {
          for (int j = 0; j < 2; ++j) {
            Vector amb = Vector::Zero(4);
            for (int p = 0; p < 2; ++p)
              for (int q = 0; q < 2; ++q)
                amb += c(p, i) * c(q, j) * ambient_second_fundamental_form(s.jet(k), g.metric.nodes[k], p, q);
            CHECK(sff.h[a](i, j) == doctest::Approx(fr.e_normal.col(a).dot(amb)).epsilon(1e-10));
          }
        }
      }
    }
  }
  SUBCASE("mean curvature of Scherk's minimal surface vanishes under refinement") {
    auto max_trace = [](int res) {
      const GridDomain d = build_grid(2, {{-1, 1}, {-1, 1}}, {res, res});
      const GraphSample s = compute_jet(sample_function(d, 1, [](const Vector& x) {
        return Vector::Constant(1, std::log(std::cos(x[1]) / std::cos(x[0]))).eval();
      }));
      const Geometry g = analyze_geometry(s);
      double worst = 0.0;
      for (std::size_t k : d.interior_nodes()) worst = std::max(worst, g.sff.nodes[k].mean_curvature.norm());
      return worst;
    };
    const double coarse = max_trace(33);
    const double fine = max_trace(65);
    CHECK(fine < coarse / 3.0);
    CHECK(fine < 1e-2);
  }
}

TEST_CASE("minimal surface residual and df_norm") {
  const GridDomain d = build_grid(2, {{0, 1}, {0, 1}}, {9, 9});
  Matrix a(2, 2);
  a << 1.0, 2.0, -0.5, 0.25;
  const GraphSample s = linear_sample(d, a);
  CHECK(minimal_surface_residual(s) < 1e-10);
  CHECK(df_norm(s) == doctest::Approx(Eigen::JacobiSVD<Matrix>(a).singularValues()[0]).epsilon(1e-12));

  const GraphSample zero = linear_sample(d, Matrix::Zero(2, 2));
  CHECK(df_norm(zero) == 0.0);

  const GraphSample bowl = compute_jet(sample_function(d, 1, [](const Vector& x) { return Vector::Constant(1, x.squaredNorm() / 2).eval(); }));
  CHECK(minimal_surface_residual(bowl) > 0.5);
}

TEST_CASE("field CSV layout") {
  const GridDomain d = build_grid(2, {{0, 1}, {0, 1}}, {5, 5});
  const GraphSample s = linear_sample(d, Matrix::Identity(1, 2));
  std::ostringstream os;
  write_field_csv(os, s, geometry_columns(s, analyze_geometry(s)));
  std::istringstream in(os.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "node_index,x1,x2,f1,star_omega,sqrt_det_g,lambda1,lambda2,mean_curvature_norm");
  std::string first;
  std::getline(in, first);
  CHECK(first.rfind("0,0,0,0,nan", 0) == 0);
  int rows = 1;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 25);
}
