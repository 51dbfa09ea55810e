#include "minstab/mcf_flow.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace minstab;

namespace {

GraphSample linear_graph(const GridDomain& d, const Matrix& a) {
  return sample_function(d, static_cast<int>(a.rows()), [a](const Vector& x) { return Vector(a * x); });
}

GraphSample bumpy(const GridDomain& d) {
  return sample_function(d, 2, [](const Vector& x) {
    Vector f(2);
    f << 0.3 * std::sin(M_PI * x[0]) * std::sin(M_PI * x[1]), 0.2 * x[0] * x[1];
    return f;
  });
}

}  // namespace

TEST_CASE("linear graphs are fixed points") {
  const GridDomain d = build_grid(2, {{0, 1}, {0, 1}}, {9, 9});
  Matrix a(2, 2);
  a << 0.3, -0.1, 0.2, 0.4;
  const GraphSample s = linear_graph(d, a);
  const FlowResult r = run_flow(s, FlowConfig{});
  CHECK(r.converged());
  CHECK(r.state.steps == 0);
  CHECK(r.trace.size() == 1);
  CHECK(r.state.sample.values() == s.values());

  FlowState state = make_flow_state(s);
  CHECK(state.residual < 1e-12);
  const FlowState next = mcf_step(state, FlowConfig{});
  CHECK((next.sample.values() - s.values()).norm() < 1e-13);
  CHECK(next.time > 0.0);
  CHECK(next.steps == 1);
}

TEST_CASE("curves flow to the straight segment between their endpoints") {
  const GridDomain d = build_grid(1, {{0, 1}}, {33});
  const GraphSample s = sample_function(d, 1, [](const Vector& x) {
    return Vector::Constant(1, 0.5 + x[0] + 0.3 * std::sin(M_PI * x[0]) - 0.1 * std::sin(3 * M_PI * x[0])).eval();
  });
  const FlowResult r = run_flow(s, FlowConfig{});
  REQUIRE(r.converged());
  CHECK(r.state.residual <= 1e-8);
  for (std::size_t k = 0; k < d.node_count(); ++k) {
    const double x = d.coordinates(k)[0];
    CHECK(std::abs(r.state.sample.values()(0, static_cast<Eigen::Index>(k)) - (0.5 + x)) < 1e-6);
  }
  const OmegaMonitorReport omega = monitor_omega(r.trace, 1e-12);
  CHECK_FALSE(omega.dropped);
}

TEST_CASE("Dirichlet boundary and step bookkeeping") {
  const GridDomain d = build_grid(2, {{0, 1}, {0, 1}}, {13, 11});
  const GraphSample s = bumpy(d);
  FlowConfig cfg;
  cfg.max_steps = 25;
  cfg.log_interval = 10;
  const FlowResult r = run_flow(s, cfg);
  CHECK(r.status == FlowStatus::budget_exhausted);
  CHECK(r.state.steps == 25);
  CHECK(r.message.find("budget") != std::string::npos);
  for (std::size_t k = 0; k < d.node_count(); ++k) {
    if (!d.is_boundary(k)) continue;
    const auto c = static_cast<Eigen::Index>(k);
    CHECK((r.state.sample.values().col(c).array() == s.values().col(c).array()).all());
  }
  // Initial row, every tenth step and the final state.
  REQUIRE(r.trace.size() == 4);
  CHECK(r.trace[0].step == 0);
  CHECK(r.trace[1].step == 10);
  CHECK(r.trace[3].step == 25);
  CHECK(r.trace.back().residual < r.trace.front().residual);

  const FlowState st = make_flow_state(s);
  const double h = d.min_spacing();
  CHECK(stable_time_step(st, cfg) == doctest::Approx(0.9 * h * h / 4.0));
  FlowConfig bad;
  bad.dt_safety = 1.5;
  CHECK_THROWS_AS(stable_time_step(st, bad), ConfigError);
  CHECK_THROWS_AS(mcf_step(st, cfg, -1.0), ConfigError);
  FlowConfig no_target;
  no_target.residual_target = 0.0;
  CHECK_THROWS_AS(run_flow(s, no_target), ConfigError);
}

TEST_CASE("blow-up keeps the last good state") {
  const GridDomain d = build_grid(2, {{0, 1}, {0, 1}}, {9, 9});
  const FlowState st = make_flow_state(bumpy(d), 0.5, 7);
  try {
    (void)mcf_step(st, FlowConfig{}, 1e300);
    FAIL("expected a blow-up");
  } catch (const FlowBlowUpError& e) {
    CHECK(e.snapshot().steps == 7);
    CHECK(e.snapshot().time == 0.5);
    CHECK(e.snapshot().sample.values() == st.sample.values());
  }
  CHECK_THROWS_AS(mcf_step(st, FlowConfig{}, 1e300), BlowUpError);
}

TEST_CASE("omega monitor") {
  CHECK_THROWS_AS(monitor_omega({}, 1e-3), ConfigError);
  std::vector<TraceRow> trace(3);
  trace[0].min_star_omega = 0.8;
  trace[1].min_star_omega = 0.79;
  trace[2].min_star_omega = 0.85;
  const OmegaMonitorReport r = monitor_omega(trace, 0.005, 0.795);
  CHECK(r.initial == 0.8);
  CHECK(r.minimum == 0.79);
  CHECK(r.max_drop == doctest::Approx(0.01));
  CHECK(r.dropped);
  CHECK(r.below_floor);
  CHECK_FALSE(monitor_omega(trace, 0.02).dropped);

  // Linear data never moves, so *Omega is constant along the trace.
  const GridDomain d = build_grid(2, {{0, 1}, {0, 1}}, {7, 7});
  Matrix a(1, 2);
  a << 0.5, 0.5;
  FlowConfig cfg;
  cfg.residual_target = 1e-30;
  cfg.max_steps = 5;
  cfg.log_interval = 1;
  const FlowResult flow = run_flow(linear_graph(d, a), cfg);
  const OmegaMonitorReport constant = monitor_omega(flow.trace, 0.0);
  CHECK(constant.max_drop < 1e-14);
  CHECK(constant.initial == doctest::Approx(1.0 / std::sqrt(1.5)));
}

TEST_CASE("scaling initial data into the criterion") {
  const GridDomain d = build_grid(2, {{0, 1}, {0, 1}}, {7, 7});
  const CriterionConstants k = criterion_constants(2, 2);
  SUBCASE("orthogonal A with |A| = 1 scales to the critical slope") {
    const ScaledSample s = scale_to_criterion(linear_graph(d, Matrix::Identity(2, 2)), k, CriterionMode::slope);
    CHECK(s.factor == doctest::Approx(std::sqrt(2.0) - 1).epsilon(1e-8));
    CHECK(s.report.pass());
  }
  SUBCASE("largest singular value 2") {
    Matrix a(2, 2);
    a << 2, 0, 0, 0.5;
    const ScaledSample s = scale_to_criterion(linear_graph(d, a), k, CriterionMode::slope);
    CHECK(s.factor == doctest::Approx((std::sqrt(2.0) - 1) / 2).epsilon(1e-8));
    CHECK(s.report.max_df_norm <= k.slope);
  }
  SUBCASE("zero and already passing data are returned unscaled") {
    const ScaledSample zero = scale_to_criterion(linear_graph(d, Matrix::Zero(2, 2)), k, CriterionMode::slope);
    CHECK(zero.factor == 1.0);
    const GraphSample small = linear_graph(d, 0.1 * Matrix::Identity(2, 2));
    const ScaledSample same = scale_to_criterion(small, k, CriterionMode::omega_derived);
    CHECK(same.factor == 1.0);
    CHECK(same.sample.values() == small.values());
  }
  CHECK_THROWS_AS(scale_to_criterion(linear_graph(d, Matrix::Identity(2, 2)), k, CriterionMode::slope, 0.0),
                  ConfigError);
}

TEST_CASE("trace csv") {
  std::vector<TraceRow> trace(2);
  trace[1].step = 100;
  trace[1].time = 0.25;
  trace[1].residual = 1e-3;
  trace[1].min_star_omega = 0.9;
  trace[1].dt = 1e-4;
  std::ostringstream os;
  write_trace_csv(os, trace);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "step,t,residual,min_star_omega,dt");
  std::getline(is, line);
  CHECK(line == "0,0,0,1,0");
  std::getline(is, line);
  CHECK(line.rfind("100,0.25,0.001", 0) == 0);
}
