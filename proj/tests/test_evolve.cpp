#include <doctest.h>

#include <cmath>
#include <limits>

#include "gkdv/evolve.hpp"
#include "gkdv/profiles.hpp"

using namespace gkdv;

namespace {

GridField advance(const GridField& u0, double dt, double t_end, SolverConfig cfg = {}) {
  cfg.dt_initial = dt;
  cfg.t_max = t_end;
  Integrator it(u0, cfg);
  const auto steps = static_cast<long>(std::llround(t_end / dt));
  for (long i = 0; i < steps; ++i) it.step(dt);
  return it.field();
}

GridField shifted_q(const Grid1D& g, double shift) {
  return GridField::sample(g, [shift](double x) { return ground_state_at(x - shift).q; });
}

}  // namespace

TEST_CASE("config validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.cfl_safety = 1.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.dt_initial = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.sponge_strength = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("soliton travels at unit speed and conserves mass and energy") {
  Grid1D g(60.0, 4096);
  const GridField q = ground_state(g);
  const FlowState s0 = make_flow_state(0.0, q);
  // At dt = 1e-3 the relative drift is 1.5e-9 per unit time; 5e-4 brings it
  // below 1e-10.
  const GridField u = advance(q, 5e-4, 5.0);
  CHECK((u - shifted_q(g, 5.0)).max_abs() < 1e-6);
  const FlowState s1 = make_flow_state(5.0, u);
  CHECK(std::abs(s1.mass - s0.mass) / s0.mass < 1e-9);
  CHECK(std::abs(s1.energy - s0.energy) / std::abs(s0.grad_norm * s0.grad_norm) < 1e-9);
}

TEST_CASE("zero stays zero") {
  Grid1D g(60.0, 1024);
  const GridField u = advance(GridField(g), 1e-2, 1.0);
  CHECK(u.max_abs() == 0.0);
}

TEST_CASE("fourth-order convergence in dt") {
  Grid1D g(60.0, 4096);
  const GridField q = ground_state(g);
  const GridField ref = advance(q, 1.25e-4, 1.0);
  const double e1 = (advance(q, 2e-3, 1.0) - ref).max_abs();
  const double e2 = (advance(q, 1e-3, 1.0) - ref).max_abs();
  MESSAGE("errors " << e1 << " " << e2 << " ratio " << e1 / e2);
  CHECK(e1 / e2 >= 8.0);
}

TEST_CASE("time reversibility without sponge") {
  Grid1D g(60.0, 2048);
  const GridField q = shifted_q(g, -2.0);
  SolverConfig cfg;
  Integrator it(q, cfg);
  for (int i = 0; i < 50; ++i) it.step(2.5e-4);
  for (int i = 0; i < 50; ++i) it.step(-2.5e-4);
  CHECK((it.field() - q).max_abs() < 1e-10);
  CHECK(std::abs(it.time()) < 1e-14);
}

TEST_CASE("moving frame reproduces the translated soliton") {
  Grid1D g(60.0, 4096);
  SolverConfig cfg;
  cfg.frame_velocity = 1.0;
  const GridField u = advance(ground_state(g), 1e-3, 2.0, cfg);
  CHECK((u - ground_state(g)).max_abs() < 1e-6);
}

TEST_CASE("sponge mass loss matches the layer integral") {
  Grid1D g(60.0, 2048);
  // Linear wave packet with group velocity -3 k^2 = -12 heading into the layer.
  const GridField u0 = GridField::sample(g, [](double x) {
    return 0.05 * std::exp(-(x + 10) * (x + 10) / 4.0) * std::cos(2.0 * x);
  });
  SolverConfig cfg;
  cfg.sponge_strength = 5.0;
  cfg.dt_initial = 1e-3;
  Integrator it(u0, cfg);
  const double m0 = it.mass();
  for (int i = 0; i < 3000; ++i) it.step(1e-3);
  const double lost = m0 - it.mass();
  MESSAGE("mass lost " << lost << ", layer integral " << it.sponge_mass_loss());
  CHECK(lost > 0.5 * m0);
  CHECK(std::abs(lost - it.sponge_mass_loss()) / lost < 0.05);
}

TEST_CASE("adapt_dt scaling rules") {
  Grid1D g(60.0, 256);
  SolverConfig cfg;
  cfg.dt_initial = 0.01;
  cfg.dt_max = 1.0;
  const FlowState flat = make_flow_state(0.0, GridField::sample(g, [](double x) {
    return 1e-3 * std::exp(-x * x / 50.0);
  }));
  CHECK(adapt_dt(flat, cfg) == cfg.dt_initial);
  const double d1 = adapt_dt(flat, cfg, 2.0);
  const double d2 = adapt_dt(flat, cfg, 1.0);
  CHECK(d1 / d2 == doctest::Approx(8.0).epsilon(0.05));

  SolverConfig c2;
  c2.dt_initial = 1.0;
  auto bump = [&](double a) {
    return make_flow_state(0.0, GridField::sample(g, [a](double x) { return a * std::exp(-x * x / 8.0); }));
  };
  const double r = adapt_dt(bump(0.5), c2) / adapt_dt(bump(1.0), c2);
  CHECK(r == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("controller step passes a step-doubling error check") {
  Grid1D g(60.0, 4096);
  SolverConfig cfg;
  cfg.dt_initial = 1.0;
  auto check = [&](const GridField& u) {
    const double dt = adapt_dt(make_flow_state(0.0, u), cfg);
    Integrator one(u, cfg), two(u, cfg);
    one.step(dt);
    two.step(0.5 * dt);
    two.step(0.5 * dt);
    const double err = (one.field() - two.field()).max_abs();
    MESSAGE("dt " << dt << " step-doubling " << err);
    CHECK(err < 1e-8);
  };
  check(ground_state(g));
  for (double a : {0.25, 0.5})
    check(GridField::sample(g, [a](double x) { return a * std::exp(-x * x / 8.0); }));
}

TEST_CASE("errors") {
  Grid1D g(60.0, 1024);
  SolverConfig cfg;
  Integrator it(ground_state(g), cfg);
  try {
    it.step(1e-15);
    FAIL("expected step collapse");
  } catch (const NumericalError& e) {
    CHECK(e.kind() == NumericalErrorKind::StepCollapse);
  }
  // Far beyond the explicit stability bound.
  Integrator bad(ground_state(g) * 3.0, cfg);
  bool thrown = false;
  for (int i = 0; i < 200 && !thrown; ++i) {
    try {
      bad.step(0.5);
    } catch (const NumericalError& e) {
      thrown = true;
      CHECK(e.kind() == NumericalErrorKind::Instability);
      CHECK(e.last_good().u.all_finite());
    }
  }
  CHECK(thrown);
}

TEST_CASE("subcritical mass data completes with bounded H1") {
  Grid1D g(60.0, 1024);
  SolverConfig cfg;
  cfg.t_max = 10.0;
  cfg.dt_initial = 5e-3;
  cfg.sponge_strength = 5.0;
  double h1max = 0.0;
  const auto out = run(ground_state(g) * 0.5, cfg, [&](const FlowState& s) {
    h1max = std::max(h1max, s.h1_norm);
    return ObserverReply{};
  });
  CHECK(out.status == RunStatus::Completed);
  CHECK(out.final_state.t == doctest::Approx(10.0));
  CHECK(h1max < 2.0);
}

TEST_CASE("observer stop") {
  Grid1D g(60.0, 1024);
  SolverConfig cfg;
  cfg.t_max = 10.0;
  int calls = 0;
  const auto out = run(ground_state(g), cfg, [&](const FlowState&) {
    return ObserverReply{++calls >= 5, std::nullopt, std::nullopt};
  });
  CHECK(out.status == RunStatus::Stopped);
  CHECK(out.steps == 4);
}

TEST_CASE("blow-up time extrapolation") {
  std::vector<double> t, gn;
  for (int i = 0; i < 20; ++i) {
    t.push_back(1.0 + 0.01 * i);
    gn.push_back(3.0 / (1.5 - t.back()));
  }
  const auto T = extrapolate_blowup_time(t, gn);
  REQUIRE(T);
  CHECK(*T == doctest::Approx(1.5).epsilon(1e-12));
  CHECK_FALSE(extrapolate_blowup_time({1.0}, {2.0}));
}

TEST_CASE("focusing Q_b is detected as blow-up") {
  Grid1D g(60.0, 2048);
  const ProfileSet ps = make_profiles(g);
  const auto lp = build_Qb(0.05, ps);
  SolverConfig cfg;
  cfg.t_max = 60.0;
  cfg.dt_initial = 4e-3;
  cfg.sponge_strength = 5.0;
  // ||u_x|| = ||Q'|| / lambda; the threshold corresponds to lambda ~ 0.3.
  cfg.h1_blowup_threshold = 3.5;
  const double q0 = ground_state_at(0.0).q;
  const auto out = run(lp.Qb, cfg, [&](const FlowState& s) {
    const double l = std::pow(q0 / std::abs(s.max_u), 2);
    return ObserverReply{false, l, 1.0 / (l * l)};
  });
  MESSAGE("status " << std::string(to_string(out.status)) << " t " << out.final_state.t << " steps " << out.steps);
  CHECK(out.status == RunStatus::BlowupDetected);
  REQUIRE(out.T_est);
  CHECK(*out.T_est > out.final_state.t);
}

TEST_CASE("defocusing Q_b completes with growing scale") {
  Grid1D g(200.0, 4096);
  const ProfileSet ps = make_profiles(g);
  const auto lp = build_Qb(-0.05, ps);
  SolverConfig cfg;
  cfg.t_max = 15.0;
  cfg.dt_initial = 2e-3;
  cfg.sponge_strength = 5.0;
  const double q0 = ground_state_at(0.0).q;
  const auto out = run(lp.Qb, cfg, [&](const FlowState& s) {
    const double l = std::pow(q0 / std::abs(s.max_u), 2);
    return ObserverReply{false, l, 1.0 / (l * l)};
  });
  CHECK(out.status == RunStatus::Completed);
  const double l_end = std::pow(q0 / std::abs(out.final_state.max_u), 2);
  MESSAGE("final lambda estimate " << l_end);
  CHECK(l_end > 1.2);
}
