#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "kvflow/flow.hpp"
#include "kvflow/snapshot.hpp"
#include "kvflow/spectral.hpp"

using namespace kvflow;

namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

ManifoldData make(ManifoldKind kind, int n0, int n1, int n2 = 1, double amp = 0.0) {
  ManifoldSpec spec;
  spec.kind = kind;
  spec.resolution = {n0, n1, n2};
  spec.perturbation_amplitude = amp;
  return build_manifold(spec);
}

FlowState make_state(const FlowOperator& op, const VectorFieldGrid& X) {
  FlowState s;
  s.t = 0.0;
  s.X = X;
  s.frakL = op.frakL_h(X);
  s.u0 = op.inner_m(X, X);
  return s;
}

// X^comp = trig(k x^axis) on a torus chart.
VectorFieldGrid torus_mode(const ManifoldData& man, int comp, int axis, int k, bool use_sin) {
  VectorFieldGrid X = VectorFieldGrid::Zero(man.nodes * 2);
  for (long node = 0; node < man.nodes; ++node) {
    double c = man.node_coord(axis, node);
    X[node * 2 + comp] = use_sin ? std::sin(k * c) : std::cos(k * c);
  }
  return X;
}

VectorFieldGrid torus_translation(const ManifoldData& man, int comp) {
  VectorFieldGrid X = VectorFieldGrid::Zero(man.nodes * 2);
  for (long node = 0; node < man.nodes; ++node) X[node * 2 + comp] = 1.0;
  return X;
}

VectorFieldGrid sphere_rotation(const ManifoldData& man) {
  VectorFieldGrid X = VectorFieldGrid::Zero(man.nodes * man.m);
  for (long node = 0; node < man.nodes; ++node) X[node * man.m + 1] = 1.0;
  return X;
}

VectorFieldGrid taylor_green(const ManifoldData& man) {
  VectorFieldGrid X(man.nodes * 2);
  for (long node = 0; node < man.nodes; ++node) {
    double x = man.node_coord(0, node), y = man.node_coord(1, node);
    X[node * 2 + 0] = std::sin(x) * std::cos(y);
    X[node * 2 + 1] = -std::cos(x) * std::sin(y);
  }
  return X;
}

// Band-limited random field: modes |k| <= 2 with seeded coefficients.
VectorFieldGrid random_smooth(const ManifoldData& man, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  VectorFieldGrid X = VectorFieldGrid::Zero(man.nodes * 2);
  for (int comp = 0; comp < 2; ++comp)
    for (int kx = -2; kx <= 2; ++kx)
      for (int ky = -2; ky <= 2; ++ky) {
        double a = gauss(rng), b = gauss(rng);
        for (long node = 0; node < man.nodes; ++node) {
          double ph = kx * man.node_coord(0, node) + ky * man.node_coord(1, node);
          X[node * 2 + comp] += 0.2 * (a * std::cos(ph) + b * std::sin(ph));
        }
      }
  return X;
}

}  // namespace

TEST_CASE("single steps reproduce the semigroup on eigenfields") {
  ManifoldData man = make(ManifoldKind::flat_torus_t2, 32, 32);
  FlowOperator op = assemble(man);
  VectorFieldGrid X = torus_mode(man, 0, 0, 1, true);
  double sh = sinc(0.5 * man.grid.h[0]);
  double lam = -2.0 * sh * sh;

  FlowConfig cfg;
  cfg.variant = FlowVariant::main_flow;

  double dt = 0.05;
  FlowState s0 = make_state(op, X);

  cfg.integrator = Integrator::euler;
  FlowState e1 = step_main(s0, op, cfg, dt);
  CHECK((e1.X - (1.0 + dt * lam) * X).cwiseAbs().maxCoeff() < 1e-13);

  cfg.integrator = Integrator::rk4;
  FlowState r1 = step_main(s0, op, cfg, dt);
  double z = dt * lam;
  double P = 1.0 + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0;
  CHECK((r1.X - P * X).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(std::abs(P - std::exp(z)) < std::pow(std::abs(z), 5));

  FlowState z0 = make_state(op, VectorFieldGrid::Zero(man.nodes * 2));
  FlowState z1 = step_main(z0, op, cfg, dt);
  CHECK(z1.X.norm() == 0.0);
  CHECK(z1.frakL == 0.0);

  ManifoldData sph = make(ManifoldKind::unit_sphere_s2, 16, 32);
  FlowOperator sop = assemble(sph);
  VectorFieldGrid R = sphere_rotation(sph);
  FlowState rs = step_main(make_state(sop, R), sop, cfg, 0.01);
  CHECK(sop.norm_m(VectorFieldGrid(rs.X - R)) < 1e-8 * sop.norm_m(R));
}

TEST_CASE("monitor columns carry the field integrals") {
  ManifoldData man = make(ManifoldKind::flat_torus_t2, 32, 32);
  FlowOperator op = assemble(man);
  double h = man.grid.h[0];
  double s1 = sinc(h), sh = sinc(0.5 * h);
  VectorFieldGrid X = torus_mode(man, 0, 0, 1, true);

  FlowConfig cfg;
  cfg.variant = FlowVariant::main_flow;
  cfg.integrator = Integrator::rk4;
  cfg.t_end = 1e-3;
  cfg.k_max = 2;
  cfg.monitor_stride = 1;
  cfg.require_convergence = false;
  RunResult res = run(X, cfg, man, op);

  const MonitorRow& r0 = res.series.rows.front();
  double tp2 = 2.0 * kPi * kPi;
  CHECK(r0.u[0] == doctest::Approx(tp2).epsilon(1e-12));
  CHECK(r0.u[1] == doctest::Approx(tp2 * s1 * s1).epsilon(1e-10));
  CHECK(r0.u[2] == doctest::Approx(tp2 * std::pow(s1, 4)).epsilon(1e-10));
  CHECK(r0.v[0] == doctest::Approx(tp2 * s1 * s1).epsilon(1e-10));
  CHECK(r0.v[1] == doctest::Approx(tp2 * std::pow(s1, 4)).epsilon(1e-10));
  CHECK(r0.v[2] == doctest::Approx(tp2 * std::pow(s1, 6)).epsilon(1e-10));
  CHECK(r0.frakL == doctest::Approx(tp2 * sh * sh).epsilon(1e-10));
  CHECK(r0.E_bochner == doctest::Approx(2.0 * tp2 * s1 * s1).epsilon(1e-10));
  CHECK(r0.normX2 == doctest::Approx(r0.u[0]).epsilon(1e-12));
  CHECK(r0.E_int == 0.0);
  CHECK(r0.err_partial == doctest::Approx(0.5 * tp2).epsilon(1e-12));

  REQUIRE(res.series.rows.size() >= 2);
  const MonitorRow& r1 = res.series.rows[1];
  CHECK(r1.E_int > 0.0);
  CHECK(r1.err_partial == doctest::Approx(0.5 * r0.normX2 - r1.E_int).epsilon(1e-12));
}

TEST_CASE("mixed initial data converges to its translation part") {
  ManifoldData man = make(ManifoldKind::flat_torus_t2, 32, 32);
  FlowOperator op = assemble(man);
  VectorFieldGrid dx = torus_translation(man, 0);
  VectorFieldGrid X0 = dx + torus_mode(man, 0, 0, 1, true);

  FlowConfig cfg;
  cfg.variant = FlowVariant::main_flow;
  cfg.integrator = Integrator::rk4;
  cfg.t_end = 10.0;
  cfg.k_max = 1;
  RunResult res = run(X0, cfg, man, op);

  double tp2 = 2.0 * kPi * kPi;
  CHECK(res.exit_status == 0);
  CHECK(res.frakL_monotone);
  CHECK(res.min_u0 > 4.0 * kPi * kPi * 0.9999);
  CHECK(res.series.rows.front().normX2 == doctest::Approx(3.0 * tp2).epsilon(1e-10));
  CHECK(op.norm_m(VectorFieldGrid(res.final_state.X - dx)) < 1e-3 * op.norm_m(dx));

  // Dissipated-energy route and direct route agree on the limit energy.
  double est = err_estimate(res.series);
  CHECK(est == doctest::Approx(tp2).epsilon(1e-3));
  CHECK(res.err_integral == doctest::Approx(tp2).epsilon(1e-6));
  CHECK(res.err_final == doctest::Approx(tp2).epsilon(1e-6));
  CHECK(std::abs(est - res.err_integral) < 5e-3 * tp2);
}

TEST_CASE("limit energy: pure-gradient data dissipates, Killing data keeps all") {
  ManifoldData man = make(ManifoldKind::flat_torus_t2, 32, 32);
  FlowOperator op = assemble(man);
  VectorFieldGrid X0 = torus_mode(man, 0, 0, 1, true);

  FlowConfig cfg;
  cfg.variant = FlowVariant::main_flow;
  cfg.integrator = Integrator::rk4;
  cfg.t_end = 10.0;
  RunResult res = run(X0, cfg, man, op);
  CHECK(res.exit_status == 0);
  double half_e0 = 0.5 * res.series.rows.front().normX2;
  CHECK(std::abs(err_estimate(res.series)) < 0.01 * half_e0);
  CHECK(std::abs(res.err_integral) < 1e-6 * half_e0);

  ManifoldData sph = make(ManifoldKind::unit_sphere_s2, 16, 32);
  FlowOperator sop = assemble(sph);
  FlowConfig scfg;
  scfg.variant = FlowVariant::main_flow;
  scfg.integrator = Integrator::rk4;
  scfg.t_end = 0.2;
  RunResult sres = run(sphere_rotation(sph), scfg, sph, sop);
  CHECK(sres.exit_status == 0);
  CHECK(err_estimate(sres.series) == doctest::Approx(0.5 * 8.0 * kPi / 3.0).epsilon(0.02));
}

TEST_CASE("sphere gradient fields decay at twice the curvature rate") {
  ManifoldData man = make(ManifoldKind::unit_sphere_s2, 24, 48);
  FlowOperator op = assemble(man);
  ScalarField f(man.nodes);
  for (long node = 0; node < man.nodes; ++node) f[node] = std::cos(man.node_coord(0, node));
  VectorFieldGrid X0 = gradient(man, f);

  FlowConfig cfg;
  cfg.variant = FlowVariant::main_flow;
  cfg.integrator = Integrator::rk4;
  cfg.t_end = 2.5;
  cfg.k_max = 0;
  cfg.require_convergence = false;
  RunResult res = run(X0, cfg, man, op);

  CHECK(res.exit_status == 0);
  CHECK(res.frakL_monotone);
  CHECK(res.min_u0 > 0.0);
  double u00 = res.series.rows.front().normX2;
  double rate = -std::log(res.final_state.u0 / u00) / (2.0 * cfg.t_end);
  double h = man.grid.h[0];
  CHECK(std::abs(rate - 2.0) < 5.0 * h * h);
}

TEST_CASE("energy ledger converges at the integrator order") {
  ManifoldData man = make(ManifoldKind::flat_torus_t2, 16, 16);
  FlowOperator op = assemble(man);
  VectorFieldGrid X0 = torus_translation(man, 0) + torus_mode(man, 0, 0, 1, true);

  auto residual = [&](Integrator integ, double safety) {
    FlowConfig cfg;
    cfg.variant = FlowVariant::main_flow;
    cfg.integrator = integ;
    cfg.dt_safety = safety;
    cfg.t_end = 1.0;
    cfg.k_max = 0;
    cfg.require_convergence = false;
    RunResult res = run(X0, cfg, man, op);
    REQUIRE(res.exit_status == 0);
    double u00 = res.series.rows.front().normX2;
    return std::abs(0.5 * res.final_state.u0 - 0.5 * u00 + res.e_int_hi);
  };

  double r4a = residual(Integrator::rk4, 0.5);
  double r4b = residual(Integrator::rk4, 0.25);
  CHECK(r4a > 1e-13);  // well above roundoff, so the ratio is meaningful
  CHECK(r4a / r4b >= 8.0);

  double r1a = residual(Integrator::euler, 0.5);
  double r1b = residual(Integrator::euler, 0.25);
  CHECK(r1a / r1b >= 1.7);
}

TEST_CASE("time stepping matches the spectral solution") {
  ManifoldData man = make(ManifoldKind::flat_torus_t2, 16, 16);
  FlowOperator op = assemble(man);
  VectorFieldGrid X0(man.nodes * 2);
  for (long node = 0; node < man.nodes; ++node) {
    double x = man.node_coord(0, node), y = man.node_coord(1, node);
    X0[node * 2 + 0] = 1.0 + std::sin(x);
    X0[node * 2 + 1] = std::cos(2.0 * y) + 0.5 * std::sin(x) * std::cos(y);
  }

  FlowConfig cfg;
  cfg.variant = FlowVariant::main_flow;
  cfg.integrator = Integrator::rk4;
  cfg.dt_safety = 0.1;
  cfg.t_end = 1.0;
  cfg.k_max = 0;
  cfg.require_convergence = false;
  RunResult res = run(X0, cfg, man, op);
  REQUIRE(res.exit_status == 0);

  SpectralDecomposition dec = eigendecompose(op);
  VectorFieldGrid Xs = evolve_spectral(op, dec, X0, cfg.t_end);
  CHECK(op.norm_m(VectorFieldGrid(res.final_state.X - Xs)) < 1e-6 * op.norm_m(X0));
}

TEST_CASE("normalized flow settles on unit-norm Killing directions") {
  ManifoldData man = make(ManifoldKind::flat_torus_t2, 32, 32);
  FlowOperator op = assemble(man);

  FlowConfig cfg;
  cfg.variant = FlowVariant::normalized;
  cfg.integrator = Integrator::rk4;
  cfg.k_max = 0;

  {
    cfg.t_end = 4.5;
    VectorFieldGrid X0 = torus_translation(man, 0) + torus_mode(man, 0, 0, 1, true);
    RunResult res = run(X0, cfg, man, op);
    CHECK(res.exit_status == 0);
    CHECK(res.frakL_monotone);  // Rayleigh quotient, monotone at this dt_safety
    for (const MonitorRow& row : res.series.rows)
      CHECK(std::abs(row.normX2 - 1.0) < 1e-10);
    VectorFieldGrid limit = torus_translation(man, 0) / (2.0 * kPi);
    CHECK(op.norm_m(VectorFieldGrid(res.final_state.X - limit)) < 1e-3);
  }

  {
    // No Killing part at all: the limit is the slowest eigendirection.
    cfg.t_end = 14.0;
    VectorFieldGrid X0 = torus_mode(man, 0, 0, 1, true) + 0.01 * torus_mode(man, 1, 0, 1, true);
    RunResult res = run(X0, cfg, man, op);
    CHECK(res.exit_status == 0);
    VectorFieldGrid limit = torus_mode(man, 1, 0, 1, true) / (kPi * std::sqrt(2.0));
    CHECK(op.norm_m(VectorFieldGrid(res.final_state.X - limit)) < 1e-3);
  }
}

TEST_CASE("divergence-free dynamics stay divergence-free without the gradient term") {
  ManifoldData man = make(ManifoldKind::flat_torus_t2, 32, 32);
  FlowOperator op = assemble(man);

  FlowConfig cfg;
  cfg.variant = FlowVariant::bochner_yano;
  cfg.integrator = Integrator::euler;
  cfg.t_end = 1.0;
  cfg.k_max = 1;
  cfg.require_convergence = false;

  {
    VectorFieldGrid X0 = torus_mode(man, 1, 0, 1, true);
    RunResult res = run(X0, cfg, man, op);
    CHECK(res.exit_status == 0);
    for (const MonitorRow& row : res.series.rows) CHECK(row.v[0] < 1e-10 * row.u[0]);
    double u00 = res.series.rows.front().normX2;
    double fit = -std::log(res.final_state.u0 / u00) / (2.0 * cfg.t_end);
    double sh = sinc(0.5 * man.grid.h[0]);
    CHECK(std::abs(fit - sh * sh) < 5e-3);  // semidiscrete rate of the second difference
    CHECK(std::abs(fit - 1.0) < 0.015);
  }

  {
    // A pure gradient is removed by the initial projection.
    VectorFieldGrid X0 = torus_mode(man, 0, 0, 1, true);
    RunResult res = run(X0, cfg, man, op);
    CHECK(res.exit_status == 0);
    CHECK(res.series.rows.front().normX2 < 1e-10);
  }

  {
    ManifoldData sph = make(ManifoldKind::unit_sphere_s2, 16, 32);
    FlowOperator sop = assemble(sph);
    FlowConfig scfg = cfg;
    scfg.t_end = 0.05;
    VectorFieldGrid R = sphere_rotation(sph);
    RunResult res = run(R, scfg, sph, sop);
    CHECK(res.exit_status == 0);
    CHECK(sop.norm_m(VectorFieldGrid(res.final_state.X - R)) < 0.01 * sop.norm_m(R));
    for (const MonitorRow& row : res.series.rows) CHECK(row.v[0] < 1e-10 * row.u[0]);
  }
}

TEST_CASE("advective transport keeps the cellular-vortex decay and dissipates energy") {
  ManifoldData man = make(ManifoldKind::flat_torus_t2, 48, 48);
  FlowOperator op = assemble(man);

  FlowConfig cfg;
  cfg.variant = FlowVariant::navier_stokes;
  cfg.integrator = Integrator::rk4;
  cfg.t_end = 1.0;
  cfg.k_max = 1;
  cfg.require_convergence = false;

  {
    RunResult res = run(taylor_green(man), cfg, man, op);
    CHECK(res.exit_status == 0);
    double expected = 2.0 * kPi * kPi * std::exp(-4.0);
    CHECK(res.final_state.u0 == doctest::Approx(expected).epsilon(0.01));
    for (const MonitorRow& row : res.series.rows) CHECK(row.v[0] < 1e-8 * row.u[0]);
  }

  {
    FlowConfig scfg = cfg;
    scfg.t_end = 0.1;
    scfg.require_convergence = true;  // stationary data trips the zero-energy guard, not exit 3
    VectorFieldGrid dx = torus_translation(man, 0);
    RunResult res = run(dx, scfg, man, op);
    CHECK(res.exit_status == 0);
    CHECK(op.norm_m(VectorFieldGrid(res.final_state.X - dx)) < 1e-10 * op.norm_m(dx));
  }

  {
    ManifoldData small = make(ManifoldKind::flat_torus_t2, 24, 24);
    FlowOperator sop = assemble(small);
    FlowConfig rcfg = cfg;
    rcfg.t_end = 0.3;
    rcfg.k_max = 0;
    for (unsigned seed = 0; seed < 10; ++seed) {
      RunResult res = run(random_smooth(small, 7000 + seed), rcfg, small, sop);
      CHECK(res.exit_status == 0);
      double prev = res.series.rows.front().normX2;
      for (const MonitorRow& row : res.series.rows) {
        CHECK(row.normX2 <= prev * (1.0 + 1e-12));
        prev = row.normX2;
      }
    }

    // The advective step refuses a time step beyond its transport bound.
    ScalarOperator sc = assemble_scalar(small);
    FlowState s = make_state(sop, VectorFieldGrid(50.0 * taylor_green(small)));
    CHECK_THROWS_AS(step_navier_stokes(s, small, sc, sop, rcfg, 0.1), ValidationError);

    // run() caps the step by the initial transport bound instead.
    RunResult capped = run(VectorFieldGrid(50.0 * taylor_green(small)), rcfg, small, sop);
    double cap = 0.5 * small.grid.h[0] / (50.0 * 1.0);
    CHECK(capped.dt <= cap * (1.0 + 1e-12));
    CHECK(capped.exit_status == 0);
  }
}

TEST_CASE("divergence decay identity on the flat torus") {
  ManifoldData man = make(ManifoldKind::flat_torus_t2, 48, 48);
  FlowOperator op = assemble(man);

  FlowConfig cfg;
  cfg.variant = FlowVariant::main_flow;
  cfg.integrator = Integrator::rk4;
  cfg.t_end = 1.0;
  cfg.k_max = 1;
  cfg.monitor_stride = 1;
  cfg.require_convergence = false;

  {
    RunResult res = run(torus_mode(man, 0, 0, 1, true), cfg, man, op);
    CHECK(res.exit_status == 0);
    double tp2 = 2.0 * kPi * kPi;
    for (const MonitorRow& row : res.series.rows) {
      double ref = tp2 * std::exp(-4.0 * row.t);
      CHECK(std::abs(row.v[0] - ref) < 0.01 * ref);
    }
    DivergenceDecayReport rep = divergence_decay_check(res.series, man);
    CHECK(rep.applicable);
    CHECK(rep.monotone);
    CHECK(std::abs(rep.derivative_measured - rep.derivative_expected) <
          0.01 * std::abs(rep.derivative_expected));
    CHECK(rep.derivative_expected == doctest::Approx(-8.0 * kPi * kPi).epsilon(0.02));
  }

  {
    RunResult res = run(torus_mode(man, 1, 0, 1, true), cfg, man, op);
    for (const MonitorRow& row : res.series.rows) CHECK(row.v[0] < 1e-12 * row.u[0]);
    DivergenceDecayReport rep = divergence_decay_check(res.series, man);
    CHECK(rep.applicable);
    CHECK(rep.monotone);
  }

  {
    ManifoldData sph = make(ManifoldKind::unit_sphere_s2, 16, 32);
    FlowOperator sop = assemble(sph);
    FlowConfig scfg = cfg;
    scfg.t_end = 0.01;
    RunResult res = run(sphere_rotation(sph), scfg, sph, sop);
    DivergenceDecayReport rep = divergence_decay_check(res.series, sph);
    CHECK(!rep.applicable);
    CHECK(rep.reason.find("Ricci") != std::string::npos);
  }
}

TEST_CASE("exit codes, checkpoints, and snapshots") {
  ManifoldData man = make(ManifoldKind::flat_torus_t2, 32, 32);
  FlowOperator op = assemble(man);
  VectorFieldGrid X0 = torus_mode(man, 0, 0, 1, true);

  FlowConfig cfg;
  cfg.variant = FlowVariant::main_flow;
  cfg.integrator = Integrator::rk4;
  cfg.t_end = 1.0;
  cfg.k_max = 0;

  {
    RunResult res = run(X0, cfg, man, op);  // dissipation tail still at e^{-4}
    CHECK(res.exit_status == 3);
    CHECK(!res.abort_reason.empty());
    FlowConfig loose = cfg;
    loose.require_convergence = false;
    CHECK(run(X0, loose, man, op).exit_status == 0);
  }

  {
    VectorFieldGrid bad = X0;
    bad[7] = std::numeric_limits<double>::quiet_NaN();
    std::vector<long> steps;
    RunHooks hooks;
    hooks.checkpoint = [&steps](long n, const FlowState&) { steps.push_back(n); };
    RunResult res = run(bad, cfg, man, op, hooks);
    CHECK(res.exit_status == 2);
    CHECK(res.abort_reason.find("non-finite") != std::string::npos);
    REQUIRE(!steps.empty());
    CHECK(steps.back() == 0);  // last valid state
  }

  {
    ManifoldData small = make(ManifoldKind::flat_torus_t2, 16, 16);
    FlowOperator sop = assemble(small);
    FlowConfig ccfg = cfg;
    ccfg.t_end = 0.5;
    ccfg.checkpoint_stride = 7;
    ccfg.require_convergence = false;
    std::vector<long> steps;
    RunHooks hooks;
    hooks.checkpoint = [&steps](long n, const FlowState&) { steps.push_back(n); };
    RunResult res = run(torus_mode(small, 0, 0, 1, true), ccfg, small, sop, hooks);
    REQUIRE(steps.size() >= 3);
    CHECK(steps.front() == 0);
    CHECK(steps.back() == res.steps);
    for (long n : steps) CHECK((n % 7 == 0 || n == res.steps));
  }

  {
    FlowConfig bad = cfg;
    bad.dt_safety = 0.0;
    CHECK_THROWS_AS(run(X0, bad, man, op), ValidationError);
    bad = cfg;
    bad.k_max = 3;
    CHECK_THROWS_AS(run(X0, bad, man, op), ValidationError);
  }

  {
    // t_end = 0 resolves to twelve e-foldings of the slowest nonzero mode.
    ManifoldData small = make(ManifoldKind::flat_torus_t2, 12, 12);
    FlowOperator sop = assemble(small);
    FlowConfig acfg;
    acfg.variant = FlowVariant::main_flow;
    acfg.integrator = Integrator::euler;
    acfg.t_end = 0.0;
    acfg.k_max = 0;
    RunResult res = run(torus_mode(small, 0, 0, 1, true), acfg, small, sop);
    double sh = sinc(0.5 * small.grid.h[0]);
    CHECK(res.final_state.t == doctest::Approx(12.0 / (sh * sh)).epsilon(1e-6));
    CHECK(res.exit_status == 0);
  }

  {
    const std::string path = "snapshot_roundtrip_tmp.kvf";
    std::mt19937_64 rng(42);
    std::normal_distribution<double> gauss;
    VectorFieldGrid X(man.nodes * 2);
    for (long i = 0; i < X.size(); ++i) X[i] = gauss(rng);
    write_snapshot(path, man, X);
    VectorFieldGrid back = read_snapshot(path, man);
    CHECK((back - X).cwiseAbs().maxCoeff() == 0.0);

    ManifoldData other = make(ManifoldKind::flat_torus_t2, 16, 16);
    CHECK_THROWS_AS(read_snapshot(path, other), ValidationError);

    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    std::ofstream out("snapshot_trunc_tmp.kvf");
    out << text.substr(0, text.size() / 2);
    out.close();
    CHECK_THROWS_AS(read_snapshot("snapshot_trunc_tmp.kvf", man), ValidationError);
    std::remove(path.c_str());
    std::remove("snapshot_trunc_tmp.kvf");
  }
}
