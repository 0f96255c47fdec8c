#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "kvflow/einstein.hpp"

using namespace kvflow;

namespace {

constexpr double kPi = std::numbers::pi;

ManifoldData make(ManifoldKind kind, int n0, int n1, int n2 = 1, double amp = 0.0) {
  ManifoldSpec spec;
  spec.kind = kind;
  spec.resolution = {n0, n1, n2};
  spec.perturbation_amplitude = amp;
  return build_manifold(spec);
}

ScalarField cos_theta(const ManifoldData& man) {
  ScalarField f(man.nodes);
  for (long node = 0; node < man.nodes; ++node) f[node] = std::cos(man.node_coord(0, node));
  return f;
}

}  // namespace

TEST_CASE("einstein verdicts for the built-in manifolds") {
  {
    ManifoldData man = make(ManifoldKind::unit_sphere_s2, 16, 32);
    EinsteinReport rep = verify_einstein(man);
    CHECK(rep.is_einstein);
    CHECK(rep.positive);
    CHECK(rep.R_const == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rep.deviation < 1e-12);
    CHECK(rep.m == 2);
  }
  {
    ManifoldData man = make(ManifoldKind::unit_sphere_s3, 8, 8, 16);
    EinsteinReport rep = verify_einstein(man);
    CHECK(rep.is_einstein);
    CHECK(rep.positive);
    CHECK(rep.R_const == doctest::Approx(6.0).epsilon(1e-10));
  }
  {
    ManifoldData man = make(ManifoldKind::flat_torus_t2, 16, 16);
    EinsteinReport rep = verify_einstein(man);
    CHECK(rep.is_einstein);
    CHECK(!rep.positive);
    CHECK(rep.R_const == 0.0);

    // Zero curvature disqualifies the scalar heat machinery.
    ScalarOperator op = assemble_scalar(man);
    ScalarHeatConfig cfg;
    CHECK_THROWS_AS(
        scalar_heat_run(ScalarField(ScalarField::Zero(man.nodes)), 1.0, cfg, man, op, rep),
        ValidationError);
  }
  {
    ManifoldData man = make(ManifoldKind::perturbed_torus, 16, 16, 1, 0.2);
    EinsteinReport rep = verify_einstein(man);
    CHECK(!rep.is_einstein);
    CHECK(rep.deviation > rep.tolerance);
  }
}

TEST_CASE("first eigenvalue wrapper carries the curvature comparison") {
  ManifoldData man = make(ManifoldKind::unit_sphere_s2, 16, 32);
  EigenvalueEstimate ev = lambda1(man);
  double h2 = man.grid.h[0] * man.grid.h[0];
  CHECK(std::abs(ev.lambda1 - 2.0) < 5.0 * h2);
  CHECK(ev.lichnerowicz_applies);
  CHECK(ev.lichnerowicz_bound == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(ev.lambda1 >= ev.lichnerowicz_bound - 5.0 * h2);
}

TEST_CASE("scalar heat means follow the closed form") {
  ManifoldData man = make(ManifoldKind::unit_sphere_s2, 16, 32);
  ScalarOperator op = assemble_scalar(man);
  EinsteinReport er = verify_einstein(man);
  REQUIRE(er.positive);
  ScalarHeatConfig cfg;
  cfg.t_end = 2.0;

  ScalarField zero = ScalarField::Zero(man.nodes);
  ScalarField one = ScalarField::Constant(man.nodes, 1.0);
  ScalarField ct = cos_theta(man);

  {
    // Pure constant growth at rate 2R/m = 2.
    ScalarHeatResult res = scalar_heat_run(zero, 1.0, cfg, man, op, er);
    CHECK(res.rows.front().t == 0.0);
    CHECK(res.rows.back().t == cfg.t_end);
    MeanEvolutionReport rep = mean_evolution_check(res.rows, zero, man, er);
    CHECK(rep.max_rel_err < 1e-8);
    CHECK(res.rows.back().a == doctest::Approx(4.0 * kPi * std::exp(4.0)).epsilon(1e-6));
  }

  {
    // Mean-zero source with zero start: the mean never moves.
    ScalarHeatResult res = scalar_heat_run(ct, 0.0, cfg, man, op, er);
    MeanEvolutionReport rep = mean_evolution_check(res.rows, ct, man, er);
    CHECK(rep.max_abs_err < 1e-8);
    for (const ScalarHeatRow& row : res.rows) CHECK(std::abs(row.a) < 1e-8);
  }

  {
    ScalarHeatResult res = scalar_heat_run(ct, 0.1, cfg, man, op, er);
    MeanEvolutionReport rep = mean_evolution_check(res.rows, ct, man, er);
    CHECK(rep.max_rel_err < 1e-8);
    CHECK(res.rows.back().a ==
          doctest::Approx(0.1 * 4.0 * kPi * std::exp(4.0)).epsilon(1e-6));
  }

  {
    // Constant source: a(t) = (m/2R) Vol (e^{2t} - 1) = 2 pi (e^{2t} - 1).
    ScalarHeatResult res = scalar_heat_run(one, 0.0, cfg, man, op, er);
    MeanEvolutionReport rep = mean_evolution_check(res.rows, one, man, er);
    CHECK(rep.max_rel_err < 1e-8);
    CHECK(res.rows.back().a ==
          doctest::Approx(2.0 * kPi * (std::exp(4.0) - 1.0)).epsilon(1e-6));
    CHECK(rep.c_X == doctest::Approx(-0.5).epsilon(1e-10));

    // Started at c_X, the mean stays frozen at -(m/2R) * integral of phi.
    ScalarHeatResult frozen = scalar_heat_run(one, rep.c_X, cfg, man, op, er);
    MeanEvolutionReport frep = mean_evolution_check(frozen.rows, one, man, er);
    CHECK(frep.a_infinity == doctest::Approx(-2.0 * kPi).epsilon(1e-10));
    CHECK(frep.max_const_dev < 1e-6 * std::abs(frep.a_infinity));
  }
}

TEST_CASE("norm bound and dissipation inequality along the heat flow") {
  ManifoldData man = make(ManifoldKind::unit_sphere_s2, 16, 32);
  ScalarOperator op = assemble_scalar(man);
  EinsteinReport er = verify_einstein(man);
  EigenvalueEstimate ev = lambda1(op);
  ScalarHeatConfig cfg;
  cfg.t_end = 2.0;
  ScalarField ct = cos_theta(man);

  {
    ScalarHeatResult res = scalar_heat_run(ct, 0.0, cfg, man, op, er);
    L2BoundReport rep = l2_bound_check(res.rows, ct, 0.0, ev, man, er);
    CHECK(rep.applicable);
    CHECK(rep.holds_printed);
    CHECK(rep.holds_l2);
    CHECK(rep.slack_min >= -1e-8);
    CHECK(rep.steady == doctest::Approx(0.5 * std::sqrt(4.0 * kPi / 3.0)).epsilon(0.1));
    // The source is the first eigenfunction, so the bound is nearly attained.
    CHECK(rep.max_violation_printed > -0.05 * rep.steady);
    MESSAGE("slack_min = " << rep.slack_min
                           << ", violation = " << rep.max_violation_printed);
  }

  {
    // Constant-heavy trajectory: the mean grows, the Poincare step does not
    // apply, and the printed bound indeed fails. The report flags both.
    ScalarHeatResult res = scalar_heat_run(ScalarField(ScalarField::Zero(man.nodes)), 1.0, cfg,
                                           man, op, er);
    L2BoundReport rep =
        l2_bound_check(res.rows, ScalarField(ScalarField::Zero(man.nodes)), 1.0, ev, man, er);
    CHECK(!rep.applicable);
    CHECK(!rep.holds_printed);
    CHECK(!rep.reason.empty());
  }

  {
    EigenvalueEstimate low = ev;
    low.lambda1 = 0.5;  // below R/m = 1
    ScalarHeatResult res = scalar_heat_run(ct, 0.0, cfg, man, op, er);
    CHECK_THROWS_AS(l2_bound_check(res.rows, ct, 0.0, low, man, er), ValidationError);
  }
}

TEST_CASE("vector flow of a gradient field reduces to the scalar heat flow") {
  ManifoldData man = make(ManifoldKind::unit_sphere_s2, 32, 64);
  FlowOperator op = assemble(man);
  ScalarOperator sop = assemble_scalar(man);
  EinsteinReport er = verify_einstein(man);
  FlowConfig cfg;
  cfg.integrator = Integrator::rk4;
  cfg.t_end = 1.0;

  ScalarField h0 = cos_theta(man);
  ReductionReport rep = gradient_flow_reduction_check(h0, man, op, sop, er, cfg);
  double h2 = man.grid.h[0] * man.grid.h[0];
  CHECK(rep.max_rel_diff < 2.0 * h2);
  CHECK(rep.source_residual < h2);
  CHECK(rep.sample_times.size() == 2);
  MESSAGE("reduction diff = " << rep.max_rel_diff
                              << ", source residual = " << rep.source_residual);

  ReductionReport zero =
      gradient_flow_reduction_check(ScalarField(ScalarField::Zero(man.nodes)), man, op, sop,
                                    er, cfg);
  CHECK(zero.max_rel_diff == 0.0);
}
