#include "kvflow/einstein.hpp"

#include <algorithm>
#include <cmath>

namespace kvflow {

namespace {

void require_positive_einstein(const EinsteinReport& er, const char* who) {
  if (!er.is_einstein || !(er.R_const > 0.0))
    throw ValidationError(std::string(who) +
                          ": needs an Einstein manifold with positive scalar curvature");
}

double weighted_integral(const ManifoldData& man, const ScalarField& f) {
  double acc = 0.0;
  for (long node = 0; node < man.nodes; ++node) acc += man.metric.weight[node] * f[node];
  return acc;
}

ScalarHeatRow sample_row(const ManifoldData& man, const ScalarOperator& op, double t,
                         const ScalarField& f, const ScalarField& phi) {
  ScalarHeatRow row;
  row.t = t;
  row.a = weighted_integral(man, f);
  row.b = weighted_integral(man, ScalarField(f.cwiseProduct(f)));
  row.dirichlet = op.dirichlet(f);
  row.f_phi = weighted_integral(man, ScalarField(f.cwiseProduct(phi)));
  return row;
}

}  // namespace

EinsteinReport verify_einstein(const ManifoldData& man) {
  EinsteinReport rep;
  rep.m = man.m;
  const long sc = sym_count(man.m);

  double vol = 0.0, mean = 0.0;
  for (long node = 0; node < man.nodes; ++node) {
    vol += man.metric.weight[node];
    mean += man.metric.weight[node] * man.curv.scalar[node];
  }
  mean /= vol;
  rep.R_const = mean;

  double gscale = 0.0;
  for (double g : man.metric.g) gscale = std::max(gscale, std::abs(g));
  double dev = 0.0, spread = 0.0;
  for (long node = 0; node < man.nodes; ++node) {
    spread = std::max(spread, std::abs(man.curv.scalar[node] - mean));
    for (long p = 0; p < sc; ++p)
      dev = std::max(dev, std::abs(man.curv.ric[node * sc + p] -
                                   (mean / man.m) * man.metric.g[node * sc + p]));
  }
  rep.deviation = dev;
  rep.R_spread = spread;

  double h2 = 0.0;
  for (int d = 0; d < man.m; ++d) h2 = std::max(h2, man.grid.h[d] * man.grid.h[d]);
  bool fd_curvature = man.spec.kind == ManifoldKind::perturbed_torus;
  rep.tolerance = (fd_curvature ? 0.5 * h2 : 1e-8) * std::max(gscale, 1.0);
  rep.is_einstein = dev <= rep.tolerance;
  rep.positive = rep.is_einstein && rep.R_const > rep.tolerance;
  return rep;
}

EigenvalueEstimate lambda1(const ManifoldData& man) {
  ScalarOperator op = assemble_scalar(man);
  return lambda1(op);
}

ScalarHeatResult scalar_heat_run(const ScalarField& phi, const ScalarField& f0,
                                 const ScalarHeatConfig& cfg, const ManifoldData& man,
                                 const ScalarOperator& op, const EinsteinReport& er) {
  require_positive_einstein(er, "scalar_heat_run");
  if (phi.size() != man.nodes || f0.size() != man.nodes)
    throw ValidationError("scalar_heat_run: field size does not match the manifold");
  if (!(cfg.dt_safety > 0.0) || cfg.dt_safety > 1.0)
    throw ValidationError("scalar_heat_run: dt_safety must lie in (0, 1]");
  if (!(cfg.t_end > 0.0)) throw ValidationError("scalar_heat_run: t_end must be positive");

  const double growth = 2.0 * er.R_const / er.m;
  const double lam = 1.02 * (2.0 * lambda_max_scalar(op) + growth);
  const double margin = cfg.integrator == Integrator::euler ? 2.0 : 2.7;
  const double dt = cfg.dt_safety * margin / lam;

  auto rhs = [&](const ScalarField& f) {
    return ScalarField(2.0 * op.laplacian(f) + growth * f + phi);
  };

  long steps = std::max<long>(1, static_cast<long>(std::ceil(cfg.t_end / dt - 1e-12)));
  const double dt_last = cfg.t_end - dt * static_cast<double>(steps - 1);
  const long stride =
      cfg.monitor_stride > 0 ? cfg.monitor_stride : std::max<long>(1, steps / 500);

  ScalarHeatResult res;
  res.dt = dt;
  res.steps = steps;
  ScalarField f = f0;
  double t = 0.0;
  res.rows.push_back(sample_row(man, op, t, f, phi));

  for (long n = 1; n <= steps; ++n) {
    const double d = n == steps ? dt_last : dt;
    if (cfg.integrator == Integrator::euler) {
      f += d * rhs(f);
    } else {
      ScalarField k1 = rhs(f);
      ScalarField k2 = rhs(ScalarField(f + (0.5 * d) * k1));
      ScalarField k3 = rhs(ScalarField(f + (0.5 * d) * k2));
      ScalarField k4 = rhs(ScalarField(f + d * k3));
      f += (d / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!f.allFinite())
      throw ValidationError("scalar_heat_run: non-finite values at step " + std::to_string(n));
    t = n == steps ? cfg.t_end : static_cast<double>(n) * dt;
    if (n % stride == 0 || n == steps) res.rows.push_back(sample_row(man, op, t, f, phi));
  }
  res.f_final = std::move(f);
  res.t_final = t;
  return res;
}

ScalarHeatResult scalar_heat_run(const ScalarField& phi, double c, const ScalarHeatConfig& cfg,
                                 const ManifoldData& man, const ScalarOperator& op,
                                 const EinsteinReport& er) {
  return scalar_heat_run(phi, ScalarField(ScalarField::Constant(man.nodes, c)), cfg, man, op,
                         er);
}

double mean_closed_form(double a0, double phi_integral, double R, int m, double t) {
  const double k = 2.0 * R / m;
  const double steady = phi_integral / k;  // a(t) relaxes around -steady
  return (a0 + steady) * std::exp(k * t) - steady;
}

MeanEvolutionReport mean_evolution_check(const std::vector<ScalarHeatRow>& rows,
                                         const ScalarField& phi, const ManifoldData& man,
                                         const EinsteinReport& er) {
  require_positive_einstein(er, "mean_evolution_check");
  if (rows.empty()) throw ValidationError("mean_evolution_check: empty series");

  MeanEvolutionReport rep;
  rep.phi_integral = weighted_integral(man, phi);
  rep.a_infinity = -er.m * rep.phi_integral / (2.0 * er.R_const);
  rep.c_X = rep.a_infinity / man.volume;

  double b_max = 0.0;
  for (const ScalarHeatRow& row : rows) b_max = std::max(b_max, row.b);
  const double a0 = rows.front().a;
  const double floor =
      std::max({std::abs(a0), std::abs(rep.a_infinity), std::sqrt(man.volume * b_max), 1e-300});
  for (const ScalarHeatRow& row : rows) {
    double closed = mean_closed_form(a0, rep.phi_integral, er.R_const, er.m, row.t);
    double err = std::abs(row.a - closed);
    rep.max_abs_err = std::max(rep.max_abs_err, err);
    rep.max_rel_err = std::max(rep.max_rel_err, err / std::max(std::abs(closed), floor));
    rep.max_const_dev = std::max(rep.max_const_dev, std::abs(row.a - rep.a_infinity));
  }
  return rep;
}

L2BoundReport l2_bound_check(const std::vector<ScalarHeatRow>& rows, const ScalarField& phi,
                             double c, const EigenvalueEstimate& ev, const ManifoldData& man,
                             const EinsteinReport& er) {
  require_positive_einstein(er, "l2_bound_check");
  if (rows.empty()) throw ValidationError("l2_bound_check: empty series");

  L2BoundReport rep;
  rep.gap = ev.lambda1 - er.R_const / er.m;
  if (!(rep.gap > 0.0))
    throw ValidationError("l2_bound_check: needs lambda1 > R/m");

  const double nphi = std::sqrt(scalar_l2(man, phi));
  rep.steady = nphi / (2.0 * rep.gap);
  const double coef_printed = c * man.volume;
  const double coef_l2 = std::abs(c) * std::sqrt(man.volume);
  rep.active = std::abs(coef_l2) <= std::abs(coef_printed) ? "l2_norm" : "printed";

  double b_max = 0.0, a_max = 0.0;
  for (const ScalarHeatRow& row : rows) {
    b_max = std::max(b_max, row.b);
    a_max = std::max(a_max, std::abs(row.a));
  }
  const double mean_scale = std::sqrt(man.volume * (b_max + nphi * nphi)) + std::abs(c) * man.volume;
  const bool mean_zero = a_max <= 1e-6 * std::max(mean_scale, 1e-300);
  rep.applicable = mean_zero;
  if (!mean_zero)
    rep.reason = "trajectory has a nonzero mean; the Poincare step needs f orthogonal to "
                 "constants";

  rep.slack_min = std::numeric_limits<double>::infinity();
  double viol_printed = -std::numeric_limits<double>::infinity();
  double viol_l2 = viol_printed;
  for (const ScalarHeatRow& row : rows) {
    const double nf = std::sqrt(std::max(row.b, 0.0));
    const double decay = std::exp(-2.0 * rep.gap * row.t);
    viol_printed = std::max(viol_printed,
                            nf - (rep.steady + (coef_printed - rep.steady) * decay));
    viol_l2 = std::max(viol_l2, nf - (rep.steady + (coef_l2 - rep.steady) * decay));
    // slack = 4 (dirichlet - lambda1 b) + 2 (sqrt(b) ||phi|| - <f, phi>);
    // both terms nonnegative for mean-zero f by the discrete variational
    // principle and Cauchy-Schwarz in the same inner product.
    double slack = 4.0 * (row.dirichlet - ev.lambda1 * row.b) + 2.0 * (nf * nphi - row.f_phi);
    rep.slack_min = std::min(rep.slack_min, slack);
  }
  rep.max_violation_printed = viol_printed;
  rep.max_violation_l2 = viol_l2;
  const double margin =
      1e-8 * std::max({rep.steady, std::abs(coef_printed), std::abs(coef_l2), 1.0});
  rep.holds_printed = viol_printed <= margin;
  rep.holds_l2 = viol_l2 <= margin;
  return rep;
}

ReductionReport gradient_flow_reduction_check(const ScalarField& h0, const ManifoldData& man,
                                              const FlowOperator& op, const ScalarOperator& sop,
                                              const EinsteinReport& er, const FlowConfig& cfg) {
  require_positive_einstein(er, "gradient_flow_reduction_check");
  if (!(cfg.t_end > 0.0))
    throw ValidationError("gradient_flow_reduction_check: t_end must be positive");

  ReductionReport rep;
  VectorFieldGrid X0 = gradient(man, h0);
  const double x0n = op.norm_m(X0);
  if (x0n == 0.0) return rep;  // zero potential: both sides identically zero

  DaggerSource ds = dagger_source(man, h0, VectorFieldGrid::Zero(man.nodes * man.m));
  rep.source_residual = ds.residual;

  const ScalarField no_source = ScalarField::Zero(man.nodes);
  ScalarHeatConfig scfg;
  scfg.integrator = cfg.integrator;
  scfg.dt_safety = cfg.dt_safety;

  for (double frac : {0.5, 1.0}) {
    const double t = cfg.t_end * frac;
    FlowConfig vcfg = cfg;
    vcfg.variant = FlowVariant::main_flow;
    vcfg.t_end = t;
    vcfg.k_max = 0;
    vcfg.require_convergence = false;
    RunResult vres = run(X0, vcfg, man, op);
    if (vres.exit_status != 0)
      throw ValidationError("gradient_flow_reduction_check: vector flow aborted");
    scfg.t_end = t;
    ScalarHeatResult sres = scalar_heat_run(no_source, h0, scfg, man, sop, er);
    VectorFieldGrid Gf = gradient(man, sres.f_final);
    rep.sample_times.push_back(t);
    rep.max_rel_diff =
        std::max(rep.max_rel_diff, op.norm_m(VectorFieldGrid(vres.final_state.X - Gf)) / x0n);
  }
  return rep;
}

}  // namespace kvflow
