#include "kvflow/flow.hpp"

#include <cmath>
#include <optional>
#include <random>

#include "kvflow/spectral.hpp"

namespace kvflow {

FlowVariant variant_from_name(const std::string& name) {
  if (name == "main") return FlowVariant::main_flow;
  if (name == "normalized") return FlowVariant::normalized;
  if (name == "bochner_yano") return FlowVariant::bochner_yano;
  if (name == "navier_stokes") return FlowVariant::navier_stokes;
  throw ValidationError("unknown flow variant: " + name);
}

Integrator integrator_from_name(const std::string& name) {
  if (name == "euler") return Integrator::euler;
  if (name == "rk4") return Integrator::rk4;
  throw ValidationError("unknown integrator: " + name);
}

const char* variant_name(FlowVariant v) {
  switch (v) {
    case FlowVariant::main_flow: return "main";
    case FlowVariant::normalized: return "normalized";
    case FlowVariant::bochner_yano: return "bochner_yano";
    case FlowVariant::navier_stokes: return "navier_stokes";
  }
  return "?";
}

const char* integrator_name(Integrator i) {
  return i == Integrator::euler ? "euler" : "rk4";
}

namespace {

void validate_config(const FlowConfig& cfg) {
  if (!(cfg.dt_safety > 0.0) || cfg.dt_safety > 1.0)
    throw ValidationError("flow config: dt_safety must lie in (0, 1]");
  if (cfg.k_max < 0 || cfg.k_max > 2)
    throw ValidationError("flow config: k_max must be 0, 1, or 2");
}

// One explicit step of dX/dt = rhs(X).
template <typename Rhs>
VectorFieldGrid integrate(const VectorFieldGrid& X, double dt, Integrator integ, Rhs&& rhs) {
  if (integ == Integrator::euler) return X + dt * rhs(X);
  VectorFieldGrid k1 = rhs(X);
  VectorFieldGrid k2 = rhs(VectorFieldGrid(X + (0.5 * dt) * k1));
  VectorFieldGrid k3 = rhs(VectorFieldGrid(X + (0.5 * dt) * k2));
  VectorFieldGrid k4 = rhs(VectorFieldGrid(X + dt * k3));
  return X + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

FlowState finish_state(const FlowOperator& op, double t, VectorFieldGrid&& X) {
  FlowState s;
  s.t = t;
  s.X = std::move(X);
  s.frakL = op.frakL_h(s.X);
  s.u0 = op.inner_m(s.X, s.X);
  return s;
}

// Main-flow step. When e_inc is given, the dissipation integral of
// E = 2 frakL is accumulated with the integrator's own quadrature (stage
// energies weighted 1/6, 1/3, 1/3, 1/6 for rk4), so the discrete energy
// balance holds at the integrator's order.
FlowState linear_step(const FlowState& s, const FlowOperator& op, const FlowConfig& cfg,
                      double dt, double* e_inc) {
  if (cfg.integrator == Integrator::euler) {
    if (e_inc) *e_inc += dt * 2.0 * s.frakL;
    VectorFieldGrid next = s.X + dt * op.apply(s.X);
    return finish_state(op, s.t + dt, std::move(next));
  }
  double fr = 0.0;
  VectorFieldGrid k1 = op.apply(s.X);
  if (e_inc) *e_inc += (dt / 6.0) * 2.0 * s.frakL;
  VectorFieldGrid s2 = s.X + (0.5 * dt) * k1;
  VectorFieldGrid k2 = e_inc ? op.apply_with_energy(s2, &fr) : op.apply(s2);
  if (e_inc) *e_inc += (dt / 3.0) * 2.0 * fr;
  VectorFieldGrid s3 = s.X + (0.5 * dt) * k2;
  VectorFieldGrid k3 = e_inc ? op.apply_with_energy(s3, &fr) : op.apply(s3);
  if (e_inc) *e_inc += (dt / 3.0) * 2.0 * fr;
  VectorFieldGrid s4 = s.X + dt * k3;
  VectorFieldGrid k4 = e_inc ? op.apply_with_energy(s4, &fr) : op.apply(s4);
  if (e_inc) *e_inc += (dt / 6.0) * 2.0 * fr;
  VectorFieldGrid next = s.X + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  return finish_state(op, s.t + dt, std::move(next));
}

double min_arc_spacing(const ManifoldData& man) {
  double best = std::numeric_limits<double>::infinity();
  for (long node = 0; node < man.nodes; ++node)
    for (int d = 0; d < man.m; ++d) {
      double gdd = man.metric.g[node * sym_count(man.m) + sym_index(man.m, d, d)];
      best = std::min(best, std::sqrt(gdd) * man.grid.h[d]);
    }
  return best;
}

double max_speed(const ManifoldData& man, const VectorFieldGrid& X) {
  double best = 0.0;
  const int m = man.m;
  for (long node = 0; node < man.nodes; ++node) {
    double s2 = 0.0;
    for (int d = 0; d < m; ++d) {
      double gdd = man.metric.g[node * sym_count(m) + sym_index(man.m, d, d)];
      s2 += gdd * X[node * m + d] * X[node * m + d];
    }
    best = std::max(best, s2);
  }
  return std::sqrt(best);
}

}  // namespace

double step_dt(const FlowOperator& op, const FlowConfig& cfg) {
  double lam = 1.02 * lambda_max_estimate(op);
  double margin = cfg.integrator == Integrator::euler ? 2.0 : 2.7;
  return cfg.dt_safety * margin / lam;
}

double resolve_t_end(const FlowOperator& op, const FlowConfig& cfg) {
  SpectralDecomposition dec = eigendecompose(op, 8);
  double tol = cfg.kernel_tol > 0.0 ? cfg.kernel_tol : default_kernel_tol(op, dec);
  for (int k = 0; k < dec.eigenvalues.size(); ++k)
    if (std::abs(dec.eigenvalues[k]) > tol) return 12.0 / std::abs(dec.eigenvalues[k]);
  return 12.0;
}

FlowState step_main(const FlowState& s, const FlowOperator& op, const FlowConfig& cfg,
                    double dt) {
  return linear_step(s, op, cfg, dt, nullptr);
}

FlowState step_normalized(const FlowState& s, const FlowOperator& op, const FlowConfig& cfg,
                          double dt) {
  FlowState next = linear_step(s, op, cfg, dt, nullptr);
  double nn = std::sqrt(next.u0);
  if (!(nn > 1e-150))
    throw ValidationError("normalized flow: field norm vanished numerically");
  next.X /= nn;
  next.frakL /= nn * nn;
  next.u0 = op.inner_m(next.X, next.X);
  return next;
}

FlowState step_bochner_yano(const FlowState& s, const ManifoldData& man,
                            const ScalarOperator& sc, const FlowOperator& op,
                            const FlowConfig& cfg, double dt) {
  auto rhs = [&man](const VectorFieldGrid& Y) {
    return VectorFieldGrid(rough_laplacian(man, Y) + ricci_apply(man, Y));
  };
  VectorFieldGrid next = integrate(s.X, dt, cfg.integrator, rhs);
  leray_project(sc, next);
  return finish_state(op, s.t + dt, std::move(next));
}

VectorFieldGrid advect(const ManifoldData& man, const VectorFieldGrid& X) {
  Tensor2FieldGrid T = covariant_derivative(man, X);  // T[j,k] = nabla_j X_k
  const int m = man.m;
  const long sc = sym_count(m);
  VectorFieldGrid out(man.nodes * m);
  for (long node = 0; node < man.nodes; ++node)
    for (int i = 0; i < m; ++i) {
      double acc = 0.0;
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          acc += X[node * m + j] * man.metric.ginv[node * sc + sym_index(m, i, k)] *
                 T[node * m * m + j * m + k];
      out[node * m + i] = acc;
    }
  return out;
}

FlowState step_navier_stokes(const FlowState& s, const ManifoldData& man,
                             const ScalarOperator& sc, const FlowOperator& op,
                             const FlowConfig& cfg, double dt) {
  double cap = cfg.dt_safety * min_arc_spacing(man) / std::max(max_speed(man, s.X), 1e-300);
  if (dt > cap)
    throw ValidationError("navier-stokes step: advective CFL bound violated");
  auto rhs = [&man, &op](const VectorFieldGrid& Y) {
    return VectorFieldGrid(op.apply(Y) - advect(man, Y));
  };
  VectorFieldGrid next = integrate(s.X, dt, cfg.integrator, rhs);
  leray_project(sc, next);
  return finish_state(op, s.t + dt, std::move(next));
}

MonitorRow monitors(const ManifoldData& man, const FlowOperator& op, const FlowState& s,
                    int k_max) {
  MonitorRow row;
  row.t = s.t;
  DerivNorms dn = derivative_norms(man, s.X, k_max);
  for (int k = 0; k <= k_max; ++k) {
    row.u[k] = dn.u[k];
    row.v[k] = dn.v[k];
  }
  EnergyReport er = energy_report(man, s.X);
  row.frakL = s.frakL;
  row.E_bochner = er.E_bochner;
  row.normX2 = s.u0;
  row.E_int = 0.0;
  row.err_partial = 0.5 * s.u0;
  (void)op;
  return row;
}

double lambda_max_bochner_yano(const ManifoldData& man) {
  std::mt19937_64 rng(0x2545f4914f6cdd1dULL);
  std::normal_distribution<double> gauss;
  VectorFieldGrid v(man.nodes * man.m);
  for (long i = 0; i < v.size(); ++i) v[i] = gauss(rng);
  v /= v.norm();
  double rho = 0.0;
  for (int it = 0; it < 300; ++it) {
    VectorFieldGrid w = rough_laplacian(man, v) + ricci_apply(man, v);
    double nn = w.norm();
    if (nn == 0.0) return 0.0;
    double next = nn;  // spectral radius estimate via norm growth
    v = w / nn;
    if (it > 10 && std::abs(next - rho) <= 1e-4 * next) return next;
    rho = next;
  }
  return rho;
}

RunResult run(const VectorFieldGrid& X0, const FlowConfig& cfg, const ManifoldData& man,
              const FlowOperator& op, const RunHooks& hooks) {
  validate_config(cfg);
  if (X0.size() != man.nodes * man.m)
    throw ValidationError("run: initial field size does not match the manifold");

  const double t_end = cfg.t_end > 0.0 ? cfg.t_end : resolve_t_end(op, cfg);
  const bool needs_scalar = cfg.variant == FlowVariant::bochner_yano ||
                            cfg.variant == FlowVariant::navier_stokes;
  std::optional<ScalarOperator> sc;
  if (needs_scalar) sc.emplace(assemble_scalar(man));

  double dt;
  if (cfg.variant == FlowVariant::bochner_yano) {
    double lam = 1.05 * lambda_max_bochner_yano(man);
    dt = cfg.dt_safety * (cfg.integrator == Integrator::euler ? 2.0 : 2.7) / lam;
  } else {
    dt = step_dt(op, cfg);
  }

  FlowState state;
  state.t = 0.0;
  state.X = X0;
  if (needs_scalar) leray_project(*sc, state.X);
  if (cfg.variant == FlowVariant::normalized) {
    double nn = std::sqrt(op.inner_m(state.X, state.X));
    if (!(nn > 1e-150)) throw ValidationError("run: normalized variant needs a nonzero field");
    state.X /= nn;
  }
  state.frakL = op.frakL_h(state.X);
  state.u0 = op.inner_m(state.X, state.X);

  if (cfg.variant == FlowVariant::navier_stokes) {
    double cap = cfg.dt_safety * min_arc_spacing(man) /
                 std::max(max_speed(man, state.X), 1e-300);
    dt = std::min(dt, cap);
  }

  long steps = std::max<long>(1, static_cast<long>(std::ceil(t_end / dt - 1e-12)));
  const double dt_last = t_end - dt * static_cast<double>(steps - 1);
  const long stride = cfg.monitor_stride > 0 ? cfg.monitor_stride : std::max<long>(1, steps / 500);

  RunResult res;
  res.dt = dt;
  res.steps = steps;
  res.series.k_max = cfg.k_max;
  res.min_u0 = state.u0;

  const double u0_initial = state.u0;
  double e_trap_prev = 2.0 * state.frakL;
  double t_prev = 0.0;
  double e_int = 0.0;

  MonitorRow row0 = monitors(man, op, state, cfg.k_max);
  row0.E_int = 0.0;
  row0.err_partial = 0.5 * u0_initial;
  res.series.rows.push_back(row0);
  if (hooks.checkpoint) hooks.checkpoint(0, state);

  const double frakL0 = state.frakL;
  bool aborted = false;
  for (long n = 1; n <= steps; ++n) {
    const double d = n == steps ? dt_last : dt;
    FlowState next;
    try {
      switch (cfg.variant) {
        case FlowVariant::main_flow: {
          double e_inc = 0.0;
          next = linear_step(state, op, cfg, d, &e_inc);
          res.e_int_hi += e_inc;
          break;
        }
        case FlowVariant::normalized:
          next = step_normalized(state, op, cfg, d);
          break;
        case FlowVariant::bochner_yano:
          next = step_bochner_yano(state, man, *sc, op, cfg, d);
          break;
        case FlowVariant::navier_stokes:
          next = step_navier_stokes(state, man, *sc, op, cfg, d);
          break;
      }
    } catch (const std::exception& e) {
      res.exit_status = 2;
      res.abort_reason = e.what();
      aborted = true;
      if (hooks.checkpoint) hooks.checkpoint(n - 1, state);
      break;
    }
    if (!next.X.allFinite()) {
      res.exit_status = 2;
      res.abort_reason = "non-finite field components at step " + std::to_string(n);
      aborted = true;
      if (hooks.checkpoint) hooks.checkpoint(n - 1, state);
      break;
    }
    next.t = n == steps ? t_end : static_cast<double>(n) * dt;

    // For the normalized variant this tracks the Rayleigh quotient, which is
    // non-increasing whenever the stability polynomial is monotone over the
    // spectrum (euler up to dt_safety 0.5, rk4 up to about 0.58).
    if ((cfg.variant == FlowVariant::main_flow || cfg.variant == FlowVariant::normalized) &&
        state.frakL > 0.0) {
      double uptick = (next.frakL - state.frakL) / state.frakL;
      res.frakL_worst_uptick = std::max(res.frakL_worst_uptick, uptick);
      if (uptick > 1e-12) res.frakL_monotone = false;
    }

    state = std::move(next);
    res.min_u0 = std::min(res.min_u0, state.u0);

    if (n % stride == 0 || n == steps) {
      MonitorRow row = monitors(man, op, state, cfg.k_max);
      double e_cur = 2.0 * state.frakL;
      e_int += 0.5 * (state.t - t_prev) * (e_trap_prev + e_cur);
      t_prev = state.t;
      e_trap_prev = e_cur;
      row.E_int = e_int;
      row.err_partial = 0.5 * u0_initial - e_int;
      res.series.rows.push_back(row);
    }
    if (hooks.checkpoint && ((cfg.checkpoint_stride > 0 && n % cfg.checkpoint_stride == 0) ||
                             n == steps))
      hooks.checkpoint(n, state);
  }

  res.final_state = state;
  res.err_integral = 0.5 * u0_initial - res.e_int_hi;
  res.err_final = 0.5 * state.u0;
  if (!aborted && cfg.require_convergence && cfg.variant != FlowVariant::normalized) {
    double e0 = 2.0 * frakL0;
    double e_tail = 2.0 * state.frakL;
    if (e0 > 1e-14 * std::max(u0_initial, 1.0) && e_tail > 1e-6 * e0) {
      res.exit_status = 3;
      res.abort_reason = "dissipation tail above convergence threshold at t_end";
    }
  }
  return res;
}

double err_estimate(const MonitorSeries& series) {
  if (series.rows.size() < 2)
    throw ValidationError("err_estimate: series has fewer than two rows");
  const MonitorRow& first = series.rows.front();
  const MonitorRow& last = series.rows.back();
  double e0 = 2.0 * first.frakL;
  double e_tail = 2.0 * last.frakL;
  if (e_tail > 1e-6 * e0 && e_tail > 1e-14 * std::max(first.normX2, 1.0))
    throw ValidationError("err_estimate: run not converged (tail energy above threshold)");
  return 0.5 * first.normX2 - last.E_int;
}

DivergenceDecayReport divergence_decay_check(const MonitorSeries& series,
                                             const ManifoldData& man) {
  DivergenceDecayReport rep;
  double ric_max = 0.0;
  for (double r : man.curv.ric) ric_max = std::max(ric_max, std::abs(r));
  if (ric_max > 1e-12) {
    rep.applicable = false;
    rep.reason = "check skipped: manifold has nonzero Ricci curvature";
    return rep;
  }
  if (series.k_max < 1 || series.rows.size() < 2) {
    rep.applicable = false;
    rep.reason = "check skipped: needs v1 monitors and at least two rows";
    return rep;
  }
  rep.applicable = true;
  rep.monotone = true;
  double v0max = 0.0;
  for (const MonitorRow& row : series.rows) v0max = std::max(v0max, row.v[0]);
  for (size_t k = 1; k < series.rows.size(); ++k)
    if (series.rows[k].v[0] > series.rows[k - 1].v[0] * (1.0 + 1e-10) + 1e-14 * v0max)
      rep.monotone = false;
  const MonitorRow& r0 = series.rows[0];
  const MonitorRow& r1 = series.rows[1];
  rep.derivative_measured = (r1.v[0] - r0.v[0]) / (r1.t - r0.t);
  rep.derivative_expected = -4.0 * r0.v[1];
  return rep;
}

}  // namespace kvflow
