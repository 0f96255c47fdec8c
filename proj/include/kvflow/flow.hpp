#pragma once

#include <functional>
#include <string>
#include <vector>

#include "kvflow/fields.hpp"
#include "kvflow/flow_operator.hpp"
#include "kvflow/manifold.hpp"
#include "kvflow/scalar_operator.hpp"

namespace kvflow {

enum class FlowVariant { main_flow, normalized, bochner_yano, navier_stokes };
enum class Integrator { euler, rk4 };

FlowVariant variant_from_name(const std::string& name);
Integrator integrator_from_name(const std::string& name);
const char* variant_name(FlowVariant v);
const char* integrator_name(Integrator i);

struct FlowConfig {
  FlowVariant variant = FlowVariant::main_flow;
  Integrator integrator = Integrator::rk4;
  double dt_safety = 0.5;   // in (0, 1]
  double t_end = 0.0;       // <= 0 requests the default 12/|spectral gap|
  long monitor_stride = 0;  // 0 picks a stride giving about 500 rows
  long checkpoint_stride = 0;  // 0 keeps only the first and last states
  int k_max = 2;
  double kernel_tol = 0.0;  // 0 uses the operator default
  bool require_convergence = true;
};

struct FlowState {
  double t = 0.0;
  VectorFieldGrid X;
  double frakL = 0.0;  // variational deformation energy of X
  double u0 = 0.0;     // squared M-norm of X
};

// One logged row. E_int is the running time integral of the dissipation
// E = 2 frakL, trapezoidal over the logged times; err_partial is
// (1/2) normX2(0) - E_int, which decreases toward Err as t grows.
struct MonitorRow {
  double t = 0.0;
  double u[3] = {0, 0, 0};
  double v[3] = {0, 0, 0};
  double frakL = 0.0;
  double E_bochner = 0.0;
  double normX2 = 0.0;
  double E_int = 0.0;
  double err_partial = 0.0;
};

struct MonitorSeries {
  int k_max = 2;
  std::vector<MonitorRow> rows;
};

struct RunHooks {
  // Called with (step index, state) for every retained checkpoint.
  std::function<void(long, const FlowState&)> checkpoint;
};

struct RunResult {
  FlowState final_state;
  MonitorSeries series;
  double dt = 0.0;
  long steps = 0;
  // High-order accumulation of the dissipation integral from integrator
  // stage energies; the energy balance
  //   (1/2)|X_T|^2 - (1/2)|X_0|^2 + e_int_hi = O(dt^p)
  // holds at the integrator's order p for the main variant.
  double e_int_hi = 0.0;
  double err_integral = 0.0;  // (1/2)|X0|^2 - e_int_hi
  double err_final = 0.0;     // (1/2)|X_final|^2
  bool frakL_monotone = true;
  double frakL_worst_uptick = 0.0;  // most positive relative per-step increase
  double min_u0 = 0.0;              // smallest |X|^2_M over all steps
  int exit_status = 0;              // 0 ok, 2 instability, 3 tail not converged
  std::string abort_reason;
};

// Stability-law time step for the linear variants:
// dt = dt_safety * 2/lambda_max (euler), dt_safety * 2.7/lambda_max (rk4).
double step_dt(const FlowOperator& op, const FlowConfig& cfg);

// Default horizon 12/|first nonzero eigenvalue|.
double resolve_t_end(const FlowOperator& op, const FlowConfig& cfg);

FlowState step_main(const FlowState& s, const FlowOperator& op, const FlowConfig& cfg,
                    double dt);
FlowState step_normalized(const FlowState& s, const FlowOperator& op, const FlowConfig& cfg,
                          double dt);
FlowState step_bochner_yano(const FlowState& s, const ManifoldData& man,
                            const ScalarOperator& sc, const FlowOperator& op,
                            const FlowConfig& cfg, double dt);
FlowState step_navier_stokes(const FlowState& s, const ManifoldData& man,
                             const ScalarOperator& sc, const FlowOperator& op,
                             const FlowConfig& cfg, double dt);

MonitorRow monitors(const ManifoldData& man, const FlowOperator& op, const FlowState& s,
                    int k_max);

RunResult run(const VectorFieldGrid& X0, const FlowConfig& cfg, const ManifoldData& man,
              const FlowOperator& op, const RunHooks& hooks = {});

// Err from the logged series: (1/2) normX2(0) - E_int(t_end). Requires the
// dissipation tail E(t_end) <= 1e-6 E(0); throws otherwise.
double err_estimate(const MonitorSeries& series);

struct DivergenceDecayReport {
  bool applicable = false;
  std::string reason;
  bool monotone = false;
  double derivative_measured = 0.0;  // d/dt of v0 at t = 0
  double derivative_expected = 0.0;  // -4 v1(0)
};

// Checks the divergence decay identity d/dt v0 = -4 v1 on Ricci-flat
// manifolds; reports the gating reason elsewhere.
DivergenceDecayReport divergence_decay_check(const MonitorSeries& series,
                                             const ManifoldData& man);

// Largest-magnitude eigenvalue bound for the finite-difference operator
// Delta_LB + Ric used by the Bochner-Yano variant.
double lambda_max_bochner_yano(const ManifoldData& man);

// Advection (nabla_X X)^i = X^j nabla_j X^i.
VectorFieldGrid advect(const ManifoldData& man, const VectorFieldGrid& X);

}  // namespace kvflow
