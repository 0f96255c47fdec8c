#pragma once

#include "kvflow/core.hpp"

namespace kvflow {

// Closed-form chart geometry for the built-in model manifolds. All built-in
// metrics are diagonal in their charts; the evaluators below are valid at
// arbitrary chart coordinates (not just grid nodes), which the variational
// operator uses at staggered locations.
struct Chart {
  ManifoldKind kind = ManifoldKind::flat_torus_t2;
  double amp = 0.0;  // perturbed_torus amplitude
  int m = 2;

  // Diagonal metric entries g_dd at coordinate u.
  void metric_diag(const double* u, double* g) const;
  // dg[k][d] = d(g_dd)/d(u^k).
  void metric_diag_deriv(const double* u, double dg[kMaxDim][kMaxDim]) const;
  double sqrt_det(const double* u) const;
  // G[k][i][j] = Gamma^k_ij, exact closed forms.
  void christoffel(const double* u, double G[kMaxDim][kMaxDim][kMaxDim]) const;
  // Ricci tensor with lower indices, packed symmetric.
  void ricci_lower(const double* u, double* ric) const;
  double scalar_curvature(const double* u) const;

  // Mass of the grid cell centred at u with spacings h. Pole-direction
  // factors integrate the volume density exactly across the cell, so closed
  // sphere integrals of constants come out exact; torus charts use the plain
  // midpoint product sqrt_det * prod(h).
  double quad_weight(const double* u, const double* h) const;
};

Chart make_chart(ManifoldKind kind, double amp);

}  // namespace kvflow
