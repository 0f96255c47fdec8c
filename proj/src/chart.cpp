#include "kvflow/chart.hpp"

#include <cmath>
#include <cstring>

namespace kvflow {

Chart make_chart(ManifoldKind kind, double amp) {
  Chart c;
  c.kind = kind;
  c.amp = amp;
  c.m = (kind == ManifoldKind::unit_sphere_s3) ? 3 : 2;
  return c;
}

void Chart::metric_diag(const double* u, double* g) const {
  switch (kind) {
    case ManifoldKind::unit_sphere_s2: {
      double s = std::sin(u[0]);
      g[0] = 1.0;
      g[1] = s * s;
      return;
    }
    case ManifoldKind::flat_torus_t2:
      g[0] = g[1] = 1.0;
      return;
    case ManifoldKind::perturbed_torus: {
      double lam = 1.0 + amp * std::sin(u[0]) * std::sin(u[1]);
      g[0] = g[1] = lam;
      return;
    }
    case ManifoldKind::unit_sphere_s3: {
      double s1 = std::sin(u[0]), s2 = std::sin(u[1]);
      g[0] = 1.0;
      g[1] = s1 * s1;
      g[2] = s1 * s1 * s2 * s2;
      return;
    }
  }
}

void Chart::metric_diag_deriv(const double* u, double dg[kMaxDim][kMaxDim]) const {
  for (int k = 0; k < kMaxDim; ++k)
    for (int d = 0; d < kMaxDim; ++d) dg[k][d] = 0.0;
  switch (kind) {
    case ManifoldKind::unit_sphere_s2:
      dg[0][1] = std::sin(2.0 * u[0]);
      return;
    case ManifoldKind::flat_torus_t2:
      return;
    case ManifoldKind::perturbed_torus: {
      double cx = amp * std::cos(u[0]) * std::sin(u[1]);
      double cy = amp * std::sin(u[0]) * std::cos(u[1]);
      dg[0][0] = dg[0][1] = cx;
      dg[1][0] = dg[1][1] = cy;
      return;
    }
    case ManifoldKind::unit_sphere_s3: {
      double s1 = std::sin(u[0]), s2 = std::sin(u[1]);
      dg[0][1] = std::sin(2.0 * u[0]);
      dg[0][2] = std::sin(2.0 * u[0]) * s2 * s2;
      dg[1][2] = s1 * s1 * std::sin(2.0 * u[1]);
      return;
    }
  }
}

double Chart::sqrt_det(const double* u) const {
  switch (kind) {
    case ManifoldKind::unit_sphere_s2: return std::sin(u[0]);
    case ManifoldKind::flat_torus_t2: return 1.0;
    case ManifoldKind::perturbed_torus: return 1.0 + amp * std::sin(u[0]) * std::sin(u[1]);
    case ManifoldKind::unit_sphere_s3: {
      double s1 = std::sin(u[0]);
      return s1 * s1 * std::sin(u[1]);
    }
  }
  return 0.0;
}

void Chart::christoffel(const double* u, double G[kMaxDim][kMaxDim][kMaxDim]) const {
  std::memset(G, 0, sizeof(double) * kMaxDim * kMaxDim * kMaxDim);
  switch (kind) {
    case ManifoldKind::unit_sphere_s2: {
      double s = std::sin(u[0]), c = std::cos(u[0]);
      G[0][1][1] = -s * c;
      G[1][0][1] = G[1][1][0] = c / s;
      return;
    }
    case ManifoldKind::flat_torus_t2:
      return;
    case ManifoldKind::perturbed_torus: {
      // Conformal metric lambda * I with lambda = 1 + a sin(x) sin(y).
      double lam = 1.0 + amp * std::sin(u[0]) * std::sin(u[1]);
      double ux = amp * std::cos(u[0]) * std::sin(u[1]) / (2.0 * lam);
      double uy = amp * std::sin(u[0]) * std::cos(u[1]) / (2.0 * lam);
      G[0][0][0] = ux;
      G[0][0][1] = G[0][1][0] = uy;
      G[0][1][1] = -ux;
      G[1][0][0] = -uy;
      G[1][0][1] = G[1][1][0] = ux;
      G[1][1][1] = uy;
      return;
    }
    case ManifoldKind::unit_sphere_s3: {
      double s1 = std::sin(u[0]), c1 = std::cos(u[0]);
      double s2 = std::sin(u[1]), c2 = std::cos(u[1]);
      G[0][1][1] = -s1 * c1;
      G[0][2][2] = -s1 * c1 * s2 * s2;
      G[1][0][1] = G[1][1][0] = c1 / s1;
      G[1][2][2] = -s2 * c2;
      G[2][0][2] = G[2][2][0] = c1 / s1;
      G[2][1][2] = G[2][2][1] = c2 / s2;
      return;
    }
  }
}

void Chart::ricci_lower(const double* u, double* ric) const {
  int sc = sym_count(m);
  for (int p = 0; p < sc; ++p) ric[p] = 0.0;
  double g[kMaxDim];
  switch (kind) {
    case ManifoldKind::unit_sphere_s2:
      metric_diag(u, g);
      ric[sym_index(2, 0, 0)] = g[0];
      ric[sym_index(2, 1, 1)] = g[1];
      return;
    case ManifoldKind::flat_torus_t2:
      return;
    case ManifoldKind::perturbed_torus: {
      double K = 0.5 * scalar_curvature(u);
      metric_diag(u, g);
      ric[sym_index(2, 0, 0)] = K * g[0];
      ric[sym_index(2, 1, 1)] = K * g[1];
      return;
    }
    case ManifoldKind::unit_sphere_s3:
      metric_diag(u, g);
      ric[sym_index(3, 0, 0)] = 2.0 * g[0];
      ric[sym_index(3, 1, 1)] = 2.0 * g[1];
      ric[sym_index(3, 2, 2)] = 2.0 * g[2];
      return;
  }
}

double Chart::scalar_curvature(const double* u) const {
  switch (kind) {
    case ManifoldKind::unit_sphere_s2: return 2.0;
    case ManifoldKind::flat_torus_t2: return 0.0;
    case ManifoldKind::perturbed_torus: {
      // Gauss curvature of the conformal metric, R = 2K.
      double sx = std::sin(u[0]), sy = std::sin(u[1]);
      double cx = std::cos(u[0]), cy = std::cos(u[1]);
      double lam = 1.0 + amp * sx * sy;
      double K = (amp * sx * sy / lam +
                  amp * amp * (cx * cx * sy * sy + sx * sx * cy * cy) / (2.0 * lam * lam)) /
                 lam;
      return 2.0 * K;
    }
    case ManifoldKind::unit_sphere_s3: return 6.0;
  }
  return 0.0;
}

double Chart::quad_weight(const double* u, const double* h) const {
  switch (kind) {
    case ManifoldKind::unit_sphere_s2:
      // int_cell sin(theta) dtheta = 2 sin(h/2) sin(theta).
      return 2.0 * std::sin(0.5 * h[0]) * std::sin(u[0]) * h[1];
    case ManifoldKind::unit_sphere_s3:
      // int_cell sin^2(t1) dt1 = (h - sin(h) cos(2 t1)) / 2.
      return 0.5 * (h[0] - std::sin(h[0]) * std::cos(2.0 * u[0])) * 2.0 *
             std::sin(0.5 * h[1]) * std::sin(u[1]) * h[2];
    case ManifoldKind::flat_torus_t2:
    case ManifoldKind::perturbed_torus:
      return sqrt_det(u) * h[0] * h[1];
  }
  return 0.0;
}

}  // namespace kvflow
