#include "kvflow/manifold.hpp"

#include <cmath>
#include <numbers>

namespace kvflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

ChartGrid make_grid(const ManifoldSpec& spec) {
  ChartGrid gr;
  switch (spec.kind) {
    case ManifoldKind::unit_sphere_s2: {
      gr.dim = 2;
      gr.n = {spec.resolution[0], spec.resolution[1], 1};
      gr.h = {std::numbers::pi / gr.n[0], kTwoPi / gr.n[1], 0.0};
      gr.origin = {0.5 * gr.h[0], 0.0, 0.0};
      gr.boundary[0].edge = EdgeRule::pole_offset;
      gr.boundary[0].action[1] = CrossAction::half_shift;
      gr.boundary[0].comp_sign = {-1.0, 1.0, 1.0};
      gr.boundary[1].edge = EdgeRule::periodic;
      break;
    }
    case ManifoldKind::flat_torus_t2:
    case ManifoldKind::perturbed_torus: {
      gr.dim = 2;
      gr.n = {spec.resolution[0], spec.resolution[1], 1};
      gr.h = {kTwoPi / gr.n[0], kTwoPi / gr.n[1], 0.0};
      gr.origin = {0.0, 0.0, 0.0};
      gr.boundary[0].edge = EdgeRule::periodic;
      gr.boundary[1].edge = EdgeRule::periodic;
      break;
    }
    case ManifoldKind::unit_sphere_s3: {
      gr.dim = 3;
      gr.n = {spec.resolution[0], spec.resolution[1], spec.resolution[2]};
      gr.h = {std::numbers::pi / gr.n[0], std::numbers::pi / gr.n[1], kTwoPi / gr.n[2]};
      gr.origin = {0.5 * gr.h[0], 0.5 * gr.h[1], 0.0};
      gr.boundary[0].edge = EdgeRule::pole_offset;
      gr.boundary[0].action[1] = CrossAction::mirror;
      gr.boundary[0].action[2] = CrossAction::half_shift;
      gr.boundary[0].comp_sign = {-1.0, -1.0, 1.0};
      gr.boundary[1].edge = EdgeRule::pole_offset;
      gr.boundary[1].action[2] = CrossAction::half_shift;
      gr.boundary[1].comp_sign = {1.0, -1.0, 1.0};
      gr.boundary[2].edge = EdgeRule::periodic;
      break;
    }
  }
  return gr;
}

void validate(const ManifoldSpec& spec) {
  int dims = (spec.kind == ManifoldKind::unit_sphere_s3) ? 3 : 2;
  for (int d = 0; d < dims; ++d) {
    if (spec.resolution[d] < 8)
      throw ValidationError("resolution must be >= 8 in every direction");
  }
  if (spec.kind == ManifoldKind::unit_sphere_s2 && spec.resolution[1] % 2 != 0)
    throw ValidationError("unit_sphere_s2 needs an even longitude resolution");
  if (spec.kind == ManifoldKind::unit_sphere_s3 &&
      (spec.resolution[2] % 2 != 0 || spec.resolution[1] % 2 != 0))
    throw ValidationError("unit_sphere_s3 needs even resolution in the last two directions");
  if (spec.kind == ManifoldKind::perturbed_torus) {
    if (spec.perturbation_amplitude < 0.0 || spec.perturbation_amplitude > 0.5)
      throw ValidationError(
          "perturbation_amplitude must lie in [0, 0.5] to keep the metric positive-definite");
  } else if (spec.perturbation_amplitude != 0.0) {
    throw ValidationError("perturbation_amplitude only applies to perturbed_torus");
  }
}

// Central difference of the packed metric component p in direction d at node.
double metric_cdiff(const ManifoldData& man, int p, int d, const int idx0[kMaxDim]) {
  const ChartGrid& gr = man.grid;
  int sc = sym_count(man.m);
  std::array<int, kMaxDim> ip{idx0[0], idx0[1], idx0[2]}, im = ip;
  ip[d] += 1;
  im[d] -= 1;
  // The metric is a scalar table here (both tensor indices handled by caller);
  // only periodic wrapping occurs on torus charts, so no sign bookkeeping.
  auto rp = gr.resolve(ip, nullptr, 0);
  auto rm = gr.resolve(im, nullptr, 0);
  return (man.metric.g[rp.node * sc + p] - man.metric.g[rm.node * sc + p]) / (2.0 * gr.h[d]);
}

}  // namespace

ConnectionData christoffel(const ManifoldData& man) {
  const int m = man.m;
  const int sc = sym_count(m);
  ConnectionData conn;
  conn.gamma.assign(static_cast<size_t>(man.nodes) * m * sc, 0.0);

  if (man.spec.kind != ManifoldKind::perturbed_torus) {
    // Exact closed forms.
    double G[kMaxDim][kMaxDim][kMaxDim];
    double u[kMaxDim] = {0, 0, 0};
    for (long node = 0; node < man.nodes; ++node) {
      int idx[kMaxDim];
      man.grid.unpack(node, idx);
      for (int d = 0; d < m; ++d) u[d] = man.grid.coord(d, idx[d]);
      man.chart.christoffel(u, G);
      for (int k = 0; k < m; ++k)
        for (int i = 0; i < m; ++i)
          for (int j = i; j < m; ++j)
            conn.gamma[(node * m + k) * sc + sym_index(m, i, j)] = G[k][i][j];
    }
    return conn;
  }

  // Gamma^k_ij = g^kl (d_i g_jl + d_j g_il - d_l g_ij) / 2 by central differences.
  for (long node = 0; node < man.nodes; ++node) {
    int idx[kMaxDim];
    man.grid.unpack(node, idx);
    double dg[kMaxDim][kMaxDim][kMaxDim];  // dg[d][i][j] = d_d g_ij
    for (int d = 0; d < m; ++d)
      for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j)
          dg[d][i][j] = dg[d][j][i] = metric_cdiff(man, sym_index(m, i, j), d, idx);
    const double* gi = &man.metric.ginv[node * sc];
    for (int k = 0; k < m; ++k)
      for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) {
          double s = 0.0;
          for (int l = 0; l < m; ++l)
            s += gi[sym_index(m, k, l)] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
          conn.gamma[(node * m + k) * sc + sym_index(m, i, j)] = 0.5 * s;
        }
  }
  return conn;
}

CurvatureData curvature(const ManifoldData& man) {
  const int m = man.m;
  const int sc = sym_count(m);
  CurvatureData curv;
  curv.ric.assign(static_cast<size_t>(man.nodes) * sc, 0.0);
  curv.ric_mixed.assign(static_cast<size_t>(man.nodes) * m * m, 0.0);
  curv.scalar.assign(man.nodes, 0.0);

  if (man.spec.kind != ManifoldKind::perturbed_torus) {
    double u[kMaxDim] = {0, 0, 0};
    for (long node = 0; node < man.nodes; ++node) {
      int idx[kMaxDim];
      man.grid.unpack(node, idx);
      for (int d = 0; d < m; ++d) u[d] = man.grid.coord(d, idx[d]);
      man.chart.ricci_lower(u, &curv.ric[node * sc]);
      curv.scalar[node] = man.chart.scalar_curvature(u);
    }
  } else {
    // Ric_sn = sum_mu [ d_mu Gamma^mu_ns - d_n Gamma^mu_mus
    //                   + Gamma^mu_mul Gamma^l_ns - Gamma^mu_nl Gamma^l_mus ].
    const ChartGrid& gr = man.grid;
    auto gamma_at = [&](long node, int k, int i, int j) {
      return man.conn.gamma[(node * m + k) * sc + sym_index(m, i, j)];
    };
    auto dgamma = [&](const int idx0[kMaxDim], int d, int k, int i, int j) {
      std::array<int, kMaxDim> ip{idx0[0], idx0[1], idx0[2]}, im = ip;
      ip[d] += 1;
      im[d] -= 1;
      auto rp = gr.resolve(ip, nullptr, 0);
      auto rm = gr.resolve(im, nullptr, 0);
      return (gamma_at(rp.node, k, i, j) - gamma_at(rm.node, k, i, j)) / (2.0 * gr.h[d]);
    };
    for (long node = 0; node < man.nodes; ++node) {
      int idx[kMaxDim];
      gr.unpack(node, idx);
      for (int s = 0; s < m; ++s)
        for (int nu = s; nu < m; ++nu) {
          double r = 0.0;
          for (int mu = 0; mu < m; ++mu) {
            r += dgamma(idx, mu, mu, nu, s) - dgamma(idx, nu, mu, mu, s);
            for (int l = 0; l < m; ++l)
              r += gamma_at(node, mu, mu, l) * gamma_at(node, l, nu, s) -
                   gamma_at(node, mu, nu, l) * gamma_at(node, l, mu, s);
          }
          curv.ric[node * sc + sym_index(m, s, nu)] = r;
        }
    }
  }

  // Mixed form and scalar curvature from the stored metric inverse.
  for (long node = 0; node < man.nodes; ++node) {
    const double* gi = &man.metric.ginv[node * sc];
    const double* rc = &curv.ric[node * sc];
    double trace = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double s = 0.0;
        for (int k = 0; k < m; ++k) s += gi[sym_index(m, i, k)] * rc[sym_index(m, k, j)];
        curv.ric_mixed[(node * m + i) * m + j] = s;
        if (i == j) trace += s;
      }
    if (man.spec.kind == ManifoldKind::perturbed_torus) curv.scalar[node] = trace;
  }
  return curv;
}

ManifoldData build_manifold(const ManifoldSpec& spec) {
  validate(spec);
  ManifoldData man;
  man.spec = spec;
  man.chart = make_chart(spec.kind, spec.perturbation_amplitude);
  man.grid = make_grid(spec);
  man.m = man.chart.m;
  man.nodes = man.grid.node_count();

  const int m = man.m;
  const int sc = sym_count(m);

  man.metric.g.assign(static_cast<size_t>(man.nodes) * sc, 0.0);
  man.metric.ginv.assign(static_cast<size_t>(man.nodes) * sc, 0.0);
  man.metric.sqrt_det.assign(man.nodes, 0.0);
  man.metric.weight.assign(man.nodes, 0.0);

  double u[kMaxDim] = {0, 0, 0};
  double gd[kMaxDim];
  for (long node = 0; node < man.nodes; ++node) {
    int idx[kMaxDim];
    man.grid.unpack(node, idx);
    for (int d = 0; d < m; ++d) u[d] = man.grid.coord(d, idx[d]);
    man.chart.metric_diag(u, gd);
    for (int d = 0; d < m; ++d) {
      if (!(gd[d] > 0.0))
        throw ValidationError("metric not positive-definite at a grid node");
      man.metric.g[node * sc + sym_index(m, d, d)] = gd[d];
      man.metric.ginv[node * sc + sym_index(m, d, d)] = 1.0 / gd[d];
    }
    man.metric.sqrt_det[node] = man.chart.sqrt_det(u);
    man.metric.weight[node] = man.chart.quad_weight(u, man.grid.h.data());
    if (!(man.metric.weight[node] > 0.0))
      throw ValidationError("non-positive quadrature weight at a grid node");
  }

  man.volume = 0.0;
  for (long node = 0; node < man.nodes; ++node) man.volume += man.metric.weight[node];

  man.conn = christoffel(man);
  man.curv = curvature(man);
  return man;
}

double integrate_scalar(const ManifoldData& man, const Eigen::VectorXd& f) {
  double s = 0.0;
  for (long node = 0; node < man.nodes; ++node) s += f[node] * man.metric.weight[node];
  return s;
}

double l2_inner(const ManifoldData& man, const Eigen::VectorXd& X, const Eigen::VectorXd& Y) {
  const int m = man.m;
  const int sc = sym_count(m);
  if (X.size() != man.nodes * m || Y.size() != man.nodes * m)
    throw ValidationError("l2_inner: field size does not match the manifold");
  double s = 0.0;
  for (long node = 0; node < man.nodes; ++node) {
    const double* g = &man.metric.g[node * sc];
    double acc = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) acc += g[sym_index(m, i, j)] * X[node * m + i] * Y[node * m + j];
    s += man.metric.weight[node] * acc;
  }
  return s;
}

}  // namespace kvflow
