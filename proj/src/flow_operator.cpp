#include "kvflow/flow_operator.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace kvflow {

namespace {

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

struct Assembler {
  const ManifoldData& man;
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> wrow;
  long rows = 0;

  explicit Assembler(const ManifoldData& m) : man(m) {}

  long dof(std::array<int, kMaxDim> idx, int comp) const {
    const ChartGrid& gr = man.grid;
    for (int d = 0; d < man.m; ++d)
      if (gr.boundary[d].edge == EdgeRule::periodic)
        idx[d] = ((idx[d] % gr.n[d]) + gr.n[d]) % gr.n[d];
    return gr.node_index(idx[0], idx[1], idx[2]) * man.m + comp;
  }

  void add(std::array<int, kMaxDim> idx, int comp, double coef) {
    trip.emplace_back(rows, dof(idx, comp), coef);
  }

  void close_row(double w) {
    wrow.push_back(w);
    ++rows;
  }
};

}  // namespace

// Stride for a difference in direction d at chart location u: 1 everywhere
// except sphere longitude, where the stencil widens to keep the arc length of
// the step comparable to the meridian spacing.
int skip_at(const ManifoldData& man, int d, const double* u) {
  const ChartGrid& gr = man.grid;
  if (man.spec.kind == ManifoldKind::unit_sphere_s2) {
    if (d != 1) return 1;
    double target = gr.h[0] / (std::sin(u[0]) * gr.h[1]);
    return coprime_skip(target, gr.n[1]);
  }
  if (man.spec.kind == ManifoldKind::unit_sphere_s3) {
    if (d != 2) return 1;
    double ref = std::max(gr.h[0], gr.h[1] * std::sin(u[0]));
    double target = ref / (std::sin(u[0]) * std::sin(u[1]) * gr.h[2]);
    return coprime_skip(target, gr.n[2]);
  }
  return 1;
}

namespace {

// One diagonal deformation row per staggered location in direction d:
//   Def_dd = sqrt(g_dd) D+_d(sqrt(g_dd) X^d) + (1/2) sum_{k!=d} d_k g_dd avg_d(X^k).
// On the sphere the zeroth-order longitude coefficient carries a tan(z)/z
// factor (z = half the arc of the strided step) so that the discrete rotation
// fields lie exactly in the kernel of D.
void emit_dd_rows(Assembler& as, int d) {
  const ManifoldData& man = as.man;
  const ChartGrid& gr = man.grid;
  const Chart& ch = man.chart;
  const int m = man.m;
  const bool pole = gr.boundary[d].edge == EdgeRule::pole_offset;

  std::array<int, kMaxDim> lo{0, 0, 0}, hi{1, 1, 1};
  for (int f = 0; f < m; ++f) hi[f] = gr.n[f];
  if (pole) {
    lo[d] = 1;  // interior midlevels only; pole cells carry vanishing measure
    hi[d] = gr.n[d];
  }

  std::array<int, kMaxDim> idx;
  for (idx[0] = lo[0]; idx[0] < hi[0]; ++idx[0])
    for (idx[1] = lo[1]; idx[1] < hi[1]; ++idx[1])
      for (idx[2] = lo[2]; idx[2] < hi[2]; ++idx[2]) {
        double u[kMaxDim] = {0, 0, 0};
        for (int f = 0; f < m; ++f) u[f] = gr.coord(f, idx[f]);
        // Location staggered in d; stride decided by the off-d coordinates.
        int s = 1;
        if (pole) {
          u[d] = gr.coord(d, idx[d] - 0.5);
        } else {
          s = skip_at(man, d, u);
          u[d] = gr.coord(d, idx[d] + 0.5 * s);
        }

        double gloc[kMaxDim], dg[kMaxDim][kMaxDim];
        ch.metric_diag(u, gloc);
        ch.metric_diag_deriv(u, dg);
        double wq = ch.quad_weight(u, gr.h.data());

        std::array<int, kMaxDim> a = idx, b = idx;
        if (pole) {
          a[d] -= 1;  // rings J-1 and J around midlevel J
        } else {
          b[d] += s;
        }
        double ua[kMaxDim], ub[kMaxDim];
        for (int f = 0; f < m; ++f) {
          ua[f] = u[f];
          ub[f] = u[f];
        }
        ua[d] = gr.coord(d, a[d]);
        ub[d] = gr.coord(d, pole ? b[d] : idx[d] + s);
        double ga[kMaxDim], gb[kMaxDim];
        ch.metric_diag(ua, ga);
        ch.metric_diag(ub, gb);

        double span = (pole ? 1 : s) * gr.h[d];
        double c = std::sqrt(gloc[d]) / span;
        as.add(b, d, c * std::sqrt(gb[d]));
        as.add(a, d, -c * std::sqrt(ga[d]));

        for (int k = 0; k < m; ++k) {
          if (k == d || dg[k][d] == 0.0) continue;
          double coef = 0.25 * dg[k][d];
          if (man.spec.kind == ManifoldKind::unit_sphere_s2 && d == 1) {
            double z = 0.5 * s * gr.h[1];
            coef *= std::tan(z) / z;
          }
          as.add(a, k, coef);
          as.add(b, k, coef);
        }

        as.close_row(wq / (gloc[d] * gloc[d]));
      }
}

// One mixed deformation row per location staggered in directions d < e:
//   Def_de = (1/2)[ g_ee D+_d(avg_e X^e) + g_dd D+_e(avg_d X^d) ].
// On the sphere the g_phiphi coefficient of the theta difference is replaced
// by the value that makes the discrete x/y rotations exact kernel members.
void emit_de_rows(Assembler& as, int d, int e) {
  const ManifoldData& man = as.man;
  const ChartGrid& gr = man.grid;
  const Chart& ch = man.chart;
  const int m = man.m;
  const bool pole_d = gr.boundary[d].edge == EdgeRule::pole_offset;
  const bool pole_e = gr.boundary[e].edge == EdgeRule::pole_offset;

  std::array<int, kMaxDim> lo{0, 0, 0}, hi{1, 1, 1};
  for (int f = 0; f < m; ++f) hi[f] = gr.n[f];
  if (pole_d) lo[d] = 1;
  if (pole_e) lo[e] = 1;

  std::array<int, kMaxDim> idx;
  for (idx[0] = lo[0]; idx[0] < hi[0]; ++idx[0])
    for (idx[1] = lo[1]; idx[1] < hi[1]; ++idx[1])
      for (idx[2] = lo[2]; idx[2] < hi[2]; ++idx[2]) {
        double u[kMaxDim] = {0, 0, 0};
        for (int f = 0; f < m; ++f) u[f] = gr.coord(f, idx[f]);
        if (pole_d) u[d] = gr.coord(d, idx[d] - 0.5);
        int sd = pole_d ? 1 : skip_at(man, d, u);
        if (!pole_d) u[d] = gr.coord(d, idx[d] + 0.5 * sd);
        if (pole_e) u[e] = gr.coord(e, idx[e] - 0.5);
        int se = pole_e ? 1 : skip_at(man, e, u);
        if (!pole_e) u[e] = gr.coord(e, idx[e] + 0.5 * se);

        double gloc[kMaxDim];
        ch.metric_diag(u, gloc);
        double wq = ch.quad_weight(u, gr.h.data());

        // Index legs: direction d runs from ad to bd, direction e from ae to be.
        int ad = pole_d ? idx[d] - 1 : idx[d];
        int bd = pole_d ? idx[d] : idx[d] + sd;
        int ae = pole_e ? idx[e] - 1 : idx[e];
        int be = pole_e ? idx[e] : idx[e] + se;

        double gee = gloc[e], gdd = gloc[d];
        if (man.spec.kind == ManifoldKind::unit_sphere_s2) {
          // d = theta leg, e = phi leg. Coefficient tuned so the discrete
          // rotations about x and y lie exactly in ker(D).
          double z = 0.5 * se * gr.h[1];
          double thm = gr.coord(0, static_cast<double>(ad));
          double thp = gr.coord(0, static_cast<double>(bd));
          double dcot = (1.0 / std::tan(thp) - 1.0 / std::tan(thm)) / gr.h[0];
          gee = -sinc(z) / (std::cos(z) * dcot);
        }

        double cd = 0.25 * gee / (static_cast<double>(bd - ad) * gr.h[d]);
        double ce = 0.25 * gdd / (static_cast<double>(be - ae) * gr.h[e]);

        std::array<int, kMaxDim> p = idx;
        for (int ld = 0; ld < 2; ++ld)
          for (int le = 0; le < 2; ++le) {
            p[d] = ld ? bd : ad;
            p[e] = le ? be : ae;
            as.add(p, e, ld ? cd : -cd);
            as.add(p, d, le ? ce : -ce);
          }

        as.close_row(2.0 * wq / (gloc[d] * gloc[e]));
      }
}

}  // namespace

int coprime_skip(double target, int period) {
  int cap = std::max(1, period / 4);
  int best = 1;
  double best_miss = std::abs(target - 1.0);
  for (int s = 1; s <= cap; ++s) {
    if (std::gcd(s, period) != 1) continue;
    double miss = std::abs(target - s);
    if (miss < best_miss - 1e-12) {
      best = s;
      best_miss = miss;
    }
  }
  return best;
}

FlowOperator assemble(const ManifoldData& man) {
  FlowOperator op;
  op.man = &man;
  op.dofs = man.nodes * man.m;

  Assembler as(man);
  for (int d = 0; d < man.m; ++d) emit_dd_rows(as, d);
  for (int d = 0; d < man.m; ++d)
    for (int e = d + 1; e < man.m; ++e) emit_de_rows(as, d, e);

  op.D.resize(as.rows, op.dofs);
  op.D.setFromTriplets(as.trip.begin(), as.trip.end());
  op.D.makeCompressed();
  op.Dt = op.D.transpose();
  op.Dt.makeCompressed();
  op.W = Eigen::Map<Eigen::VectorXd>(as.wrow.data(), as.rows);

  const int sc = sym_count(man.m);
  op.mass.resize(op.dofs);
  for (long node = 0; node < man.nodes; ++node)
    for (int d = 0; d < man.m; ++d)
      op.mass[node * man.m + d] =
          man.metric.weight[node] * man.metric.g[node * sc + sym_index(man.m, d, d)];
  op.inv_mass = op.mass.cwiseInverse();
  op.sqrt_mass = op.mass.cwiseSqrt();
  op.inv_sqrt_mass = op.sqrt_mass.cwiseInverse();
  return op;
}

VectorFieldGrid FlowOperator::apply(const VectorFieldGrid& X) const {
  Eigen::VectorXd t = D * X;
  t.array() *= W.array();
  Eigen::VectorXd out = Dt * t;
  out.array() *= -2.0 * inv_mass.array();
  return out;
}

VectorFieldGrid FlowOperator::apply_with_energy(const VectorFieldGrid& X, double* frakL) const {
  Eigen::VectorXd t = D * X;
  if (frakL) *frakL = t.cwiseProduct(W).dot(t);
  t.array() *= W.array();
  Eigen::VectorXd out = Dt * t;
  out.array() *= -2.0 * inv_mass.array();
  return out;
}

double FlowOperator::frakL_h(const VectorFieldGrid& X) const {
  Eigen::VectorXd t = D * X;
  return t.cwiseProduct(W).dot(t);
}

double FlowOperator::inner_m(const VectorFieldGrid& X, const VectorFieldGrid& Y) const {
  return X.cwiseProduct(mass).dot(Y);
}

double FlowOperator::norm_m(const VectorFieldGrid& X) const {
  return std::sqrt(std::max(0.0, inner_m(X, X)));
}

double lambda_max_estimate(const FlowOperator& op) {
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd v(op.dofs);
  for (long i = 0; i < op.dofs; ++i) v[i] = gauss(rng);
  v /= v.norm();

  // Power iteration on the symmetrized C = S D^T W D S with S = M^{-1/2};
  // lambda_max(-L_h) = 2 mu_max(C).
  double rho = 0.0;
  for (int it = 0; it < 1500; ++it) {
    Eigen::VectorXd t = op.D * op.inv_sqrt_mass.cwiseProduct(v);
    t.array() *= op.W.array();
    Eigen::VectorXd w = op.inv_sqrt_mass.cwiseProduct(op.Dt * t);
    double next = v.dot(w);
    double nn = w.norm();
    if (nn == 0.0) return 0.0;
    v = w / nn;
    if (it > 10 && std::abs(next - rho) <= 1e-6 * std::abs(next)) {
      rho = next;
      break;
    }
    rho = next;
  }
  return 2.0 * rho;
}

}  // namespace kvflow
