#include "kvflow/scalar_operator.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "kvflow/flow_operator.hpp"
#include "kvflow/spectral.hpp"

namespace kvflow {

namespace {

// Projects v (plain dot product) off the span of the composite stencil's
// checkerboard kernel on the flat torus.
void drop_checkerboards(const ChartGrid& gr, Eigen::VectorXd& v) {
  const long n0 = gr.n[0], n1 = gr.n[1];
  for (int mode = 1; mode < 4; ++mode) {
    double dot = 0.0;
    for (long i = 0; i < n0; ++i)
      for (long j = 0; j < n1; ++j) {
        double s = ((mode & 1) && (i & 1) ? -1.0 : 1.0) * ((mode & 2) && (j & 1) ? -1.0 : 1.0);
        dot += s * v[i * n1 + j];
      }
    dot /= static_cast<double>(n0 * n1);
    for (long i = 0; i < n0; ++i)
      for (long j = 0; j < n1; ++j) {
        double s = ((mode & 1) && (i & 1) ? -1.0 : 1.0) * ((mode & 2) && (j & 1) ? -1.0 : 1.0);
        v[i * n1 + j] -= dot * s;
      }
  }
  v.array() -= v.mean();
}

Eigen::VectorXd jacobi_cg(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& rhs,
                          double tol) {
  Eigen::VectorXd dinv = A.diagonal().cwiseInverse();
  Eigen::VectorXd p = Eigen::VectorXd::Zero(rhs.size());
  Eigen::VectorXd r = rhs;
  Eigen::VectorXd z = dinv.cwiseProduct(r);
  Eigen::VectorXd d = z;
  double rz = r.dot(z);
  double stop = tol * rhs.norm();
  for (long it = 0; it < 20 * rhs.size() && r.norm() > stop; ++it) {
    Eigen::VectorXd Ad = A * d;
    double alpha = rz / d.dot(Ad);
    p += alpha * d;
    r -= alpha * Ad;
    z = dinv.cwiseProduct(r);
    double rz_next = r.dot(z);
    d = z + (rz_next / rz) * d;
    rz = rz_next;
  }
  return p;
}

}  // namespace

ScalarField ScalarOperator::laplacian(const ScalarField& f) const {
  return -(A * f).cwiseQuotient(mass);
}

double ScalarOperator::dirichlet(const ScalarField& f) const { return f.dot(A * f); }

ScalarOperator assemble_scalar(const ManifoldData& man) {
  ScalarOperator op;
  op.man = &man;
  op.nodes = man.nodes;
  op.mass = Eigen::Map<const Eigen::VectorXd>(man.metric.weight.data(), man.nodes);

  const ChartGrid& gr = man.grid;
  const int m = man.m;
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> wrow;
  long rows = 0;

  int idx[kMaxDim] = {0, 0, 0};
  double u[kMaxDim] = {0, 0, 0};
  for (int d = 0; d < m; ++d) {
    const bool periodic = gr.boundary[d].edge == EdgeRule::periodic;
    const long levels = periodic ? gr.n[d] : gr.n[d] - 1;
    for (long lev = 0; lev < levels; ++lev) {
      // Iterate over the transverse indices for this staggered level.
      long transverse = 1;
      for (int k = 0; k < m; ++k)
        if (k != d) transverse *= gr.n[k];
      for (long t = 0; t < transverse; ++t) {
        long rem = t;
        for (int k = m - 1; k >= 0; --k) {
          if (k == d) continue;
          idx[k] = static_cast<int>(rem % gr.n[k]);
          rem /= gr.n[k];
        }
        int a_idx[kMaxDim], b_idx[kMaxDim];
        double span;
        if (periodic) {
          idx[d] = static_cast<int>(lev);
          for (int k = 0; k < m; ++k) u[k] = gr.coord(k, idx[k]);
          int s = skip_at(man, d, u);
          u[d] = gr.coord(d, idx[d] + 0.5 * s);
          for (int k = 0; k < m; ++k) a_idx[k] = b_idx[k] = idx[k];
          b_idx[d] = static_cast<int>((idx[d] + s) % gr.n[d]);
          span = s * gr.h[d];
        } else {
          // Interior midlevel between nodes lev-1 and lev; pole rows are
          // omitted (natural boundary condition).
          idx[d] = static_cast<int>(lev + 1);
          for (int k = 0; k < m; ++k) u[k] = gr.coord(k, idx[k]);
          u[d] = gr.coord(d, lev + 0.5);
          for (int k = 0; k < m; ++k) a_idx[k] = b_idx[k] = idx[k];
          a_idx[d] = static_cast<int>(lev);
          b_idx[d] = static_cast<int>(lev + 1);
          span = gr.h[d];
        }
        long a = gr.node_index(a_idx[0], a_idx[1], m > 2 ? a_idx[2] : 0);
        long b = gr.node_index(b_idx[0], b_idx[1], m > 2 ? b_idx[2] : 0);
        trip.emplace_back(rows, a, -1.0 / span);
        trip.emplace_back(rows, b, 1.0 / span);
        double wq = man.chart.quad_weight(u, gr.h.data());
        double g[kMaxDim];
        man.chart.metric_diag(u, g);
        wrow.push_back(wq / g[d]);
        ++rows;
      }
    }
  }

  op.G.resize(rows, man.nodes);
  op.G.setFromTriplets(trip.begin(), trip.end());
  op.Gt = op.G.transpose();
  op.Ws = Eigen::Map<Eigen::VectorXd>(wrow.data(), rows);
  op.A = op.Gt * op.Ws.asDiagonal() * op.G;
  op.A.makeCompressed();

  if (man.spec.kind == ManifoldKind::flat_torus_t2) {
    std::vector<Eigen::Triplet<double>> ac;
    const long n0 = gr.n[0], n1 = gr.n[1];
    const double c0 = 1.0 / (4.0 * gr.h[0] * gr.h[0]);
    const double c1 = 1.0 / (4.0 * gr.h[1] * gr.h[1]);
    for (long i = 0; i < n0; ++i)
      for (long j = 0; j < n1; ++j) {
        long row = i * n1 + j;
        ac.emplace_back(row, row, 2.0 * (c0 + c1));
        ac.emplace_back(row, ((i + 2) % n0) * n1 + j, -c0);
        ac.emplace_back(row, ((i - 2 + n0) % n0) * n1 + j, -c0);
        ac.emplace_back(row, i * n1 + (j + 2) % n1, -c1);
        ac.emplace_back(row, i * n1 + (j - 2 + n1) % n1, -c1);
      }
    op.Ac.resize(man.nodes, man.nodes);
    op.Ac.setFromTriplets(ac.begin(), ac.end());
    op.Ac.makeCompressed();
  }
  return op;
}

EigenvalueEstimate lambda1(const ScalarOperator& op) {
  const ManifoldData& man = *op.man;
  Eigen::VectorXd s = op.mass.cwiseSqrt().cwiseInverse();
  Eigen::SparseMatrix<double> C = s.asDiagonal() * op.A * s.asDiagonal();
  Eigen::SparseMatrix<double> Ct = Eigen::SparseMatrix<double>(C.transpose());
  C = 0.5 * (C + Ct);

  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  smallest_eigenpairs(C, 4, values, vectors);

  EigenvalueEstimate est;
  est.lambda1 = values[1];
  ScalarField v = s.cwiseProduct(vectors.col(1));
  double vol = op.mass.sum();
  v.array() -= op.mass.dot(v) / vol;
  v /= std::sqrt(op.mass.dot(v.cwiseProduct(v)));
  est.field = v;
  ScalarField r = op.A * v - est.lambda1 * op.mass.cwiseProduct(v);
  est.residual = std::sqrt(r.cwiseProduct(r).cwiseQuotient(op.mass).sum()) /
                 std::max(est.lambda1, 1e-300);
  double rbar = 0.0;
  for (long node = 0; node < man.nodes; ++node)
    rbar += man.metric.weight[node] * man.curv.scalar[node];
  rbar /= vol;
  if (rbar > 0.0 && man.m >= 2) {
    est.lichnerowicz_applies = true;
    est.lichnerowicz_bound = rbar / (man.m - 1);
  }
  return est;
}

double lambda_max_scalar(const ScalarOperator& op) {
  Eigen::VectorXd s = op.mass.cwiseSqrt().cwiseInverse();
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd v(op.nodes);
  for (long i = 0; i < op.nodes; ++i) v[i] = gauss(rng);
  v /= v.norm();
  double rho = 0.0;
  for (int it = 0; it < 1500; ++it) {
    Eigen::VectorXd w = s.cwiseProduct(op.A * s.cwiseProduct(v));
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
  return rho;
}

ScalarField poisson_solve(const ScalarOperator& op, const ScalarField& rhs, double tol) {
  ScalarField r = rhs;
  r -= (rhs.sum() / op.mass.sum()) * op.mass;
  ScalarField p = jacobi_cg(op.A, r, tol);
  p.array() -= op.mass.dot(p) / op.mass.sum();
  return p;
}

void leray_project(const ScalarOperator& op, VectorFieldGrid& X) {
  const ManifoldData& man = *op.man;
  if (man.spec.kind == ManifoldKind::flat_torus_t2) {
    ScalarField rhs = -divergence(man, X);
    drop_checkerboards(man.grid, rhs);
    ScalarField p = jacobi_cg(op.Ac, rhs, 1e-12);
    drop_checkerboards(man.grid, p);
    const ChartGrid& gr = man.grid;
    const long n0 = gr.n[0], n1 = gr.n[1];
    for (long i = 0; i < n0; ++i)
      for (long j = 0; j < n1; ++j) {
        long node = i * n1 + j;
        double px = (p[((i + 1) % n0) * n1 + j] - p[((i - 1 + n0) % n0) * n1 + j]) / (2.0 * gr.h[0]);
        double py = (p[i * n1 + (j + 1) % n1] - p[i * n1 + (j - 1 + n1) % n1]) / (2.0 * gr.h[1]);
        X[node * 2 + 0] -= px;
        X[node * 2 + 1] -= py;
      }
    return;
  }
  ScalarField rhs = -op.mass.cwiseProduct(divergence(man, X));
  ScalarField p = poisson_solve(op, rhs);
  X -= gradient(man, p);
}

}  // namespace kvflow
