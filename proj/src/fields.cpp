#include "kvflow/fields.hpp"

#include <cmath>

namespace kvflow {

namespace {

// Central difference in direction d of one component of a tensor field.
// comps is the per-node stride, offset selects the component, and dirs/rank
// list the tensor index directions so pole crossings pick up the right sign.
double cdiff(const ManifoldData& man, const Eigen::VectorXd& F, long comps, long offset,
             const int* dirs, int rank, int d, const int idx0[kMaxDim]) {
  const ChartGrid& gr = man.grid;
  std::array<int, kMaxDim> ip{idx0[0], idx0[1], idx0[2]}, im = ip;
  ip[d] += 1;
  im[d] -= 1;
  auto rp = gr.resolve(ip, dirs, rank);
  auto rm = gr.resolve(im, dirs, rank);
  return (rp.sign * F[rp.node * comps + offset] - rm.sign * F[rm.node * comps + offset]) /
         (2.0 * gr.h[d]);
}

}  // namespace

CoVectorFieldGrid lower(const ManifoldData& man, const VectorFieldGrid& X) {
  const int m = man.m;
  const int sc = sym_count(m);
  CoVectorFieldGrid Xl(man.nodes * m);
  for (long node = 0; node < man.nodes; ++node) {
    const double* g = &man.metric.g[node * sc];
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (int k = 0; k < m; ++k) s += g[sym_index(m, j, k)] * X[node * m + k];
      Xl[node * m + j] = s;
    }
  }
  return Xl;
}

VectorFieldGrid raise(const ManifoldData& man, const CoVectorFieldGrid& Xl) {
  const int m = man.m;
  const int sc = sym_count(m);
  VectorFieldGrid X(man.nodes * m);
  for (long node = 0; node < man.nodes; ++node) {
    const double* gi = &man.metric.ginv[node * sc];
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int k = 0; k < m; ++k) s += gi[sym_index(m, i, k)] * Xl[node * m + k];
      X[node * m + i] = s;
    }
  }
  return X;
}

Tensor2FieldGrid covariant_derivative_covector(const ManifoldData& man,
                                               const CoVectorFieldGrid& Xl) {
  const int m = man.m;
  const int sc = sym_count(m);
  Tensor2FieldGrid T(man.nodes * m * m);
  for (long node = 0; node < man.nodes; ++node) {
    int idx[kMaxDim];
    man.grid.unpack(node, idx);
    const double* gam = &man.conn.gamma[node * m * sc];
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        int dirs[1] = {j};
        double v = cdiff(man, Xl, m, j, dirs, 1, i, idx);
        for (int k = 0; k < m; ++k) v -= gam[k * sc + sym_index(m, i, j)] * Xl[node * m + k];
        T[node * m * m + i * m + j] = v;
      }
  }
  return T;
}

Tensor2FieldGrid covariant_derivative(const ManifoldData& man, const VectorFieldGrid& X) {
  return covariant_derivative_covector(man, lower(man, X));
}

Tensor3FieldGrid covariant_derivative_t2(const ManifoldData& man, const Tensor2FieldGrid& T) {
  const int m = man.m;
  const int sc = sym_count(m);
  Tensor3FieldGrid U(man.nodes * m * m * m);
  for (long node = 0; node < man.nodes; ++node) {
    int idx[kMaxDim];
    man.grid.unpack(node, idx);
    const double* gam = &man.conn.gamma[node * m * sc];
    for (int k = 0; k < m; ++k)
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          int dirs[2] = {i, j};
          double v = cdiff(man, T, m * m, i * m + j, dirs, 2, k, idx);
          for (int l = 0; l < m; ++l) {
            v -= gam[l * sc + sym_index(m, k, i)] * T[node * m * m + l * m + j];
            v -= gam[l * sc + sym_index(m, k, j)] * T[node * m * m + i * m + l];
          }
          U[node * m * m * m + (k * m + i) * m + j] = v;
        }
  }
  return U;
}

SymTensorFieldGrid deformation(const ManifoldData& man, const VectorFieldGrid& X) {
  const int m = man.m;
  const int sc = sym_count(m);
  Tensor2FieldGrid T = covariant_derivative(man, X);
  SymTensorFieldGrid S(man.nodes * sc);
  for (long node = 0; node < man.nodes; ++node)
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j)
        S[node * sc + sym_index(m, i, j)] =
            0.5 * (T[node * m * m + i * m + j] + T[node * m * m + j * m + i]);
  return S;
}

ScalarField divergence(const ManifoldData& man, const VectorFieldGrid& X) {
  const int m = man.m;
  const int sc = sym_count(m);
  Tensor2FieldGrid T = covariant_derivative(man, X);
  ScalarField d(man.nodes);
  for (long node = 0; node < man.nodes; ++node) {
    const double* gi = &man.metric.ginv[node * sc];
    double s = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) s += gi[sym_index(m, i, j)] * T[node * m * m + i * m + j];
    d[node] = s;
  }
  return d;
}

ScalarField divergence_density(const ManifoldData& man, const VectorFieldGrid& X) {
  const int m = man.m;
  Eigen::VectorXd F(man.nodes * m);
  for (long node = 0; node < man.nodes; ++node)
    for (int i = 0; i < m; ++i) F[node * m + i] = man.metric.sqrt_det[node] * X[node * m + i];
  ScalarField d(man.nodes);
  for (long node = 0; node < man.nodes; ++node) {
    int idx[kMaxDim];
    man.grid.unpack(node, idx);
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      int dirs[1] = {i};
      s += cdiff(man, F, m, i, dirs, 1, i, idx);
    }
    d[node] = s / man.metric.sqrt_det[node];
  }
  return d;
}

VectorFieldGrid gradient(const ManifoldData& man, const ScalarField& f) {
  const int m = man.m;
  const int sc = sym_count(m);
  VectorFieldGrid X(man.nodes * m);
  for (long node = 0; node < man.nodes; ++node) {
    int idx[kMaxDim];
    man.grid.unpack(node, idx);
    const double* gi = &man.metric.ginv[node * sc];
    double df[kMaxDim];
    for (int d = 0; d < m; ++d) df[d] = cdiff(man, f, 1, 0, nullptr, 0, d, idx);
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int j = 0; j < m; ++j) s += gi[sym_index(m, i, j)] * df[j];
      X[node * m + i] = s;
    }
  }
  return X;
}

SymTensorFieldGrid hessian(const ManifoldData& man, const ScalarField& f) {
  const int m = man.m;
  const int sc = sym_count(m);
  CoVectorFieldGrid df(man.nodes * m);
  for (long node = 0; node < man.nodes; ++node) {
    int idx[kMaxDim];
    man.grid.unpack(node, idx);
    for (int d = 0; d < m; ++d) df[node * m + d] = cdiff(man, f, 1, 0, nullptr, 0, d, idx);
  }
  Tensor2FieldGrid T = covariant_derivative_covector(man, df);
  SymTensorFieldGrid H(man.nodes * sc);
  for (long node = 0; node < man.nodes; ++node)
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j)
        H[node * sc + sym_index(m, i, j)] =
            0.5 * (T[node * m * m + i * m + j] + T[node * m * m + j * m + i]);
  return H;
}

ScalarField scalar_laplacian(const ManifoldData& man, const ScalarField& f) {
  const int m = man.m;
  const int sc = sym_count(m);
  SymTensorFieldGrid H = hessian(man, f);
  ScalarField lap(man.nodes);
  for (long node = 0; node < man.nodes; ++node) {
    const double* gi = &man.metric.ginv[node * sc];
    double s = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) s += gi[sym_index(m, i, j)] * H[node * sc + sym_index(m, i, j)];
    lap[node] = s;
  }
  return lap;
}

VectorFieldGrid rough_laplacian(const ManifoldData& man, const VectorFieldGrid& X) {
  const int m = man.m;
  const int sc = sym_count(m);
  Tensor2FieldGrid T = covariant_derivative(man, X);
  Tensor3FieldGrid U = covariant_derivative_t2(man, T);
  CoVectorFieldGrid out(man.nodes * m);
  for (long node = 0; node < man.nodes; ++node) {
    const double* gi = &man.metric.ginv[node * sc];
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (int k = 0; k < m; ++k)
        for (int i = 0; i < m; ++i)
          s += gi[sym_index(m, k, i)] * U[node * m * m * m + (k * m + i) * m + j];
      out[node * m + j] = s;
    }
  }
  return raise(man, out);
}

VectorFieldGrid ricci_apply(const ManifoldData& man, const VectorFieldGrid& X) {
  const int m = man.m;
  VectorFieldGrid out(man.nodes * m);
  for (long node = 0; node < man.nodes; ++node)
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int j = 0; j < m; ++j) s += man.curv.ric_mixed[(node * m + i) * m + j] * X[node * m + j];
      out[node * m + i] = s;
    }
  return out;
}

VectorFieldGrid flow_rhs(const ManifoldData& man, const VectorFieldGrid& X) {
  VectorFieldGrid out = rough_laplacian(man, X);
  out += gradient(man, divergence(man, X));
  out += ricci_apply(man, X);
  return out;
}

double tensor2_l2(const ManifoldData& man, const Tensor2FieldGrid& T) {
  const int m = man.m;
  const int sc = sym_count(m);
  double acc = 0.0;
  for (long node = 0; node < man.nodes; ++node) {
    const double* gi = &man.metric.ginv[node * sc];
    const double* t = &T[node * m * m];
    double s = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          for (int l = 0; l < m; ++l)
            s += gi[sym_index(m, i, k)] * gi[sym_index(m, j, l)] * t[i * m + j] * t[k * m + l];
    acc += man.metric.weight[node] * s;
  }
  return acc;
}

double sym_tensor_l2(const ManifoldData& man, const SymTensorFieldGrid& S) {
  const int m = man.m;
  const int sc = sym_count(m);
  double acc = 0.0;
  for (long node = 0; node < man.nodes; ++node) {
    const double* gi = &man.metric.ginv[node * sc];
    const double* s = &S[node * sc];
    double q = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          for (int l = 0; l < m; ++l)
            q += gi[sym_index(m, i, k)] * gi[sym_index(m, j, l)] * s[sym_index(m, i, j)] *
                 s[sym_index(m, k, l)];
    acc += man.metric.weight[node] * q;
  }
  return acc;
}

double tensor3_l2(const ManifoldData& man, const Tensor3FieldGrid& U) {
  const int m = man.m;
  const int sc = sym_count(m);
  double acc = 0.0;
  for (long node = 0; node < man.nodes; ++node) {
    const double* gi = &man.metric.ginv[node * sc];
    const double* u = &U[node * m * m * m];
    double s = 0.0;
    // Diagonal inverse metric on all built-in charts keeps this contraction
    // cheap; the general quadruple loop stays correct if that ever changes.
    for (int k = 0; k < m; ++k)
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          double q = u[(k * m + i) * m + j];
          s += gi[sym_index(m, k, k)] * gi[sym_index(m, i, i)] * gi[sym_index(m, j, j)] * q * q;
        }
    acc += man.metric.weight[node] * s;
  }
  return acc;
}

double scalar_l2(const ManifoldData& man, const ScalarField& f) {
  double acc = 0.0;
  for (long node = 0; node < man.nodes; ++node)
    acc += man.metric.weight[node] * f[node] * f[node];
  return acc;
}

double covector_grad_l2(const ManifoldData& man, const ScalarField& f) {
  const int m = man.m;
  const int sc = sym_count(m);
  double acc = 0.0;
  for (long node = 0; node < man.nodes; ++node) {
    int idx[kMaxDim];
    man.grid.unpack(node, idx);
    const double* gi = &man.metric.ginv[node * sc];
    double df[kMaxDim];
    for (int d = 0; d < m; ++d) df[d] = cdiff(man, f, 1, 0, nullptr, 0, d, idx);
    double s = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) s += gi[sym_index(m, i, j)] * df[i] * df[j];
    acc += man.metric.weight[node] * s;
  }
  return acc;
}

EnergyReport energy_report(const ManifoldData& man, const VectorFieldGrid& X) {
  const int m = man.m;
  const int sc = sym_count(m);
  EnergyReport rep;
  rep.grad_l2 = tensor2_l2(man, covariant_derivative(man, X));
  rep.frakL = sym_tensor_l2(man, deformation(man, X));
  rep.div_l2 = scalar_l2(man, divergence(man, X));
  double rq = 0.0;
  for (long node = 0; node < man.nodes; ++node) {
    const double* rc = &man.curv.ric[node * sc];
    double s = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        s += rc[sym_index(m, i, j)] * X[node * m + i] * X[node * m + j];
    rq += man.metric.weight[node] * s;
  }
  rep.ric_quad = rq;
  rep.E_bochner = rep.grad_l2 + rep.div_l2 - rep.ric_quad;
  rep.E_def = 2.0 * rep.frakL;
  rep.yano_residual = rep.E_bochner - rep.E_def;
  return rep;
}

DerivNorms derivative_norms(const ManifoldData& man, const VectorFieldGrid& X, int k_max) {
  if (k_max < 0 || k_max > 2) throw ValidationError("derivative_norms: k_max must be 0, 1 or 2");
  DerivNorms out;
  out.u[0] = l2_inner(man, X, X);
  ScalarField dv = divergence(man, X);
  out.v[0] = scalar_l2(man, dv);
  if (k_max >= 1) {
    Tensor2FieldGrid T = covariant_derivative(man, X);
    out.u[1] = tensor2_l2(man, T);
    out.v[1] = covector_grad_l2(man, dv);
    if (k_max >= 2) {
      out.u[2] = tensor3_l2(man, covariant_derivative_t2(man, T));
      out.v[2] = sym_tensor_l2(man, hessian(man, dv));
    }
  }
  return out;
}

DaggerSource dagger_source(const ManifoldData& man, const ScalarField& h,
                           const VectorFieldGrid& K) {
  const int m = man.m;
  const int sc = sym_count(m);
  // Einstein check: Ric = (R/m) g with R constant across nodes.
  double R0 = man.curv.scalar[0];
  double worst = 0.0;
  for (long node = 0; node < man.nodes; ++node) {
    worst = std::max(worst, std::abs(man.curv.scalar[node] - R0));
    for (int p = 0; p < sc; ++p) {
      double want = (R0 / m) * man.metric.g[node * sc + p];
      worst = std::max(worst, std::abs(man.curv.ric[node * sc + p] - want));
    }
  }
  if (worst > 1e-8)
    throw ValidationError("dagger_source requires an Einstein manifold");

  DaggerSource out;
  out.X = K + gradient(man, h);
  ScalarField lap = scalar_laplacian(man, h);
  out.phi.resize(man.nodes);
  for (long node = 0; node < man.nodes; ++node)
    out.phi[node] = 2.0 * lap[node] + (2.0 * R0 / m) * h[node];
  VectorFieldGrid diff = flow_rhs(man, out.X) - gradient(man, out.phi);
  double den = std::sqrt(l2_inner(man, gradient(man, out.phi), gradient(man, out.phi)));
  out.residual = std::sqrt(l2_inner(man, diff, diff)) / (den > 0.0 ? den : 1.0);
  return out;
}

}  // namespace kvflow
