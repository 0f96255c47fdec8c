#include "kvflow/spectral.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <random>

namespace kvflow {

namespace {

// C = S D^T W D S with S = M^{-1/2}: the mass-symmetrized form of -L_h/2.
Eigen::SparseMatrix<double> symmetrized(const FlowOperator& op) {
  Eigen::SparseMatrix<double> DS = op.D * op.inv_sqrt_mass.asDiagonal();
  Eigen::SparseMatrix<double> C = DS.transpose() * op.W.asDiagonal() * DS;
  Eigen::SparseMatrix<double> Ct = C.transpose();
  C = 0.5 * (C + Ct);
  C.makeCompressed();
  return C;
}

double residual_check(const FlowOperator& op, const Eigen::VectorXd& lambda,
                      const Eigen::MatrixXd& fields) {
  double worst = 0.0;
  for (int k = 0; k < fields.cols(); ++k) {
    Eigen::VectorXd v = fields.col(k);
    Eigen::VectorXd r = op.apply(v) - lambda[k] * v;
    worst = std::max(worst, op.norm_m(r) / std::max(op.norm_m(v), 1e-300));
  }
  return worst;
}

}  // namespace

void smallest_eigenpairs(const Eigen::SparseMatrix<double>& C, int count,
                         Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
  const long n = C.rows();

  // Shift keeps the factorization positive-definite despite the null space.
  double trace = 0.0;
  for (long i = 0; i < n; ++i) trace += C.coeff(i, i);
  double sigma = std::max(1e-6 * trace / static_cast<double>(n), 1e-12);
  Eigen::SparseMatrix<double> A = C;
  for (long i = 0; i < n; ++i) A.coeffRef(i, i) += sigma;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  if (ldlt.info() != Eigen::Success)
    throw ValidationError("eigensolver: factorization of the shifted operator failed");

  const int want = std::min<long>(count, n);
  const int kmax = static_cast<int>(std::min<long>(n, 6 * want + 60));
  Eigen::MatrixXd V(n, kmax);

  std::mt19937_64 rng(0x2545f4914f6cdd1dULL);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd v(n);
  for (long i = 0; i < n; ++i) v[i] = gauss(rng);
  v /= v.norm();

  int built = 0;
  for (int j = 0; j < kmax; ++j) {
    V.col(j) = v;
    ++built;
    if (j + 1 == kmax) break;
    Eigen::VectorXd w = ldlt.solve(v);
    // Full reorthogonalization, applied twice for stability.
    for (int pass = 0; pass < 2; ++pass)
      w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
    double nb = w.norm();
    if (nb < 1e-13) break;  // invariant subspace reached
    v = w / nb;
  }

  // Rayleigh-Ritz on the Krylov basis with the projected inverse operator.
  Eigen::MatrixXd Vb = V.leftCols(built);
  Eigen::MatrixXd AinvV(n, built);
  for (int j = 0; j < built; ++j) AinvV.col(j) = ldlt.solve(Vb.col(j));
  Eigen::MatrixXd T = Vb.transpose() * AinvV;
  T = 0.5 * (T + T.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  if (es.info() != Eigen::Success) throw ValidationError("eigensolver: Ritz step failed");

  // Largest nu of A^{-1} correspond to the smallest mu = 1/nu - sigma of C.
  const int got = std::min(want, built);
  values.resize(got);
  vectors.resize(n, got);
  for (int k = 0; k < got; ++k) {
    int src = built - 1 - k;  // eigenvalues ascend in es
    double nu = es.eigenvalues()[src];
    values[k] = std::max(1.0 / nu - sigma, 0.0);
    vectors.col(k) = Vb * es.eigenvectors().col(src);
    vectors.col(k) /= vectors.col(k).norm();
  }
}

SpectralDecomposition eigendecompose(const FlowOperator& op, int count, long dense_threshold) {
  SpectralDecomposition dec;
  const long n = op.dofs;
  const bool want_full = count <= 0 || count >= n;

  Eigen::SparseMatrix<double> C = symmetrized(op);

  if (want_full) {
    if (n > dense_threshold)
      throw ValidationError(
          "eigendecompose: full decomposition above the dense threshold; request a count");
    Eigen::MatrixXd Cd = Eigen::MatrixXd(C);
    Cd = 0.5 * (Cd + Cd.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Cd);
    if (es.info() != Eigen::Success)
      throw ValidationError("eigendecompose: dense solver failed");
    dec.eigenvalues = -2.0 * es.eigenvalues().cwiseMax(0.0);
    dec.fields = op.inv_sqrt_mass.asDiagonal() * es.eigenvectors();
    dec.full = true;
  } else {
    Eigen::VectorXd mu;
    Eigen::MatrixXd U;
    smallest_eigenpairs(C, count, mu, U);
    dec.eigenvalues = -2.0 * mu;
    dec.fields = op.inv_sqrt_mass.asDiagonal() * U;
    dec.full = false;
  }
  dec.max_residual = residual_check(op, dec.eigenvalues, dec.fields);
  return dec;
}

double default_kernel_tol(const FlowOperator& op, const SpectralDecomposition& dec) {
  double h2 = 0.0;
  for (int d = 0; d < op.man->m; ++d) h2 = std::max(h2, op.man->grid.h[d]);
  h2 *= h2;
  // First eigenvalue clearly separated from roundoff of the largest magnitude.
  double scale = dec.eigenvalues.cwiseAbs().maxCoeff();
  for (int k = 0; k < dec.eigenvalues.size(); ++k) {
    double a = std::abs(dec.eigenvalues[k]);
    // The tolerance must stay below the gap it was estimated from, or it
    // would swallow the very eigenvalue that defines it on coarse grids.
    if (a > 1e-8 * std::max(scale, 1.0)) return std::min(10.0 * h2, 0.5) * a;
  }
  return 10.0 * h2;
}

KillingBasis killing_kernel(const FlowOperator& op, const SpectralDecomposition& dec,
                            double kernel_tol) {
  std::vector<int> take;
  for (int k = 0; k < dec.eigenvalues.size(); ++k)
    if (std::abs(dec.eigenvalues[k]) <= kernel_tol) take.push_back(k);

  KillingBasis basis;
  basis.fields.resize(dec.fields.rows(), take.size());
  basis.eigenvalues.resize(take.size());
  int out = 0;
  for (int k : take) {
    // Kernel membership is confirmed by the deformation energy, not the
    // eigenvalue alone.
    EnergyReport rep = energy_report(*op.man, dec.fields.col(k));
    if (rep.frakL > kernel_tol) continue;
    basis.fields.col(out) = dec.fields.col(k);
    basis.eigenvalues[out] = dec.eigenvalues[k];
    ++out;
  }
  basis.fields.conservativeResize(Eigen::NoChange, out);
  basis.eigenvalues.conservativeResize(out);
  return basis;
}

VectorFieldGrid project_killing(const FlowOperator& op, const KillingBasis& basis,
                                const VectorFieldGrid& X) {
  VectorFieldGrid out = VectorFieldGrid::Zero(X.size());
  for (int k = 0; k < basis.fields.cols(); ++k)
    out += basis.fields.col(k) * op.inner_m(basis.fields.col(k), X);
  return out;
}

VectorFieldGrid evolve_spectral(const FlowOperator& op, const SpectralDecomposition& dec,
                                const VectorFieldGrid& X0, double t) {
  if (!dec.full)
    throw ValidationError("evolve_spectral needs the full decomposition");
  Eigen::VectorXd c = dec.fields.transpose() * op.mass.cwiseProduct(X0);
  c.array() *= (dec.eigenvalues.array() * t).exp();
  return dec.fields * c;
}

}  // namespace kvflow
