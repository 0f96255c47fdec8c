#pragma once

#include <Eigen/Sparse>

#include "kvflow/fields.hpp"

namespace kvflow {

// Variational form of the evolution operator. D maps vector-field dofs to
// deformation samples at staggered locations, W is the diagonal quadrature
// weight of each sample, and the diagonal mass matrix M realizes the L2
// pairing, so
//     frakL_h(X) = (DX)^T W (DX),   L_h = -2 M^{-1} D^T W D,
// and <X, L_h X>_M = -2 frakL_h(X) holds to roundoff. The semidiscrete flow
// is therefore a true gradient flow of the discrete energy.
struct FlowOperator {
  const ManifoldData* man = nullptr;
  Eigen::SparseMatrix<double> D;
  Eigen::SparseMatrix<double> Dt;  // cached transpose
  Eigen::VectorXd W;
  Eigen::VectorXd mass;  // diagonal of M, node-major dof order
  Eigen::VectorXd inv_mass;
  Eigen::VectorXd sqrt_mass;
  Eigen::VectorXd inv_sqrt_mass;
  long dofs = 0;

  VectorFieldGrid apply(const VectorFieldGrid& X) const;
  // apply() that also reports frakL_h(X) from the shared D*X product.
  VectorFieldGrid apply_with_energy(const VectorFieldGrid& X, double* frakL) const;
  double frakL_h(const VectorFieldGrid& X) const;
  double inner_m(const VectorFieldGrid& X, const VectorFieldGrid& Y) const;
  double norm_m(const VectorFieldGrid& X) const;
};

FlowOperator assemble(const ManifoldData& man);

// Largest eigenvalue of -L_h by power iteration on the mass-symmetrized
// operator; relative accuracy about 1%.
double lambda_max_estimate(const FlowOperator& op);

// Integer stride in [1, max(1, period/4)] coprime to period and closest to
// target (ties resolve to the smaller stride). Coprimality keeps every
// nonconstant Fourier mode visible to the strided difference, so widening the
// longitude stencil near the poles cannot create spurious kernel modes.
int coprime_skip(double target, int period);

// Stride used by staggered first differences in direction d at location u:
// 1 everywhere except sphere longitude, where the stencil widens so the arc
// of one step stays comparable to the meridian spacing.
int skip_at(const ManifoldData& man, int d, const double* u);

}  // namespace kvflow
