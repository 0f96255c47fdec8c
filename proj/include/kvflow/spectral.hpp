#pragma once

#include "kvflow/flow_operator.hpp"

namespace kvflow {

struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;  // of L_h, <= 0, sorted descending (kernel first)
  Eigen::MatrixXd fields;       // columns are M-orthonormal eigenfields
  bool full = false;            // true when every eigenpair is present
  double max_residual = 0.0;    // max ||L v - lambda v||_M over columns
};

struct KillingBasis {
  Eigen::MatrixXd fields;  // M-orthonormal near-null eigenfields
  Eigen::VectorXd eigenvalues;
};

// count = 0 (or >= dofs) asks for the full decomposition, which requires
// dofs <= dense_threshold; a smaller count uses shift-invert Lanczos for the
// eigenvalues closest to zero and works at any size.
SpectralDecomposition eigendecompose(const FlowOperator& op, int count = 0,
                                     long dense_threshold = 8192);

// Default near-null threshold: 10 h^2 |lambda_first_nonzero| as seen in the
// decomposition itself.
double default_kernel_tol(const FlowOperator& op, const SpectralDecomposition& dec);

// Members of the decomposition with |lambda| <= kernel_tol, each verified to
// have small deformation energy in the finite-difference report as well.
KillingBasis killing_kernel(const FlowOperator& op, const SpectralDecomposition& dec,
                            double kernel_tol);

// M-orthogonal projection onto the basis span.
VectorFieldGrid project_killing(const FlowOperator& op, const KillingBasis& basis,
                                const VectorFieldGrid& X);

// Exact semidiscrete solution X(t) = sum_k e^{lambda_k t} <X0,v_k>_M v_k.
// Requires a full decomposition.
VectorFieldGrid evolve_spectral(const FlowOperator& op, const SpectralDecomposition& dec,
                                const VectorFieldGrid& X0, double t);

// Shared symmetric eigensolver utility: smallest eigenpairs of a sparse SPSD
// matrix by shift-invert Lanczos with full reorthogonalization.
void smallest_eigenpairs(const Eigen::SparseMatrix<double>& C, int count,
                         Eigen::VectorXd& values, Eigen::MatrixXd& vectors);

}  // namespace kvflow
