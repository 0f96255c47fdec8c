#pragma once

#include <Eigen/Sparse>

#include "kvflow/fields.hpp"
#include "kvflow/manifold.hpp"

namespace kvflow {

// Variational scalar Laplacian built from staggered first differences with
// the same azimuthal stride taper as the vector operator, so explicit time
// stepping keeps an O(1/h^2) stability limit near the poles.
//
// A = G^T Ws G is the (positive) Dirichlet form: f^T A f = sum |grad f|^2 dV,
// so the Laplacian acts as   lap f = -M^{-1} A f   and row sums of A vanish,
// which makes the discrete integral of lap f exactly zero.
struct ScalarOperator {
  const ManifoldData* man = nullptr;
  Eigen::SparseMatrix<double> G;
  Eigen::SparseMatrix<double> Gt;
  Eigen::VectorXd Ws;
  Eigen::VectorXd mass;
  Eigen::SparseMatrix<double> A;
  // Composite central-difference Laplacian on the flat torus; empty elsewhere.
  // Its kernel holds the four checkerboard modes in addition to constants.
  Eigen::SparseMatrix<double> Ac;
  long nodes = 0;

  ScalarField laplacian(const ScalarField& f) const;
  double dirichlet(const ScalarField& f) const;
};

struct EigenvalueEstimate {
  double lambda1 = 0.0;
  double residual = 0.0;
  ScalarField field;
  // Lichnerowicz comparison, populated when scalar curvature is positive.
  bool lichnerowicz_applies = false;
  double lichnerowicz_bound = 0.0;
};

ScalarOperator assemble_scalar(const ManifoldData& man);

// First nonzero eigenvalue of -lap restricted to mean-zero fields.
EigenvalueEstimate lambda1(const ScalarOperator& op);

// Largest eigenvalue of -lap, for explicit step-size control.
double lambda_max_scalar(const ScalarOperator& op);

// Solves A p = rhs for mean-zero p with a Jacobi-preconditioned CG;
// rhs is made compatible (orthogonal to constants) first.
ScalarField poisson_solve(const ScalarOperator& op, const ScalarField& rhs,
                          double tol = 1e-10);

// X <- X - grad(lap^{-1} div X). On the flat torus the composite
// central-difference pair makes the projected divergence vanish to solver
// tolerance; on curved manifolds the residual divergence is O(h^2).
void leray_project(const ScalarOperator& op, VectorFieldGrid& X);

}  // namespace kvflow
