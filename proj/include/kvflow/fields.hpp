#pragma once

#include <Eigen/Dense>

#include "kvflow/manifold.hpp"

namespace kvflow {

// Field storage conventions, all Eigen vectors over grid nodes:
//   scalar field            f[node]
//   vector field  (contra)  X[node*m + i]            components X^i
//   covector field          Xl[node*m + j]           components X_j
//   full (0,2) tensor       T[node*m*m + i*m + j]    T_ij
//   full (0,3) tensor       U[node*m^3 + (k*m+i)*m + j]  U_kij
//   packed symmetric (0,2)  S[node*sym_count(m) + sym_index(m,i,j)]
using ScalarField = Eigen::VectorXd;
using VectorFieldGrid = Eigen::VectorXd;
using CoVectorFieldGrid = Eigen::VectorXd;
using SymTensorFieldGrid = Eigen::VectorXd;
using Tensor2FieldGrid = Eigen::VectorXd;
using Tensor3FieldGrid = Eigen::VectorXd;

struct EnergyReport {
  double frakL = 0.0;       // integral of |Def X|^2
  double E_bochner = 0.0;   // integral of |grad X|^2 + |div X|^2 - Ric(X,X)
  double E_def = 0.0;       // 2 * frakL, by construction
  double yano_residual = 0.0;  // E_bochner - E_def, zero in the continuum
  double div_l2 = 0.0;
  double grad_l2 = 0.0;
  double ric_quad = 0.0;
};

// Integrals of |grad^k X|^2 and |grad^k div X|^2 for k = 0..k_max (k_max <= 2).
struct DerivNorms {
  std::array<double, 3> u{0.0, 0.0, 0.0};
  std::array<double, 3> v{0.0, 0.0, 0.0};
};

struct DaggerSource {
  VectorFieldGrid X;    // K + grad h
  ScalarField phi;      // 2*Lap h + (2R/m) h
  double residual = 0.0;  // ||flow_rhs(X) - grad phi||_M / ||grad phi||_M
};

CoVectorFieldGrid lower(const ManifoldData& man, const VectorFieldGrid& X);
VectorFieldGrid raise(const ManifoldData& man, const CoVectorFieldGrid& Xl);

// grad_i X_j for contravariant input (lowered internally).
Tensor2FieldGrid covariant_derivative(const ManifoldData& man, const VectorFieldGrid& X);
// grad_i X_j for covariant input.
Tensor2FieldGrid covariant_derivative_covector(const ManifoldData& man,
                                               const CoVectorFieldGrid& Xl);
// grad_k T_ij for a full (0,2) input.
Tensor3FieldGrid covariant_derivative_t2(const ManifoldData& man, const Tensor2FieldGrid& T);

SymTensorFieldGrid deformation(const ManifoldData& man, const VectorFieldGrid& X);

// Trace form g^ij grad_i X_j (primary definition).
ScalarField divergence(const ManifoldData& man, const VectorFieldGrid& X);
// Density form (1/sqrt g) d_i (sqrt g X^i), kept as a cross-check.
ScalarField divergence_density(const ManifoldData& man, const VectorFieldGrid& X);

VectorFieldGrid gradient(const ManifoldData& man, const ScalarField& f);
SymTensorFieldGrid hessian(const ManifoldData& man, const ScalarField& f);
ScalarField scalar_laplacian(const ManifoldData& man, const ScalarField& f);

VectorFieldGrid rough_laplacian(const ManifoldData& man, const VectorFieldGrid& X);
VectorFieldGrid ricci_apply(const ManifoldData& man, const VectorFieldGrid& X);

// Lap_LB X + grad div X + Ric#X, the finite-difference form of the evolution
// operator (the variational module supplies the production form).
VectorFieldGrid flow_rhs(const ManifoldData& man, const VectorFieldGrid& X);

EnergyReport energy_report(const ManifoldData& man, const VectorFieldGrid& X);

DerivNorms derivative_norms(const ManifoldData& man, const VectorFieldGrid& X, int k_max);

// Einstein-case source: X = K + grad h evolves by a pure gradient, and phi is
// the generating scalar. Throws if the manifold is not Einstein.
DaggerSource dagger_source(const ManifoldData& man, const ScalarField& h,
                           const VectorFieldGrid& K);

// Pointwise |T|^2 contractions integrated over the manifold.
double tensor2_l2(const ManifoldData& man, const Tensor2FieldGrid& T);
double sym_tensor_l2(const ManifoldData& man, const SymTensorFieldGrid& S);
double tensor3_l2(const ManifoldData& man, const Tensor3FieldGrid& U);
double scalar_l2(const ManifoldData& man, const ScalarField& f);
double covector_grad_l2(const ManifoldData& man, const ScalarField& f);

}  // namespace kvflow
