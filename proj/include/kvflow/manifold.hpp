#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "kvflow/chart.hpp"
#include "kvflow/grid.hpp"

namespace kvflow {

struct ManifoldSpec {
  ManifoldKind kind = ManifoldKind::flat_torus_t2;
  std::array<int, kMaxDim> resolution{0, 0, 1};
  double perturbation_amplitude = 0.0;
};

// Per-node fields are stored node-major; symmetric tensors use packed upper
// triangle (see sym_index).
struct MetricData {
  std::vector<double> g;         // [node*sc + p]
  std::vector<double> ginv;      // [node*sc + p]
  std::vector<double> sqrt_det;  // [node]
  std::vector<double> weight;    // [node] cell mass, see Chart::quad_weight
};

struct ConnectionData {
  // gamma[(node*m + k)*sc + p] = Gamma^k_ij with p = sym_index(m,i,j)
  std::vector<double> gamma;
};

struct CurvatureData {
  std::vector<double> ric;        // [node*sc + p], lower indices
  std::vector<double> ric_mixed;  // [node*m*m + i*m + j] = R^i_j
  std::vector<double> scalar;     // [node]
};

struct ManifoldData {
  ManifoldSpec spec;
  Chart chart;
  ChartGrid grid;
  MetricData metric;
  ConnectionData conn;
  CurvatureData curv;
  double volume = 0.0;
  int m = 2;
  long nodes = 0;

  double node_coord(int d, long node) const {
    int idx[kMaxDim];
    grid.unpack(node, idx);
    return grid.coord(d, idx[d]);
  }
};

ManifoldData build_manifold(const ManifoldSpec& spec);

// Levi-Civita connection of the stored metric. Central differences for the
// perturbed torus, exact closed forms for the other kinds.
ConnectionData christoffel(const ManifoldData& man);
// Ricci curvature by contraction of the Riemann tensor; central differences of
// the connection for the perturbed torus, closed forms otherwise.
CurvatureData curvature(const ManifoldData& man);

double integrate_scalar(const ManifoldData& man, const Eigen::VectorXd& f);
// <X,Y> = sum_nodes w g_ij X^i Y^j over contravariant node-major dof vectors.
double l2_inner(const ManifoldData& man, const Eigen::VectorXd& X, const Eigen::VectorXd& Y);

}  // namespace kvflow
