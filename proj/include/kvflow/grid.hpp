#pragma once

#include <array>
#include <cstdint>

#include "kvflow/core.hpp"

namespace kvflow {

enum class EdgeRule : std::uint8_t { periodic, pole_offset };

// What happens to the indices of the *other* directions when a stencil steps
// across a pole in some direction.
enum class CrossAction : std::uint8_t { none, half_shift, mirror };

struct BoundaryRule {
  EdgeRule edge = EdgeRule::periodic;
  std::array<CrossAction, kMaxDim> action{CrossAction::none, CrossAction::none, CrossAction::none};
  // Sign picked up by a tensor index living in direction e when this pole is crossed.
  std::array<double, kMaxDim> comp_sign{1.0, 1.0, 1.0};
};

// Structured chart grid. Periodic directions tile [0, extent) exactly;
// pole_offset directions place nodes at half-spacing offsets so no node sits
// on a coordinate degeneracy.
struct ChartGrid {
  int dim = 2;
  std::array<int, kMaxDim> n{1, 1, 1};
  std::array<double, kMaxDim> h{0.0, 0.0, 0.0};
  std::array<double, kMaxDim> origin{0.0, 0.0, 0.0};
  std::array<BoundaryRule, kMaxDim> boundary{};

  long node_count() const { return static_cast<long>(n[0]) * n[1] * n[2]; }
  long node_index(int i, int j, int k = 0) const {
    return (static_cast<long>(i) * n[1] + j) * n[2] + k;
  }
  void unpack(long node, int idx[kMaxDim]) const {
    idx[2] = static_cast<int>(node % n[2]);
    long r = node / n[2];
    idx[1] = static_cast<int>(r % n[1]);
    idx[0] = static_cast<int>(r / n[1]);
  }
  double coord(int d, double idx) const { return origin[d] + h[d] * idx; }

  // Resolve a multi-index that may be out of range in one direction by at most
  // one crossing. `dirs[0..rank)` are the coordinate directions of the tensor
  // component being fetched; the returned sign multiplies its value.
  struct Resolved {
    long node;
    double sign;
  };
  Resolved resolve(std::array<int, kMaxDim> idx, const int* dirs, int rank) const;
};

}  // namespace kvflow
