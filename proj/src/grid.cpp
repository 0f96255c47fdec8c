#include "kvflow/grid.hpp"

#include <cassert>

namespace kvflow {

const char* kind_name(ManifoldKind k) {
  switch (k) {
    case ManifoldKind::unit_sphere_s2: return "unit_sphere_s2";
    case ManifoldKind::flat_torus_t2: return "flat_torus_t2";
    case ManifoldKind::perturbed_torus: return "perturbed_torus";
    case ManifoldKind::unit_sphere_s3: return "unit_sphere_s3";
  }
  return "unknown";
}

ManifoldKind kind_from_name(const std::string& name) {
  if (name == "unit_sphere_s2") return ManifoldKind::unit_sphere_s2;
  if (name == "flat_torus_t2") return ManifoldKind::flat_torus_t2;
  if (name == "perturbed_torus") return ManifoldKind::perturbed_torus;
  if (name == "unit_sphere_s3") return ManifoldKind::unit_sphere_s3;
  throw ValidationError("unknown manifold kind '" + name + "'");
}

ChartGrid::Resolved ChartGrid::resolve(std::array<int, kMaxDim> idx, const int* dirs,
                                       int rank) const {
  double sign = 1.0;
  for (int d = 0; d < dim; ++d) {
    if (idx[d] >= 0 && idx[d] < n[d]) continue;
    const BoundaryRule& b = boundary[d];
    if (b.edge == EdgeRule::periodic) {
      idx[d] = ((idx[d] % n[d]) + n[d]) % n[d];
      continue;
    }
    // Pole crossing: mirror the offending index, remap the companions.
    idx[d] = (idx[d] < 0) ? (-1 - idx[d]) : (2 * n[d] - 1 - idx[d]);
    assert(idx[d] >= 0 && idx[d] < n[d]);
    for (int e = 0; e < dim; ++e) {
      if (e == d) continue;
      switch (b.action[e]) {
        case CrossAction::none: break;
        case CrossAction::half_shift: idx[e] += n[e] / 2; break;
        case CrossAction::mirror: idx[e] = n[e] - 1 - idx[e]; break;
      }
    }
    for (int t = 0; t < rank; ++t) sign *= b.comp_sign[dirs[t]];
  }
  // Wrap periodic directions disturbed by a half shift.
  for (int d = 0; d < dim; ++d) {
    if (boundary[d].edge == EdgeRule::periodic)
      idx[d] = ((idx[d] % n[d]) + n[d]) % n[d];
    assert(idx[d] >= 0 && idx[d] < n[d]);
  }
  long node = node_index(idx[0], idx[1], dim == 3 ? idx[2] : 0);
  return {node, sign};
}

}  // namespace kvflow
