#pragma once

#include <string>
#include <vector>

#include "kvflow/fields.hpp"
#include "kvflow/manifold.hpp"

namespace kvflow {

struct FourierTerm {
  int k0 = 0, k1 = 0;  // wave numbers along the chart directions
  int component = 0;   // contravariant component carrying the mode
  double phase = 0.0;
  double amplitude = 1.0;
};

// Named construction of an initial vector field. Kinds:
//   killing_rotation    exact isometry generator (refused on the perturbed
//                       torus, which has none)
//   gradient_of         gradient of a named scalar, optionally plus a scaled
//                       rotation field
//   fourier_mode        sum of trigonometric component modes (tori only)
//   random_bandlimited  seeded smooth field from low modes
//   file                snapshot file
struct InitialSpec {
  std::string kind;
  std::string direction = "x";   // torus rotation axis: "x" or "y"
  std::string scalar;            // cos_theta | neg_cos_x | neg_cos_y
  double plus_killing_amp = 0.0;
  std::vector<FourierTerm> terms;
  unsigned long long seed = 0;
  std::string path;
  double scale = 1.0;
};

VectorFieldGrid build_initial(const InitialSpec& spec, const ManifoldData& man);

}  // namespace kvflow
