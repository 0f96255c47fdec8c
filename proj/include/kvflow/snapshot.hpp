#pragma once

#include <string>

#include "kvflow/fields.hpp"
#include "kvflow/manifold.hpp"

namespace kvflow {

// Text snapshot of a vector field. Line 1: "KVFLOW1 <kind> <m> <n1> <n2> [<n3>]".
// Then one line per node in row-major order, m components in full precision,
// separated by single spaces. Writes go to a temporary file in the same
// directory and are renamed into place.
void write_snapshot(const std::string& path, const ManifoldData& man, const VectorFieldGrid& X);

// Reads a snapshot and validates the header against the given manifold.
VectorFieldGrid read_snapshot(const std::string& path, const ManifoldData& man);

}  // namespace kvflow
