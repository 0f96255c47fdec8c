#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace kvflow {

inline constexpr int kMaxDim = 3;

// Packed storage for symmetric m-by-m matrices: upper triangle in row-major
// order, e.g. m=2 -> (00,01,11), m=3 -> (00,01,02,11,12,22).
constexpr int sym_count(int m) { return m * (m + 1) / 2; }

constexpr int sym_index(int m, int i, int j) {
  if (i > j) { int t = i; i = j; j = t; }
  return i * m - i * (i - 1) / 2 + (j - i);
}

enum class ManifoldKind { unit_sphere_s2, flat_torus_t2, perturbed_torus, unit_sphere_s3 };

const char* kind_name(ManifoldKind k);
ManifoldKind kind_from_name(const std::string& name);

// Thrown on invalid specs, configs, or file contents; message names the offender.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace kvflow
