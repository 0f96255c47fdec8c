#include "kvflow/initial.hpp"

#include <cmath>
#include <random>

#include "kvflow/snapshot.hpp"

namespace kvflow {

namespace {

bool is_sphere(ManifoldKind k) {
  return k == ManifoldKind::unit_sphere_s2 || k == ManifoldKind::unit_sphere_s3;
}

bool is_torus(ManifoldKind k) {
  return k == ManifoldKind::flat_torus_t2 || k == ManifoldKind::perturbed_torus;
}

// Generator of the azimuthal rotation on spheres, of a coordinate translation
// on the flat torus. The perturbed torus has no Killing fields.
VectorFieldGrid rotation_field(const ManifoldData& man, const std::string& direction) {
  const ManifoldKind k = man.spec.kind;
  VectorFieldGrid X = VectorFieldGrid::Zero(man.nodes * man.m);
  if (k == ManifoldKind::unit_sphere_s2) {
    for (long n = 0; n < man.nodes; ++n) X[n * 2 + 1] = 1.0;
    return X;
  }
  if (k == ManifoldKind::unit_sphere_s3) {
    for (long n = 0; n < man.nodes; ++n) X[n * 3 + 2] = 1.0;
    return X;
  }
  if (k == ManifoldKind::flat_torus_t2) {
    int comp;
    if (direction == "x")
      comp = 0;
    else if (direction == "y")
      comp = 1;
    else
      throw ValidationError("initial direction: expected x or y, got " + direction);
    for (long n = 0; n < man.nodes; ++n) X[n * 2 + comp] = 1.0;
    return X;
  }
  throw ValidationError("initial kind killing_rotation: the perturbed torus has no isometries");
}

ScalarField named_scalar(const ManifoldData& man, const std::string& name) {
  const ManifoldKind k = man.spec.kind;
  ScalarField f(man.nodes);
  if (name == "cos_theta") {
    if (!is_sphere(k))
      throw ValidationError("initial scalar cos_theta: needs a sphere manifold");
    for (long n = 0; n < man.nodes; ++n) f[n] = std::cos(man.node_coord(0, n));
    return f;
  }
  if (name == "neg_cos_x" || name == "neg_cos_y") {
    if (!is_torus(k))
      throw ValidationError("initial scalar " + name + ": needs a torus manifold");
    const int d = (name == "neg_cos_x") ? 0 : 1;
    for (long n = 0; n < man.nodes; ++n) f[n] = -std::cos(man.node_coord(d, n));
    return f;
  }
  throw ValidationError("initial scalar: unknown name " + name);
}

// Rotate a vector field by a quarter turn on the round sphere:
// (JV)^theta = sin(theta) V^phi, (JV)^phi = -V^theta / sin(theta).
// J of a gradient is divergence free, so grad f + J grad g spans smooth
// band-limited data with both gradient and solenoidal parts.
VectorFieldGrid quarter_turn_s2(const ManifoldData& man, const VectorFieldGrid& V) {
  VectorFieldGrid W(man.nodes * 2);
  for (long n = 0; n < man.nodes; ++n) {
    const double s = std::sin(man.node_coord(0, n));
    W[n * 2 + 0] = s * V[n * 2 + 1];
    W[n * 2 + 1] = -V[n * 2 + 0] / s;
  }
  return W;
}

VectorFieldGrid random_torus(const ManifoldData& man, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  VectorFieldGrid X(man.nodes * 2);
  for (int comp = 0; comp < 2; ++comp) {
    ScalarField u = ScalarField::Constant(man.nodes, gauss(rng));
    // One cosine and one sine coefficient per mode with 0 <= k0 <= 2,
    // |k1| <= 2, skipping (0,0) and the k0 = 0, k1 < 0 duplicates.
    for (int k0 = 0; k0 <= 2; ++k0) {
      for (int k1 = (k0 == 0) ? 1 : -2; k1 <= 2; ++k1) {
        const double a = 0.3 * gauss(rng);
        const double b = 0.3 * gauss(rng);
        for (long n = 0; n < man.nodes; ++n) {
          const double arg = k0 * man.node_coord(0, n) + k1 * man.node_coord(1, n);
          u[n] += a * std::cos(arg) + b * std::sin(arg);
        }
      }
    }
    for (long n = 0; n < man.nodes; ++n) X[n * 2 + comp] = u[n];
  }
  return X;
}

VectorFieldGrid random_s2(const ManifoldData& man, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  // Real spherical harmonics up to degree two.
  auto harmonic = [](int j, double th, double ph) {
    const double c = std::cos(th), s = std::sin(th);
    switch (j) {
      case 0: return c;
      case 1: return s * std::cos(ph);
      case 2: return s * std::sin(ph);
      case 3: return 3.0 * c * c - 1.0;
      case 4: return s * c * std::cos(ph);
      case 5: return s * c * std::sin(ph);
      case 6: return s * s * std::cos(2.0 * ph);
      default: return s * s * std::sin(2.0 * ph);
    }
  };
  ScalarField f = ScalarField::Zero(man.nodes);
  ScalarField g = ScalarField::Zero(man.nodes);
  double cf[8], cg[8];
  for (int j = 0; j < 8; ++j) cf[j] = gauss(rng);
  for (int j = 0; j < 8; ++j) cg[j] = gauss(rng);
  for (long n = 0; n < man.nodes; ++n) {
    const double th = man.node_coord(0, n), ph = man.node_coord(1, n);
    for (int j = 0; j < 8; ++j) {
      f[n] += cf[j] * harmonic(j, th, ph);
      g[n] += cg[j] * harmonic(j, th, ph);
    }
  }
  return gradient(man, f) + quarter_turn_s2(man, gradient(man, g));
}

VectorFieldGrid random_s3(const ManifoldData& man, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  // Degree-one harmonics are the ambient coordinate functions.
  ScalarField f = ScalarField::Zero(man.nodes);
  double c[4];
  for (int j = 0; j < 4; ++j) c[j] = gauss(rng);
  const double rot = gauss(rng);
  for (long n = 0; n < man.nodes; ++n) {
    const double u0 = man.node_coord(0, n), u1 = man.node_coord(1, n),
                 u2 = man.node_coord(2, n);
    f[n] = c[0] * std::cos(u0) + std::sin(u0) * (c[1] * std::cos(u1) +
           std::sin(u1) * (c[2] * std::cos(u2) + c[3] * std::sin(u2)));
  }
  VectorFieldGrid X = gradient(man, f);
  for (long n = 0; n < man.nodes; ++n) X[n * 3 + 2] += rot;
  return X;
}

VectorFieldGrid fourier_field(const ManifoldData& man, const std::vector<FourierTerm>& terms) {
  if (!is_torus(man.spec.kind))
    throw ValidationError("initial kind fourier_mode: needs a torus manifold");
  if (terms.empty()) throw ValidationError("initial kind fourier_mode: no terms given");
  VectorFieldGrid X = VectorFieldGrid::Zero(man.nodes * man.m);
  for (const FourierTerm& t : terms) {
    if (t.component < 0 || t.component >= man.m)
      throw ValidationError("initial fourier term: component out of range");
    for (long n = 0; n < man.nodes; ++n) {
      const double arg = t.k0 * man.node_coord(0, n) + t.k1 * man.node_coord(1, n) + t.phase;
      X[n * man.m + t.component] += t.amplitude * std::cos(arg);
    }
  }
  return X;
}

}  // namespace

VectorFieldGrid build_initial(const InitialSpec& spec, const ManifoldData& man) {
  VectorFieldGrid X;
  if (spec.kind == "killing_rotation") {
    X = rotation_field(man, spec.direction);
  } else if (spec.kind == "gradient_of") {
    if (spec.scalar.empty())
      throw ValidationError("initial kind gradient_of: needs a scalar name");
    X = gradient(man, named_scalar(man, spec.scalar));
    if (spec.plus_killing_amp != 0.0)
      X += spec.plus_killing_amp * rotation_field(man, spec.direction);
  } else if (spec.kind == "fourier_mode") {
    X = fourier_field(man, spec.terms);
  } else if (spec.kind == "random_bandlimited") {
    std::mt19937_64 rng(spec.seed);
    switch (man.spec.kind) {
      case ManifoldKind::unit_sphere_s2: X = random_s2(man, rng); break;
      case ManifoldKind::unit_sphere_s3: X = random_s3(man, rng); break;
      default: X = random_torus(man, rng); break;
    }
  } else if (spec.kind == "file") {
    if (spec.path.empty()) throw ValidationError("initial kind file: needs a path");
    X = read_snapshot(spec.path, man);
  } else {
    throw ValidationError("initial kind: unknown name " + spec.kind);
  }
  if (!X.allFinite()) throw ValidationError("initial field: non-finite values");
  if (spec.scale != 1.0) X *= spec.scale;
  return X;
}

}  // namespace kvflow
