#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "shadowlab/errors.hpp"
#include "shadowlab/geometry.hpp"
#include "shadowlab/polytope.hpp"

namespace shadowlab {

/// Sorted pairwise distances between the (centered) extreme vertices.
inline std::vector<double> distance_profile(const Polytope& extremes) {
  const Matrix& v = extremes.vertices();
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(v.cols() * (v.cols() - 1) / 2));
  for (Eigen::Index i = 0; i < v.cols(); ++i) {
    for (Eigen::Index j = i + 1; j < v.cols(); ++j) d.push_back((v.col(i) - v.col(j)).norm());
  }
  std::sort(d.begin(), d.end());
  return d;
}

/// Orthogonally invariant class label of a convex body: its pairwise
/// extreme-vertex distances rounded to a grid of step delta.
struct ShapeDescriptor {
  double delta = 0.0;
  std::vector<std::int64_t> signature;

  friend bool operator==(const ShapeDescriptor&, const ShapeDescriptor&) = default;
  friend bool operator<(const ShapeDescriptor& a, const ShapeDescriptor& b) {
    if (a.delta != b.delta) return a.delta < b.delta;
    return a.signature < b.signature;
  }
};

inline ShapeDescriptor shape_descriptor(const Polytope& p, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorKind::DomainError, "descriptor grid must be positive");
  ShapeDescriptor out{delta, {}};
  for (double d : distance_profile(centered_extremes(p))) {
    out.signature.push_back(static_cast<std::int64_t>(std::llround(d / delta)));
  }
  std::sort(out.signature.begin(), out.signature.end());
  return out;
}

inline ShapeDescriptor shape_descriptor(const EmbeddedBody& b, double delta) { return shape_descriptor(b.body(), delta); }

struct ShapeDescriptorHash {
  std::size_t operator()(const ShapeDescriptor& d) const noexcept {
    std::size_t h = std::hash<double>{}(d.delta);
    for (std::int64_t x : d.signature) h ^= std::hash<std::int64_t>{}(x) + 0x9e3779b97f4a7c15ULL + (h << 6u) + (h >> 2u);
    return h;
  }
};

}  // namespace shadowlab
