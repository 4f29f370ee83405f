#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "shadowlab/errors.hpp"
#include "shadowlab/geometry.hpp"
#include "shadowlab/linalg.hpp"
#include "shadowlab/polytope.hpp"

namespace shadowlab {

/// PCG-XSL-RR 128/64. The stream selector picks the (odd) LCG increment, so
/// distinct streams are distinct sequences rather than offsets of one.
class Pcg64 {
 public:
  using result_type = std::uint64_t;
  using uint128 = unsigned __int128;

  Pcg64(std::uint64_t seed, std::uint64_t stream) {
    inc_ = (static_cast<uint128>(stream) << 1u) | 1u;
    state_ = 0;
    step();
    state_ += static_cast<uint128>(seed) * kSeedSpread;
    step();
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    step();
    const auto hi = static_cast<std::uint64_t>(state_ >> 64u);
    const auto lo = static_cast<std::uint64_t>(state_);
    const unsigned rot = static_cast<unsigned>(state_ >> 122u);
    const std::uint64_t x = hi ^ lo;
    return (x >> rot) | (x << ((64u - rot) & 63u));
  }

 private:
  static constexpr uint128 kMultiplier =
      (static_cast<uint128>(2549297995355413924ULL) << 64u) + 4865540595714422341ULL;
  static constexpr uint128 kSeedSpread = (static_cast<uint128>(0x9e3779b97f4a7c15ULL) << 64u) + 1ULL;

  void step() { state_ = state_ * kMultiplier + inc_; }

  uint128 state_;
  uint128 inc_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30u)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27u)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31u);
}

/// Seeded source of uniforms and normals. Single consumer; parallel work takes
/// one `substream` per task index, fixed before execution.
class RandomSource {
 public:
  RandomSource(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_(stream_id), engine_(seed, stream_id) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  /// Independent stream for (purpose, index) under the same seed.
  RandomSource substream(std::uint64_t purpose, std::uint64_t index) const {
    return RandomSource(seed_, splitmix64(splitmix64(stream_ ^ splitmix64(purpose)) + index));
  }

  double normal() { return normal_(engine_); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  std::uint64_t below(std::uint64_t bound) { return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_); }

  Vector normal_vector(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  Pcg64 engine_;
  std::normal_distribution<double> normal_;
};

/// Uniform point on S^{n-1}: normalized standard Gaussian vector.
inline Vector sample_unit_sphere(RandomSource& rng, int n) {
  if (n < 1) throw Error(ErrorKind::DomainError, "sphere dimension must be >= 1");
  for (;;) {
    Vector g = rng.normal_vector(n);
    const double norm = g.norm();
    if (norm >= 1e-6) return g / norm;
  }
}

/// Haar-distributed k-dimensional subspace of R^n via Gaussian orthonormalization.
inline Subspace sample_grassmannian(RandomSource& rng, int n, int k) {
  if (k < 1 || k > n) throw Error(ErrorKind::DimensionError, "need 1 <= k <= n");
  for (;;) {
    Matrix g(n, k);
    for (int j = 0; j < k; ++j) g.col(j) = rng.normal_vector(n);
    try {
      return orthonormalize(g);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::RankDeficient) throw;
    }
  }
}

/// Mutually orthogonal unit directions U_1..U_m in the original R^n coordinates.
class DirectionChain {
 public:
  DirectionChain(int ambient_dim, std::vector<Vector> directions)
      : ambient_dim_(ambient_dim), directions_(std::move(directions)) {
    if (directions_.size() > static_cast<std::size_t>(std::max(ambient_dim_ - 1, 0))) {
      throw Error(ErrorKind::DimensionError, "chain longer than n - 1");
    }
    for (std::size_t i = 0; i < directions_.size(); ++i) {
      if (directions_[i].size() != ambient_dim_) throw Error(ErrorKind::DimensionError, "direction dimension mismatch");
      if (std::abs(directions_[i].norm() - 1.0) > kOrthTol) throw Error(ErrorKind::NotUnit, "chain direction not unit");
      for (std::size_t j = 0; j < i; ++j) {
        if (std::abs(directions_[i].dot(directions_[j])) > kOrthTol) {
          throw Error(ErrorKind::DomainError, "chain directions are not orthogonal");
        }
      }
    }
  }

  int ambient_dim() const { return ambient_dim_; }
  std::size_t length() const { return directions_.size(); }
  const std::vector<Vector>& directions() const { return directions_; }

  /// W_i: orthogonal complement of span{U_1..U_i}.
  Subspace residual(std::size_t i) const {
    Matrix cols(ambient_dim_, static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < i; ++j) cols.col(static_cast<Eigen::Index>(j)) = directions_[j];
    return complement(cols);
  }

 private:
  int ambient_dim_;
  std::vector<Vector> directions_;
};

/// U_i uniform on the unit sphere of the current residual subspace.
inline DirectionChain sample_chain(RandomSource& rng, int n, int m) {
  if (m < 1 || m > n - 1) throw Error(ErrorKind::DimensionError, "need 1 <= m <= n - 1");
  std::vector<Vector> dirs;
  dirs.reserve(static_cast<std::size_t>(m));
  Matrix residual_projector = Matrix::Identity(n, n);
  for (int i = 0; i < m; ++i) {
    for (;;) {
      Vector g = residual_projector * rng.normal_vector(n);
      for (const Vector& d : dirs) g -= d.dot(g) * d;
      const double norm = g.norm();
      if (norm < 1e-6) continue;
      g /= norm;
      dirs.push_back(g);
      residual_projector -= g * g.transpose();
      break;
    }
  }
  return DirectionChain(n, std::move(dirs));
}

/// K_1..K_m by repeated project_out; each body's subspace is expressed in R^n.
inline std::vector<EmbeddedBody> project_chain(const Polytope& k0, const DirectionChain& chain) {
  if (k0.ambient_dim() != chain.ambient_dim()) throw Error(ErrorKind::DimensionError, "body and chain dimensions differ");
  std::vector<EmbeddedBody> out;
  out.reserve(chain.length());
  Matrix basis = Matrix::Identity(k0.ambient_dim(), k0.ambient_dim());
  Polytope current = k0;
  for (const Vector& u : chain.directions()) {
    Vector local = basis.transpose() * u;
    local /= local.norm();
    EmbeddedBody step = project_out(current, local);
    basis = basis * step.subspace().basis();
    current = step.body();
    out.emplace_back(Subspace::from_orthonormal(basis), current);
  }
  return out;
}

/// K_m obtained directly as the projection of K_0 onto W_m.
inline EmbeddedBody project_direct(const Polytope& k0, const DirectionChain& chain, std::size_t m) {
  return project_onto(k0, chain.residual(m));
}

}  // namespace shadowlab
