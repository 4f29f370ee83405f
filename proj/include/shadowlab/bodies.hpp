#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "shadowlab/errors.hpp"
#include "shadowlab/estimators.hpp"
#include "shadowlab/linalg.hpp"
#include "shadowlab/polytope.hpp"
#include "shadowlab/random.hpp"

namespace shadowlab {

/// Parameters for the builtin body generators; each generator reads the
/// fields it needs.
struct BodyParams {
  int n = 3;
  std::vector<double> half_widths;  // box
  int points = 0;                   // random-hull (default 2n)
  std::uint64_t seed = 0;           // simplex-random, random-hull
  int sides = 4;                    // prism-regular-polygon
  double height = 1.0;              // prism-regular-polygon half height
  double radius = 1.0;              // ball, prism-regular-polygon circumradius
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::BadParams, what);
}

inline Matrix cube_vertices(const std::vector<double>& half) {
  const auto n = static_cast<Eigen::Index>(half.size());
  const Eigen::Index count = Eigen::Index{1} << n;
  Matrix v(n, count);
  for (Eigen::Index k = 0; k < count; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) v(i, k) = ((k >> i) & 1) ? half[static_cast<std::size_t>(i)] : -half[static_cast<std::size_t>(i)];
  }
  return v;
}

inline Matrix gaussian_points(int n, int count, std::uint64_t seed) {
  RandomSource rng = RandomSource(seed, 0).substream(streams::kBody, 0);
  Matrix v(n, count);
  for (int k = 0; k < count; ++k) v.col(k) = rng.normal_vector(n);
  return v;
}

}  // namespace detail

/// Builtin bodies: cube, box, cross-polytope, simplex-regular, simplex-random,
/// prism-regular-polygon, random-hull, ball.
inline Body generate_body(const std::string& name, const BodyParams& p) {
  using detail::require;
  const int n = p.n;
  if (name == "cube") {
    require(n >= 1 && n <= 16, "cube needs 1 <= n <= 16");
    return Polytope(detail::cube_vertices(std::vector<double>(static_cast<std::size_t>(n), 1.0)));
  }
  if (name == "box") {
    require(static_cast<int>(p.half_widths.size()) == n && n >= 1 && n <= 16, "box needs n half-widths");
    for (double h : p.half_widths) require(h > 0.0 && std::isfinite(h), "box half-widths must be positive");
    return Polytope(detail::cube_vertices(p.half_widths));
  }
  if (name == "cross-polytope") {
    require(n >= 1, "cross-polytope needs n >= 1");
    Matrix v(n, 2 * n);
    v.leftCols(n) = Matrix::Identity(n, n);
    v.rightCols(n) = -Matrix::Identity(n, n);
    return Polytope(std::move(v));
  }
  if (name == "simplex-regular") {
    require(n >= 1, "simplex-regular needs n >= 1");
    // Standard basis of R^{n+1}, centered, written in an orthonormal basis of
    // the hyperplane sum(x) = 0 and scaled to unit circumradius.
    const Eigen::Index m = n + 1;
    const Matrix centered = Matrix::Identity(m, m) - Matrix::Constant(m, m, 1.0 / static_cast<double>(m));
    const Subspace plane = complement(Matrix(Vector::Constant(m, 1.0 / std::sqrt(static_cast<double>(m)))));
    Matrix v = plane.basis().transpose() * centered;
    v /= v.col(0).norm();
    return Polytope(std::move(v));
  }
  if (name == "simplex-random") {
    require(n >= 1, "simplex-random needs n >= 1");
    return Polytope(detail::gaussian_points(n, n + 1, p.seed));
  }
  if (name == "random-hull") {
    const int count = p.points > 0 ? p.points : 2 * n;
    require(n >= 1 && count >= 1, "random-hull needs n >= 1 and points >= 1");
    return Polytope(detail::gaussian_points(n, count, p.seed));
  }
  if (name == "prism-regular-polygon") {
    require(n >= 3 && p.sides >= 3, "prism-regular-polygon needs n >= 3 and sides >= 3");
    require(p.height > 0.0 && p.radius > 0.0, "prism height and radius must be positive");
    const Matrix slab = detail::cube_vertices(std::vector<double>(static_cast<std::size_t>(n - 2), p.height));
    Matrix v(n, p.sides * slab.cols());
    Eigen::Index col = 0;
    for (int k = 0; k < p.sides; ++k) {
      const double a = 2.0 * std::numbers::pi * k / p.sides;
      for (Eigen::Index s = 0; s < slab.cols(); ++s) {
        v(0, col) = p.radius * std::cos(a);
        v(1, col) = p.radius * std::sin(a);
        v.block(2, col, n - 2, 1) = slab.col(s);
        ++col;
      }
    }
    return Polytope(std::move(v));
  }
  if (name == "ball") {
    require(n >= 1 && p.radius > 0.0, "ball needs n >= 1 and radius > 0");
    return Ball{n, p.radius};
  }
  throw Error(ErrorKind::UnknownBody, "unknown body '" + name + "'");
}

/// Vertex file: first line "dim n", then one whitespace-separated vertex per line.
/// Blank lines and lines starting with '#' are skipped.
inline Polytope parse_vertex_text(std::istream& in) {
  std::string line;
  int n = -1;
  std::vector<Vector> pts;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    if (n < 0) {
      std::string tag;
      ls >> tag >> n;
      if (tag != "dim" || ls.fail() || n < 1) {
        throw Error(ErrorKind::ConfigError, "vertex file must start with 'dim n' (line " + std::to_string(lineno) + ")");
      }
      continue;
    }
    std::vector<double> xs;
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        xs.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw Error(ErrorKind::ConfigError, "bad number '" + tok + "' on line " + std::to_string(lineno));
      }
    }
    if (static_cast<int>(xs.size()) != n) {
      throw Error(ErrorKind::ConfigError, "line " + std::to_string(lineno) + " has " + std::to_string(xs.size()) +
                                              " coordinates, expected " + std::to_string(n));
    }
    pts.push_back(Eigen::Map<Vector>(xs.data(), n));
  }
  if (n < 0) throw Error(ErrorKind::ConfigError, "vertex file is empty");
  if (pts.empty()) throw Error(ErrorKind::ConfigError, "vertex file has no vertices");
  return Polytope::from_points(pts);
}

inline Polytope read_vertex_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open vertex file " + path);
  return parse_vertex_text(in);
}

}  // namespace shadowlab
