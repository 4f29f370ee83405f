#pragma once

#include <string>
#include <utility>
#include <variant>

#include "shadowlab/errors.hpp"
#include "shadowlab/linalg.hpp"

namespace shadowlab {

/// Convex hull of a finite vertex set; vertices are the columns of an n x k matrix.
class Polytope {
 public:
  Polytope() = default;

  explicit Polytope(Matrix vertices) : vertices_(std::move(vertices)) {
    if (vertices_.cols() < 1) throw Error(ErrorKind::DomainError, "polytope needs at least one vertex");
    if (vertices_.rows() < 1) throw Error(ErrorKind::DomainError, "polytope needs ambient dimension >= 1");
    if (!vertices_.allFinite()) throw Error(ErrorKind::DomainError, "non-finite vertex coordinate");
  }

  static Polytope from_points(std::span<const Vector> points) {
    if (points.empty()) throw Error(ErrorKind::DomainError, "polytope needs at least one vertex");
    Matrix m(points.front().size(), static_cast<Eigen::Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (points[i].size() != m.rows()) throw Error(ErrorKind::DimensionError, "vertices differ in dimension");
      m.col(static_cast<Eigen::Index>(i)) = points[i];
    }
    return Polytope(std::move(m));
  }

  Eigen::Index ambient_dim() const { return vertices_.rows(); }
  Eigen::Index size() const { return vertices_.cols(); }
  const Matrix& vertices() const { return vertices_; }
  auto vertex(Eigen::Index i) const { return vertices_.col(i); }

  Polytope translated(const Vector& shift) const {
    return Polytope((vertices_.colwise() + shift).eval());
  }
  Polytope transformed(const Matrix& g) const { return Polytope(g * vertices_); }

 private:
  Matrix vertices_;
};

/// A polytope expressed in the coordinates of a d-dimensional subspace of R^n.
class EmbeddedBody {
 public:
  EmbeddedBody() = default;
  EmbeddedBody(Subspace subspace, Polytope body) : subspace_(std::move(subspace)), body_(std::move(body)) {
    if (body_.ambient_dim() != subspace_.dim()) {
      throw Error(ErrorKind::DimensionError, "body dimension does not match subspace dimension");
    }
  }

  const Subspace& subspace() const { return subspace_; }
  const Polytope& body() const { return body_; }
  Eigen::Index dim() const { return subspace_.dim(); }

  /// The same set as a polytope in the ambient R^n.
  Polytope embed() const { return Polytope(subspace_.basis() * body_.vertices()); }

 private:
  Subspace subspace_;
  Polytope body_;
};

/// Analytic Euclidean ball centered at the origin; every orthogonal shadow is
/// again a ball of the same radius.
struct Ball {
  int ambient_dim = 0;
  double radius = 1.0;
};

using Body = std::variant<Polytope, Ball>;

inline int body_dim(const Body& b) {
  return std::visit(
      [](const auto& x) -> int {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, Ball>) {
          return x.ambient_dim;
        } else {
          return static_cast<int>(x.ambient_dim());
        }
      },
      b);
}

}  // namespace shadowlab
