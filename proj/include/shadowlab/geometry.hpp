#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "shadowlab/errors.hpp"
#include "shadowlab/linalg.hpp"
#include "shadowlab/nearest_point.hpp"
#include "shadowlab/polytope.hpp"

namespace shadowlab {

inline constexpr double kDuplicateTol = 1e-12;
inline constexpr double kExtremeTol = 1e-9;

/// Removes vertices within kDuplicateTol of an earlier vertex; order preserved.
inline Polytope dedupe(const Polytope& p) {
  const Matrix& v = p.vertices();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < v.cols(); ++i) {
    bool dup = false;
    for (Eigen::Index k : keep) {
      if ((v.col(i) - v.col(k)).norm() <= kDuplicateTol) {
        dup = true;
        break;
      }
    }
    if (!dup) keep.push_back(i);
  }
  Matrix out(v.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = v.col(keep[i]);
  return Polytope(std::move(out));
}

namespace detail {

inline Polytope select_columns(const Matrix& v, const std::vector<Eigen::Index>& idx) {
  Matrix out(v.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = v.col(idx[i]);
  return Polytope(std::move(out));
}

// Andrew's monotone chain; collinear points are dropped.
inline Polytope hull_2d(const Polytope& p) {
  const Matrix& v = p.vertices();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(v.cols()));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (v(0, a) != v(0, b)) return v(0, a) < v(0, b);
    return v(1, a) < v(1, b);
  });
  if (idx.size() < 3) return select_columns(v, idx);
  // Signed distance of `mid` from the line o -> next; positive for a left turn.
  auto turn = [&](Eigen::Index o, Eigen::Index mid, Eigen::Index next) {
    const double ax = v(0, mid) - v(0, o), ay = v(1, mid) - v(1, o);
    const double bx = v(0, next) - v(0, o), by = v(1, next) - v(1, o);
    const double base = std::hypot(bx, by);
    return base > 0.0 ? (bx * ay - by * ax) / base : 0.0;
  };
  std::vector<Eigen::Index> h(2 * idx.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    while (k >= 2 && turn(h[k - 2], h[k - 1], idx[i]) <= kExtremeTol) --k;
    h[k++] = idx[i];
  }
  for (std::size_t i = idx.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && turn(h[k - 2], h[k - 1], idx[i]) <= kExtremeTol) --k;
    h[k++] = idx[i];
  }
  h.resize(k - 1);
  if (h.empty()) h.push_back(idx.front());
  return select_columns(v, h);
}

}  // namespace detail

/// Extreme points of the hull: a vertex survives iff its distance to the hull of
/// the surviving others exceeds kExtremeTol. Removal is sequential so near
/// coincident pairs keep one representative.
inline Polytope extreme_points(const Polytope& p) {
  const Polytope d = dedupe(p);
  const Matrix& v = d.vertices();
  if (v.cols() <= 1) return d;
  if (d.ambient_dim() == 1) {
    Eigen::Index lo = 0, hi = 0;
    v.row(0).minCoeff(&lo);
    v.row(0).maxCoeff(&hi);
    if (lo == hi || std::abs(v(0, hi) - v(0, lo)) <= kExtremeTol) return detail::select_columns(v, {lo});
    return detail::select_columns(v, {lo, hi});
  }
  std::vector<Eigen::Index> alive(static_cast<std::size_t>(v.cols()));
  std::iota(alive.begin(), alive.end(), 0);
  for (Eigen::Index i = 0; i < v.cols(); ++i) {
    if (alive.size() <= 1) break;
    std::vector<Eigen::Index> others;
    others.reserve(alive.size());
    for (Eigen::Index a : alive) {
      if (a != i) others.push_back(a);
    }
    const NearestPoint np = nearest_point(detail::select_columns(v, others), v.col(i));
    if (np.distance <= kExtremeTol) alive = std::move(others);
  }
  return detail::select_columns(v, alive);
}

/// Hull reduction used after projection: exact for d <= 3, identity beyond.
inline Polytope reduce_hull(const Polytope& p) {
  const Eigen::Index d = p.ambient_dim();
  if (d == 2) return detail::hull_2d(dedupe(p));
  if (d <= 3) return extreme_points(p);
  return dedupe(p);
}

/// Shadow of `p` along unit direction u, expressed in a deterministic basis of u-perp.
inline EmbeddedBody project_out(const Polytope& p, const Vector& u) {
  if (u.size() != p.ambient_dim()) throw Error(ErrorKind::DimensionError, "direction dimension mismatch");
  if (std::abs(u.norm() - 1.0) > kOrthTol) throw Error(ErrorKind::NotUnit, "projection direction is not a unit vector");
  if (p.ambient_dim() < 2) throw Error(ErrorKind::DimensionError, "cannot project out of R^1");
  Subspace perp = complement(Matrix(u));
  Polytope image(perp.basis().transpose() * p.vertices());
  return EmbeddedBody(std::move(perp), reduce_hull(image));
}

/// Orthogonal projection of `p` onto `s`, in the coordinates of s's basis.
inline EmbeddedBody project_onto(const Polytope& p, const Subspace& s) {
  if (s.ambient_dim() != p.ambient_dim()) throw Error(ErrorKind::DimensionError, "subspace dimension mismatch");
  Polytope image(s.basis().transpose() * p.vertices());
  return EmbeddedBody(s, reduce_hull(image));
}

inline double support(const Polytope& p, const Vector& dir) {
  if (dir.size() != p.ambient_dim()) throw Error(ErrorKind::DimensionError, "direction dimension mismatch");
  if (!(dir.norm() > 0.0)) throw Error(ErrorKind::ZeroDirection, "support direction is zero");
  return (p.vertices().transpose() * dir).maxCoeff();
}

inline double circumradius(const Polytope& p) { return p.vertices().colwise().norm().maxCoeff(); }

/// One-sided term: max over vertices of `from` of the distance to conv(`to`).
inline double directed_hausdorff(const Polytope& from, const Polytope& to) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < from.size(); ++i) {
    worst = std::max(worst, nearest_point(to, from.vertex(i)).distance);
  }
  return worst;
}

/// Hausdorff distance between convex hulls. The distance to a convex set is a
/// convex function, so each one-sided sup is attained at a vertex.
inline double hausdorff(const Polytope& a, const Polytope& b) {
  if (a.ambient_dim() != b.ambient_dim()) throw Error(ErrorKind::DimensionError, "ambient dimensions differ");
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

inline Vector vertex_centroid(const Polytope& p) { return p.vertices().rowwise().mean(); }

/// Extreme points translated so their centroid is at the origin.
inline Polytope centered_extremes(const Polytope& p) {
  const Polytope ext = extreme_points(p);
  return ext.translated(-vertex_centroid(ext));
}

inline double diameter(const Polytope& p) {
  double d = 0.0;
  const Matrix& v = p.vertices();
  for (Eigen::Index i = 0; i < v.cols(); ++i) {
    for (Eigen::Index j = i + 1; j < v.cols(); ++j) d = std::max(d, (v.col(i) - v.col(j)).norm());
  }
  return d;
}

}  // namespace shadowlab
