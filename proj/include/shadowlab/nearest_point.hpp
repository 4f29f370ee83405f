#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "shadowlab/errors.hpp"
#include "shadowlab/linalg.hpp"
#include "shadowlab/polytope.hpp"

namespace shadowlab {

struct NearestPoint {
  Vector point;
  double distance = 0.0;
  int iterations = 0;
};

inline constexpr int kNearestPointMaxIter = 100000;

namespace detail {

// Barycentric weights of the point of minimum norm on the affine hull of the
// selected columns.
inline std::vector<double> affine_minimizer(const Matrix& pts, const std::vector<Eigen::Index>& corral) {
  const std::size_t s = corral.size();
  std::vector<double> alpha(s, 0.0);
  if (s == 1) {
    alpha[0] = 1.0;
    return alpha;
  }
  const Vector base = pts.col(corral[0]);
  Matrix diffs(pts.rows(), static_cast<Eigen::Index>(s - 1));
  for (std::size_t i = 1; i < s; ++i) diffs.col(static_cast<Eigen::Index>(i - 1)) = pts.col(corral[i]) - base;
  const Vector beta = diffs.completeOrthogonalDecomposition().solve(-base);
  double rest = 1.0;
  for (std::size_t i = 1; i < s; ++i) {
    alpha[i] = beta(static_cast<Eigen::Index>(i - 1));
    rest -= alpha[i];
  }
  alpha[0] = rest;
  return alpha;
}

inline Vector combine(const Matrix& pts, const std::vector<Eigen::Index>& corral, const std::vector<double>& w) {
  Vector y = Vector::Zero(pts.rows());
  for (std::size_t i = 0; i < corral.size(); ++i) y += w[i] * pts.col(corral[i]);
  return y;
}

}  // namespace detail

/// Closest point of conv(vertices) to x, by Wolfe's minimum-norm-point method on
/// the vertices shifted by -x.
///
/// Terminates when the Frank-Wolfe gap max_v <x - y, v - y> drops to
/// 1e-10 (1 + |x|). If roundoff makes the most violating vertex one that is
/// already in the corral, the current iterate is returned: no vertex can
/// improve it further in floating point.
inline NearestPoint nearest_point(const Polytope& poly, const Vector& x) {
  if (x.size() != poly.ambient_dim()) throw Error(ErrorKind::DimensionError, "query point dimension mismatch");
  const Matrix pts = poly.vertices().colwise() - x;
  const double gap_tol = 1e-10 * (1.0 + x.norm());

  Eigen::Index start = 0;
  pts.colwise().squaredNorm().minCoeff(&start);
  std::vector<Eigen::Index> corral{start};
  std::vector<double> lambda{1.0};
  Vector y = pts.col(start);

  for (int iter = 0; iter < kNearestPointMaxIter; ++iter) {
    const Vector dots = pts.transpose() * y;
    Eigen::Index j = 0;
    const double min_dot = dots.minCoeff(&j);
    const double gap = y.squaredNorm() - min_dot;
    const bool stalled = std::find(corral.begin(), corral.end(), j) != corral.end();
    if (gap <= gap_tol || stalled) return {y + x, y.norm(), iter};

    corral.push_back(j);
    lambda.push_back(0.0);

    for (;;) {
      const std::vector<double> alpha = detail::affine_minimizer(pts, corral);
      bool interior = true;
      for (double a : alpha) interior = interior && a > 0.0;
      if (interior) {
        lambda = alpha;
        y = detail::combine(pts, corral, lambda);
        break;
      }
      double theta = std::numeric_limits<double>::infinity();
      std::size_t leaving = 0;
      for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (alpha[i] <= 0.0) {
          const double denom = lambda[i] - alpha[i];
          const double t = denom > 0.0 ? lambda[i] / denom : 0.0;
          if (t < theta) {
            theta = t;
            leaving = i;
          }
        }
      }
      if (theta <= 0.0 && corral[leaving] == j) {
        // The entering vertex cannot carry weight; keep the previous iterate.
        corral.pop_back();
        lambda.pop_back();
        return {y + x, y.norm(), iter};
      }
      for (std::size_t i = 0; i < alpha.size(); ++i) lambda[i] = theta * alpha[i] + (1.0 - theta) * lambda[i];
      lambda[leaving] = 0.0;
      std::vector<Eigen::Index> kept;
      std::vector<double> kept_w;
      for (std::size_t i = 0; i < corral.size(); ++i) {
        if (lambda[i] > 0.0) {
          kept.push_back(corral[i]);
          kept_w.push_back(lambda[i]);
        }
      }
      corral = std::move(kept);
      lambda = std::move(kept_w);
      y = detail::combine(pts, corral, lambda);
    }
  }
  throw Error(ErrorKind::NonConvergence, "nearest_point iteration cap reached");
}

}  // namespace shadowlab
