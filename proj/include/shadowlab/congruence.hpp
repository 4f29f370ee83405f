#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "shadowlab/errors.hpp"
#include "shadowlab/geometry.hpp"
#include "shadowlab/linalg.hpp"
#include "shadowlab/polytope.hpp"

namespace shadowlab {

inline constexpr double kGroupTol = 1e-8;

/// Finite group of orthogonal n x n matrices.
class SymmetryGroup {
 public:
  SymmetryGroup() = default;

  /// Validates identity, orthogonality and closure; throws DomainError otherwise.
  static SymmetryGroup from_elements(std::vector<Matrix> elements, double tol = kGroupTol) {
    if (elements.empty()) throw Error(ErrorKind::DomainError, "group needs at least one element");
    SymmetryGroup g;
    g.tol_ = tol;
    g.elements_ = std::move(elements);
    g.index();
    g.validate();
    return g;
  }

  static SymmetryGroup trivial(Eigen::Index n) { return from_elements({Matrix::Identity(n, n)}); }

  /// {I, -I}
  static SymmetryGroup antipodal(Eigen::Index n) {
    return from_elements({Matrix::Identity(n, n), Matrix(-Matrix::Identity(n, n))});
  }

  std::size_t order() const { return elements_.size(); }
  Eigen::Index dim() const { return elements_.empty() ? 0 : elements_.front().rows(); }
  const std::vector<Matrix>& elements() const { return elements_; }
  double tolerance() const { return tol_; }

  /// Index of an element equal to m entrywise within the group tolerance.
  std::optional<std::size_t> find(const Matrix& m) const {
    const double key = key_of(m);
    const double spread = tol_ * weight_sum_;
    auto lo = std::lower_bound(keys_.begin(), keys_.end(), key - spread,
                               [](const auto& a, double k) { return a.first < k; });
    for (auto it = lo; it != keys_.end() && it->first <= key + spread; ++it) {
      if ((elements_[it->second] - m).cwiseAbs().maxCoeff() <= tol_) return it->second;
    }
    return std::nullopt;
  }

  bool contains(const Matrix& m) const { return find(m).has_value(); }

 private:
  double key_of(const Matrix& m) const {
    double k = 0.0;
    for (Eigen::Index i = 0; i < m.size(); ++i) k += m.data()[i] * weight(i);
    return k;
  }
  static double weight(Eigen::Index i) { return 1.0 + 0.6180339887498949 * static_cast<double>(i % 7) + 0.1 * static_cast<double>(i); }

  void index() {
    const Eigen::Index n = elements_.front().rows();
    weight_sum_ = 0.0;
    for (Eigen::Index i = 0; i < n * n; ++i) weight_sum_ += std::abs(weight(i));
    keys_.clear();
    for (std::size_t i = 0; i < elements_.size(); ++i) keys_.emplace_back(key_of(elements_[i]), i);
    std::sort(keys_.begin(), keys_.end());
  }

  void validate() const {
    const Eigen::Index n = elements_.front().rows();
    for (const Matrix& g : elements_) {
      if (g.rows() != n || g.cols() != n) throw Error(ErrorKind::DomainError, "group elements differ in shape");
      const double dev = (g.transpose() * g - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
      if (dev > kOrthTol) throw Error(ErrorKind::DomainError, "group element is not orthogonal");
    }
    if (!contains(Matrix::Identity(n, n))) throw Error(ErrorKind::DomainError, "group lacks the identity");
    for (const Matrix& a : elements_) {
      for (const Matrix& b : elements_) {
        if (!contains(a * b)) throw Error(ErrorKind::DomainError, "group is not closed under products");
      }
    }
  }

  std::vector<Matrix> elements_;
  std::vector<std::pair<double, std::size_t>> keys_;
  double weight_sum_ = 0.0;
  double tol_ = kGroupTol;
};

namespace detail {

// Nearest orthogonal map carrying the columns of `from` onto `to` in the least
// squares sense (orthogonal Procrustes).
inline Matrix procrustes(const Matrix& from, const Matrix& to) {
  const Matrix m = to * from.transpose();
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

// Greedy well-conditioned spanning tuple: largest norm first, then largest
// residual against the span of the chosen ones.
inline std::vector<Eigen::Index> spanning_tuple(const Matrix& v, double rank_tol) {
  std::vector<Eigen::Index> chosen;
  Matrix q(v.rows(), v.rows());
  Eigen::Index filled = 0;
  while (filled < v.rows()) {
    Eigen::Index best = -1;
    double best_res = rank_tol;
    Vector best_vec;
    for (Eigen::Index i = 0; i < v.cols(); ++i) {
      Vector r = v.col(i);
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index j = 0; j < filled; ++j) r -= q.col(j).dot(r) * q.col(j);
      }
      const double res = r.norm();
      if (res > best_res) {
        best_res = res;
        best = i;
        best_vec = r / res;
      }
    }
    if (best < 0) break;
    chosen.push_back(best);
    q.col(filled++) = best_vec;
  }
  return chosen;
}

// Every vertex of `a` lies within tol of a vertex of `b` and vice versa.
inline bool vertex_sets_close(const Matrix& a, const Matrix& b, double tol) {
  auto one_side = [tol](const Matrix& x, const Matrix& y) {
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      if ((y.colwise() - x.col(i)).colwise().norm().minCoeff() > tol) return false;
    }
    return true;
  };
  return one_side(a, b) && one_side(b, a);
}

// Enumerates orthogonal maps that carry the base tuple of `p` onto ordered
// tuples of `q` with matching norms and Gram entries (within `match_tol`).
// `accept(g)` returns true to stop the search.
inline void enumerate_tuple_maps(const Matrix& p, const Matrix& q, double match_tol,
                                 const std::function<bool(const Matrix&)>& accept) {
  const double scale = std::max(p.colwise().norm().maxCoeff(), q.colwise().norm().maxCoeff());
  const std::vector<Eigen::Index> base = spanning_tuple(p, 1e-9 * std::max(1.0, scale));
  const std::size_t r = base.size();
  if (r == 0) {
    accept(Matrix::Identity(p.rows(), p.rows()));
    return;
  }
  Matrix from(p.rows(), static_cast<Eigen::Index>(r));
  for (std::size_t i = 0; i < r; ++i) from.col(static_cast<Eigen::Index>(i)) = p.col(base[i]);
  const Matrix gram_p = from.transpose() * from;
  const Matrix gram_q = q.transpose() * q;
  const Vector norm_p = from.colwise().norm();
  const Vector norm_q = q.colwise().norm();
  const double t = match_tol;

  std::vector<Eigen::Index> pick(r, -1);
  std::vector<bool> used(static_cast<std::size_t>(q.cols()), false);
  bool stop = false;
  std::function<void(std::size_t)> dfs = [&](std::size_t level) {
    if (stop) return;
    if (level == r) {
      Matrix to(q.rows(), static_cast<Eigen::Index>(r));
      for (std::size_t i = 0; i < r; ++i) to.col(static_cast<Eigen::Index>(i)) = q.col(pick[i]);
      stop = accept(procrustes(from, to));
      return;
    }
    const auto li = static_cast<Eigen::Index>(level);
    for (Eigen::Index c = 0; c < q.cols() && !stop; ++c) {
      if (used[static_cast<std::size_t>(c)]) continue;
      if (std::abs(norm_q(c) - norm_p(li)) > t) continue;
      bool ok = true;
      for (std::size_t prev = 0; prev < level && ok; ++prev) {
        const auto pi = static_cast<Eigen::Index>(prev);
        const double bound = t * (norm_p(li) + norm_p(pi)) + t * t;
        ok = std::abs(gram_q(c, pick[prev]) - gram_p(li, pi)) <= bound;
      }
      if (std::abs(gram_q(c, c) - gram_p(li, li)) > t * 2.0 * norm_p(li) + t * t) ok = false;
      if (!ok) continue;
      used[static_cast<std::size_t>(c)] = true;
      pick[level] = c;
      dfs(level + 1);
      used[static_cast<std::size_t>(c)] = false;
    }
  };
  dfs(0);
}

}  // namespace detail

/// congruent() on bodies already reduced to centered extreme vertices.
inline std::optional<Matrix> congruent_centered(const Polytope& pc, const Polytope& qc, double tol) {
  if (pc.ambient_dim() != qc.ambient_dim()) throw Error(ErrorKind::DimensionError, "ambient dimensions differ");
  const Eigen::Index n = pc.ambient_dim();

  // Both centered hulls contain the origin, so d_H(g P', Q') <= max radius for any g.
  if (tol >= std::max(circumradius(pc), circumradius(qc))) return Matrix(Matrix::Identity(n, n));

  std::optional<Matrix> found;
  detail::enumerate_tuple_maps(pc.vertices(), qc.vertices(), 2.0 * tol, [&](const Matrix& g) {
    const Polytope gp = pc.transformed(g);
    if (detail::vertex_sets_close(gp.vertices(), qc.vertices(), tol) || hausdorff(gp, qc) <= tol) {
      found = g;
      return true;
    }
    return false;
  });
  return found;
}

/// Orthogonal g with d_H(g P', Q') <= tol, where P', Q' are the bodies with their
/// extreme-vertex centroid moved to the origin. Absent if none is found.
///
/// "Equal" projections living in different subspaces are compared this way:
/// up to an orthogonal identification of the subspaces, never as point sets.
inline std::optional<Matrix> congruent(const Polytope& p, const Polytope& q, double tol) {
  if (p.ambient_dim() != q.ambient_dim()) throw Error(ErrorKind::DimensionError, "ambient dimensions differ");
  return congruent_centered(centered_extremes(p), centered_extremes(q), tol);
}

/// All orthogonal maps permuting the centered extreme vertices of a
/// full-dimensional polytope.
inline SymmetryGroup symmetry_group(const Polytope& p, double tol = kGroupTol) {
  const Polytope pc = centered_extremes(p);
  const Matrix& v = pc.vertices();
  const Eigen::Index n = p.ambient_dim();
  const double scale = std::max(1.0, circumradius(pc));
  if (detail::spanning_tuple(v, 1e-9 * scale).size() != static_cast<std::size_t>(n)) {
    throw Error(ErrorKind::Degenerate, "hull is not full-dimensional");
  }
  std::vector<Matrix> found;
  detail::enumerate_tuple_maps(v, v, tol * scale, [&](const Matrix& g) {
    const Matrix image = g * v;
    std::vector<bool> hit(static_cast<std::size_t>(v.cols()), false);
    for (Eigen::Index i = 0; i < v.cols(); ++i) {
      Eigen::Index j = 0;
      const double d = (v.colwise() - image.col(i)).colwise().norm().minCoeff(&j);
      if (d > tol * scale || hit[static_cast<std::size_t>(j)]) return false;
      hit[static_cast<std::size_t>(j)] = true;
    }
    for (const Matrix& h : found) {
      if ((h - g).cwiseAbs().maxCoeff() <= tol) return false;
    }
    found.push_back(g);
    return false;
  });
  return SymmetryGroup::from_elements(std::move(found), tol);
}

}  // namespace shadowlab
