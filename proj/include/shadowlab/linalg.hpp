#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shadowlab/errors.hpp"

namespace shadowlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kOrthTol = 1e-10;
inline constexpr double kRankTol = 1e-12;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

namespace detail {

// Modified Gram-Schmidt with one reorthogonalization pass. Returns false if the
// residual of `v` falls below kRankTol times its input norm.
inline bool gram_schmidt_step(const Matrix& q, Eigen::Index filled, Vector& v) {
  const double input_norm = v.norm();
  if (!(input_norm > 0.0)) return false;
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index j = 0; j < filled; ++j) {
      v -= q.col(j).dot(v) * q.col(j);
    }
  }
  const double pivot = v.norm();
  if (pivot < kRankTol * input_norm) return false;
  v /= pivot;
  return true;
}

}  // namespace detail

/// A linear subspace of R^n held as an n x d matrix with orthonormal columns.
class Subspace {
 public:
  Subspace() = default;

  /// Wraps an already-orthonormal basis; throws DomainError if it is not.
  static Subspace from_orthonormal(Matrix basis) {
    if (!all_finite(basis)) throw Error(ErrorKind::DomainError, "non-finite basis entry");
    if (basis.cols() > basis.rows()) throw Error(ErrorKind::DomainError, "more basis vectors than ambient dimension");
    const Matrix gram = basis.transpose() * basis;
    const double dev = (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    if (basis.cols() > 0 && dev > kOrthTol) {
      throw Error(ErrorKind::DomainError, "basis is not orthonormal (deviation " + std::to_string(dev) + ")");
    }
    Subspace s;
    s.basis_ = std::move(basis);
    return s;
  }

  /// Full space R^n with the standard basis.
  static Subspace full(Eigen::Index n) { return from_orthonormal(Matrix::Identity(n, n)); }

  Eigen::Index ambient_dim() const { return basis_.rows(); }
  Eigen::Index dim() const { return basis_.cols(); }
  const Matrix& basis() const { return basis_; }

 private:
  Matrix basis_;
};

/// Orthonormalizes the columns of `columns` in order. Throws RankDeficient if a
/// column is numerically dependent on its predecessors.
inline Subspace orthonormalize(const Matrix& columns) {
  if (columns.cols() == 0) throw Error(ErrorKind::DomainError, "orthonormalize needs at least one column");
  if (!all_finite(columns)) throw Error(ErrorKind::DomainError, "non-finite input");
  Matrix q(columns.rows(), columns.cols());
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    Vector v = columns.col(j);
    if (!detail::gram_schmidt_step(q, j, v)) {
      throw Error(ErrorKind::RankDeficient, "column " + std::to_string(j) + " is numerically dependent");
    }
    q.col(j) = v;
  }
  return Subspace::from_orthonormal(std::move(q));
}

inline Subspace orthonormalize(std::span<const Vector> columns) {
  if (columns.empty()) throw Error(ErrorKind::DomainError, "orthonormalize needs at least one column");
  const Eigen::Index n = columns.front().size();
  Matrix m(n, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != n) throw Error(ErrorKind::DimensionError, "columns differ in ambient dimension");
    m.col(static_cast<Eigen::Index>(j)) = columns[j];
  }
  return orthonormalize(m);
}

/// Deterministic orthonormal basis of the orthogonal complement of span(columns).
///
/// Standard basis vectors are admitted greedily by largest residual against the
/// span built so far (lowest index on ties); the admitted ones are then
/// orthonormalized in index order after the input columns. For a single unit
/// vector u this drops exactly e_j with j = argmax |u_j|.
inline Subspace complement(const Matrix& columns) {
  const Eigen::Index n = columns.rows();
  const Eigen::Index k = columns.cols();
  if (k > n) throw Error(ErrorKind::DimensionError, "too many columns for the ambient dimension");
  if (k == n) return Subspace::from_orthonormal(Matrix(n, 0));
  const Matrix q_in = k > 0 ? orthonormalize(columns).basis() : Matrix(n, 0);

  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  Matrix span(n, n);
  span.leftCols(k) = q_in;
  Eigen::Index filled = k;
  while (filled < n) {
    Eigen::Index best = -1;
    double best_res = -1.0;
    Vector best_vec;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (taken[static_cast<std::size_t>(i)]) continue;
      Vector e = Vector::Unit(n, i);
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index j = 0; j < filled; ++j) e -= span.col(j).dot(e) * span.col(j);
      }
      const double res = e.norm();
      if (res > best_res + 1e-14) {
        best_res = res;
        best = i;
        best_vec = e / res;
      }
    }
    taken[static_cast<std::size_t>(best)] = true;
    span.col(filled++) = best_vec;
  }

  // Re-run Gram-Schmidt over the chosen standard vectors in index order.
  Matrix out(n, n - k);
  Matrix work(n, n);
  work.leftCols(k) = q_in;
  Eigen::Index w = k;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!taken[static_cast<std::size_t>(i)]) continue;
    Vector e = Vector::Unit(n, i);
    if (!detail::gram_schmidt_step(work, w, e)) {
      throw Error(ErrorKind::RankDeficient, "complement construction lost rank");
    }
    work.col(w) = e;
    out.col(w - k) = e;
    ++w;
  }
  return Subspace::from_orthonormal(std::move(out));
}

inline Subspace complement(const Subspace& s) { return complement(s.basis()); }

/// Orthogonal projector B * B^T onto the subspace.
inline Matrix projector(const Subspace& s) { return s.basis() * s.basis().transpose(); }

/// Principal angles in ascending order, from the singular values of B1^T B2.
inline std::vector<double> principal_angles(const Subspace& a, const Subspace& b) {
  if (a.ambient_dim() != b.ambient_dim()) throw Error(ErrorKind::DimensionError, "ambient dimensions differ");
  const Matrix cross = a.basis().transpose() * b.basis();
  std::vector<double> angles;
  if (cross.size() == 0) return angles;
  Eigen::JacobiSVD<Matrix> svd(cross);
  const auto& sv = svd.singularValues();
  angles.reserve(static_cast<std::size_t>(sv.size()));
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    angles.push_back(std::acos(std::clamp(sv(i), 0.0, 1.0)));
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

inline double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw Error(ErrorKind::DomainError, "log_gamma needs x > 0");
  if (x == 1.0 || x == 2.0) return 0.0;
  return std::lgamma(x);
}

/// ln of the surface measure of S^{n-1}: ln(2 pi^{n/2} / Gamma(n/2)).
inline double log_sphere_area(int n) {
  if (n < 1) throw Error(ErrorKind::DomainError, "log_sphere_area needs n >= 1");
  return std::numbers::ln2 + 0.5 * n * std::log(std::numbers::pi) - log_gamma(0.5 * n);
}

/// ln Vol(G_{n,2}) = ln(4 pi^{n-1/2} / (Gamma(n/2) Gamma((n-1)/2))).
inline double log_grassmannian_volume(int n) {
  if (n < 3) throw Error(ErrorKind::DomainError, "log_grassmannian_volume needs n >= 3");
  return 2.0 * std::numbers::ln2 + (n - 0.5) * std::log(std::numbers::pi) - log_gamma(0.5 * n) -
         log_gamma(0.5 * (n - 1));
}

}  // namespace shadowlab
