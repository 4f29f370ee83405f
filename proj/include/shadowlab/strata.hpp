#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "shadowlab/congruence.hpp"
#include "shadowlab/errors.hpp"
#include "shadowlab/estimators.hpp"
#include "shadowlab/linalg.hpp"
#include "shadowlab/parallel.hpp"
#include "shadowlab/random.hpp"

namespace shadowlab {

inline constexpr double kSubspaceTol = 1e-8;

/// H_W = {g in G : gW = W}, by comparing projectors.
inline SymmetryGroup stabilizer(const SymmetryGroup& g, const Subspace& w, double tol = kSubspaceTol) {
  if (g.dim() != w.ambient_dim()) throw Error(ErrorKind::DimensionError, "group and subspace dimensions differ");
  const Matrix p = projector(w);
  std::vector<Matrix> keep;
  for (const Matrix& h : g.elements()) {
    if ((h * p * h.transpose() - p).cwiseAbs().maxCoeff() <= tol) keep.push_back(h);
  }
  return SymmetryGroup::from_elements(std::move(keep), g.tolerance());
}

/// G.W, deduplicated by projector distance. Throws OrbitStabilizerMismatch if
/// |orbit| * |stabilizer| != |G|.
inline std::vector<Subspace> orbit(const SymmetryGroup& g, const Subspace& w, double tol = kSubspaceTol) {
  if (g.dim() != w.ambient_dim()) throw Error(ErrorKind::DimensionError, "group and subspace dimensions differ");
  const Matrix p = projector(w);
  std::vector<Subspace> out;
  std::vector<Matrix> seen;
  for (const Matrix& h : g.elements()) {
    const Matrix image = h * p * h.transpose();
    const bool dup = std::any_of(seen.begin(), seen.end(),
                                 [&](const Matrix& s) { return (s - image).cwiseAbs().maxCoeff() <= tol; });
    if (dup) continue;
    seen.push_back(image);
    out.push_back(orthonormalize(Matrix(h * w.basis())));
  }
  const std::size_t stab = stabilizer(g, w, tol).order();
  if (out.size() * stab != g.order()) {
    throw Error(ErrorKind::OrbitStabilizerMismatch, "|orbit| * |stabilizer| = " + std::to_string(out.size() * stab) +
                                                        " but |G| = " + std::to_string(g.order()));
  }
  return out;
}

namespace detail {

// Lexicographic order on matrices with entries equal within tol.
inline int compare_matrices(const Matrix& a, const Matrix& b, double tol) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double x = a.data()[i], y = b.data()[i];
    if (std::abs(x - y) <= tol) continue;
    return x < y ? -1 : 1;
  }
  return 0;
}

inline std::vector<Matrix> sorted_elements(const SymmetryGroup& h) {
  std::vector<Matrix> els = h.elements();
  const double tol = h.tolerance();
  std::sort(els.begin(), els.end(), [tol](const Matrix& a, const Matrix& b) { return compare_matrices(a, b, tol) < 0; });
  return els;
}

inline bool lex_less(const SymmetryGroup& a, const SymmetryGroup& b) {
  if (a.order() != b.order()) return a.order() < b.order();
  const auto ea = sorted_elements(a);
  const auto eb = sorted_elements(b);
  for (std::size_t i = 0; i < ea.size(); ++i) {
    const int c = compare_matrices(ea[i], eb[i], a.tolerance());
    if (c != 0) return c < 0;
  }
  return false;
}

}  // namespace detail

/// True iff some g in G has g H1 g^-1 = H2 as sets.
inline bool conjugate_in(const SymmetryGroup& g, const SymmetryGroup& h1, const SymmetryGroup& h2) {
  if (h1.order() != h2.order()) return false;
  for (const Matrix& c : g.elements()) {
    bool all = true;
    for (const Matrix& h : h1.elements()) {
      if (!h2.contains(c * h * c.transpose())) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

struct ConjugacyPartition {
  std::vector<std::size_t> class_of;        // per input subgroup
  std::vector<std::size_t> representative;  // per class: index of the canonical member
};

/// Partition of subgroups of G into G-conjugacy classes. The representative of
/// a class is its member with the lexicographically smallest sorted element list.
inline ConjugacyPartition conjugacy_classify(const SymmetryGroup& g, const std::vector<SymmetryGroup>& subgroups) {
  ConjugacyPartition out;
  std::vector<std::size_t> first_member;
  for (std::size_t i = 0; i < subgroups.size(); ++i) {
    std::size_t cls = first_member.size();
    for (std::size_t c = 0; c < first_member.size(); ++c) {
      if (conjugate_in(g, subgroups[first_member[c]], subgroups[i])) {
        cls = c;
        break;
      }
    }
    if (cls == first_member.size()) {
      first_member.push_back(i);
      out.representative.push_back(i);
    } else if (detail::lex_less(subgroups[i], subgroups[out.representative[cls]])) {
      out.representative[cls] = i;
    }
    out.class_of.push_back(cls);
  }
  return out;
}

struct Stratum {
  SymmetryGroup class_rep;
  double v = 1.0;  // |H_0| under counting measure
  double mu_hat = 0.0;
  std::size_t count = 0;
};

enum class GroupKind { Finite, Ball };

struct StratReport {
  GroupKind kind = GroupKind::Finite;
  std::vector<Stratum> strata;
  std::size_t group_order = 0;
  int n = 0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

/// Haar-samples 2-planes, classifies each stabilizer up to conjugacy in G, and
/// records empirical stratum frequencies.
inline StratReport stratify(const SymmetryGroup& g, int n, std::size_t n_samples, const RandomSource& rng,
                            double tol = kSubspaceTol, int workers = 1) {
  if (n < 3) throw Error(ErrorKind::DomainError, "stratification needs n >= 3");
  if (g.dim() != n) throw Error(ErrorKind::DimensionError, "group does not act on R^n");
  if (n_samples < 1) throw Error(ErrorKind::DomainError, "need at least one sample");

  std::vector<SymmetryGroup> stabs(n_samples);
  parallel_for(n_samples, workers, [&](std::size_t i) {
    RandomSource r = rng.substream(streams::kStrata, i);
    stabs[i] = stabilizer(g, sample_grassmannian(r, n, 2), tol);
  });

  StratReport rep;
  rep.kind = GroupKind::Finite;
  rep.group_order = g.order();
  rep.n = n;
  rep.n_samples = n_samples;
  rep.seed = rng.seed();
  std::vector<SymmetryGroup> first;
  for (const SymmetryGroup& h : stabs) {
    std::size_t cls = first.size();
    for (std::size_t c = 0; c < first.size(); ++c) {
      if (conjugate_in(g, first[c], h)) {
        cls = c;
        break;
      }
    }
    if (cls == first.size()) {
      first.push_back(h);
      rep.strata.push_back({h, static_cast<double>(h.order()), 0.0, 0});
    } else if (detail::lex_less(h, rep.strata[cls].class_rep)) {
      rep.strata[cls].class_rep = h;
    }
    ++rep.strata[cls].count;
  }
  for (Stratum& s : rep.strata) s.mu_hat = static_cast<double>(s.count) / static_cast<double>(n_samples);
  return rep;
}

/// Report for the analytic ball, whose symmetry group O(n) is continuous.
inline StratReport ball_strat_report(int n) {
  StratReport r;
  r.kind = GroupKind::Ball;
  r.n = n;
  return r;
}

enum class StrataMode { Counting, AnalyticBall };

struct LowerBound {
  double value = 0.0;
  // Finite G: E[log N] actually diverges, so the counting-measure value is the
  // formula evaluated, not a certified bound.
  bool finite_group_degenerate = false;
  StrataMode mode = StrataMode::Counting;
};

/// ln(|G| / Vol(G_{n,2})) - sum_[H] ln(v_[H]) mu_hat_[H] with counting measure on
/// finite G; the analytic ball (N = 1) gives 0.
inline LowerBound theorem2_lower_bound(const StratReport& report, StrataMode mode) {
  if (mode == StrataMode::AnalyticBall) {
    if (report.kind != GroupKind::Ball) throw Error(ErrorKind::ModeUnsupported, "analytic-ball mode needs the ball report");
    return {0.0, false, mode};
  }
  if (report.kind != GroupKind::Finite) {
    throw Error(ErrorKind::ModeUnsupported, "counting mode needs a finite symmetry group");
  }
  std::vector<double> terms;
  for (const Stratum& s : report.strata) terms.push_back(std::log(s.v) * s.mu_hat);
  const double value = std::log(static_cast<double>(report.group_order)) - log_grassmannian_volume(report.n) -
                       pairwise_sum(terms);
  return {value, true, mode};
}

}  // namespace shadowlab
