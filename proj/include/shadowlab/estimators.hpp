#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "shadowlab/congruence.hpp"
#include "shadowlab/descriptor.hpp"
#include "shadowlab/errors.hpp"
#include "shadowlab/geometry.hpp"
#include "shadowlab/linalg.hpp"
#include "shadowlab/parallel.hpp"
#include "shadowlab/polytope.hpp"
#include "shadowlab/random.hpp"

namespace shadowlab {

// Substream purposes. A task draws from rng.substream(purpose, task_index).
namespace streams {
inline constexpr std::uint64_t kHaarPlane = 1;
inline constexpr std::uint64_t kOuterShadow = 2;
inline constexpr std::uint64_t kInnerPlanes = 3;
inline constexpr std::uint64_t kChain = 4;
inline constexpr std::uint64_t kBootstrap = 5;
inline constexpr std::uint64_t kStrata = 6;
inline constexpr std::uint64_t kBody = 7;
}  // namespace streams

inline constexpr double kWilsonZ = 1.959963984540054;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// 95% Wilson score interval for a binomial proportion.
inline Interval wilson_interval(std::size_t hits, std::size_t n) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(hits) / nn;
  const double z2 = kWilsonZ * kWilsonZ;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = kWilsonZ * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::clamp(std::min(center - half, p), 0.0, 1.0), std::clamp(std::max(center + half, p), 0.0, 1.0)};
}

/// Estimated N_eps: fraction of Haar 2-planes W whose shadow on W-perp is
/// eps-congruent to the reference shadow.
struct NEstimate {
  double epsilon = 0.0;
  std::size_t n_samples = 0;
  std::size_t hits = 0;
  double fraction = 0.0;
  Interval wilson_ci;
};

inline NEstimate make_n_estimate(double eps, std::size_t hits, std::size_t n) {
  return {eps, n, hits, static_cast<double>(hits) / static_cast<double>(n), wilson_interval(hits, n)};
}

/// A shadow reduced once for repeated eps-congruence tests.
struct PreparedShadow {
  Polytope centered;
  std::vector<double> profile;
  double radius = 0.0;
};

inline PreparedShadow prepare_shadow(const Polytope& body) {
  PreparedShadow s;
  s.centered = centered_extremes(body);
  s.profile = distance_profile(s.centered);
  s.radius = circumradius(s.centered);
  return s;
}

/// eps-congruence with the distance-profile pre-filter (equal extreme counts,
/// sorted pairwise distances within 2 eps) ahead of the full search.
inline bool epsilon_congruent(const PreparedShadow& a, const PreparedShadow& b, double eps) {
  if (eps >= std::max(a.radius, b.radius)) return true;
  if (a.profile.size() != b.profile.size() || a.centered.size() != b.centered.size()) return false;
  for (std::size_t i = 0; i < a.profile.size(); ++i) {
    if (std::abs(a.profile[i] - b.profile[i]) > 2.0 * eps) return false;
  }
  return congruent_centered(a.centered, b.centered, eps).has_value();
}

inline void check_eps_grid(std::span<const double> eps_grid) {
  if (eps_grid.empty()) throw Error(ErrorKind::DomainError, "epsilon grid is empty");
  for (double e : eps_grid) {
    if (!(e > 0.0)) throw Error(ErrorKind::DomainError, "epsilon must be positive");
  }
}

/// Shadow of K0 on the orthogonal complement of a Haar 2-plane.
inline EmbeddedBody haar_shadow(const Polytope& k0, RandomSource rng) {
  const int n = static_cast<int>(k0.ambient_dim());
  const Subspace plane = sample_grassmannian(rng, n, 2);
  return project_onto(k0, complement(plane));
}

/// estimate_N for every eps of the grid on the same W draws.
inline std::vector<NEstimate> estimate_N_sweep(const Polytope& k0, const EmbeddedBody& ref,
                                               std::span<const double> eps_grid, std::size_t n_samples,
                                               const RandomSource& rng, int workers = 1) {
  check_eps_grid(eps_grid);
  if (n_samples < 1) throw Error(ErrorKind::DomainError, "need at least one sample");
  if (k0.ambient_dim() < 3) throw Error(ErrorKind::DimensionError, "need n >= 3");
  if (ref.dim() != k0.ambient_dim() - 2) throw Error(ErrorKind::DimensionError, "reference must have codimension 2");

  const PreparedShadow target = prepare_shadow(ref.body());
  std::vector<std::vector<char>> hit(n_samples);
  parallel_for(n_samples, workers, [&](std::size_t i) {
    const PreparedShadow s = prepare_shadow(haar_shadow(k0, rng.substream(streams::kHaarPlane, i)).body());
    hit[i].resize(eps_grid.size());
    for (std::size_t e = 0; e < eps_grid.size(); ++e) hit[i][e] = epsilon_congruent(s, target, eps_grid[e]) ? 1 : 0;
  });

  std::vector<NEstimate> out;
  for (std::size_t e = 0; e < eps_grid.size(); ++e) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n_samples; ++i) hits += static_cast<std::size_t>(hit[i][e]);
    out.push_back(make_n_estimate(eps_grid[e], hits, n_samples));
  }
  return out;
}

inline NEstimate estimate_N(const Polytope& k0, const EmbeddedBody& ref, double eps, std::size_t n_samples,
                            const RandomSource& rng, int workers = 1) {
  const double grid[] = {eps};
  return estimate_N_sweep(k0, ref, grid, n_samples, rng, workers).front();
}

/// Every shadow of a ball is the same ball, so N = 1 exactly.
inline NEstimate estimate_N(const Ball& /*k0*/, double eps, std::size_t n_samples) {
  if (!(eps > 0.0)) throw Error(ErrorKind::DomainError, "epsilon must be positive");
  if (n_samples < 1) throw Error(ErrorKind::DomainError, "need at least one sample");
  return make_n_estimate(eps, n_samples, n_samples);
}

/// E[log N_eps] over K2; `divergent` when some inner fraction is zero.
struct ElogNEstimate {
  double epsilon = 0.0;
  bool divergent = false;
  double value = 0.0;
  Interval ci;
  std::size_t outer = 0;
  std::size_t inner = 0;
  std::vector<double> fractions;
};

inline ElogNEstimate summarize_log_fractions(double eps, std::vector<double> fractions, std::size_t inner) {
  ElogNEstimate r;
  r.epsilon = eps;
  r.outer = fractions.size();
  r.inner = inner;
  r.divergent = std::any_of(fractions.begin(), fractions.end(), [](double f) { return f <= 0.0; });
  if (r.divergent) {
    r.value = -std::numeric_limits<double>::infinity();
    r.ci = {r.value, r.value};
  } else {
    std::vector<double> logs;
    logs.reserve(fractions.size());
    for (double f : fractions) logs.push_back(std::log(f));
    r.value = mean(logs);
    double half = 0.0;
    if (logs.size() > 1) {
      std::vector<double> sq;
      for (double l : logs) sq.push_back((l - r.value) * (l - r.value));
      const double var = pairwise_sum(sq) / static_cast<double>(logs.size() - 1);
      half = kWilsonZ * std::sqrt(var / static_cast<double>(logs.size()));
    }
    r.ci = {r.value - half, std::min(0.0, r.value + half)};
  }
  r.fractions = std::move(fractions);
  return r;
}

/// Outer loop draws K2 from a Haar plane; the inner loop estimates N_eps(K0, K2)
/// for every eps of the grid on shared plane draws.
inline std::vector<ElogNEstimate> estimate_ElogN_sweep(const Polytope& k0, std::span<const double> eps_grid,
                                                       std::size_t outer, std::size_t inner,
                                                       const RandomSource& rng, int workers = 1) {
  check_eps_grid(eps_grid);
  if (outer < 1 || inner < 1) throw Error(ErrorKind::DomainError, "outer and inner must be >= 1");
  std::vector<std::vector<double>> per_eps(eps_grid.size(), std::vector<double>(outer, 0.0));
  for (std::size_t i = 0; i < outer; ++i) {
    const EmbeddedBody k2 = haar_shadow(k0, rng.substream(streams::kOuterShadow, i));
    const auto inner_est = estimate_N_sweep(k0, k2, eps_grid, inner, rng.substream(streams::kInnerPlanes, i), workers);
    for (std::size_t e = 0; e < eps_grid.size(); ++e) per_eps[e][i] = inner_est[e].fraction;
  }
  std::vector<ElogNEstimate> out;
  for (std::size_t e = 0; e < eps_grid.size(); ++e) out.push_back(summarize_log_fractions(eps_grid[e], per_eps[e], inner));
  return out;
}

inline ElogNEstimate estimate_ElogN(const Polytope& k0, double eps, std::size_t outer, std::size_t inner,
                                    const RandomSource& rng, int workers = 1) {
  const double grid[] = {eps};
  return estimate_ElogN_sweep(k0, grid, outer, inner, rng, workers).front();
}

inline ElogNEstimate estimate_ElogN(const Ball& /*k0*/, double eps, std::size_t outer, std::size_t inner) {
  if (outer < 1 || inner < 1) throw Error(ErrorKind::DomainError, "outer and inner must be >= 1");
  return summarize_log_fractions(eps, std::vector<double>(outer, 1.0), inner);
}

/// ln(pi^{n/2-2} / Gamma((n-2)/2)), the dimension-only term of the bound.
inline double theorem1_first_term(int n) {
  if (n < 3) throw Error(ErrorKind::DomainError, "bound needs n >= 3");
  return (0.5 * n - 2.0) * std::log(std::numbers::pi) - log_gamma(0.5 * (n - 2));
}

/// First term minus E[log N]; +infinity when E[log N] diverges.
inline double theorem1_bound(int n, const ElogNEstimate& e_log_n) {
  const double first = theorem1_first_term(n);
  if (e_log_n.divergent) return std::numeric_limits<double>::infinity();
  return first - e_log_n.value;
}

inline double theorem1_bound(int n, double e_log_n) {
  const double first = theorem1_first_term(n);
  if (!std::isfinite(e_log_n)) return std::numeric_limits<double>::infinity();
  return first - e_log_n;
}

/// Plug-in mutual information (nats) of two label sequences.
struct MIEstimate {
  double value = 0.0;
  std::size_t n_samples = 0;
  std::size_t classes_x = 0;
  std::size_t classes_y = 0;
  std::size_t classes_joint = 0;
  double entropy_x = 0.0;
  double entropy_y = 0.0;
};

namespace detail {

template <class Key>
double plugin_entropy(const std::map<Key, std::size_t>& counts, std::size_t n) {
  std::vector<double> terms;
  terms.reserve(counts.size());
  for (const auto& [k, c] : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(n);
    terms.push_back(-p * std::log(p));
  }
  return pairwise_sum(terms);
}

}  // namespace detail

inline MIEstimate plugin_mi(std::span<const int> x, std::span<const int> y) {
  if (x.size() != y.size() || x.empty()) throw Error(ErrorKind::DomainError, "label sequences must be non-empty and equal length");
  std::map<int, std::size_t> cx, cy;
  std::map<std::pair<int, int>, std::size_t> cxy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ++cx[x[i]];
    ++cy[y[i]];
    ++cxy[{x[i], y[i]}];
  }
  MIEstimate r;
  r.n_samples = x.size();
  r.classes_x = cx.size();
  r.classes_y = cy.size();
  r.classes_joint = cxy.size();
  r.entropy_x = detail::plugin_entropy(cx, x.size());
  r.entropy_y = detail::plugin_entropy(cy, x.size());
  const double hxy = detail::plugin_entropy(cxy, x.size());
  r.value = std::clamp(r.entropy_x + r.entropy_y - hxy, 0.0, std::min(r.entropy_x, r.entropy_y));
  return r;
}

/// Shape-class labels of K1, K2 and Km along the same sampled chains.
struct StageLabels {
  int m = 0;
  std::vector<int> first;
  std::vector<int> second;
  std::vector<int> last;
};

inline StageLabels sample_stage_labels(const Body& k0, int m, std::size_t n_samples, double delta,
                                       const RandomSource& rng, int workers = 1) {
  const int n = body_dim(k0);
  if (m < 2 || m > n - 1) throw Error(ErrorKind::DimensionError, "need 2 <= m <= n - 1");
  if (n_samples < 1) throw Error(ErrorKind::DomainError, "need at least one sample");
  if (!(delta > 0.0)) throw Error(ErrorKind::DomainError, "descriptor grid must be positive");
  StageLabels out;
  out.m = m;
  if (const Ball* ball = std::get_if<Ball>(&k0)) {
    (void)ball;
    out.first.assign(n_samples, 0);
    out.second.assign(n_samples, 0);
    out.last.assign(n_samples, 0);
    return out;
  }
  const Polytope& poly = std::get<Polytope>(k0);
  struct Triple {
    ShapeDescriptor first, second, last;
  };
  std::vector<Triple> desc(n_samples);
  parallel_for(n_samples, workers, [&](std::size_t i) {
    RandomSource r = rng.substream(streams::kChain, i);
    const DirectionChain chain = sample_chain(r, n, m);
    const std::vector<EmbeddedBody> bodies = project_chain(poly, chain);
    desc[i] = {shape_descriptor(bodies[0], delta), shape_descriptor(bodies[1], delta),
               shape_descriptor(bodies[static_cast<std::size_t>(m) - 1], delta)};
  });
  auto label = [](std::map<ShapeDescriptor, int>& ids, const ShapeDescriptor& d) {
    auto [it, inserted] = ids.try_emplace(d, static_cast<int>(ids.size()));
    return it->second;
  };
  std::map<ShapeDescriptor, int> id1, id2, idm;
  for (const Triple& t : desc) {
    out.first.push_back(label(id1, t.first));
    out.second.push_back(label(id2, t.second));
    out.last.push_back(label(idm, t.last));
  }
  return out;
}

/// Plug-in I(K1; Km | K0) for the fixed body K0.
inline MIEstimate estimate_conditional_mi(const Body& k0, int m, std::size_t n_samples, double delta,
                                          const RandomSource& rng, int workers = 1) {
  const StageLabels labels = sample_stage_labels(k0, m, n_samples, delta, rng, workers);
  return plugin_mi(labels.first, labels.last);
}

struct DpiReport {
  int m = 0;
  MIEstimate first_pair;  // (K1, K2)
  MIEstimate last_pair;   // (K1, Km)
  double difference = 0.0;
  double stderr_diff = 0.0;
  std::size_t bootstrap = 0;
  bool pass = false;
};

/// Compares I(K1;Km) against I(K1;K2) on the same chains; the standard error
/// of the difference comes from paired bootstrap resamples of the chains.
inline DpiReport validate_dpi(const Body& k0, int m, std::size_t n_samples, double delta, const RandomSource& rng,
                              int workers = 1, std::size_t bootstrap = 200) {
  if (m < 3) throw Error(ErrorKind::DomainError, "data-processing check needs m >= 3");
  if (bootstrap < 2) throw Error(ErrorKind::DomainError, "need at least two bootstrap resamples");
  const StageLabels labels = sample_stage_labels(k0, m, n_samples, delta, rng, workers);
  DpiReport r;
  r.m = m;
  r.bootstrap = bootstrap;
  r.first_pair = plugin_mi(labels.first, labels.second);
  r.last_pair = plugin_mi(labels.first, labels.last);
  r.difference = r.first_pair.value - r.last_pair.value;

  std::vector<double> diffs(bootstrap, 0.0);
  parallel_for(bootstrap, workers, [&](std::size_t b) {
    RandomSource br = rng.substream(streams::kBootstrap, b);
    std::vector<int> x(n_samples), y2(n_samples), ym(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
      const auto k = static_cast<std::size_t>(br.below(n_samples));
      x[i] = labels.first[k];
      y2[i] = labels.second[k];
      ym[i] = labels.last[k];
    }
    diffs[b] = plugin_mi(x, y2).value - plugin_mi(x, ym).value;
  });
  const double mu = mean(diffs);
  std::vector<double> sq;
  sq.reserve(diffs.size());
  for (double d : diffs) sq.push_back((d - mu) * (d - mu));
  r.stderr_diff = std::sqrt(pairwise_sum(sq) / static_cast<double>(diffs.size() - 1));
  r.pass = r.last_pair.value <= r.first_pair.value + 2.0 * r.stderr_diff;
  return r;
}

/// Everything needed to state the bound on I(K1;K2|K0) for one body.
struct BoundReport {
  int n = 0;
  double first_term = 0.0;
  ElogNEstimate e_log_n;
  double bound = 0.0;
  MIEstimate mi_plugin;
  double delta = 0.0;
};

inline BoundReport evaluate_bound(const Body& k0, double eps, std::size_t outer, std::size_t inner,
                                  std::size_t mi_samples, double delta, const RandomSource& rng, int workers = 1) {
  BoundReport r;
  r.n = body_dim(k0);
  r.first_term = theorem1_first_term(r.n);
  r.delta = delta;
  if (const Ball* ball = std::get_if<Ball>(&k0)) {
    r.e_log_n = estimate_ElogN(*ball, eps, outer, inner);
  } else {
    r.e_log_n = estimate_ElogN(std::get<Polytope>(k0), eps, outer, inner, rng, workers);
  }
  r.bound = theorem1_bound(r.n, r.e_log_n);
  r.mi_plugin = estimate_conditional_mi(k0, 2, mi_samples, delta, rng, workers);
  return r;
}

}  // namespace shadowlab
