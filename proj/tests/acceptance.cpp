// Acceptance suite: one PASS/FAIL line per criterion; exit status is the
// number of failures. Optional argv[1] is the shadowlab CLI used by the
// reproducibility criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "shadowlab/shadowlab.hpp"

using namespace shadowlab;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
// Kolmogorov critical value at alpha = 0.01.
constexpr double kKs01 = 1.628;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(double x) { return format_double(x); }

Polytope poly(const std::string& name, BodyParams p) { return std::get<Polytope>(generate_body(name, p)); }

Polytope random_body(RandomSource& rng, int n, std::uint64_t seed) {
  const int points = n + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(3 * n)));
  return poly("random-hull", {.n = n, .points = points, .seed = seed});
}

double ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / static_cast<double>(a.size()) -
                             static_cast<double>(j) / static_cast<double>(b.size())));
  }
  return d;
}

bool maps_onto_itself(const Matrix& g, const Matrix& v) {
  const Matrix image = g * v;
  for (Eigen::Index i = 0; i < v.cols(); ++i) {
    if ((v.colwise() - image.col(i)).colwise().norm().minCoeff() > 1e-9) return false;
  }
  return true;
}

std::size_t signed_permutation_oracle(const Polytope& p) {
  const Eigen::Index n = p.ambient_dim();
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t count = 0;
  do {
    for (int s = 0; s < (1 << n); ++s) {
      Matrix g = Matrix::Zero(n, n);
      for (Eigen::Index i = 0; i < n; ++i) g(perm[static_cast<std::size_t>(i)], i) = ((s >> i) & 1) ? -1.0 : 1.0;
      if (maps_onto_itself(g, p.vertices())) ++count;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return count;
}

std::size_t simplex_permutation_oracle(const Polytope& s) {
  const Polytope c = centered_extremes(s);
  const Eigen::Index n = c.ambient_dim();
  const Matrix base_inv = c.vertices().leftCols(n).inverse();
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(c.size()));
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t count = 0;
  do {
    Matrix target(n, n);
    for (Eigen::Index i = 0; i < n; ++i) target.col(i) = c.vertex(perm[static_cast<std::size_t>(i)]);
    const Matrix g = target * base_inv;
    if ((g.transpose() * g - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-9) ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return count;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("shadowlab_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> tokens(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (std::string(",:[]{}\n \"").find(ch) != std::string::npos) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Equal text except numeric tokens, which may differ by tol relative to max(1, |x|).
bool numerically_equal(const std::string& a, const std::string& b, double tol, std::string& why) {
  const auto ta = tokens(a), tb = tokens(b);
  if (ta.size() != tb.size()) {
    why = "token counts differ";
    return false;
  }
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (ta[i] == tb[i]) continue;
    char* ea = nullptr;
    char* eb = nullptr;
    const double x = std::strtod(ta[i].c_str(), &ea);
    const double y = std::strtod(tb[i].c_str(), &eb);
    if (*ea != '\0' || *eb != '\0' || !(std::abs(x - y) <= tol * std::max(1.0, std::abs(x)))) {
      why = ta[i] + " vs " + tb[i];
      return false;
    }
  }
  return true;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

// ---------------------------------------------------------------------------

Outcome closed_form_constants() {
  Outcome o;
  const double lgv3 = log_grassmannian_volume(3), lgv4 = log_grassmannian_volume(4), ls3 = log_sphere_area(3);
  // 20-digit references for ln 8 pi^2, ln 8 pi^3, ln 4 pi, -ln pi.
  o.require(std::abs(lgv3 - 4.3689013133786362765) <= 1e-12, "ln Vol G(3,2) = " + fmt(lgv3));
  o.require(std::abs(lgv4 - 5.5136311992280364507) <= 1e-12, "ln Vol G(4,2) = " + fmt(lgv4));
  o.require(std::abs(ls3 - 2.5310242469692907930) <= 1e-12, "ln |S^2| = " + fmt(ls3));
  o.require(theorem1_first_term(4) == 0.0, "first term n=4 = " + fmt(theorem1_first_term(4)));
  o.require(std::abs(theorem1_first_term(3) + 1.1447298858494001741) <= 1e-12,
            "first term n=3 = " + fmt(theorem1_first_term(3)));
  o.note("ln 8pi^2 = " + fmt(lgv3) + ", ln 8pi^3 = " + fmt(lgv4));
  return o;
}

Outcome lipschitz_suite() {
  Outcome o;
  RandomSource rng(1001, 0);
  int violations = 0;
  double worst_ratio = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int n = 3 + t % 4;
    const Polytope k0 = random_body(rng, n, 5000u + static_cast<std::uint64_t>(t));
    const Vector u = sample_unit_sphere(rng, n);
    Vector v = sample_unit_sphere(rng, n);
    if (t % 2 == 1) v = (u + std::pow(10.0, -1.0 - static_cast<double>(t % 5)) * rng.normal_vector(n)).normalized();
    const double dh = hausdorff(project_out(k0, u).embed(), project_out(k0, v).embed());
    const double bound = 2.0 * circumradius(k0) * (u - v).norm();
    if (!(dh <= bound)) ++violations;
    if (bound > 0.0) worst_ratio = std::max(worst_ratio, dh / bound);
  }
  o.require(violations == 0, std::to_string(violations) + " violations");
  o.note("1000 triples, max d_H/(2R|u-v|) = " + fmt(worst_ratio));
  return o;
}

Outcome chain_identity() {
  Outcome o;
  RandomSource rng(1002, 0);
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const int n = 3 + t % 4;
    const int m = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
    const Polytope k0 = random_body(rng, n, 9000u + static_cast<std::uint64_t>(t));
    const DirectionChain chain = sample_chain(rng, n, m);
    const auto steps = project_chain(k0, chain);
    for (int i = 1; i <= m; ++i) {
      const EmbeddedBody direct = project_direct(k0, chain, static_cast<std::size_t>(i));
      worst = std::max(worst, hausdorff(steps[static_cast<std::size_t>(i - 1)].embed(), direct.embed()));
    }
  }
  o.require(worst <= 1e-9, "max d_H = " + fmt(worst));
  o.note("500 pairs, max d_H = " + fmt(worst));
  return o;
}

Outcome ball_tightness() {
  Outcome o;
  const Ball ball{4, 1.0};
  for (double eps : {1.0, 0.5, 0.1, 0.01, 1e-6}) {
    const NEstimate e = estimate_N(ball, eps, 1000);
    o.require(e.fraction == 1.0, "N_hat(" + fmt(eps) + ") = " + fmt(e.fraction));
  }
  const RandomSource rng(1004, 0);
  const BoundReport r = evaluate_bound(Body(ball), 0.01, 50, 200, 2000, 0.05, rng);
  o.require(r.e_log_n.value == 0.0 && !r.e_log_n.divergent, "E[log N] = " + fmt(r.e_log_n.value));
  o.require(r.bound == 0.0, "bound = " + fmt(r.bound));
  o.require(r.mi_plugin.value == 0.0, "MI = " + fmt(r.mi_plugin.value));
  o.note("bound 0 = MI 0, equality");
  return o;
}

Outcome cube_divergence() {
  Outcome o;
  const fs::path dir = scratch("divergence");
  const Json cfg = Json::parse(R"({"body": {"name": "cube", "n": 3}, "seed": 1005,
      "samples": {"outer": 20, "inner": 2000}, "epsilon": [0.5, 0.2, 0.1, 0.05]})");
  ExperimentConfig c = parse_config(cfg);
  c.output_dir = dir.string();
  run(c, "estimate-n");

  const auto n_rows = read_csv(dir / "estimate_n.csv");
  std::vector<double> n_hat;
  for (std::size_t i = 1; i < n_rows.size(); ++i) n_hat.push_back(std::stod(n_rows[i][2]));
  bool monotone = n_hat.size() == 4;
  for (std::size_t i = 1; i < n_hat.size(); ++i) monotone = monotone && n_hat[i] <= n_hat[i - 1];
  o.require(monotone, "N_hat not monotone");

  const auto l_rows = read_csv(dir / "e_log_n.csv");
  std::vector<double> elog;
  std::vector<std::string> flags;
  for (std::size_t i = 1; i < l_rows.size(); ++i) {
    elog.push_back(std::stod(l_rows[i][2]));
    flags.push_back(l_rows[i][9]);
  }
  // Divergence: each value is DIVERGENT or strictly below the previous one, and
  // the last finite drop is not flattening out (at least a quarter of ln(eps ratio)).
  bool decreasing = elog.size() == 4;
  const std::vector<double> eps = c.epsilon;
  for (std::size_t i = 1; i < elog.size(); ++i) {
    const bool divergent = flags[i].find("DIVERGENT") != std::string::npos;
    if (divergent) continue;
    decreasing = decreasing && elog[i] < elog[i - 1];
    if (i + 1 == elog.size()) {
      const double drop = elog[i - 1] - elog[i];
      decreasing = decreasing && drop >= 0.25 * std::log(eps[i - 1] / eps[i]);
    }
  }
  o.require(decreasing, "E[log N] shows a lower plateau");
  bool flagged = !flags.empty();
  for (const auto& f : flags) flagged = flagged && f.find("FINITE_GROUP_DEGENERATE") != std::string::npos;
  o.require(flagged, "FINITE_GROUP_DEGENERATE flag missing");
  std::string summary = "N_hat";
  for (double x : n_hat) summary += " " + fmt(x);
  summary += "; E[log N]";
  for (std::size_t i = 0; i < elog.size(); ++i) {
    summary += " " + (flags[i].find("DIVERGENT") != std::string::npos ? std::string("DIVERGENT") : fmt(elog[i]));
  }
  o.note(summary);
  fs::remove_all(dir);
  return o;
}

Outcome dpi_check() {
  Outcome o;
  const Polytope cube = poly("cube", {.n = 5});
  const double delta = 0.05 * circumradius(centered_extremes(cube));
  const RandomSource rng(1006, 0);
  const DpiReport r = validate_dpi(Body(cube), 4, 5000, delta, rng, 1, 200);
  o.require(r.pass && r.last_pair.value <= r.first_pair.value + 2.0 * r.stderr_diff,
            "I(K1;K4) = " + fmt(r.last_pair.value) + " > I(K1;K2) + 2se = " +
                fmt(r.first_pair.value + 2.0 * r.stderr_diff));
  const DpiReport b = validate_dpi(Body(Ball{5, 1.0}), 4, 5000, 0.05, rng, 1, 200);
  o.require(b.first_pair.value == 0.0 && b.last_pair.value == 0.0, "ball MI not exactly 0");
  o.note("I(K1;K2) = " + fmt(r.first_pair.value) + ", I(K1;K4) = " + fmt(r.last_pair.value) +
         ", se = " + fmt(r.stderr_diff) + "; ball 0, 0");
  return o;
}

Outcome symmetry_orbits() {
  Outcome o;
  const Polytope square = poly("cube", {.n = 2});
  const Polytope cube = poly("cube", {.n = 3});
  const Polytope tet = poly("simplex-regular", {.n = 3});
  const Polytope generic = poly("simplex-random", {.n = 3, .seed = 1007});
  const struct {
    const char* name;
    const Polytope* p;
    std::size_t expect;
    std::size_t oracle;
  } cases[] = {
      {"square", &square, 8, signed_permutation_oracle(square)},
      {"cube", &cube, 48, signed_permutation_oracle(cube)},
      {"regular tetrahedron", &tet, 24, simplex_permutation_oracle(tet)},
      {"generic simplex", &generic, 1, simplex_permutation_oracle(generic)},
  };
  for (const auto& c : cases) {
    const std::size_t got = symmetry_group(*c.p).order();
    o.require(got == c.expect && got == c.oracle, std::string(c.name) + " order " + std::to_string(got) +
                                                      " (oracle " + std::to_string(c.oracle) + ")");
  }
  const SymmetryGroup g = symmetry_group(cube);
  const Subspace xy = Subspace::from_orthonormal(Matrix::Identity(3, 2));
  o.require(stabilizer(g, xy).order() == 16 && orbit(g, xy).size() == 3, "xy-plane stabilizer/orbit");
  Matrix cols(3, 2);
  cols << 1.0, 0.3, 0.2, -0.7, 0.55, 0.1;
  const Subspace generic_plane = orthonormalize(cols);
  o.require(stabilizer(g, generic_plane).order() == 2 && orbit(g, generic_plane).size() == 24,
            "generic plane stabilizer/orbit");
  RandomSource rng(1007, 0);
  int bad = 0;
  for (int t = 0; t < 100; ++t) {
    const Subspace w = sample_grassmannian(rng, 3, 2);
    if (orbit(g, w).size() * stabilizer(g, w).order() != g.order()) ++bad;
  }
  o.require(bad == 0, std::to_string(bad) + " orbit-stabilizer mismatches");
  o.note("orders 8, 48, 24, 1; xy 16/3; generic 2/24; 100 Haar samples exact");
  return o;
}

Outcome stratification() {
  Outcome o;
  const SymmetryGroup g = symmetry_group(poly("cube", {.n = 3}));
  const RandomSource rng(1008, 0);
  const StratReport r = stratify(g, 3, 10000, rng);
  o.require(r.strata.size() == 1, std::to_string(r.strata.size()) + " strata observed");
  if (r.strata.size() == 1) {
    const Stratum& s = r.strata[0];
    o.require(s.class_rep.order() == 2 && s.class_rep.contains(-Matrix::Identity(3, 3)), "stratum is not {+-I}");
    o.require(s.mu_hat == 1.0, "mu_hat = " + fmt(s.mu_hat));
  }
  const LowerBound lb = theorem2_lower_bound(r, StrataMode::Counting);
  const double expect = std::log(48.0) - std::log(8.0 * kPi * kPi) - std::log(2.0);
  o.require(std::abs(lb.value - expect) <= 1e-9, "value " + fmt(lb.value) + " vs " + fmt(expect));
  o.require(lb.finite_group_degenerate, "degenerate flag not set");
  o.note("ln 48 - ln 8pi^2 - ln 2 = " + fmt(lb.value) + " (the rounded -1.19132 quoted alongside differs by " +
         fmt(std::abs(lb.value + 1.19132)) + ")");
  return o;
}

Outcome sampler_statistics() {
  Outcome o;
  for (int n : {3, 5, 8}) {
    RandomSource rng(1009 + static_cast<std::uint64_t>(n), 0);
    std::vector<double> xs;
    for (int t = 0; t < 10000; ++t) xs.push_back(std::pow(sample_unit_sphere(rng, n)(0), 2));
    const double d = ks_one_sample(xs, [&](double x) { return boost::math::ibeta(0.5, 0.5 * (n - 1), x); });
    const double crit = kKs01 / std::sqrt(10000.0);
    o.require(d < crit, "Beta KS n=" + std::to_string(n) + " D = " + fmt(d));
    o.note("Beta n=" + std::to_string(n) + " D=" + fmt(d));
  }
  const int n = 6;
  RandomSource qrng(1019, 0);
  const Matrix q = sample_grassmannian(qrng, n, n).basis();
  const Subspace ref = Subspace::from_orthonormal(Matrix::Identity(n, 2));
  RandomSource r1(1020, 0), r2(1020, 1);
  std::vector<double> plain, rotated;
  for (int t = 0; t < 5000; ++t) {
    plain.push_back(principal_angles(sample_grassmannian(r1, n, 2), ref).at(0));
    rotated.push_back(principal_angles(Subspace::from_orthonormal(q * sample_grassmannian(r2, n, 2).basis()), ref).at(0));
  }
  const double d = ks_two_sample(plain, rotated);
  const double crit = kKs01 * std::sqrt(2.0 / 5000.0);
  o.require(d < crit, "Grassmannian KS D = " + fmt(d));
  o.note("rotation KS D=" + fmt(d) + " < " + fmt(crit));
  return o;
}

Outcome reproducibility(const std::string& cli) {
  Outcome o;
  const fs::path root = scratch("repro");
  const Json cfg = Json::parse(R"({"body": {"name": "cube", "n": 4}, "m": 3, "seed": 1010,
      "samples": {"outer": 8, "inner": 200, "chains": 1000, "haar": 1000, "bootstrap": 100},
      "epsilon": [0.5, 0.25, 0.1]})");
  {
    std::ofstream(root / "config.json") << cfg.dump(2);
  }

  auto run_pipeline = [&](const fs::path& config, const fs::path& out, int workers) {
    if (!cli.empty()) {
      const std::string cmd = "\"" + cli + "\" full --config \"" + config.string() + "\" --out \"" + out.string() +
                              "\" --workers " + std::to_string(workers) + " > /dev/null";
      const int rc = std::system(cmd.c_str());
      if (rc != 0) throw Error(ErrorKind::IoError, "cli exited with status " + std::to_string(rc));
    } else {
      ExperimentConfig c = load_config(config);
      c.output_dir = out.string();
      run(c, "full", workers);
    }
  };

  const fs::path a = root / "first", b = root / "again", w = root / "workers8";
  run_pipeline(root / "config.json", a, 1);
  run_pipeline(a / "manifest.json", b, 1);
  run_pipeline(a / "manifest.json", w, 8);

  const Json manifest = Json::parse(slurp(a / "manifest.json"));
  std::size_t files = 0;
  for (auto it = manifest["outputs"].begin(); it != manifest["outputs"].end(); ++it) {
    const std::string file = it.value().get<std::string>();
    const std::string ta = slurp(a / file);
    ++files;
    o.require(!ta.empty(), file + " is empty");
    o.require(ta == slurp(b / file), file + " differs between identical runs");
    std::string why;
    o.require(numerically_equal(ta, slurp(w / file), 1e-12, why), file + " differs with 8 workers: " + why);
  }
  o.require(files == 9, "expected 9 output files, got " + std::to_string(files));
  o.note(std::to_string(files) + " files bitwise equal on rerun from manifest and within 1e-12 with 8 workers" +
         std::string(cli.empty() ? " (library)" : " (cli)"));
  fs::remove_all(root);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> criteria = {
      {1, "closed-form constants", 1, closed_form_constants},
      {2, "Lipschitz shadows", 30, lipschitz_suite},
      {3, "projection-chain identity", 60, chain_identity},
      {4, "ball tightness at n=4", 5, ball_tightness},
      {5, "cube divergence sweep", 300, cube_divergence},
      {6, "data-processing inequality", 300, dpi_check},
      {7, "symmetry and orbit-stabilizer", 60, symmetry_orbits},
      {8, "stratification lower bound", 120, stratification},
      {9, "sampler statistics", 60, sampler_statistics},
      {10, "reproducibility", 300, [&] { return reproducibility(cli); }},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_seconds) {
      o.pass = false;
      o.note("over runtime budget of " + fmt(c.budget_seconds) + " s");
    }
    if (!o.pass) ++failures;
    std::printf("criterion %2d %s  %-32s %7.2fs  %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures;
}
