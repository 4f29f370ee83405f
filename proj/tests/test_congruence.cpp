#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "shadowlab/bodies.hpp"
#include "shadowlab/congruence.hpp"
#include "shadowlab/random.hpp"

namespace shadowlab {
namespace {

Polytope body(const std::string& name, BodyParams p) { return std::get<Polytope>(generate_body(name, p)); }

Matrix rotation2(double a) {
  Matrix r(2, 2);
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

Polytope rect(double hx, double hy) { return body("box", {.n = 2, .half_widths = {hx, hy}}); }

bool maps_vertices_onto_themselves(const Matrix& g, const Matrix& v, double tol) {
  const Matrix image = g * v;
  for (Eigen::Index i = 0; i < v.cols(); ++i) {
    if ((v.colwise() - image.col(i)).colwise().norm().minCoeff() > tol) return false;
  }
  return true;
}

// Counts signed permutation matrices preserving the vertex set. Exact for
// bodies whose symmetries are all signed permutations.
std::size_t signed_permutation_order(const Polytope& p) {
  const Eigen::Index n = p.ambient_dim();
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t count = 0;
  do {
    for (int signs = 0; signs < (1 << n); ++signs) {
      Matrix g = Matrix::Zero(n, n);
      for (Eigen::Index i = 0; i < n; ++i) g(perm[static_cast<std::size_t>(i)], i) = ((signs >> i) & 1) ? -1.0 : 1.0;
      if (maps_vertices_onto_themselves(g, p.vertices(), 1e-9)) ++count;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return count;
}

// For a simplex every symmetry is a vertex permutation; count those whose
// induced linear map on centered vertices is orthogonal.
std::size_t simplex_permutation_order(const Polytope& s) {
  const Polytope c = centered_extremes(s);
  const Eigen::Index n = c.ambient_dim();
  const Matrix base = c.vertices().leftCols(n);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(c.size()));
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t count = 0;
  do {
    Matrix target(n, n);
    for (Eigen::Index i = 0; i < n; ++i) target.col(i) = c.vertex(perm[static_cast<std::size_t>(i)]);
    const Matrix g = target * base.inverse();
    if ((g.transpose() * g - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-9) ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return count;
}

TEST(Congruent, RotatedSquare) {
  const Polytope sq = rect(1, 1);
  const auto g = congruent(sq, sq.transformed(rotation2(0.5)), 1e-9);
  ASSERT_TRUE(g.has_value());
  EXPECT_LE(hausdorff(sq.transformed(*g), sq.transformed(rotation2(0.5))), 1e-9);
  EXPECT_LE((g->transpose() * *g - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Congruent, TranslationIsIgnored) {
  const Polytope sq = rect(1, 1);
  Vector shift(2);
  shift << 5.0, -3.0;
  EXPECT_TRUE(congruent(sq, sq.translated(shift), 1e-9).has_value());
}

TEST(Congruent, MirrorTriangleIsCongruent) {
  Matrix a(2, 3), b(2, 3);
  a << 0, 3, 0, 0, 0, 1;
  b << 0, -3, 0, 0, 0, 1;
  EXPECT_TRUE(congruent(Polytope(a), Polytope(b), 1e-9).has_value());
}

TEST(Congruent, RespectsTolerance) {
  const Polytope sq = rect(1, 1);
  const Polytope r = rect(1, 1.2);
  EXPECT_FALSE(congruent(sq, r, 0.05).has_value());
  EXPECT_TRUE(congruent(sq, r, 0.21).has_value());
}

TEST(Congruent, DifferentVertexCountsNotCongruentAtSmallTolerance) {
  Matrix tri(2, 3);
  tri << 1, -0.5, -0.5, 0, std::sqrt(3.0) / 2, -std::sqrt(3.0) / 2;
  EXPECT_FALSE(congruent(Polytope(tri), rect(1, 1), 1e-6).has_value());
}

TEST(Congruent, LargeToleranceAlwaysCongruent) {
  Matrix tri(2, 3);
  tri << 1, -0.5, -0.5, 0, std::sqrt(3.0) / 2, -std::sqrt(3.0) / 2;
  EXPECT_TRUE(congruent(Polytope(tri), rect(1, 1), 1.5).has_value());
}

TEST(Congruent, RandomOrthogonalImagesInThreeDimensions) {
  RandomSource rng(31, 0);
  for (int t = 0; t < 50; ++t) {
    const Polytope p = body("random-hull", {.n = 3, .points = 9, .seed = static_cast<std::uint64_t>(t)});
    const Matrix q = sample_grassmannian(rng, 3, 3).basis();
    ASSERT_TRUE(congruent(p, p.transformed(q), 1e-8).has_value()) << "trial " << t;
  }
}

TEST(SymmetryGroup, OrdersOfSignedPermutationBodies) {
  const Polytope cases[] = {
      body("cube", {.n = 2}),
      body("cube", {.n = 3}),
      body("cube", {.n = 4}),
      body("box", {.n = 3, .half_widths = {1, 1, 2}}),
      body("box", {.n = 3, .half_widths = {1, 2, 3}}),
      body("cross-polytope", {.n = 3}),
      body("cross-polytope", {.n = 4}),
  };
  for (const Polytope& p : cases) EXPECT_EQ(symmetry_group(p).order(), signed_permutation_order(p));
  EXPECT_EQ(symmetry_group(body("cube", {.n = 3})).order(), 48u);
  EXPECT_EQ(symmetry_group(body("cube", {.n = 4})).order(), 384u);
}

TEST(SymmetryGroup, SimplicesMatchPermutationOracle) {
  for (int n = 2; n <= 4; ++n) {
    const Polytope reg = body("simplex-regular", {.n = n});
    const std::size_t expect = simplex_permutation_order(reg);
    EXPECT_EQ(symmetry_group(reg).order(), expect);
    EXPECT_EQ(expect, static_cast<std::size_t>(std::tgamma(n + 2) + 0.5));
    const Polytope rnd = body("simplex-random", {.n = n, .seed = 77});
    EXPECT_EQ(symmetry_group(rnd).order(), simplex_permutation_order(rnd));
  }
}

TEST(SymmetryGroup, PrismOverRegularPolygon) {
  EXPECT_EQ(symmetry_group(body("prism-regular-polygon", {.n = 3, .sides = 6})).order(), 24u);
  EXPECT_EQ(symmetry_group(body("prism-regular-polygon", {.n = 3, .sides = 5})).order(), 20u);
}

TEST(SymmetryGroup, GroupAxiomsHold) {
  const SymmetryGroup g = symmetry_group(body("cube", {.n = 3}));
  EXPECT_TRUE(g.contains(Matrix::Identity(3, 3)));
  for (const Matrix& a : g.elements()) {
    ASSERT_TRUE(g.contains(a.transpose()));
    ASSERT_LE((a.transpose() * a - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-10);
    for (const Matrix& b : g.elements()) ASSERT_TRUE(g.contains(a * b));
  }
}

TEST(SymmetryGroup, FromElementsRejectsNonClosedSet) {
  Matrix r = Matrix::Identity(2, 2);
  r(0, 0) = -1;
  EXPECT_NO_THROW(SymmetryGroup::from_elements({Matrix::Identity(2, 2), r}));
  EXPECT_THROW(SymmetryGroup::from_elements({Matrix::Identity(2, 2), rotation2(std::numbers::pi / 2)}), Error);
  EXPECT_THROW(SymmetryGroup::from_elements({r}), Error);
}

TEST(SymmetryGroup, TrivialAndAntipodal) {
  EXPECT_EQ(SymmetryGroup::trivial(4).order(), 1u);
  EXPECT_EQ(SymmetryGroup::antipodal(4).order(), 2u);
  EXPECT_TRUE(SymmetryGroup::antipodal(3).contains(-Matrix::Identity(3, 3)));
}

TEST(SymmetryGroup, FlatBodyIsDegenerate) {
  Matrix v(3, 3);
  v << 1, 0, -1, 0, 1, 0, 0, 0, 0;
  try {
    symmetry_group(Polytope(v));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Degenerate);
  }
}

}  // namespace
}  // namespace shadowlab
