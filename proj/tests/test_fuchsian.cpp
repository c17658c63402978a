#include "ghmc/fuchsian.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace ghmc;

namespace {

const FNCoords kReference{{2.0, 2.0, 2.0}, {0.3, -0.2, 0.5}};

double relator_residual(const MarkedMetric& m) {
  return (m.eval(relator_word()) - Iso21::Identity()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(Fuchsian, RightAngledHexagonRelator) {
  const MarkedMetric m = fn_to_holonomy(FNCoords{{2.0, 2.0, 2.0}, {0.0, 0.0, 0.0}});
  EXPECT_LE(relator_residual(m), 1e-10);
  EXPECT_LE(relator_residual(fn_to_holonomy(kReference)), 1e-10);
}

TEST(Fuchsian, PantsCurveTrace) {
  const MarkedMetric m = fn_to_holonomy(kReference);
  // an SO(2,1) hyperbolic element of translation length l has trace 1 + 2 cosh l
  EXPECT_NEAR(m.gens[0].trace(), 1.0 + 2.0 * std::cosh(2.0), 1e-9);
  EXPECT_NEAR(std::abs(m.sl2[0].trace()), 2.0 * std::cosh(1.0), 1e-10);
  EXPECT_NEAR(curve_length(m, Word{1}), 2.0, 1e-10);
  EXPECT_GT(m.lengths.minCoeff(), 0.0);
}

TEST(Fuchsian, CurveLengthInvariance) {
  const MarkedMetric m = fn_to_holonomy(kReference);
  const Word w{1, 3, -2}, v{4, 2};
  const double l = curve_length(m, w);
  EXPECT_NEAR(curve_length(m, word_concat(word_concat(v, w), word_inverse(v))), l, 1e-7 * l);
  EXPECT_NEAR(curve_length(m, word_concat(w, w)), 2.0 * l, 1e-7 * l);
  EXPECT_THROW(curve_length(m, Word{}), DomainError);
}

TEST(Fuchsian, DirichletDomain) {
  const MarkedMetric m = fn_to_holonomy(kReference);
  const Vec21 p = hyp_normalize(Vec21(0.05, -0.03, 1.0));
  const FundamentalDomain d = dirichlet_domain(m, p);
  EXPECT_NEAR(d.area, 4.0 * std::numbers::pi, 1e-6);
  EXPECT_NEAR(detail::polygon_area(d.vertices), 4.0 * std::numbers::pi, 1e-6);
  EXPECT_TRUE(d.contains(p));
  // side pairings carry each side onto its partner
  for (int i = 0; i < d.num_sides(); ++i) {
    const int j = d.partner[i];
    const Iso21& g = d.pairing[i].matrix;
    const Vec21 a = g * d.vertices[i], b = g * d.vertices[(i + 1) % d.num_sides()];
    const Vec21 pa = d.vertices[j], pb = d.vertices[(j + 1) % d.num_sides()];
    EXPECT_LE(std::min((a - pb).norm() + (b - pa).norm(), (a - pa).norm() + (b - pb).norm()), 1e-7);
  }
}

TEST(Fuchsian, TeichmuellerDistance) {
  const MarkedMetric a = fn_to_holonomy(kReference);
  const MarkedMetric b = fn_to_holonomy(FNCoords{{2.2, 1.8, 2.1}, {0.1, -0.3, 0.4}});
  EXPECT_EQ(teich_distance(a, a), 0.0);
  EXPECT_NEAR(teich_distance(a, b), teich_distance(b, a), 1e-14);
  FNCoords c = kReference;
  c.twist[1] += 1e-3;
  EXPECT_GT(teich_distance(a, fn_to_holonomy(c)), 0.0);
}

TEST(Fuchsian, LengthsDetermineCoordinates) {
  const FNCoords target{{2.1, 1.9, 2.3}, {0.2, -0.1, 0.35}};
  const FNCoords fit = fit_fn_to_lengths(fn_to_holonomy(target).lengths, kReference);
  EXPECT_LE((fit.as_vector() - target.as_vector()).cwiseAbs().maxCoeff(), 1e-8);
}
