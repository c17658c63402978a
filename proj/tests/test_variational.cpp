#include "ghmc/variational.hpp"

#include <gtest/gtest.h>

using namespace ghmc;

namespace {

MarkedMetric reference() { return fn_to_holonomy(FNCoords{{2.0, 2.0, 2.0}, {0.3, -0.2, 0.5}}); }

RealizationProblem symmetric(double k = -1.0) {
  RealizationProblem p;
  p.h1 = p.h2 = reference();
  p.k_plus = p.k_minus = k;
  return p;
}

}  // namespace

TEST(Variational, CurvatureScale) {
  EXPECT_DOUBLE_EQ(curvature_scale(-4.0, false), 2.0);
  EXPECT_DOUBLE_EQ(curvature_scale(-4.0, true), 0.5);
  EXPECT_THROW(curvature_scale(0.0, false), DomainError);
  EXPECT_THROW(curvature_scale(1.0, false), DomainError);
}

TEST(Variational, PsiOnDiagonal) {
  EXPECT_NEAR(psi_eval(symmetric(), reference()), 16.0 * M_PI, 1e-6 * 16.0 * M_PI);
  // c = 2 on both sides: Psi = 2 F(h, h) + 2 F(h, h).
  EXPECT_NEAR(psi_eval(symmetric(-4.0), reference()), 32.0 * M_PI, 1e-6 * 32.0 * M_PI);
}

TEST(Variational, PsiIsAdditiveInTheCurvatures) {
  RealizationProblem p = symmetric();
  p.h2 = fn_to_holonomy(FNCoords{{2.2, 1.8, 2.1}, {0.1, -0.3, 0.4}});
  const MarkedMetric h = fn_to_holonomy(FNCoords{{2.1, 1.9, 2.05}, {0.2, -0.25, 0.45}});
  PsiEvaluator ev(p);
  const PsiValue v = ev.evaluate(h, build_template(h, p.target_edge));
  p.k_plus = -4.0;
  p.k_minus = -0.25;
  PsiEvaluator ev2(p);
  const PsiValue w = ev2.evaluate(h, build_template(h, p.target_edge));
  EXPECT_NEAR(v.psi, v.f1 + v.f2, 1e-12 * v.psi);
  EXPECT_NEAR(w.psi, 2.0 * v.f1 + 0.5 * v.f2, 1e-8 * w.psi);
  EXPECT_GT(v.f1, 8.0 * M_PI);
  EXPECT_GT(v.f2, 8.0 * M_PI);
}

TEST(Variational, SymmetricMinimizerIsTheMetric) {
  const RealizationProblem p = symmetric();
  MinimizeOptions opt;
  opt.start = reference().fn;
  const MinimizerCertificate c = minimize_psi(p, opt);
  EXPECT_LE(teich_distance(c.h0, p.h1), 1e-3);
  EXPECT_LE(c.gradient_norm, 1e-3 * (p.c1() + p.c2()));
  EXPECT_NEAR(c.psi, 16.0 * M_PI, 1e-6 * 16.0 * M_PI);
  const PotentialResult r = extract_potential(c, p);
  EXPECT_LE((r.f.array() - 2.0).abs().maxCoeff(), 1e-6);
  EXPECT_LE(r.tracefree_residual, 1e-6);
  EXPECT_LE(r.decomposition.reconstruction, 1e-8);
}
