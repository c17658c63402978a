#include "ghmc/minkowski.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace ghmc;

namespace {

GeneratorMap random_rho(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.7);
  GeneratorMap rho;
  for (auto& g : rho) {
    Mat2 a;
    a << 1.0 + std::abs(n(rng)), n(rng), 0.0, 0.0;
    a(1, 1) = 1.0 / a(0, 0);
    Mat2 b;
    b << 1.0, 0.0, n(rng), 1.0;
    g = psl2_to_so21(a * b);
  }
  return rho;
}

}  // namespace

TEST(Minkowski, InnerProductSignature) {
  EXPECT_DOUBLE_EQ(mink_inner({0, 0, 1}, {0, 0, 1}), -1.0);
  EXPECT_DOUBLE_EQ(mink_inner({1, 0, 0}, {1, 0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(mink_inner({1, 0, 0}, {0, 0, 1}), 0.0);
}

TEST(Minkowski, HyperbolicDistance) {
  const Vec21 o = hyp_origin();
  EXPECT_NEAR(hyp_dist(o, o), 0.0, 1e-15);
  EXPECT_NEAR(hyp_dist(o, {0.0, std::sinh(1.0), std::cosh(1.0)}), 1.0, 1e-12);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  auto point = [&] {
    const double x = n(rng), y = n(rng);
    return Vec21(x, y, std::sqrt(1.0 + x * x + y * y));
  };
  for (int i = 0; i < 200; ++i) {
    const Vec21 a = point(), b = point(), c = point();
    EXPECT_LE(hyp_dist(a, c), hyp_dist(a, b) + hyp_dist(b, c) + 1e-12);
  }
}

TEST(Minkowski, AdjointRepresentation) {
  EXPECT_LE((psl2_to_so21(Mat2::Identity()) - Iso21::Identity()).norm(), 1e-15);
  const Iso21 p = psl2_to_so21((Mat2() << 1, 1, 0, 1).finished());
  EXPECT_NEAR(p.trace(), 3.0, 1e-12);
  const Iso21 d = psl2_to_so21((Mat2() << std::exp(0.5), 0, 0, std::exp(-0.5)).finished());
  Eigen::Vector3d ev = d.eigenvalues().real();
  std::sort(ev.data(), ev.data() + 3);
  EXPECT_NEAR(ev[0], std::exp(-1.0), 1e-12);
  EXPECT_NEAR(ev[1], 1.0, 1e-12);
  EXPECT_NEAR(ev[2], std::exp(1.0), 1e-12);
  EXPECT_LE(iso_defect(d), 1e-12);
}

TEST(Minkowski, AffineGroupLaw) {
  const GeneratorMap rho = random_rho(5);
  const Vec21 x(0.3, -1.0, 2.0), y(1.0, 0.5, -0.2);
  const AffineIso tx{Iso21::Identity(), x}, ty{Iso21::Identity(), y};
  EXPECT_LE((aff_compose(tx, ty).translation - (x + y)).norm(), 1e-15);
  const AffineIso g{rho[0], Vec21::Zero()};
  const AffineIso gy = aff_compose(g, ty);
  EXPECT_LE((gy.linear - rho[0]).norm(), 1e-15);
  EXPECT_LE((gy.translation - rho[0] * y).norm(), 1e-12);
  const AffineIso a{rho[1], x};
  const AffineIso e = aff_compose(a, aff_inverse(a));
  EXPECT_LE((e.linear - Iso21::Identity()).norm(), 1e-12);
  EXPECT_LE(e.translation.norm(), 1e-12);
}

TEST(Minkowski, CocycleEvaluation) {
  const GeneratorMap rho = random_rho(11);
  Cocycle tau;
  tau << 1, 2, 3, 4, -1, 0.5, 0.2, 0.3, 0.7, -0.4, 1.1, 0.0;
  EXPECT_EQ(cocycle_eval(rho, tau, Word{}).norm(), 0.0);
  EXPECT_LE((cocycle_eval(rho, tau, Word{-2}) + iso_inverse(rho[1]) * tau.col(1)).norm(), 1e-12);
  EXPECT_LE((cocycle_eval(rho, tau, Word{1, 2}) - (tau.col(0) + rho[0] * tau.col(1))).norm(), 1e-12);
  // tau(gh) = tau(g) + rho(g) tau(h) on longer words
  const Word g{1, -3, 4}, h{2, 2, -1};
  const Vec21 lhs = cocycle_eval(rho, tau, word_concat(g, h));
  const Vec21 rhs = cocycle_eval(rho, tau, g) + eval_word(rho, g) * cocycle_eval(rho, tau, h);
  EXPECT_LE((lhs - rhs).norm(), 1e-10 * rhs.norm());
  // the jacobian is the linear map tau -> tau(w)
  EXPECT_LE((cocycle_jacobian(rho, g) * cocycle_vec(tau) - cocycle_eval(rho, tau, g)).norm(), 1e-10);
}

TEST(Minkowski, CoboundaryReduction) {
  const GeneratorMap rho = random_rho(17);
  const Vec21 v0(0.4, -1.2, 0.9);
  const auto fit = coboundary_reduce(rho, coboundary(rho, v0));
  EXPECT_LE((fit.vertex - v0).norm(), 1e-10);
  EXPECT_LE(fit.residual, 1e-10);
  const auto zero = coboundary_reduce(rho, Cocycle::Zero());
  EXPECT_EQ(zero.vertex.norm(), 0.0);
  EXPECT_EQ(zero.residual, 0.0);
  Cocycle perturbed = coboundary(rho, v0);
  perturbed(1, 2) += 0.1;
  EXPECT_GT(coboundary_reduce(rho, perturbed).residual, 1e-3);
}

TEST(Minkowski, Words) {
  EXPECT_EQ(word_reduce(Word{1, 2, -2, -1, 3}), (Word{3}));
  EXPECT_EQ(word_inverse(Word{1, -2}), (Word{2, -1}));
  const GeneratorMap rho = random_rho(2);
  EXPECT_LE((eval_word(rho, Word{1, -1}) - Iso21::Identity()).norm(), 1e-12);
}

TEST(Minkowski, IsometryProjection) {
  const GeneratorMap rho = random_rho(9);
  Iso21 g = rho[2];
  g(0, 1) += 1e-7;
  EXPECT_GT(iso_defect(g), 1e-8);
  const Iso21 p = iso_project(g);
  EXPECT_LE(iso_defect(p), 1e-14);
  EXPECT_LE((p - rho[2]).norm(), 1e-6);
}
