#include "ghmc/labourie.hpp"

#include <gtest/gtest.h>

using namespace ghmc;

namespace {

struct Fixture {
  MarkedMetric h = fn_to_holonomy(FNCoords{{2.0, 2.0, 2.0}, {0.3, -0.2, 0.5}});
  MarkedMetric h2 = fn_to_holonomy(FNCoords{{2.2, 1.8, 2.1}, {0.1, -0.3, 0.4}});
  MeshTemplate tmpl = build_template(h, 0.1);
  MetricContext ctx = MetricContext::build(h, tmpl);
  LabourieSolution generic = labourie_field(h2.lengths, ctx);
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

double det_defect(const OperatorField& b) {
  double d = 0.0;
  for (const auto& m : b) d = std::max(d, std::abs(m.determinant() - 1.0));
  return d;
}

}  // namespace

TEST(MongeAmpere, ZeroFieldGivesUnitPotential) {
  const auto& f = fixture();
  const auto s = monge_ampere_solve(*f.ctx.mesh, OperatorField(f.ctx.mesh->num_vertices(), Mat2::Zero()));
  EXPECT_LE((s.f.array() - 1.0).abs().maxCoeff(), 1e-12);
  EXPECT_EQ(s.iterations, 0);
}

TEST(MongeAmpere, SmallFieldConvergesQuickly) {
  const auto& f = fixture();
  Eigen::Matrix<double, 6, 1> co;
  co << 0.05, -0.03, 0.04, 0.02, -0.06, 0.03;
  co *= 0.1 * std::sqrt(f.ctx.mesh->total_area()) / co.norm();
  const auto s = monge_ampere_solve(*f.ctx.mesh, f.ctx.combine(co));
  EXPECT_LE(s.iterations, 15);
  EXPECT_LE(s.residual, 1e-8);
  EXPECT_GT(s.min_eigenvalue, 0.0);
  EXPECT_LE(det_defect(s.b), 1e-8);
}

TEST(MongeAmpere, NonPositiveStartThrows) {
  const auto& f = fixture();
  const int n = f.ctx.mesh->num_vertices();
  const ScalarField start = ScalarField::Constant(n, -1.0);
  EXPECT_THROW(monge_ampere_solve(*f.ctx.mesh, OperatorField(n, Mat2::Zero()), {}, &start), SolverError);
}

TEST(DevelopingMap, IdentityFieldReproducesLengths) {
  const auto& f = fixture();
  const auto l = deformed_marking_lengths(*f.ctx.mesh, OperatorField(f.ctx.mesh->num_vertices(), Mat2::Identity()));
  EXPECT_LE(teich_distance(l, f.h.lengths), 1e-5);
}

TEST(Labourie, SameMetricGivesIdentity) {
  const auto& f = fixture();
  const auto s = labourie_field(f.h.lengths, f.ctx);
  EXPECT_LE(s.coeffs.cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(bms_F(*f.ctx.mesh, s), 8.0 * M_PI, 1e-6 * 8.0 * M_PI);
}

TEST(Labourie, GenericTargetIsMatched) {
  const auto& f = fixture();
  EXPECT_LE(f.generic.mismatch, 1e-3);
  EXPECT_LE(det_defect(f.generic.ma.b), 1e-6);
  EXPECT_GT(f.generic.ma.min_eigenvalue, 0.0);
  EXPECT_LE(teich_distance(f.generic.lengths, f.h2.lengths), 1e-3);
  // F(h', h) > F(h, h) away from the diagonal.
  EXPECT_GT(bms_F(*f.ctx.mesh, f.generic), 8.0 * M_PI);
}

TEST(Labourie, DerivativeIsLinearAndVanishesOnDiagonal) {
  const auto& f = fixture();
  const auto& mesh = *f.ctx.mesh;
  const auto& a0 = f.ctx.basis.fields[0];
  const auto& a1 = f.ctx.basis.fields[1];
  const double d0 = bms_dF(mesh, f.generic.ma.b, a0);
  const double d1 = bms_dF(mesh, f.generic.ma.b, a1);
  const double d01 = bms_dF(mesh, f.generic.ma.b, field_axpy(2.0, a0, field_axpy(-3.0, a1, OperatorField(a0.size(), Mat2::Zero()))));
  EXPECT_NEAR(d01, 2.0 * d0 - 3.0 * d1, 1e-10 * (std::abs(d0) + std::abs(d1) + 1.0));
  const OperatorField id(mesh.num_vertices(), Mat2::Identity());
  for (const auto& a : f.ctx.basis.fields) EXPECT_LE(std::abs(bms_dF(mesh, id, a)), 1e-8);
}

TEST(Labourie, DerivativeMatchesFiniteDifference) {
  const auto& f = fixture();
  const auto& a = f.ctx.basis.fields[2];
  const double t = 1e-3;
  const double analytic = bms_dF(*f.ctx.mesh, f.generic.ma.b, a);
  double fs[2];
  for (int s = 0; s < 2; ++s) {
    const auto ct = MetricContext::build(metric_along(f.ctx, a, s ? -t : t), f.tmpl);
    fs[s] = bms_F(*ct.mesh, labourie_field(f.h2.lengths, ct));
  }
  const double fd = (fs[0] - fs[1]) / (2.0 * t);
  EXPECT_LE(std::abs(fd - analytic), 2e-2 * std::abs(analytic));
}

TEST(Labourie, MetricAlongZeroIsBase) {
  const auto& f = fixture();
  EXPECT_LE(teich_distance(metric_along(f.ctx, f.ctx.basis.fields[0], 0.0), f.h), 1e-5);
}
