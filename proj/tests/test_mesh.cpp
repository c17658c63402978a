#include "ghmc/mesh.hpp"

#include <gtest/gtest.h>

#include <Eigen/SparseCholesky>

#include <numbers>

using namespace ghmc;

namespace {

const MarkedMetric& reference_metric() {
  static const MarkedMetric m = fn_to_holonomy(FNCoords{{2.0, 2.0, 2.0}, {0.3, -0.2, 0.5}});
  return m;
}

const EquivariantMesh& reference_mesh() {
  static const EquivariantMesh mesh = build_mesh(reference_metric(), 0.1);
  return mesh;
}

// Two elliptic smoothing steps of a function that is only defined on the
// vertex classes: (K + M) u = M g is smooth on the closed surface.
ScalarField smooth_field(const EquivariantMesh& mesh) {
  ScalarField g(mesh.num_vertices());
  for (int k = 0; k < mesh.num_vertices(); ++k) {
    const Vec21& x = mesh.position(k);
    g[k] = std::sin(1.3 * x[0]) + 0.5 * std::cos(0.7 * x[1] * x[2]);
  }
  SparseMatrix a = mesh.stiffness();
  for (int k = 0; k < mesh.num_vertices(); ++k) a.coeffRef(k, k) += mesh.mass()[k];
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(a);
  for (int i = 0; i < 2; ++i) g = ldlt.solve(mesh.mass().cwiseProduct(g));
  return 10.0 * g;
}

}  // namespace

TEST(Mesh, Topology) {
  const auto& mesh = reference_mesh();
  EXPECT_EQ(mesh.euler_characteristic(), -2);
  EXPECT_EQ(3 * mesh.num_faces(), 2 * mesh.num_edges());
}

TEST(Mesh, GaussBonnetArea) {
  const auto& mesh = reference_mesh();
  EXPECT_NEAR(mesh.total_area(), 4.0 * std::numbers::pi, 1e-4);
  EXPECT_NEAR(mesh.integrate(ScalarField::Ones(mesh.num_vertices())), 4.0 * std::numbers::pi, 1e-4);
}

TEST(Mesh, RefinementQuadruplesFaces) {
  const EquivariantMesh coarse = build_mesh(reference_metric(), 0.2);
  const double ratio = static_cast<double>(reference_mesh().num_faces()) / coarse.num_faces();
  EXPECT_GT(ratio, 3.0);
  EXPECT_LT(ratio, 5.0);
}

TEST(Mesh, IntegralIsLinearAndKillsLaplacian) {
  const auto& mesh = reference_mesh();
  const ScalarField u = smooth_field(mesh);
  const ScalarField v = ScalarField::Ones(mesh.num_vertices());
  EXPECT_NEAR(mesh.integrate(2.0 * u + 3.0 * v), 2.0 * mesh.integrate(u) + 3.0 * mesh.integrate(v), 1e-10);
  EXPECT_NEAR(mesh.integrate(mesh.laplacian(u)), 0.0, 1e-8);
  EXPECT_LE(mesh.laplacian(v).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Mesh, StiffnessIsSymmetricWithZeroRows) {
  const auto& k = reference_mesh().stiffness();
  EXPECT_LE((SparseMatrix(k.transpose()) - k).norm(), 1e-12 * k.norm());
  const ScalarField rows = k * ScalarField::Ones(k.cols());
  EXPECT_LE(rows.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Mesh, HessianOfConstantVanishes) {
  const auto& mesh = reference_mesh();
  for (const auto& h : mesh.hessian(ScalarField::Constant(mesh.num_vertices(), 3.0))) EXPECT_LE(h.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Mesh, HessianOfLinearFunctionIsScalar) {
  // u = <V, x> on the cover satisfies u(g x) = u(x) + <V - g V, g x>
  const auto& mesh = reference_mesh();
  const Vec21 v(0.3, -0.5, 0.8);
  TwistedScalar u;
  u.values.resize(mesh.num_vertices());
  for (int k = 0; k < mesh.num_vertices(); ++k) u.values[k] = mink_inner(v, mesh.position(k));
  Cocycle tau;
  for (int g = 0; g < kNumGenerators; ++g) tau.col(g) = v - mesh.metric().gens[g] * v;
  u.tau = cocycle_vec(tau);
  double worst = 0.0, scale = 0.0;
  for (int k = 0; k < mesh.num_vertices(); ++k) {
    worst = std::max(worst, (mesh.hessian_at(k, u) - u.values[k] * Mat2::Identity()).cwiseAbs().maxCoeff());
    scale = std::max(scale, std::abs(u.values[k]));
  }
  EXPECT_LE(worst, 1e-2 * scale);
}

TEST(Mesh, TraceOfHessianApproximatesLaplacian) {
  const auto& mesh = reference_mesh();
  const ScalarField u = smooth_field(mesh);
  const ScalarField lap = mesh.laplacian(u);
  const ScalarField tr = field_trace(mesh.hessian(u));
  // The lumped cotangent Laplacian is only weakly consistent on irregular
  // meshes, so the comparison is against the function itself.
  EXPECT_LE(std::abs(mesh.integrate(u.cwiseProduct(lap - tr))), 5e-2 * std::abs(mesh.integrate(u.cwiseProduct(lap))));
}

TEST(Mesh, TensorAlgebra) {
  const int n = 4;
  const OperatorField id(n, Mat2::Identity());
  for (double t : field_trace(id)) EXPECT_EQ(t, 2.0);
  for (double d : field_det(id)) EXPECT_EQ(d, 1.0);
  const OperatorField jj = field_compose(field_rotate(id), field_rotate(id));
  for (const auto& m : jj) EXPECT_LE((m + Mat2::Identity()).norm(), 1e-15);
  const Mat2 a = (Mat2() << 0.4, 0.7, 0.7, -0.4).finished();
  const Mat2 aj = a * rotation_j();
  EXPECT_LE(std::abs(aj.trace()), 1e-15);
  EXPECT_LE(std::abs(aj(0, 1) - aj(1, 0)), 1e-15);
}

TEST(Mesh, LocateFindsContainingFace) {
  const auto& mesh = reference_mesh();
  const Vec21 y = hyp_normalize(Vec21(3.0, -2.0, 1.0) + Vec21(0, 0, 3.0));
  const auto loc = mesh.locate(y);
  const MeshFace& f = mesh.faces()[loc.face];
  Vec21 p = Vec21::Zero();
  for (int c = 0; c < 3; ++c) p += loc.bary[c] * (loc.deck * f.pos[c]);
  EXPECT_LE((hyp_normalize(p) - y).norm(), 1e-9 * y.norm());
  EXPECT_GE(loc.bary.minCoeff(), -1e-10);
  EXPECT_LE((mesh.metric().eval(loc.deck_word) - loc.deck).cwiseAbs().maxCoeff(), 1e-8 * loc.deck.cwiseAbs().maxCoeff());
}
