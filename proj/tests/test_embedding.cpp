#include "ghmc/embedding.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace ghmc;

namespace {

constexpr double kC = 1.5;

struct Fixture {
  MarkedMetric h = fn_to_holonomy(FNCoords{{2.0, 2.0, 2.0}, {0.3, -0.2, 0.5}});
  EquivariantMesh mesh = build_mesh(h, 0.1);
  int n = mesh.num_vertices();
  TwistedScalar unit{ScalarField::Constant(n, -1.0), CocycleVec::Zero()};  // B = Id
  OperatorField id = OperatorField(n, Mat2::Identity());
  EmbeddingData future = integrate_embedding(mesh, unit, kC, Orientation::future);
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

double max_diff(const std::vector<Vec21>& a, const std::vector<Vec21>& b) {
  double e = 0.0;
  for (size_t k = 0; k < a.size(); ++k) e = std::max(e, (a[k] - b[k]).norm());
  return e;
}

}  // namespace

TEST(Embedding, FuchsianIsScaledHyperboloid) {
  const auto& f = fixture();
  double e = 0.0;
  for (int k = 0; k < f.n; ++k) e = std::max(e, (f.future.x[k] - kC * (f.mesh.position(k) - f.future.x0)).norm());
  EXPECT_LE(e, 1e-10 * kC);
  EXPECT_LE(f.future.loop_closure, 1e-12);
  EXPECT_LE(f.future.equivariance, 1e-9);
  const CocycleReport r = compute_cocycle(f.future);
  EXPECT_LE(r.relator, 1e-9);
  EXPECT_LE(coboundary_reduce(f.future.rho, f.future.tau).residual, 1e-9 * r.scale);
}

TEST(Embedding, OffsetByBasePointHasNoTranslation) {
  const auto& f = fixture();
  const auto x = integrate_embedding(f.mesh, f.unit, kC, Orientation::future, kC * f.future.x0);
  EXPECT_LE(x.tau.norm(), 1e-9 * x.scale);
  double e = 0.0;
  for (const auto& v : x.x) e = std::max(e, std::abs(mink_norm2(v) + kC * kC));
  EXPECT_LE(e, 1e-9);
}

TEST(Embedding, QuadratureIsExactForIdentity) {
  const auto& f = fixture();
  const auto q = integrate_embedding(f.mesh, f.id, kC, Orientation::future);
  EXPECT_LE(max_diff(q.x, f.future.x), 1e-9 * f.future.diameter);
  EXPECT_LE(q.loop_closure, 1e-9);
}

TEST(Embedding, DoublingCurvatureScaleDoublesX) {
  const auto& f = fixture();
  const auto x2 = integrate_embedding(f.mesh, f.unit, 2.0 * kC, Orientation::future);
  std::vector<Vec21> half(x2.x.size());
  for (size_t k = 0; k < half.size(); ++k) half[k] = 0.5 * x2.x[k];
  EXPECT_LE(max_diff(half, f.future.x), 1e-12 * f.future.diameter);
}

TEST(Embedding, PastIsReflection) {
  const auto& f = fixture();
  const auto p = integrate_embedding(f.mesh, f.unit, kC, Orientation::past);
  std::vector<Vec21> neg(p.x.size());
  for (size_t k = 0; k < neg.size(); ++k) neg[k] = -p.x[k];
  EXPECT_LE(max_diff(neg, f.future.x), 1e-12 * f.future.diameter);
}

TEST(Embedding, TranslationChangesSupportByLinearFunction) {
  const auto& f = fixture();
  const Vec21 w(0.3, -0.7, 0.4);
  const auto x = integrate_embedding(f.mesh, f.unit, kC, Orientation::future, w);
  const auto s0 = support_function(f.mesh, f.future, f.id);
  const auto s1 = support_function(f.mesh, x, f.id);
  double e = 0.0;
  for (int k = 0; k < f.n; ++k) e = std::max(e, std::abs(s1.phi.values[k] - s0.phi.values[k] - mink_inner(w, f.mesh.position(k))));
  EXPECT_LE(e, 1e-10);
}

TEST(Embedding, SupportFunctionOracle) {
  const auto& f = fixture();
  const auto s = support_function(f.mesh, f.future, f.id);
  double e = 0.0;
  for (int k = 0; k < f.n; ++k)
    e = std::max(e, std::abs(s.phi.values[k] + kC + kC * mink_inner(f.future.x0, f.mesh.position(k))));
  EXPECT_LE(e, 1e-9);
  EXPECT_LE(s.identity_residual, 1e-2);
}

TEST(Embedding, BoundaryFunctionOracle) {
  const auto& f = fixture();
  const auto s = support_function(f.mesh, f.future, f.id);
  const auto b = boundary_function(f.mesh, s.phi, f.future.x0, 64);
  ASSERT_EQ(b.values.size(), 64u);
  for (double v : b.values) EXPECT_NEAR(v, kC, 1e-4);
}

TEST(Embedding, BoundaryIgnoresBoundedPerturbation) {
  const auto& f = fixture();
  const auto s = support_function(f.mesh, f.future, f.id);
  TwistedScalar p = s.phi;
  for (int k = 0; k < f.n; ++k) p.values[k] += 0.2 * std::sin(3.0 * f.mesh.position(k)[0]);
  const auto b0 = boundary_function(f.mesh, s.phi, f.future.x0, 32);
  const auto b1 = boundary_function(f.mesh, p, f.future.x0, 32);
  EXPECT_LE(boundary_mismatch(b0, b1, -1.0), 1e-2);
}

TEST(Embedding, BoundaryMismatchSign) {
  BoundaryData a{{1.0, 2.0, -1.0}, 0.0}, b{{-1.0, -2.0, 1.0}, 0.0};
  EXPECT_DOUBLE_EQ(boundary_mismatch(a, b, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(boundary_mismatch(a, b, -1.0), 2.0);
}

TEST(Embedding, NormalizationClosedForm) {
  const auto& f = fixture();
  const auto past = integrate_embedding(f.mesh, f.unit, kC, Orientation::past);
  const auto nrm = normalize_constants(f.mesh, f.future, past, ScalarField::Constant(f.n, 2.0 * kC));
  EXPECT_LE(nrm.residual, 1e-9);
  EXPECT_LE(nrm.closed_form_defect, 1e-9);
  EXPECT_LE((nrm.u2 - 2.0 * kC * f.future.x0).norm(), 1e-8);
  const auto x2 = integrate_embedding(f.mesh, f.unit, kC, Orientation::past, nrm.u2);
  EXPECT_LE((x2.tau - f.future.tau).norm(), 1e-8 * f.future.scale);
}

TEST(Embedding, FundamentalForms) {
  const auto& f = fixture();
  for (auto o : {Orientation::future, Orientation::past}) {
    const auto x = integrate_embedding(f.mesh, f.unit, kC, o);
    const auto ff = fundamental_forms(f.mesh, x);
    EXPECT_LE(ff.det_defect_p99, 1e-8);
    EXPECT_NEAR(ff.min_shape_eigenvalue, 1.0, 1e-6);
    EXPECT_LE(ff.third_form_defect, 1e-8);
    const auto l = induced_marking_lengths(f.mesh, x);
    EXPECT_LE(((l.array() / (kC * f.h.lengths.array())) - 1.0).abs().maxCoeff(), 1e-3);
  }
}

TEST(Embedding, ConvexityDetectsWrongOrientation) {
  const auto& f = fixture();
  const auto ok = convexity_check(f.mesh, f.future, 2000);
  EXPECT_EQ(ok.violations, 0);
  EXPECT_GT(ok.min_margin, 0.0);
  EmbeddingData flipped = f.future;
  flipped.orientation = Orientation::past;
  EXPECT_GT(convexity_check(f.mesh, flipped, 500).violations, 0);
}

TEST(Embedding, SurfaceRoundTrip) {
  const auto& f = fixture();
  const auto s = support_function(f.mesh, f.future, f.id);
  std::stringstream io;
  write_surface(io, f.mesh, f.future, s);
  const SurfaceFile r = read_surface(io);
  ASSERT_EQ(static_cast<int>(r.x.size()), f.n);
  ASSERT_EQ(static_cast<int>(r.faces.size()), f.mesh.num_faces());
  EXPECT_LE(max_diff(r.x, f.future.x), 1e-12 * f.future.diameter);
  for (int k = 0; k < f.n; ++k) EXPECT_NEAR(r.phi[k], s.phi.values[k], 1e-12 * (1.0 + std::abs(s.phi.values[k])));
  for (int i = 0; i < f.mesh.num_faces(); ++i)
    for (int c = 0; c < 3; ++c) EXPECT_EQ(r.faces[i][c], f.mesh.faces()[i].v[c]);
}

TEST(Embedding, SurfaceReaderRejectsBadInput) {
  std::istringstream bad_header("x 1\n"), truncated("2 0\n0 0 1 0\n"), range("1 1\n0 0 1 0\n0 0 3\n");
  EXPECT_THROW(read_surface(bad_header), DomainError);
  EXPECT_THROW(read_surface(truncated), DomainError);
  EXPECT_THROW(read_surface(range), DomainError);
}

TEST(Embedding, MismatchedSizesThrow) {
  const auto& f = fixture();
  EXPECT_THROW(integrate_embedding(f.mesh, OperatorField(3, Mat2::Identity()), kC, Orientation::future), DomainError);
}
