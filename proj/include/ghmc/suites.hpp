// Invariant suites of each module, run by the `check` command at the
// configured resolution.
#ifndef GHMC_SUITES_HPP
#define GHMC_SUITES_HPP

#include "ghmc/report.hpp"

#include <numbers>

namespace ghmc {

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> n{"minkowski", "fuchsian", "mesh", "codazzi", "labourie", "variational", "embedding"};
  return n;
}

namespace detail {

inline std::vector<CheckEntry> suite_minkowski() {
  std::vector<CheckEntry> e;
  const Vec21 o = hyp_origin(), x1(1, 0, 0);
  e.push_back(check_le("minkowski.inner_timelike", std::abs(mink_inner(o, o) + 1.0), 1e-15));
  e.push_back(check_le("minkowski.inner_spacelike", std::abs(mink_inner(x1, x1) - 1.0), 1e-15));
  e.push_back(check_le("minkowski.inner_orthogonal", std::abs(mink_inner(x1, o)), 1e-15));
  e.push_back(check_le("minkowski.hyp_dist_unit", std::abs(hyp_dist(o, Vec21(0, std::sinh(1.0), std::cosh(1.0))) - 1.0), 1e-12));
  const Iso21 d = psl2_to_so21((Mat2() << std::exp(0.5), 0, 0, std::exp(-0.5)).finished());
  Eigen::Vector3d ev = d.eigenvalues().real();
  std::sort(ev.data(), ev.data() + 3);
  e.push_back(check_le("minkowski.adjoint_eigenvalues", (ev - Eigen::Vector3d(std::exp(-1.0), 1.0, std::exp(1.0))).norm(), 1e-12));
  const Iso21 par = psl2_to_so21((Mat2() << 1, 1, 0, 1).finished());
  e.push_back(check_le("minkowski.parabolic_trace", std::abs(par.trace() - 3.0), 1e-12));
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  GeneratorMap rho;
  for (auto& g : rho) g = psl2_to_so21((Mat2() << 1.3, n(rng), 0, 1 / 1.3).finished() * (Mat2() << 1, 0, n(rng), 1).finished());
  const Vec21 v0(n(rng), n(rng), n(rng));
  const auto fit = coboundary_reduce(rho, coboundary(rho, v0));
  e.push_back(check_le("minkowski.coboundary_recovery", (fit.vertex - v0).norm() + fit.residual, 1e-10));
  Cocycle tau;
  for (int k = 0; k < kNumGenerators; ++k) tau.col(k) = Vec21(n(rng), n(rng), n(rng));
  const Vec21 ab = cocycle_eval(rho, tau, Word{1, 2});
  e.push_back(check_le("minkowski.cocycle_relation", (ab - tau.col(0) - rho[0] * tau.col(1)).norm(), 1e-12));
  AffineIso a{rho[0], v0};
  const AffineIso id = aff_compose(a, aff_inverse(a));
  e.push_back(check_le("minkowski.affine_inverse", (id.linear - Iso21::Identity()).norm() + id.translation.norm(), 1e-12));
  return e;
}

inline std::vector<CheckEntry> suite_fuchsian(const RunConfig& cfg) {
  std::vector<CheckEntry> e;
  for (const auto& [name, fn] : {std::pair{"h1", cfg.h1}, std::pair{"h2", cfg.h2}}) {
    const MarkedMetric m = fn_to_holonomy(fn);
    const std::string p = std::string("fuchsian.") + name;
    e.push_back(check_le(p + ".relator", (m.eval(relator_word()) - Iso21::Identity()).cwiseAbs().maxCoeff(), 1e-10));
    e.push_back(check_le(p + ".pants_length", std::abs(curve_length(m, Word{1}) - fn.length[0]), 1e-10));
    e.push_back(check_ge(p + ".shortest_length", m.lengths.minCoeff(), 1e-12));
    const FundamentalDomain d = dirichlet_domain(m, hyp_origin());
    e.push_back(check_le(p + ".domain_area", std::abs(detail::polygon_area(d.vertices) - 4.0 * std::numbers::pi), 1e-6));
    const Word w{1, 3, -2};
    e.push_back(check_le(p + ".square_length", std::abs(curve_length(m, word_concat(w, w)) - 2.0 * curve_length(m, w)), 1e-9));
  }
  const MarkedMetric m1 = fn_to_holonomy(cfg.h1), m2 = fn_to_holonomy(cfg.h2);
  e.push_back(check_le("fuchsian.teich_symmetry", std::abs(teich_distance(m1, m2) - teich_distance(m2, m1)), 1e-14));
  e.push_back(check_le("fuchsian.teich_identity", teich_distance(m1, m1), 1e-14));
  return e;
}

inline std::vector<CheckEntry> suite_mesh(const RunConfig& cfg) {
  std::vector<CheckEntry> e;
  const EquivariantMesh mesh = build_mesh(fn_to_holonomy(cfg.h1), cfg.target_edge, cfg.seed);
  e.push_back(check_le("mesh.euler_characteristic", std::abs(mesh.euler_characteristic() + 2), 0.0));
  e.push_back(check_le("mesh.area", std::abs(mesh.integrate(ScalarField::Ones(mesh.num_vertices())) - 4.0 * std::numbers::pi), 1e-4));
  ScalarField u(mesh.num_vertices());
  for (int k = 0; k < mesh.num_vertices(); ++k) u[k] = std::sin(3.0 * mesh.position(k)[0]) + mesh.position(k)[1];
  e.push_back(check_le("mesh.integral_of_laplacian", std::abs(mesh.integrate(mesh.laplacian(u))), 1e-8));
  e.push_back(check_le("mesh.laplacian_constant", mesh.laplacian(ScalarField::Ones(mesh.num_vertices())).cwiseAbs().maxCoeff(), 1e-10));
  double h = 0.0;
  for (const auto& m : mesh.hessian(ScalarField::Constant(mesh.num_vertices(), 2.5))) h = std::max(h, m.cwiseAbs().maxCoeff());
  e.push_back(check_le("mesh.hessian_constant", h, 1e-10));
  e.push_back(diagnostic("mesh.vertices", mesh.num_vertices()));
  e.push_back(diagnostic("mesh.min_angle", mesh.min_angle()));
  return e;
}

inline std::vector<CheckEntry> suite_codazzi(const RunConfig& cfg) {
  std::vector<CheckEntry> e;
  const EquivariantMesh mesh = build_mesh(fn_to_holonomy(cfg.h1), cfg.target_edge, cfg.seed);
  const CodazziSolver cs(mesh);
  const int n = mesh.num_vertices();
  const OperatorField id(n, Mat2::Identity());
  e.push_back(check_le("codazzi.identity_residual", dnabla_residual(mesh, id), 1e-10));
  e.push_back(check_le("codazzi.trace_equation_identity", (cs.solve_trace_equation(id).array() - 1.0).abs().maxCoeff(), 1e-8));
  const TraceFreeBasis b = cs.tracefree_basis();
  e.push_back(check_le("codazzi.gram", (b.gram - Eigen::Matrix<double, 6, 6>::Identity()).cwiseAbs().maxCoeff(), 1e-8));
  const Decomposition d = cs.decompose(field_axpy(0.7, b.fields[2], id));
  e.push_back(check_le("codazzi.decomposition_reconstruction", d.reconstruction, 1e-8));
  e.push_back(check_le("codazzi.decomposition_pairing", d.pairing, 1e-3));
  const KernelCertificate k = cs.kernel_certificate();
  e.push_back(check_le("codazzi.kernel_dimension", std::abs(k.dimension - 6), 0.0));
  e.push_back(check_ge("codazzi.kernel_gap", k.gap_ratio, 10.0));
  e.push_back(check_le("codazzi.j_closure", k.j_closure, 1e-3));
  return e;
}

inline std::vector<CheckEntry> suite_labourie(const RunConfig& cfg) {
  std::vector<CheckEntry> e;
  const MarkedMetric m1 = fn_to_holonomy(cfg.h1), m2 = fn_to_holonomy(cfg.h2);
  const MetricContext ctx = MetricContext::build(m1, build_template(m1, cfg.target_edge, cfg.seed));
  const int n = ctx.mesh->num_vertices();
  const auto ma0 = monge_ampere_solve(*ctx.mesh, OperatorField(n, Mat2::Zero()));
  e.push_back(check_le("labourie.monge_ampere_zero", (ma0.f.array() - 1.0).abs().maxCoeff(), 1e-10));
  const auto self = labourie_field(m1, ctx);
  e.push_back(check_le("labourie.self_coefficients", self.coeffs.cwiseAbs().maxCoeff(), 1e-8));
  const double f = bms_F(*ctx.mesh, self);
  e.push_back(check_le("labourie.F_self", std::abs(f - 8.0 * std::numbers::pi) / (8.0 * std::numbers::pi), 1e-2));
  if (!(cfg.h1 == cfg.h2)) {
    const auto s = labourie_field(m2, ctx);
    e.push_back(check_le("labourie.mismatch", s.mismatch, 1e-3));
    e.push_back(check_le("labourie.det_B", s.ma.residual, 1e-6));
    e.push_back(check_ge("labourie.F_above_minimum", bms_F(*ctx.mesh, s) - 8.0 * std::numbers::pi, 0.0));
    const MetricContext ctx2 = MetricContext::build(m2, build_template(m2, cfg.target_edge, cfg.seed));
    const double f12 = bms_F(*ctx.mesh, s), f21 = bms_F(*ctx2.mesh, labourie_field(m1, ctx2));
    e.push_back(check_le("labourie.F_symmetry", std::abs(f12 - f21) / std::max(f12, f21), 1e-2));
  }
  return e;
}

inline std::vector<CheckEntry> suite_variational(const RunConfig& cfg) {
  std::vector<CheckEntry> e;
  RealizationProblem p;
  p.h1 = p.h2 = fn_to_holonomy(cfg.h1);
  p.target_edge = cfg.target_edge;
  p.seed = cfg.seed;
  const double psi = psi_eval(p, p.h1);
  e.push_back(check_le("variational.psi_symmetric", std::abs(psi - 16.0 * std::numbers::pi) / (16.0 * std::numbers::pi), 1e-6));
  e.push_back(check_le("variational.scale_k_minus_4", std::abs(curvature_scale(-4.0, false) - 2.0), 1e-15));
  PsiEvaluator ev(p);
  const auto v = ev.evaluate(p.h1, build_template(p.h1, p.target_edge, p.seed));
  e.push_back(check_le("variational.additivity", std::abs(v.psi - (p.c1() * v.f1 + p.c2() * v.f2)), 1e-12));
  MinimizerCertificate cert;
  cert.value = v;
  cert.h0 = p.h1;
  const PotentialResult pr = extract_potential(cert, p);
  e.push_back(check_le("variational.symmetric_potential", (pr.f.array() - 2.0).abs().maxCoeff(), 1e-6));
  return e;
}

inline std::vector<CheckEntry> suite_embedding(const RunConfig& cfg) {
  std::vector<CheckEntry> e;
  const EquivariantMesh mesh = build_mesh(fn_to_holonomy(cfg.h1), cfg.target_edge, cfg.seed);
  const int n = mesh.num_vertices();
  const double c = 1.5;
  const TwistedScalar hyperboloid{ScalarField::Constant(n, -1.0), CocycleVec::Zero()};
  const OperatorField id(n, Mat2::Identity());
  const EmbeddingData x = integrate_embedding(mesh, hyperboloid, c, Orientation::future);
  double err = 0.0;
  for (int k = 0; k < n; ++k) err = std::max(err, (x.x[k] - c * (mesh.position(k) - x.x0)).norm());
  e.push_back(check_le("embedding.fuchsian_positions", err, 1e-8));
  const EmbeddingData xq = integrate_embedding(mesh, id, c, Orientation::future);
  e.push_back(check_le("embedding.quadrature_identity_closure", xq.loop_closure, 1e-5));
  e.push_back(check_le("embedding.relator", compute_cocycle(x).relator, 1e-6));
  e.push_back(check_le("embedding.fuchsian_coboundary", coboundary_reduce(x.rho, x.tau).residual, 1e-8));
  const EmbeddingData xu = integrate_embedding(mesh, hyperboloid, c, Orientation::future, c * x.x0);
  e.push_back(check_le("embedding.fuchsian_tau_vanishes", xu.tau.cwiseAbs().maxCoeff() / xu.scale, 1e-8));
  const EmbeddingData past = integrate_embedding(mesh, hyperboloid, c, Orientation::past);
  const Normalization nrm = normalize_constants(mesh, x, past, ScalarField::Constant(n, 2.0 * c));
  e.push_back(check_le("embedding.fuchsian_u1_plus_u2", (nrm.u2 - 2.0 * c * x.x0).norm(), 1e-8));
  const EmbeddingData past2 = integrate_embedding(mesh, hyperboloid, c, Orientation::past, nrm.u2);
  const SupportData s1 = support_function(mesh, x, id), s2 = support_function(mesh, past2, id);
  double ph = 0.0;
  for (int k = 0; k < n; ++k) ph = std::max(ph, std::abs(s1.phi.values[k] + c + c * mink_inner(x.x0, mesh.position(k))));
  e.push_back(check_le("embedding.fuchsian_support", ph, 1e-10));
  const BoundaryData b1 = boundary_function(mesh, s1.phi, x.x0, cfg.boundary_directions);
  const BoundaryData b2 = boundary_function(mesh, s2.phi, x.x0, cfg.boundary_directions);
  double bl = 0.0;
  for (double v : b1.values) bl = std::max(bl, std::abs(v - c) / c);
  e.push_back(check_le("embedding.fuchsian_boundary_limit", bl, 1e-3));
  e.push_back(check_le("embedding.fuchsian_boundary_mismatch", boundary_mismatch(b1, b2, -cfg.boundary_sign), 1e-2));
  const FundamentalForms ff = fundamental_forms(mesh, x);
  e.push_back(check_le("embedding.fuchsian_shape_determinant", ff.det_defect_max, 1e-8));
  e.push_back(check_le("embedding.fuchsian_third_form", ff.third_form_defect, 1e-8));
  const ConvexityReport cv = convexity_check(mesh, x, cfg.convexity_pairs, 3, cfg.seed);
  e.push_back(check_le("embedding.fuchsian_convexity_violations", cv.violations, 0.0));
  EmbeddingData flipped = x;
  flipped.orientation = Orientation::past;
  e.push_back(check_ge("embedding.flipped_orientation_detected", convexity_check(mesh, flipped, 100, 3, cfg.seed).violations, 1.0));
  return e;
}

}  // namespace detail

/// Runs one suite or "all"; unknown names throw DomainError.
inline std::vector<CheckEntry> run_suite(const std::string& name, const RunConfig& cfg) {
  if (name == "all") {
    std::vector<CheckEntry> all;
    for (const auto& s : suite_names()) {
      try {
        auto part = run_suite(s, cfg);
        all.insert(all.end(), part.begin(), part.end());
      } catch (const Error& err) {
        all.push_back({s + ".error: " + err.what(), 1.0, 0.0, true, true, false});
      }
    }
    return all;
  }
  if (name == "minkowski") return detail::suite_minkowski();
  if (name == "fuchsian") return detail::suite_fuchsian(cfg);
  if (name == "mesh") return detail::suite_mesh(cfg);
  if (name == "codazzi") return detail::suite_codazzi(cfg);
  if (name == "labourie") return detail::suite_labourie(cfg);
  if (name == "variational") return detail::suite_variational(cfg);
  if (name == "embedding") return detail::suite_embedding(cfg);
  throw DomainError("unknown suite '" + name + "'");
}

}  // namespace ghmc

#endif  // GHMC_SUITES_HPP
