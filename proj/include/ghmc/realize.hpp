// Full realization pipeline: minimise Psi, extract the potential, integrate
// the future and past embeddings, match their cocycles and certify the
// resulting affine deformation.
#ifndef GHMC_REALIZE_HPP
#define GHMC_REALIZE_HPP

#include "ghmc/embedding.hpp"
#include "ghmc/variational.hpp"

#include <chrono>

namespace ghmc {

struct RealizationOptions {
  MinimizeOptions minimize;
  int boundary_directions = 256;
  int convexity_pairs = 10000;
  int loops = 50;
  double boundary_sign = -1.0;  ///< convention: phi2~ = boundary_sign * phi1~
};

/// One of the two Cauchy surfaces with its certificates.
struct SurfaceResult {
  double c = 1.0;
  EmbeddingData embedding;
  SupportData support;
  BoundaryData boundary;
  FundamentalForms forms;
  MarkingLengths induced_lengths;  ///< marking lengths of I
  double length_defect = 0.0;      ///< sup |induced / (c target) - 1|
  ConvexityReport convexity;
  CocycleReport cocycle;
  double quadrature_closure = 0.0;  ///< loop closure of the directly integrated field, / diameter
  double ma_residual = 0.0;         ///< sup |log det B|
  double labourie_mismatch = 0.0;   ///< teich distance of h(B., B.) to the target
};

struct RealizationResult {
  RealizationProblem problem;
  MinimizerCertificate minimizer;
  PotentialResult potential;
  GeneratorMap rho;
  Cocycle tau = Cocycle::Zero();  ///< the common cocycle, tau_1 after normalization
  double tau_coboundary_residual = 0.0;  ///< distance of tau to the coboundaries, / scale
  double scale = 0.0;                    ///< c1 max_k |rho(g_k) x0 - x0|
  SurfaceResult future, past;
  Normalization normalization;
  double linear_residual = 0.0;    ///< |Hess u - u Id| / |c1 B1 + c2 B2| for u = phi1 + phi2 + f
  double boundary_mismatch = 0.0;  ///< sup |phi2~ - sign phi1~| / max sup |phi~|
  double seconds = 0.0;
};

namespace detail {

inline SurfaceResult build_surface(const MetricContext& ctx, const LabourieSolution& sol, const MarkedMetric& target,
                                   double c, Orientation orient, const Vec21& u, const RealizationOptions& opt,
                                   std::uint64_t seed) {
  const EquivariantMesh& mesh = *ctx.mesh;
  SurfaceResult s;
  s.c = c;
  s.ma_residual = sol.ma.residual;
  s.labourie_mismatch = sol.mismatch;
  s.embedding = integrate_embedding(mesh, labourie_potential(ctx, sol), c, orient, u, -1, opt.loops, seed);
  s.cocycle = compute_cocycle(s.embedding);
  s.quadrature_closure = integrate_embedding(mesh, sol.ma.b, c, orient, u, s.embedding.base_vertex, opt.loops, seed).loop_closure;
  s.support = support_function(mesh, s.embedding, sol.ma.b);
  s.boundary = boundary_function(mesh, s.support.phi, s.embedding.x0, opt.boundary_directions);
  s.forms = fundamental_forms(mesh, s.embedding);
  s.induced_lengths = induced_marking_lengths(mesh, s.embedding);
  s.length_defect = (s.induced_lengths.array() / (c * target.lengths.array()) - 1.0).abs().maxCoeff();
  s.convexity = convexity_check(mesh, s.embedding, opt.convexity_pairs, 3, seed);
  return s;
}

}  // namespace detail

/// Embeddings, cocycle and certificates at a computed minimiser of Psi.
inline RealizationResult realize_at(const RealizationProblem& p, const MinimizerCertificate& cert,
                                    const RealizationOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  RealizationResult r;
  r.problem = p;
  r.minimizer = cert;
  r.potential = extract_potential(cert, p);
  const MetricContext& ctx = *cert.value.context;
  const EquivariantMesh& mesh = *ctx.mesh;
  r.rho = mesh.metric().gens;
  const double c1 = p.c1(), c2 = p.c2();

  r.future = detail::build_surface(ctx, cert.value.b1, p.h1, c1, Orientation::future, Vec21::Zero(), opt, p.seed);
  const EmbeddingData provisional =
      integrate_embedding(mesh, labourie_potential(ctx, cert.value.b2), c2, Orientation::past, Vec21::Zero(), -1, 0);
  r.normalization = normalize_constants(mesh, r.future.embedding, provisional, r.potential.f);
  r.past = detail::build_surface(ctx, cert.value.b2, p.h2, c2, Orientation::past, r.normalization.u2, opt, p.seed + 1);

  r.tau = r.future.embedding.tau;
  r.scale = r.future.embedding.scale;
  r.tau_coboundary_residual = coboundary_reduce(r.rho, r.tau).residual / r.scale;

  TwistedScalar u{r.future.support.phi.values + r.past.support.phi.values + r.potential.f,
                  r.future.support.phi.tau + r.past.support.phi.tau};
  OperatorField d = mesh.hessian(u);
  OperatorField m(mesh.num_vertices());
  for (int k = 0; k < mesh.num_vertices(); ++k) {
    d[k] -= u.values[k] * Mat2::Identity();
    m[k] = c1 * cert.value.b1.ma.b[k] + c2 * cert.value.b2.ma.b[k];
  }
  r.linear_residual = field_norm(mesh, d) / field_norm(mesh, m);
  r.boundary_mismatch = boundary_mismatch(r.future.boundary, r.past.boundary, -opt.boundary_sign);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

/// Solves the realization problem for (h1, h2, k+, k-).
inline RealizationResult realize(const RealizationProblem& p, const RealizationOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  RealizationResult r = realize_at(p, minimize_psi(p, opt.minimize), opt);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace ghmc

#endif  // GHMC_REALIZE_HPP
