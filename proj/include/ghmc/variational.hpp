// The functional Psi = c1 F(h1, .) + c2 F(h2, .) on Teichmueller space, its
// minimisation in Fenchel-Nielsen coordinates, and the potential f with
// c1 B(h1, h0) + c2 B(h2, h0) = f Id - Hess f at the minimiser h0.
#ifndef GHMC_VARIATIONAL_HPP
#define GHMC_VARIATIONAL_HPP

#include "ghmc/labourie.hpp"

#include <cstdlib>
#include <functional>
#include <future>
#include <random>

namespace ghmc {

/// Number of worker threads from GHMC_THREADS (default 1).
inline int thread_count() {
  const char* s = std::getenv("GHMC_THREADS");
  if (!s) return 1;
  const int n = std::atoi(s);
  return n > 0 ? n : 1;
}

/// Scale of the surface of constant extrinsic curvature k: sqrt(-k), or its
/// reciprocal under the alternative curvature convention.
inline double curvature_scale(double k, bool reciprocal) {
  if (!(k < 0.0) || !std::isfinite(k)) throw DomainError("curvature must be negative");
  return reciprocal ? 1.0 / std::sqrt(-k) : std::sqrt(-k);
}

struct RealizationProblem {
  double k_plus = -1.0;
  double k_minus = -1.0;
  MarkedMetric h1;
  MarkedMetric h2;
  double target_edge = 0.1;
  std::uint64_t seed = 1;
  bool reciprocal_curvature = false;

  double c1() const { return curvature_scale(k_plus, reciprocal_curvature); }
  double c2() const { return curvature_scale(k_minus, reciprocal_curvature); }
};

/// Psi at one metric together with the data it was computed from.
struct PsiValue {
  double psi = 0.0;
  double f1 = 0.0;  ///< F(h1, h)
  double f2 = 0.0;  ///< F(h2, h)
  std::shared_ptr<const MetricContext> context;
  LabourieSolution b1;
  LabourieSolution b2;
};

/// Evaluates Psi on meshes of a fixed template, warm-starting the Labourie
/// solves from a previous value when one is given.
class PsiEvaluator {
 public:
  static constexpr double kMinMeshAngle = 0.2;  ///< radians

  explicit PsiEvaluator(RealizationProblem p, LabourieOptions opt = {}) : p_(std::move(p)), opt_(opt) {
    c1_ = p_.c1();
    c2_ = p_.c2();
  }

  const RealizationProblem& problem() const { return p_; }
  int evaluations() const { return evaluations_; }

  PsiValue evaluate(const MarkedMetric& h, const MeshTemplate& tmpl, const PsiValue* warm = nullptr) {
    ++evaluations_;
    PsiValue v;
    auto ctx = std::make_shared<const MetricContext>(MetricContext::build(h, tmpl));
    // a template carried too far from where it was built shears into slivers,
    // whose discretisation error exceeds what the Labourie solve can absorb
    if (ctx->mesh->min_angle() < kMinMeshAngle)
      throw DomainError("PsiEvaluator: template too distorted (min angle " + std::to_string(ctx->mesh->min_angle()) + ")");
    v.context = ctx;
    const LabourieStart s1 = warm ? transfer_start(*warm->context, warm->b1, *ctx) : LabourieStart{};
    const LabourieStart s2 = warm ? transfer_start(*warm->context, warm->b2, *ctx) : LabourieStart{};
    // a warm start can carry a Jacobian too stale to converge from; retry cold
    auto solve = [&](const MarkedMetric& target, const LabourieStart& s) {
      if (!warm) return labourie_field(target.lengths, *ctx, opt_);
      try {
        return labourie_field(target.lengths, *ctx, opt_, s);
      } catch (const SolverError&) {
        return labourie_field(target.lengths, *ctx, opt_);
      }
    };
    if (thread_count() > 1) {
      auto second = std::async(std::launch::async, [&] { return solve(p_.h2, s2); });
      v.b1 = solve(p_.h1, s1);
      v.b2 = second.get();
    } else {
      v.b1 = solve(p_.h1, s1);
      v.b2 = solve(p_.h2, s2);
    }
    v.f1 = bms_F(*ctx->mesh, v.b1);
    v.f2 = bms_F(*ctx->mesh, v.b2);
    v.psi = c1_ * v.f1 + c2_ * v.f2;
    return v;
  }

 private:
  RealizationProblem p_;
  LabourieOptions opt_;
  double c1_ = 1.0, c2_ = 1.0;
  int evaluations_ = 0;
};

/// Psi(h) on a mesh built for h.
inline double psi_eval(const RealizationProblem& p, const MarkedMetric& h) {
  PsiEvaluator ev(p);
  return ev.evaluate(h, build_template(h, p.target_edge, p.seed)).psi;
}

struct MinimizeOptions {
  std::optional<FNCoords> start;  ///< default: the midpoint of h1 and h2
  double fd_step = 1e-3;
  double gradient_tol = 1e-4;  ///< sup norm of the FN gradient
  int max_iter = 200;
  int max_remesh = 6;
  LabourieOptions labourie;
  std::function<void(int iteration, double psi, double gradient_norm)> progress;
};

struct MinimizerCertificate {
  MarkedMetric h0;
  double psi = 0.0;
  Eigen::Matrix<double, 6, 1> gradient = Eigen::Matrix<double, 6, 1>::Zero();           ///< in FN coordinates
  double gradient_norm = 0.0;                                                          ///< sup norm
  Eigen::Matrix<double, 6, 1> analytic_gradient = Eigen::Matrix<double, 6, 1>::Zero();  ///< along the A_k
  int iterations = 0;
  int evaluations = 0;
  int remeshes = 0;
  MeshTemplate mesh_template;
  PsiValue value;  ///< Psi, the Labourie fields and the context at h0
};

namespace detail {

using Vec6 = Eigen::Matrix<double, 6, 1>;

inline MarkedMetric metric_at(const Vec6& x) {
  if ((x.head<3>().array() <= 0.0).any()) throw DomainError("minimize_psi: pants length left the domain");
  return fn_to_holonomy(FNCoords::from_vector(x));
}

inline FNCoords fn_midpoint(const FNCoords& a, const FNCoords& b) {
  return FNCoords::from_vector(0.5 * (a.as_vector() + b.as_vector()));
}

}  // namespace detail

/// c1 dF(h1, .) + c2 dF(h2, .) along each basis field A_k at the point of v.
inline Eigen::Matrix<double, 6, 1> psi_basis_gradient(const RealizationProblem& p, const PsiValue& v) {
  Eigen::Matrix<double, 6, 1> g;
  const auto& ctx = *v.context;
  for (int k = 0; k < 6; ++k)
    g[k] = p.c1() * bms_dF(*ctx.mesh, v.b1.ma.b, ctx.basis.fields[k]) +
           p.c2() * bms_dF(*ctx.mesh, v.b2.ma.b, ctx.basis.fields[k]);
  return g;
}

/// BFGS on Psi in Fenchel-Nielsen coordinates with central-difference
/// gradients. All evaluations between remeshes share one template; the
/// template is rebuilt at the current iterate when it no longer transfers and
/// once more at the minimiser, so the final certificate is computed on a mesh
/// of h0 itself.
inline MinimizerCertificate minimize_psi(const RealizationProblem& p, const MinimizeOptions& opt = {}) {
  using detail::Vec6;
  PsiEvaluator ev(p, opt.labourie);
  MinimizerCertificate cert;
  Vec6 x = (opt.start ? *opt.start : detail::fn_midpoint(p.h1.fn, p.h2.fn)).as_vector();
  MeshTemplate tmpl = build_template(detail::metric_at(x), p.target_edge, p.seed);
  Vec6 tmpl_point = x;

  PsiValue cur;
  Vec6 grad;
  auto gradient_at = [&](const Vec6& at, const PsiValue& centre) {
    Vec6 g;
    for (int i = 0; i < 6; ++i) {
      Vec6 xp = at, xm = at;
      xp[i] += opt.fd_step;
      xm[i] -= opt.fd_step;
      const double fp = ev.evaluate(detail::metric_at(xp), tmpl, &centre).psi;
      const double fm = ev.evaluate(detail::metric_at(xm), tmpl, &centre).psi;
      g[i] = (fp - fm) / (2.0 * opt.fd_step);
    }
    return g;
  };
  // value and gradient at x, rebuilding the template at x if it fails to transfer
  auto restart_at = [&](const Vec6& at) {
    for (;;) {
      try {
        cur = ev.evaluate(detail::metric_at(at), tmpl, cur.context ? &cur : nullptr);
        grad = gradient_at(at, cur);
        return;
      } catch (const DomainError&) {
        if (tmpl_point == at || cert.remeshes >= opt.max_remesh) throw;
      }
      tmpl = build_template(detail::metric_at(at), p.target_edge, p.seed);
      tmpl_point = at;
      ++cert.remeshes;
      cur = PsiValue{};
    }
  };
  restart_at(x);

  Eigen::Matrix<double, 6, 6> hinv = Eigen::Matrix<double, 6, 6>::Identity();
  bool scaled = false;
  int it = 0;
  for (;; ++it) {
    if (opt.progress) opt.progress(it, cur.psi, grad.cwiseAbs().maxCoeff());
    if (grad.cwiseAbs().maxCoeff() <= opt.gradient_tol) {
      if (tmpl_point == x || cert.remeshes >= opt.max_remesh) break;
      // polish on a mesh of the minimiser itself
      tmpl = build_template(detail::metric_at(x), p.target_edge, p.seed);
      tmpl_point = x;
      ++cert.remeshes;
      cur = PsiValue{};
      restart_at(x);
      hinv.setIdentity();
      scaled = false;
      continue;
    }
    if (it >= opt.max_iter) throw SolverError("minimize_psi: iteration budget exceeded");
    Vec6 dir = -hinv * grad;
    if (grad.dot(dir) >= 0.0) {
      hinv.setIdentity();
      scaled = false;
      dir = -grad;
    }
    if (!scaled) {
      // first step of at most 0.1 in FN coordinates
      const double len = dir.cwiseAbs().maxCoeff();
      if (len > 0.1) dir *= 0.1 / len;
    }
    // Armijo backtracking
    double t = 1.0;
    PsiValue next;
    Vec6 xn;
    bool found = false;
    bool remeshed = false;
    for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
      xn = x + t * dir;
      try {
        next = ev.evaluate(detail::metric_at(xn), tmpl, &cur);
      } catch (const DomainError&) {
        if (tmpl_point == x || cert.remeshes >= opt.max_remesh) continue;
        // the template no longer reaches this far; remesh at x and retry
        tmpl = build_template(detail::metric_at(x), p.target_edge, p.seed);
        tmpl_point = x;
        ++cert.remeshes;
        cur = PsiValue{};
        restart_at(x);
        remeshed = true;
        break;
      } catch (const SolverError&) {
        continue;
      }
      if (next.psi <= cur.psi + 1e-4 * t * grad.dot(dir)) {
        found = true;
        break;
      }
    }
    if (remeshed) {
      hinv.setIdentity();
      scaled = false;
      continue;
    }
    if (!found) throw SolverError("minimize_psi: line search failed");
    Vec6 gn;
    try {
      gn = gradient_at(xn, next);
    } catch (const Error&) {
      if (cert.remeshes >= opt.max_remesh) throw;
      // the difference stencil left the template's reach or a warm solve
      // stalled there; continue from xn on its own mesh
      x = xn;
      tmpl = build_template(detail::metric_at(x), p.target_edge, p.seed);
      tmpl_point = x;
      ++cert.remeshes;
      cur = PsiValue{};
      restart_at(x);
      hinv.setIdentity();
      scaled = false;
      continue;
    }
    const Vec6 s = xn - x, y = gn - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        hinv = Eigen::Matrix<double, 6, 6>::Identity() * (sy / y.squaredNorm());
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::Matrix<double, 6, 6> v = Eigen::Matrix<double, 6, 6>::Identity() - rho * s * y.transpose();
      hinv = v * hinv * v.transpose() + rho * s * s.transpose();
    }
    x = xn;
    cur = std::move(next);
    grad = gn;
  }
  cert.h0 = detail::metric_at(x);
  cert.psi = cur.psi;
  cert.gradient = grad;
  cert.gradient_norm = grad.cwiseAbs().maxCoeff();
  cert.iterations = it;
  cert.evaluations = ev.evaluations();
  cert.mesh_template = tmpl;
  cert.value = cur;
  cert.analytic_gradient = psi_basis_gradient(p, cur);
  return cert;
}

struct PotentialResult {
  ScalarField f;
  double tracefree_residual = 0.0;  ///< L2 norm of the trace-free part
  double f_sup = 0.0;
  Decomposition decomposition;
};

/// Decomposes c1 B(h1, h0) + c2 B(h2, h0) = A + (f Id - Hess f); at a critical
/// point of Psi the trace-free part A vanishes.
inline PotentialResult extract_potential(const MinimizerCertificate& cert, const RealizationProblem& p) {
  const auto& ctx = *cert.value.context;
  const OperatorField m = field_axpy(p.c1(), cert.value.b1.ma.b, field_axpy(p.c2(), cert.value.b2.ma.b, OperatorField(ctx.mesh->num_vertices(), Mat2::Zero())));
  PotentialResult r;
  r.decomposition = ctx.codazzi->decompose(m);
  r.f = r.decomposition.f;
  r.tracefree_residual = field_norm(*ctx.mesh, r.decomposition.a);
  r.f_sup = r.f.cwiseAbs().maxCoeff();
  return r;
}

struct MultistartResult {
  std::vector<MinimizerCertificate> runs;
  double agreement = 0.0;  ///< largest pairwise teich_distance between the minimisers
};

/// Minimisations from `count` starts at FN distance `radius` (sup norm) from
/// the default start, in directions drawn from the problem seed.
inline MultistartResult multistart(const RealizationProblem& p, int count = 3, double radius = 0.3,
                                   MinimizeOptions opt = {}) {
  const detail::Vec6 base = (opt.start ? *opt.start : detail::fn_midpoint(p.h1.fn, p.h2.fn)).as_vector();
  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  MultistartResult r;
  for (int i = 0; i < count; ++i) {
    detail::Vec6 d;
    for (int k = 0; k < 6; ++k) d[k] = unif(rng);
    d *= radius / d.cwiseAbs().maxCoeff();
    opt.start = FNCoords::from_vector(base + d);
    r.runs.push_back(minimize_psi(p, opt));
  }
  for (size_t i = 0; i < r.runs.size(); ++i)
    for (size_t j = i + 1; j < r.runs.size(); ++j)
      r.agreement = std::max(r.agreement, teich_distance(r.runs[i].h0, r.runs[j].h0));
  return r;
}

}  // namespace ghmc

#endif  // GHMC_VARIATIONAL_HPP
