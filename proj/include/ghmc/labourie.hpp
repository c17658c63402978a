// Monge-Ampere solver for det(A + f Id - Hess f) = 1, the Labourie field
// B(h', h) and the functional F(h', h) = integral of Tr B over (S, h).
//
// The marked length spectrum of the deformed metric h(B., B.) is read off a
// discrete developing map: every face is laid out as a hyperbolic triangle
// with its h(B., B.) edge lengths, and the holonomy of a group element is the
// product of edge transitions along a walk in the universal cover.
#ifndef GHMC_LABOURIE_HPP
#define GHMC_LABOURIE_HPP

#include "ghmc/codazzi.hpp"

#include <memory>

namespace ghmc {

struct MongeAmpereOptions {
  double tol = 1e-11;           ///< sup |log det B|
  int max_iter = 60;
  double min_eigenvalue = 1e-6;  ///< positivity kept by the line search
};

struct MongeAmpereSolution {
  ScalarField f;
  OperatorField b;
  double residual = 0.0;        ///< sup |log det B|
  double min_eigenvalue = 0.0;  ///< over all vertices
  int iterations = 0;
};

namespace detail {

inline double min_sym_eigenvalue(const Mat2& m) {
  const double tr = m.trace(), det = m.determinant();
  return 0.5 * tr - std::sqrt(std::max(0.25 * tr * tr - det, 0.0));
}

// B = A + f Id - Hess f at every vertex.
inline OperatorField ma_field(const EquivariantMesh& mesh, const OperatorField& a, const ScalarField& f) {
  OperatorField b = mesh.hessian(f);
  for (int k = 0; k < mesh.num_vertices(); ++k) b[k] = a[k] + f[k] * Mat2::Identity() - b[k];
  return b;
}

}  // namespace detail

/// Damped Newton on G(f) = log det(A + f Id - Hess f) from f0 = sqrt(1 - det A)
/// unless a starting potential is given.
inline MongeAmpereSolution monge_ampere_solve(const EquivariantMesh& mesh, const OperatorField& a,
                                              const MongeAmpereOptions& opt = {},
                                              const ScalarField* initial = nullptr) {
  const int n = mesh.num_vertices();
  if (static_cast<int>(a.size()) != n) throw DomainError("monge_ampere_solve: field size does not match the mesh");
  MongeAmpereSolution s;
  if (initial) {
    s.f = *initial;
  } else {
    s.f.resize(n);
    for (int k = 0; k < n; ++k) s.f[k] = std::sqrt(std::max(1.0 - a[k].determinant(), 1e-12));
  }
  auto evaluate = [&](const ScalarField& f, OperatorField& b, ScalarField& g, double& min_eig) {
    b = detail::ma_field(mesh, a, f);
    g.resize(n);
    min_eig = 1e300;
    for (int k = 0; k < n; ++k) {
      min_eig = std::min(min_eig, detail::min_sym_eigenvalue(b[k]));
      const double det = b[k].determinant();
      g[k] = det > 0 ? std::log(det) : std::numeric_limits<double>::infinity();
    }
  };
  ScalarField g;
  double min_eig = 0.0;
  evaluate(s.f, s.b, g, min_eig);
  if (!(min_eig >= opt.min_eigenvalue)) throw SolverError("monge_ampere_solve: initial field is not positive definite");

  const auto& h = mesh.hessian_matrices();
  Eigen::SparseLU<SparseMatrix> lu;
  bool analyzed = false;
  for (int it = 0;; ++it) {
    s.residual = g.cwiseAbs().maxCoeff();
    s.min_eigenvalue = min_eig;
    s.iterations = it;
    if (s.residual <= opt.tol) return s;
    if (it >= opt.max_iter) throw SolverError("monge_ampere_solve: Newton did not converge (residual " + std::to_string(s.residual) + ")");
    // dG_k/df = tr(B^-1) e_k - B^-1 : dHess_k
    ScalarField trinv(n), d11(n), d12(n), d22(n);
    for (int k = 0; k < n; ++k) {
      const Mat2 bi = s.b[k].inverse();
      trinv[k] = bi.trace();
      d11[k] = bi(0, 0);
      d12[k] = bi(0, 1) + bi(1, 0);
      d22[k] = bi(1, 1);
    }
    SparseMatrix jac = -(d11.asDiagonal() * h[0] + d12.asDiagonal() * h[1] + d22.asDiagonal() * h[2]);
    for (int k = 0; k < n; ++k) jac.coeffRef(k, k) += trinv[k];
    jac.makeCompressed();
    if (!analyzed) {
      lu.analyzePattern(jac);
      analyzed = true;
    }
    lu.factorize(jac);
    if (lu.info() != Eigen::Success) throw SolverError("monge_ampere_solve: singular Newton system");
    const ScalarField step = lu.solve(-g);
    double t = 1.0;
    const double norm0 = g.norm();
    for (;;) {
      const ScalarField fn = s.f + t * step;
      OperatorField bn;
      ScalarField gn;
      double en = 0.0;
      evaluate(fn, bn, gn, en);
      if (en >= opt.min_eigenvalue && gn.allFinite() && gn.norm() < (1.0 - 1e-4 * t) * norm0) {
        s.f = fn;
        s.b = std::move(bn);
        g = std::move(gn);
        min_eig = en;
        break;
      }
      t *= 0.5;
      if (t < 1e-10) throw SolverError("monge_ampere_solve: line search lost positivity");
    }
  }
}

/// Discrete developing map of h(B., B.) over a mesh of h.
class DevelopingMap {
 public:
  DevelopingMap(const EquivariantMesh& mesh, const OperatorField& b) : mesh_(mesh), base_(mesh.locate(mesh.center())) {
    const auto& eta = minkowski_metric();
    const int nf = mesh.num_faces();
    lengths_.resize(nf);
    for (int fi = 0; fi < nf; ++fi) {
      const MeshFace& f = mesh.faces()[fi];
      std::array<Vec21, 3> tangent_next, tangent_prev;
      for (int c = 0; c < 3; ++c) {
        tangent_next[c] = hyp_log(f.pos[c], f.pos[(c + 1) % 3]).first;
        tangent_prev[c] = hyp_log(f.pos[c], f.pos[(c + 2) % 3]).first;
      }
      auto stretched = [&](int c, const Vec21& u) {
        const Frame e = f.lift[c] * mesh.frame(f.v[c]);
        const Vec21 w = e * (b[f.v[c]] * (e.transpose() * eta * u));
        return std::sqrt(std::max(mink_norm2(w), 0.0));
      };
      // length of the edge from corner c to corner c+1, trapezoid rule
      for (int c = 0; c < 3; ++c) {
        const int d = (c + 1) % 3;
        lengths_[fi][c] = 0.5 * f.length[(c + 2) % 3] * (stretched(c, tangent_next[c]) + stretched(d, tangent_prev[d]));
      }
    }
    develop();
  }

  /// Developing map of a discrete metric given by per-face edge lengths,
  /// lengths[f][c] being the edge from corner c to corner c+1.
  DevelopingMap(const EquivariantMesh& mesh, std::vector<std::array<double, 3>> lengths)
      : mesh_(mesh), base_(mesh.locate(mesh.center())), lengths_(std::move(lengths)) {
    if (static_cast<int>(lengths_.size()) != mesh.num_faces()) throw DomainError("developing map: one length triple per face expected");
    develop();
  }

 private:
  void develop() {
    const int nf = mesh_.num_faces();
    uniformize();
    models_.resize(nf);
    for (int fi = 0; fi < nf; ++fi) models_[fi] = layout(lengths_[fi][0], lengths_[fi][1], lengths_[fi][2]);
    transitions_.resize(nf);
    for (int fi = 0; fi < nf; ++fi)
      for (int e = 0; e < 3; ++e) {
        const FaceNeighbor& nb = mesh_.face_neighbors(fi)[e];
        // corners a -> b of this face are b' -> a' of the neighbour
        const int a = (e + 1) % 3, bb = (e + 2) % 3;
        const int na = (nb.edge + 2) % 3, nbb = (nb.edge + 1) % 3;
        const Iso21 mine = edge_frame(models_[fi][a], models_[fi][bb]);
        const Iso21 theirs = edge_frame(models_[nb.face][na], models_[nb.face][nbb]);
        transitions_[fi][e] = mine * iso_inverse(theirs);
      }
  }

 public:
  /// sup of |angle sum - 2 pi| after uniformization.
  double cone_defect() const { return residual_; }

  /// Holonomy of the developed structure at g, in the model frame of the face
  /// at the polygon centre, where the generator axes pass nearby.
  Iso21 holonomy(const Iso21& g) const {
    const MeshFace& f0 = mesh_.faces()[base_.face];
    const Vec21 target = hyp_normalize(g * base_.deck * (f0.pos[0] + f0.pos[1] + f0.pos[2]));
    int face = base_.face;
    Iso21 deck = base_.deck, dev = Iso21::Identity();
    const Iso21 goal = g * base_.deck;
    for (int steps = 0; steps < 100 * mesh_.num_faces(); ++steps) {
      const MeshFace& f = mesh_.faces()[face];
      Eigen::Matrix3d p;
      for (int c = 0; c < 3; ++c) p.col(c) = deck * f.pos[c];
      const Eigen::Vector3d w = p.partialPivLu().solve(target);
      int e = 0;
      if (w.minCoeff(&e) >= 0) {
        if (face != base_.face || (deck - goal).cwiseAbs().maxCoeff() > 1e-6 * std::max(1.0, goal.cwiseAbs().maxCoeff()))
          throw SolverError("developing map: walk ended on the wrong face");
        return dev;
      }
      const FaceNeighbor& nb = mesh_.face_neighbors(face)[e];
      dev = dev * transitions_[face][e];
      deck = deck * nb.deck;
      face = nb.face;
    }
    throw SolverError("developing map: walk did not terminate");
  }

  /// Generator images of the developed holonomy.
  GeneratorMap generators() const {
    GeneratorMap r;
    for (int k = 0; k < kNumGenerators; ++k) r[k] = iso_project(holonomy(mesh_.metric().gens[k]));
    return r;
  }

  MarkingLengths marking_lengths() const {
    const GeneratorMap r = generators();
    MarkingLengths l;
    for (int i = 0; i < kNumMarkingCurves; ++i) l[i] = translation_length(eval_word(r, marking_words()[i]));
    return l;
  }

 private:
  // Triangle with side lengths l01, l12, l20, counter-clockwise, vertex 0 at
  // the origin and vertex 1 on the positive x1 axis.
  static std::array<Vec21, 3> layout(double l01, double l12, double l20) {
    const double t = corner_angle(l01, l20, l12);
    return {hyp_origin(), Vec21(std::sinh(l01), 0.0, std::cosh(l01)),
            Vec21(std::sinh(l20) * std::cos(t), std::sinh(l20) * std::sin(t), std::cosh(l20))};
  }

  // Angle between sides a and b opposite side o, by the half-angle form of
  // the cosine law, which stays accurate for short edges.
  static double corner_angle(double a, double b, double o) {
    const double p = std::sinh(0.5 * (o - a + b)) * std::sinh(0.5 * (o + a - b)) / (std::sinh(a) * std::sinh(b));
    if (!(p > 0.0 && p < 1.0)) throw SolverError("developing map: deformed edge lengths violate the triangle inequality");
    return 2.0 * std::asin(std::sqrt(p));
  }

  // Oriented frame (tangent to q, normal, p) at p.
  static Iso21 edge_frame(const Vec21& p, const Vec21& q) {
    const Vec21 t = hyp_log(p, q).first;
    Iso21 f;
    f.col(0) = t;
    f.col(1) = mink_cross(p, t);
    f.col(2) = p;
    return f;
  }

  // Interior angles of the triangle with edges l[c] from corner c to c+1,
  // and d angle[c] / d u at corner k for the conformal factors u.
  static std::array<double, 3> angles(const std::array<double, 3>& l, std::array<std::array<double, 3>, 3>* jac) {
    std::array<double, 3> th;
    for (int c = 0; c < 3; ++c) {
      // corner c lies between edges l[c] and l[c+2], opposite l[c+1]
      const double a = l[c], b = l[(c + 2) % 3], o = l[(c + 1) % 3];
      th[c] = corner_angle(a, b, o);
    }
    if (jac) {
      // derivative cosine law: dth_c/dl_opp = sinh l_opp / (sinh a sinh b sin th_c),
      // dth_c/da = -dth_c/dl_opp cos(angle opposite b); dl/du at an endpoint = tanh(l/2)
      for (int c = 0; c < 3; ++c) {
        const int e_a = c, e_b = (c + 2) % 3, e_o = (c + 1) % 3;
        const double dopp = std::sinh(l[e_o]) / (std::sinh(l[e_a]) * std::sinh(l[e_b]) * std::sin(th[c]));
        std::array<double, 3> dl{};  // d th_c / d l_e
        dl[e_o] = dopp;
        // edge a is opposite corner c+2, so the third corner is c+1, and vice versa
        dl[e_a] = -dopp * std::cos(th[(c + 1) % 3]);
        dl[e_b] = -dopp * std::cos(th[(c + 2) % 3]);
        for (int k = 0; k < 3; ++k) {
          double v = 0.0;
          for (int e = 0; e < 3; ++e)
            if (e == k || (e + 1) % 3 == k) v += dl[e] * std::tanh(0.5 * l[e]);
          (*jac)[c][k] = v;
        }
      }
    }
    return th;
  }

  // Discrete conformal change sinh(l'/2) = exp((u_i + u_j) / 2) sinh(l/2) that
  // makes every vertex angle sum 2 pi, so the layout has no cone points and
  // the holonomy is a representation of the closed surface group.
  void uniformize() {
    const int n = mesh_.num_vertices(), nf = mesh_.num_faces();
    const auto base = lengths_;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    auto scaled = [&](int fi) {
      const auto& f = mesh_.faces()[fi];
      std::array<double, 3> l;
      for (int e = 0; e < 3; ++e)
        l[e] = 2.0 * std::asinh(std::exp(0.5 * (u[f.v[e]] + u[f.v[(e + 1) % 3]])) * std::sinh(0.5 * base[fi][e]));
      return l;
    };
    Eigen::SparseLU<SparseMatrix> lu;
    bool analyzed = false;
    for (int it = 0; it < 30; ++it) {
      Eigen::VectorXd defect = Eigen::VectorXd::Constant(n, -2.0 * std::numbers::pi);
      std::vector<Eigen::Triplet<double>> trip;
      trip.reserve(9 * nf);
      for (int fi = 0; fi < nf; ++fi) {
        const auto& f = mesh_.faces()[fi];
        std::array<std::array<double, 3>, 3> jac;
        const auto th = angles(scaled(fi), &jac);
        for (int c = 0; c < 3; ++c) {
          defect[f.v[c]] += th[c];
          for (int k = 0; k < 3; ++k) trip.emplace_back(f.v[c], f.v[k], jac[c][k]);
        }
      }
      residual_ = defect.cwiseAbs().maxCoeff();
      if (residual_ <= 1e-12) break;
      SparseMatrix j(n, n);
      j.setFromTriplets(trip.begin(), trip.end());
      if (!analyzed) {
        lu.analyzePattern(j);
        analyzed = true;
      }
      lu.factorize(j);
      if (lu.info() != Eigen::Success) throw SolverError("developing map: singular uniformization system");
      u -= lu.solve(defect);
    }
    if (residual_ > 1e-9) throw SolverError("developing map: uniformization did not converge");
    for (int fi = 0; fi < nf; ++fi) lengths_[fi] = scaled(fi);
  }

  const EquivariantMesh& mesh_;
  EquivariantMesh::Location base_;
  std::vector<std::array<double, 3>> lengths_;
  double residual_ = 0.0;
  std::vector<std::array<Vec21, 3>> models_;
  std::vector<std::array<Iso21, 3>> transitions_;
};

inline MarkingLengths deformed_marking_lengths(const EquivariantMesh& mesh, const OperatorField& b) {
  return DevelopingMap(mesh, b).marking_lengths();
}

/// Mesh, Codazzi solver and trace-free basis for one hyperbolic metric.
struct MetricContext {
  MarkedMetric metric;
  std::shared_ptr<const EquivariantMesh> mesh;
  std::shared_ptr<const CodazziSolver> codazzi;
  TraceFreeBasis basis;

  static MetricContext build(const MarkedMetric& m, const MeshTemplate& tmpl) {
    MetricContext c;
    c.metric = m;
    c.mesh = std::make_shared<const EquivariantMesh>(tmpl, m);
    c.codazzi = std::make_shared<const CodazziSolver>(*c.mesh);
    c.basis = c.codazzi->tracefree_basis();
    return c;
  }

  OperatorField combine(const Eigen::Matrix<double, 6, 1>& coeffs) const {
    OperatorField a(mesh->num_vertices(), Mat2::Zero());
    for (int j = 0; j < 6; ++j)
      if (coeffs[j] != 0.0) a = field_axpy(coeffs[j], basis.fields[j], a);
    return a;
  }
};

struct LabourieOptions {
  MongeAmpereOptions ma;
  double step_tol = 1e-10;      ///< stop when the coefficient update is below this
  double residual_tol = 1e-8;   ///< or when |log lengths - log target| is below this
  int max_iter = 60;
  double fd_step = 1e-6;
};

struct LabourieSolution {
  Eigen::Matrix<double, 6, 1> coeffs = Eigen::Matrix<double, 6, 1>::Zero();
  MongeAmpereSolution ma;
  MarkingLengths lengths;  ///< marking lengths of h(B., B.)
  double mismatch = 0.0;   ///< teich_distance to the target
  int iterations = 0;
  Eigen::Matrix<double, kNumMarkingCurves, 6> jacobian;  ///< d log lengths / d coeffs
};

namespace detail {

struct LengthEval {
  MongeAmpereSolution ma;
  MarkingLengths lengths;
  MarkingLengths residual;
};

inline LengthEval eval_lengths(const MetricContext& ctx, const Eigen::Matrix<double, 6, 1>& coeffs,
                               const MarkingLengths& log_target, const MongeAmpereOptions& opt,
                               const ScalarField* warm) {
  LengthEval e;
  e.ma = monge_ampere_solve(*ctx.mesh, ctx.combine(coeffs), opt, warm);
  e.lengths = deformed_marking_lengths(*ctx.mesh, e.ma.b);
  e.residual = e.lengths.array().log().matrix() - log_target;
  return e;
}

}  // namespace detail

/// Optional starting data for labourie_field.
struct LabourieStart {
  Eigen::Matrix<double, 6, 1> coeffs = Eigen::Matrix<double, 6, 1>::Zero();
  std::optional<ScalarField> f;  ///< Monge-Ampere potential for the first solve
  std::optional<Eigen::Matrix<double, kNumMarkingCurves, 6>> jacobian;
};

/// B(h', h): the Codazzi field A + f Id - Hess f of h with det B = 1 whose
/// deformed metric has the marking lengths of h'. Levenberg-Marquardt over
/// the coefficients of A, Broyden-updated finite-difference Jacobian.
inline LabourieSolution labourie_field(const MarkingLengths& target, const MetricContext& ctx,
                                       const LabourieOptions& opt = {}, const LabourieStart& start = {}) {
  const MarkingLengths log_target = target.array().log().matrix();
  LabourieSolution s;
  s.coeffs = start.coeffs;
  detail::LengthEval cur;
  try {
    cur = detail::eval_lengths(ctx, s.coeffs, log_target, opt.ma, start.f ? &*start.f : nullptr);
  } catch (const SolverError&) {
    if (!start.f && s.coeffs.isZero()) throw;
    // the warm start is not admissible for this metric; start from B = Id
    s.coeffs.setZero();
    cur = detail::eval_lengths(ctx, s.coeffs, log_target, opt.ma, nullptr);
  }

  auto fd_jacobian = [&]() {
    Eigen::Matrix<double, kNumMarkingCurves, 6> j;
    for (int k = 0; k < 6; ++k) {
      Eigen::Matrix<double, 6, 1> c = s.coeffs;
      double h = opt.fd_step;
      c[k] += h;
      detail::LengthEval e;
      try {
        e = detail::eval_lengths(ctx, c, log_target, opt.ma, &cur.ma.f);
      } catch (const SolverError&) {
        // forward point not admissible; difference backwards
        h = -h;
        c[k] = s.coeffs[k] + h;
        e = detail::eval_lengths(ctx, c, log_target, opt.ma, &cur.ma.f);
      }
      j.col(k) = (e.residual - cur.residual) / h;
    }
    return j;
  };
  const bool guessed = start.jacobian.has_value();
  Eigen::Matrix<double, kNumMarkingCurves, 6> jac = guessed ? *start.jacobian : fd_jacobian();
  bool fresh = !guessed;
  double lambda = 1e-6;
  for (int it = 0;; ++it) {
    s.iterations = it;
    if (it >= opt.max_iter) throw SolverError("labourie_field: Levenberg-Marquardt did not converge");
    const Eigen::Matrix<double, 6, 6> jtj = jac.transpose() * jac;
    const Eigen::Matrix<double, 6, 1> grad = jac.transpose() * cur.residual;
    Eigen::Matrix<double, 6, 6> sys = jtj;
    sys.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
    const Eigen::Matrix<double, 6, 1> step = -sys.ldlt().solve(grad);
    if (!step.allFinite()) throw SolverError("labourie_field: singular normal equations");
    if (cur.residual.cwiseAbs().maxCoeff() < opt.residual_tol || step.cwiseAbs().maxCoeff() < opt.step_tol) break;
    bool accepted = false;
    try {
      detail::LengthEval next = detail::eval_lengths(ctx, s.coeffs + step, log_target, opt.ma, &cur.ma.f);
      if (next.residual.squaredNorm() < cur.residual.squaredNorm()) {
        // Broyden update keeps the Jacobian current between fresh evaluations
        const MarkingLengths dr = next.residual - cur.residual;
        jac += (dr - jac * step) * step.transpose() / step.squaredNorm();
        s.coeffs += step;
        cur = std::move(next);
        lambda = std::max(lambda * 0.1, 1e-12);
        accepted = true;
        fresh = false;
      }
    } catch (const SolverError&) {
      // Newton lost positivity far from the solution; shorten the step
    }
    if (!accepted) {
      if (!fresh) {
        jac = fd_jacobian();
        fresh = true;
      } else {
        lambda *= 10.0;
        if (lambda > 1e12) throw SolverError("labourie_field: no descent direction");
      }
    }
  }
  s.ma = std::move(cur.ma);
  s.lengths = cur.lengths;
  s.mismatch = teich_distance(s.lengths, target);
  s.jacobian = jac;
  return s;
}

inline LabourieSolution labourie_field(const MarkedMetric& target, const MetricContext& ctx,
                                       const LabourieOptions& opt = {}) {
  return labourie_field(target.lengths, ctx, opt);
}

/// Warm start for a nearby metric meshed from the same template: the old A
/// projected on the new basis, the old potential and the Jacobian rotated
/// accordingly. Fields are compared vertex by vertex in the vertex frames.
inline LabourieStart transfer_start(const MetricContext& from, const LabourieSolution& sol, const MetricContext& to) {
  LabourieStart st;
  if (from.mesh->num_vertices() != to.mesh->num_vertices()) return st;
  Eigen::Matrix<double, 6, 6> q;  // q(i, j) = <A_old_i, A_new_j>
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) q(i, j) = field_dot(*to.mesh, from.basis.fields[i], to.basis.fields[j]);
  st.coeffs = q.transpose() * sol.coeffs;
  st.f = sol.ma.f;
  st.jacobian = sol.jacobian * q;
  return st;
}

/// The hyperbolic metric in the class of h((Id + t/2 A) ., (Id + t/2 A) .), whose
/// tangent at t = 0 is the variation h(A ., .) of the metric.
inline MarkedMetric metric_along(const MetricContext& ctx, const OperatorField& a, double t) {
  OperatorField b(a.size());
  for (size_t k = 0; k < a.size(); ++k) b[k] = Mat2::Identity() + 0.5 * t * a[k];
  return fn_to_holonomy(fit_fn_to_lengths(deformed_marking_lengths(*ctx.mesh, b), ctx.metric.fn));
}

/// F(h', h) = integral over (S, h) of Tr B(h', h).
inline double bms_F(const EquivariantMesh& mesh, const LabourieSolution& s) { return mesh.integrate(field_trace(s.ma.b)); }

/// -1/2 integral of Tr(A B): the derivative of F(h', .) at h along the
/// variation h(A ., .) for a trace-free Codazzi direction A.
inline double bms_dF(const EquivariantMesh& mesh, const OperatorField& b, const OperatorField& a) {
  return -0.5 * mesh.integrate(field_trace(field_compose(a, b)));
}

}  // namespace ghmc

#endif  // GHMC_LABOURIE_HPP
