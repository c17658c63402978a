// Equivariant embeddings X(v) = +-(U + integral from x0 to v of c B) of the
// universal cover into R^{2,1}, their cocycles, support functions, boundary
// functions at infinity and fundamental forms.
//
// The one-form v -> c B v is integrated edge by edge. Given a potential Phi
// with B = Hess Phi - Phi Id the primitive Y = grad Phi - Phi x is used
// directly, so every loop closes exactly; for a bare field B the edges are
// integrated by the tapered-transport rule, exact for B = Id.
#ifndef GHMC_EMBEDDING_HPP
#define GHMC_EMBEDDING_HPP

#include "ghmc/labourie.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <queue>
#include <random>

namespace ghmc {

enum class Orientation { future, past };

inline double orientation_sign(Orientation o) { return o == Orientation::future ? 1.0 : -1.0; }

inline const char* orientation_name(Orientation o) { return o == Orientation::future ? "future" : "past"; }

struct EmbeddingData {
  std::vector<Vec21> x;  ///< X at the canonical position of every vertex class
  double c = 1.0;
  Orientation orientation = Orientation::future;
  int base_vertex = 0;
  Vec21 x0 = hyp_origin();  ///< position of the base vertex
  Vec21 u = Vec21::Zero();
  GeneratorMap rho;
  Cocycle tau = Cocycle::Zero();  ///< X(g y) = rho(g) X(y) + tau(g)
  std::vector<Vec21> primitive;   ///< Y with dY = B dx and Y(x0) = 0
  CocycleVec primitive_tau = CocycleVec::Zero();  ///< Y(g y) = g Y(y) + tau_Y(g)
  double diameter = 0.0;      ///< largest euclidean distance between two X(v)
  double loop_closure = 0.0;  ///< largest sampled loop integral / diameter
  double equivariance = 0.0;  ///< largest edge mismatch across the polygon sides / scale
  double scale = 0.0;         ///< c max_k |rho(g_k) x0 - x0|

  /// X at eval(word) * position(v).
  Vec21 lifted(int v, std::span<const int> word) const { return eval_word(rho, word) * x[v] + cocycle_eval(rho, tau, word); }
};

namespace detail {

struct DirectedEdge {
  int a = 0, b = 0;
  Word word;     ///< the far endpoint sits at eval(word) * position(b)
  Iso21 lift;
  CocycleJacobian jac;
  Vec21 omega;   ///< integral of B dx from a to the far endpoint
};

// Every oriented edge of the quotient with its relative lift.
inline std::vector<DirectedEdge> directed_edges(const EquivariantMesh& mesh) {
  std::map<std::pair<std::pair<int, int>, Word>, int> seen;
  std::vector<DirectedEdge> out;
  const auto& tmpl = mesh.mesh_template();
  for (int fi = 0; fi < mesh.num_faces(); ++fi) {
    const MeshFace& f = mesh.faces()[fi];
    for (int c = 0; c < 3; ++c)
      for (int d : {(c + 1) % 3, (c + 2) % 3}) {
        DirectedEdge e;
        e.a = f.v[c];
        e.b = f.v[d];
        e.word = word_reduce(word_concat(word_inverse(tmpl.faces[fi][c].word), tmpl.faces[fi][d].word));
        if (!seen.emplace(std::make_pair(std::make_pair(e.a, e.b), e.word), 0).second) continue;
        e.lift = mesh.metric().eval(e.word);
        e.jac = cocycle_jacobian(mesh.metric().gens, e.word);
        out.push_back(std::move(e));
      }
  }
  return out;
}

// Y = grad Phi - Phi x at every vertex; d Y = (Hess Phi - Phi Id) dx.
inline std::vector<Vec21> potential_primitive(const EquivariantMesh& mesh, const TwistedScalar& phi) {
  std::vector<Vec21> y(mesh.num_vertices());
  for (int k = 0; k < mesh.num_vertices(); ++k)
    y[k] = mesh.frame(k) * mesh.gradient_at(k, phi) - phi.values[k] * mesh.position(k);
  return y;
}

inline int nearest_vertex(const EquivariantMesh& mesh, const Vec21& p) {
  int best = 0;
  double d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < mesh.num_vertices(); ++k) {
    const double e = hyp_dist(mesh.position(k), p);
    if (e < d) {
      d = e;
      best = k;
    }
  }
  return best;
}

inline double cocycle_scale(const GeneratorMap& rho, const Vec21& x0, double c) {
  double s = 0.0;
  for (const auto& g : rho) s = std::max(s, (g * x0 - x0).norm());
  return c * s;
}

// Integrates the edge one-form along a spanning tree of the edges inside the
// polygon, fits the twist of the primitive to the edges crossing its sides
// and samples closure along random loops.
inline EmbeddingData integrate_edges(const EquivariantMesh& mesh, const std::vector<DirectedEdge>& edges, double c,
                                     Orientation orient, const Vec21& u, int base, int loops, std::uint64_t seed) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("integrate_embedding: scale must be positive");
  const int n = mesh.num_vertices();
  if (base < 0 || base >= n) throw DomainError("integrate_embedding: base vertex out of range");
  std::vector<std::vector<int>> inner(n);
  std::vector<int> crossing;
  for (int i = 0; i < static_cast<int>(edges.size()); ++i) {
    if (edges[i].word.empty())
      inner[edges[i].a].push_back(i);
    else
      crossing.push_back(i);
  }

  std::vector<Vec21> y(n, Vec21::Zero());
  std::vector<char> done(n, 0);
  std::queue<int> q;
  q.push(base);
  done[base] = 1;
  while (!q.empty()) {
    const int a = q.front();
    q.pop();
    for (int i : inner[a]) {
      const auto& e = edges[i];
      if (done[e.b]) continue;
      y[e.b] = y[a] + e.omega;
      done[e.b] = 1;
      q.push(e.b);
    }
  }
  if (std::find(done.begin(), done.end(), 0) != done.end())
    throw DomainError("integrate_embedding: the edges inside the polygon do not connect all vertices");

  EmbeddingData out;
  out.c = c;
  out.orientation = orient;
  out.base_vertex = base;
  out.x0 = mesh.position(base);
  out.u = u;
  out.rho = mesh.metric().gens;
  out.primitive = y;

  // twist of Y: jac(M) tau_Y = Y(a) + omega - M Y(b) on every crossing edge
  Eigen::MatrixXd a(3 * crossing.size(), 3 * kNumGenerators);
  Eigen::VectorXd rhs(3 * crossing.size());
  for (size_t i = 0; i < crossing.size(); ++i) {
    const auto& e = edges[crossing[i]];
    a.middleRows<3>(3 * i) = e.jac;
    rhs.segment<3>(3 * i) = y[e.a] + e.omega - e.lift * y[e.b];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 3 * kNumGenerators) throw DomainError("integrate_embedding: crossing edges do not determine the twist");
  out.primitive_tau = qr.solve(rhs);

  const double s = orientation_sign(orient);
  out.x.resize(n);
  for (int k = 0; k < n; ++k) out.x[k] = s * (u + c * y[k]);
  // tau_X(g) = s (c tau_Y(g) + (I - g) U), with Y(x0) = 0
  const Cocycle ty = cocycle_from_vec(out.primitive_tau);
  for (int k = 0; k < kNumGenerators; ++k) out.tau.col(k) = s * (c * ty.col(k) + (Iso21::Identity() - out.rho[k]) * u);

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.diameter = std::max(out.diameter, (out.x[i] - out.x[j]).norm());
  out.scale = cocycle_scale(out.rho, out.x0, c);

  double eq = 0.0;
  for (int i : crossing) {
    const auto& e = edges[i];
    const Vec21 direct = out.x[e.a] + s * c * e.omega;
    eq = std::max(eq, (direct - (e.lift * out.x[e.b] + e.jac * cocycle_vec(out.tau))).norm());
  }
  out.equivariance = out.scale > 0 ? eq / out.scale : eq;

  // random walks on the inner edges, closed through the tree (which carries
  // no defect); the closure is the sum of the edge defects along the walk
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_vertex(0, n - 1), pick_len(3, 40);
  double worst = 0.0;
  for (int l = 0; l < loops; ++l) {
    int v = pick_vertex(rng);
    const int len = pick_len(rng);
    Vec21 sum = Vec21::Zero();
    for (int step = 0; step < len; ++step) {
      const auto& nb = inner[v];
      if (nb.empty()) break;
      const auto& e = edges[nb[std::uniform_int_distribution<size_t>(0, nb.size() - 1)(rng)]];
      sum += y[e.a] + e.omega - y[e.b];
      v = e.b;
    }
    worst = std::max(worst, c * sum.norm());
  }
  out.loop_closure = out.diameter > 0 ? worst / out.diameter : worst;
  return out;
}

}  // namespace detail

/// X = s (U + integral of c B dx) with B = Hess Phi - Phi Id for a twisted
/// potential Phi, integrated through the discrete primitive grad Phi - Phi x.
/// base < 0 selects the vertex nearest the polygon centre.
inline EmbeddingData integrate_embedding(const EquivariantMesh& mesh, const TwistedScalar& phi, double c,
                                         Orientation orient, const Vec21& u = Vec21::Zero(), int base = -1,
                                         int loops = 50, std::uint64_t seed = 1) {
  if (phi.values.size() != mesh.num_vertices()) throw DomainError("integrate_embedding: potential size does not match the mesh");
  if (base < 0) base = detail::nearest_vertex(mesh, mesh.center());
  auto edges = detail::directed_edges(mesh);
  const auto y = detail::potential_primitive(mesh, phi);
  for (auto& e : edges) e.omega = e.lift * y[e.b] + e.jac * phi.tau - y[e.a];
  return detail::integrate_edges(mesh, edges, c, orient, u, base, loops, seed);
}

/// X = s (U + integral of c B dx) for a bare Codazzi field B, each edge
/// integrated by parallel transport of the linearly interpolated endpoint
/// values.
inline EmbeddingData integrate_embedding(const EquivariantMesh& mesh, const OperatorField& b, double c,
                                         Orientation orient, const Vec21& u = Vec21::Zero(), int base = -1,
                                         int loops = 50, std::uint64_t seed = 1) {
  if (static_cast<int>(b.size()) != mesh.num_vertices()) throw DomainError("integrate_embedding: field size does not match the mesh");
  if (base < 0) base = detail::nearest_vertex(mesh, mesh.center());
  auto edges = detail::directed_edges(mesh);
  for (auto& e : edges) {
    const Vec21 pa = mesh.position(e.a);
    const Vec21 pb = hyp_normalize(e.lift * mesh.position(e.b));
    const Vec21 ta = hyp_log(pa, pb).first, tb = hyp_log(pb, pa).first;
    const Vec21 wa = mesh.ambient(e.a, b[e.a]) * ta;
    const Vec21 wb = e.lift * (mesh.ambient(e.b, b[e.b]) * (iso_inverse(e.lift) * tb));
    e.omega = detail::tapered_transport_integral(pa, pb, wa) - detail::tapered_transport_integral(pb, pa, wb);
  }
  return detail::integrate_edges(mesh, edges, c, orient, u, base, loops, seed);
}

/// Phi = sum_k a_k phi_k - f for B = A + f Id - Hess f with A = sum_k a_k A_k.
inline TwistedScalar labourie_potential(const MetricContext& ctx, const LabourieSolution& sol) {
  TwistedScalar p{-sol.ma.f, CocycleVec::Zero()};
  for (int k = 0; k < 6; ++k) {
    p.values += sol.coeffs[k] * ctx.basis.potentials[k].values;
    p.tau += sol.coeffs[k] * ctx.basis.potentials[k].tau;
  }
  return p;
}

struct CocycleReport {
  Cocycle tau = Cocycle::Zero();
  double equivariance = 0.0;  ///< relative to the scale
  double relator = 0.0;       ///< |tau(R)| / scale
  double scale = 0.0;
};

/// tau(g_k) = s (integral from x0 to g_k x0 of c B dx + U - rho(g_k) U), with
/// its equivariance and relator residuals.
inline CocycleReport compute_cocycle(const EmbeddingData& x) {
  CocycleReport r;
  r.tau = x.tau;
  r.scale = x.scale;
  r.equivariance = x.equivariance;
  const double rel = cocycle_eval(x.rho, x.tau, relator_word()).norm();
  r.relator = x.scale > 0 ? rel / x.scale : rel;
  return r;
}

struct Normalization {
  Vec21 u2 = Vec21::Zero();
  bool matched = false;
  double residual = 0.0;          ///< sup_k |tau_1(g_k) - tau_2(g_k)| / scale after the fit
  double conditioning = 0.0;      ///< smallest / largest singular value of the system
  Vec21 closed_form = Vec21::Zero();  ///< f(x0) x0 - grad f(x0)
  double closed_form_defect = 0.0;    ///< |U1 + U2 - closed_form| / |closed_form|
  double scale = 0.0;
};

/// U2 by least squares so that tau_1 = tau_2 on the generators, given X2
/// integrated with some U. Since tau_2 is affine in U2 with slope s2 (I - g),
/// the 12 x 3 system is solved once. `gate` relative to the cocycle scale.
inline Normalization normalize_constants(const EquivariantMesh& mesh, const EmbeddingData& x1, const EmbeddingData& x2,
                                         const ScalarField& f, double gate = 1e-2) {
  Normalization n;
  const double s2 = orientation_sign(x2.orientation);
  Eigen::Matrix<double, 12, 3> a;
  Eigen::Matrix<double, 12, 1> b;
  for (int k = 0; k < kNumGenerators; ++k) {
    a.block<3, 3>(3 * k, 0) = s2 * (Iso21::Identity() - x2.rho[k]);
    b.segment<3>(3 * k) = x1.tau.col(k) - x2.tau.col(k) + s2 * (Iso21::Identity() - x2.rho[k]) * x2.u;
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, 12, 3>> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  n.conditioning = svd.singularValues()[2] / svd.singularValues()[0];
  if (!(n.conditioning > 1e-10)) throw DomainError("normalize_constants: representation has an invariant vector");
  n.u2 = svd.solve(b);
  n.scale = std::max(x1.scale, x2.scale);
  double worst = 0.0;
  for (int k = 0; k < kNumGenerators; ++k) {
    const Vec21 t2 = x2.tau.col(k) + s2 * (Iso21::Identity() - x2.rho[k]) * (n.u2 - x2.u);
    worst = std::max(worst, (x1.tau.col(k) - t2).norm());
  }
  n.residual = n.scale > 0 ? worst / n.scale : worst;
  n.matched = n.residual <= gate;
  const int k0 = x1.base_vertex;
  n.closed_form = f[k0] * x1.x0 - mesh.frame(k0) * mesh.gradient_at(k0, TwistedScalar{f, CocycleVec::Zero()});
  const double cn = n.closed_form.norm();
  n.closed_form_defect = (x1.u + n.u2 - n.closed_form).norm() / (cn > 0 ? cn : 1.0);
  return n;
}

struct SupportData {
  TwistedScalar phi;  ///< phi(v) = s <X(v), v>, twisted by s tau_X
  double sign = 1.0;  ///< s of the orientation
  std::vector<double> boundary;  ///< limits along the ray directions
  double identity_residual = 0.0;  ///< |Hess phi - phi Id - c B| / |c B|
};

/// Support function of an embedding. B is the field the embedding integrates;
/// the identity Hess phi - phi Id = c B holds for both orientations.
inline SupportData support_function(const EquivariantMesh& mesh, const EmbeddingData& x, const OperatorField& b) {
  SupportData s;
  s.sign = orientation_sign(x.orientation);
  const int n = mesh.num_vertices();
  s.phi.values.resize(n);
  for (int k = 0; k < n; ++k) s.phi.values[k] = s.sign * mink_inner(x.x[k], mesh.position(k));
  s.phi.tau = s.sign * cocycle_vec(x.tau);
  OperatorField d = mesh.hessian(s.phi);
  OperatorField cb(n);
  for (int k = 0; k < n; ++k) {
    cb[k] = x.c * b[k];
    d[k] -= s.phi.values[k] * Mat2::Identity() + cb[k];
  }
  const double nb = field_norm(mesh, cb);
  s.identity_residual = field_norm(mesh, d) / (nb > 0 ? nb : 1.0);
  return s;
}

/// Value of a twisted function at an arbitrary point of the universal cover,
/// interpolated homogeneously so that restrictions of linear functions are
/// reproduced exactly.
inline double evaluate_twisted(const EquivariantMesh& mesh, const TwistedScalar& phi, const Vec21& y) {
  const auto loc = mesh.locate(y);
  const MeshFace& f = mesh.faces()[loc.face];
  const auto& tmpl = mesh.mesh_template();
  Vec21 p = Vec21::Zero();
  double v = 0.0;
  for (int c = 0; c < 3; ++c) {
    const Word w = word_reduce(word_concat(loc.deck_word, tmpl.faces[loc.face][c].word));
    const Vec21 corner = mesh.metric().eval(w) * mesh.position(f.v[c]);
    const Vec21 twist = cocycle_jacobian(mesh.metric().gens, w) * phi.tau;
    v += loc.bary[c] * (phi.values[f.v[c]] + mink_inner(twist, corner));
    p += loc.bary[c] * corner;
  }
  return v / std::sqrt(-mink_norm2(p));
}

struct BoundaryData {
  std::vector<double> values;  ///< one limit per direction
  double spread = 0.0;         ///< largest |phi / cosh d - limit| at the farthest sample
};

/// Limits of phi(x) / cosh d(x, x0) along geodesic rays from x0 in `count`
/// uniformly spaced directions, by extrapolation of L + a e^{-d} + b e^{-2d}
/// through the samples at the given distances.
inline BoundaryData boundary_function(const EquivariantMesh& mesh, const TwistedScalar& phi, const Vec21& x0,
                                      int count = 256, std::array<double, 3> dist = {4.0, 6.0, 8.0}) {
  BoundaryData r;
  const Frame e = detail::tangent_frame(x0);
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i) m.row(i) << 1.0, std::exp(-dist[i]), std::exp(-2.0 * dist[i]);
  const auto lu = m.partialPivLu();
  for (int j = 0; j < count; ++j) {
    const double t = 2.0 * std::numbers::pi * j / count;
    const Vec21 dir = std::cos(t) * e.col(0) + std::sin(t) * e.col(1);
    Eigen::Vector3d s;
    for (int i = 0; i < 3; ++i) {
      const Vec21 y = hyp_normalize(std::cosh(dist[i]) * x0 + std::sinh(dist[i]) * dir);
      s[i] = evaluate_twisted(mesh, phi, y) / std::cosh(dist[i]);
    }
    const Eigen::Vector3d coef = lu.solve(s);
    if (!std::isfinite(coef[0])) throw SolverError("boundary_function: non-finite extrapolation");
    r.values.push_back(coef[0]);
    r.spread = std::max(r.spread, std::abs(s[2] - coef[0]));
  }
  return r;
}

/// sup |phi1 + sign phi2| / max(sup |phi1|, sup |phi2|) over the boundary samples.
inline double boundary_mismatch(const BoundaryData& b1, const BoundaryData& b2, double sign = 1.0) {
  if (b1.values.size() != b2.values.size()) throw DomainError("boundary_mismatch: sample counts differ");
  double d = 0.0, m = 0.0;
  for (size_t i = 0; i < b1.values.size(); ++i) {
    d = std::max(d, std::abs(b1.values[i] + sign * b2.values[i]));
    m = std::max({m, std::abs(b1.values[i]), std::abs(b2.values[i])});
  }
  return m > 0 ? d / m : d;
}

struct FundamentalForms {
  std::vector<Mat2> first, second, third;  ///< per face, normal coordinates at the centroid
  std::vector<Mat2> shape;                 ///< I^{-1} II
  ScalarField det_shape;
  double min_shape_eigenvalue = 0.0;  ///< over all faces, times c
  double det_defect_p99 = 0.0;        ///< 99th percentile of |c^2 det S - 1|
  double det_defect_max = 0.0;
  double third_form_defect = 0.0;     ///< sup |Gauss-image edge length / h0 edge length - 1|
};

/// Per-face fundamental forms of X, with the Gauss map N(v) = v.
inline FundamentalForms fundamental_forms(const EquivariantMesh& mesh, const EmbeddingData& x) {
  const auto& eta = minkowski_metric();
  const double s = orientation_sign(x.orientation);
  const CocycleVec tv = cocycle_vec(x.tau);
  FundamentalForms r;
  const int nf = mesh.num_faces();
  r.det_shape.resize(nf);
  r.min_shape_eigenvalue = std::numeric_limits<double>::infinity();
  std::vector<double> defects(nf);
  for (int fi = 0; fi < nf; ++fi) {
    const MeshFace& f = mesh.faces()[fi];
    const Vec21 q = detail::face_centroid(f);
    const Frame e = detail::tangent_frame(q);
    std::array<Vec21, 3> xc;
    std::array<Eigen::Vector2d, 3> z;
    for (int c = 0; c < 3; ++c) {
      xc[c] = f.lift[c] * x.x[f.v[c]] + f.jac[c] * tv;
      z[c] = detail::normal_coords(q, e, f.pos[c]);
    }
    Mat2 dz;
    dz << z[1] - z[0], z[2] - z[0];
    const Mat2 dzi = dz.inverse();
    Eigen::Matrix<double, 3, 2> dx, dn;
    dx << xc[1] - xc[0], xc[2] - xc[0];
    dn << f.pos[1] - f.pos[0], f.pos[2] - f.pos[0];
    dx = dx * dzi;
    dn = dn * dzi;
    Mat2 one = dx.transpose() * eta * dx, two = s * dx.transpose() * eta * dn, three = dn.transpose() * eta * dn;
    two = 0.5 * (two + two.transpose());
    Eigen::LLT<Mat2> llt(one);
    if (llt.info() != Eigen::Success) throw DomainError("fundamental_forms: first fundamental form is not positive definite");
    const Mat2 shape = one.inverse() * two;
    const Mat2 l = llt.matrixL();
    const Mat2 li = l.inverse();
    const Mat2 sym = li * two * li.transpose();
    r.min_shape_eigenvalue = std::min(r.min_shape_eigenvalue, x.c * Eigen::SelfAdjointEigenSolver<Mat2>(sym).eigenvalues()[0]);
    r.det_shape[fi] = shape.determinant();
    defects[fi] = std::abs(x.c * x.c * r.det_shape[fi] - 1.0);
    for (int c = 0; c < 3; ++c) {
      const double g = hyp_dist(f.pos[(c + 1) % 3], f.pos[(c + 2) % 3]);
      r.third_form_defect = std::max(r.third_form_defect, std::abs(g / f.length[c] - 1.0));
    }
    r.first.push_back(one);
    r.second.push_back(two);
    r.third.push_back(three);
    r.shape.push_back(shape);
  }
  r.det_defect_max = *std::max_element(defects.begin(), defects.end());
  std::sort(defects.begin(), defects.end());
  r.det_defect_p99 = defects[std::min<size_t>(defects.size() - 1, static_cast<size_t>(std::ceil(0.99 * defects.size())) - 1)];
  return r;
}

/// Marking-curve lengths of the induced metric I: the chord lengths of the
/// embedded faces, scaled by 1/c, are developed and the lengths scaled back.
inline MarkingLengths induced_marking_lengths(const EquivariantMesh& mesh, const EmbeddingData& x) {
  const CocycleVec tv = cocycle_vec(x.tau);
  std::vector<std::array<double, 3>> lengths(mesh.num_faces());
  for (int fi = 0; fi < mesh.num_faces(); ++fi) {
    const MeshFace& f = mesh.faces()[fi];
    std::array<Vec21, 3> xc;
    for (int c = 0; c < 3; ++c) xc[c] = f.lift[c] * x.x[f.v[c]] + f.jac[c] * tv;
    for (int c = 0; c < 3; ++c) {
      const double n2 = mink_norm2(xc[(c + 1) % 3] - xc[c]);
      if (!(n2 > 0.0)) throw DomainError("induced_marking_lengths: an embedded edge is not spacelike");
      lengths[fi][c] = std::sqrt(n2) / x.c;
    }
  }
  return x.c * DevelopingMap(mesh, std::move(lengths)).marking_lengths();
}

struct ConvexityReport {
  int pairs = 0;
  int violations = 0;
  double min_margin = 0.0;  ///< min of -s <X(g v) - X(u), u> / (c (cosh d - 1))
  std::vector<std::pair<int, int>> offending;  ///< (u, v) of the first violations
};

/// Supporting-plane test: every sampled point X(g v) lies strictly on the
/// inner side of the tangent plane at X(u), with normal u.
inline ConvexityReport convexity_check(const EquivariantMesh& mesh, const EmbeddingData& x, int pairs = 10000,
                                       int max_word = 3, std::uint64_t seed = 1) {
  ConvexityReport r;
  const double s = orientation_sign(x.orientation);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_vertex(0, mesh.num_vertices() - 1), pick_len(0, max_word),
      pick_gen(1, kNumGenerators), pick_sign(0, 1);
  r.min_margin = std::numeric_limits<double>::infinity();
  while (r.pairs < pairs) {
    const int u = pick_vertex(rng), v = pick_vertex(rng);
    Word w;
    const int len = pick_len(rng);
    for (int i = 0; i < len; ++i) w.push_back(pick_sign(rng) ? pick_gen(rng) : -pick_gen(rng));
    w = word_reduce(w);
    const Vec21 pu = mesh.position(u);
    const Vec21 pv = mesh.metric().eval(w) * mesh.position(v);
    const double ch = -mink_inner(pu, pv);
    if (ch - 1.0 < 1e-10) continue;
    ++r.pairs;
    const double margin = -s * mink_inner(x.lifted(v, w) - x.x[u], pu) / (x.c * (ch - 1.0));
    r.min_margin = std::min(r.min_margin, margin);
    if (!(margin > 0.0)) {
      ++r.violations;
      if (r.offending.size() < 20) r.offending.emplace_back(u, v);
    }
  }
  return r;
}

struct SurfaceFile {
  std::vector<Vec21> x;
  std::vector<double> phi;
  std::vector<std::array<int, 3>> faces;
};

/// "V F", then "x1 x2 x3 phi" per vertex class, then "a b c" per face.
inline void write_surface(std::ostream& os, const EquivariantMesh& mesh, const EmbeddingData& x, const SupportData& s) {
  os << mesh.num_vertices() << ' ' << mesh.num_faces() << '\n';
  os.precision(17);
  for (int k = 0; k < mesh.num_vertices(); ++k)
    os << x.x[k][0] << ' ' << x.x[k][1] << ' ' << x.x[k][2] << ' ' << s.phi.values[k] << '\n';
  for (const auto& f : mesh.faces()) os << f.v[0] << ' ' << f.v[1] << ' ' << f.v[2] << '\n';
  if (!os) throw Error("write_surface: write failed");
}

inline SurfaceFile read_surface(std::istream& is) {
  SurfaceFile s;
  int nv = 0, nf = 0;
  if (!(is >> nv >> nf) || nv < 0 || nf < 0) throw DomainError("read_surface: bad header");
  s.x.resize(nv);
  s.phi.resize(nv);
  for (int k = 0; k < nv; ++k)
    if (!(is >> s.x[k][0] >> s.x[k][1] >> s.x[k][2] >> s.phi[k])) throw DomainError("read_surface: truncated vertex block");
  s.faces.resize(nf);
  for (auto& f : s.faces) {
    if (!(is >> f[0] >> f[1] >> f[2])) throw DomainError("read_surface: truncated face block");
    for (int v : f)
      if (v < 0 || v >= nv) throw DomainError("read_surface: face index out of range");
  }
  return s;
}

}  // namespace ghmc

#endif  // GHMC_EMBEDDING_HPP
