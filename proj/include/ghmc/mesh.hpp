// Equivariant geodesic triangulations of H^2 / rho and their discrete calculus.
//
// Vertices are points of a fundamental polygon D, one per vertex class of the
// closed surface. A face lists, per corner, the class and the group element
// placing that corner in the universal cover, so faces may straddle the sides
// of D. Scalar and operator fields are stored per vertex class; operators are
// 2x2 matrices in the vertex frame (e1, e2).
//
// The combinatorics lives in a MeshTemplate. Geometry for another metric is
// obtained by moving the polygon with the same side words and keeping each
// vertex at fixed Klein barycentric coordinates in its fan cell, so the
// discrete operators vary smoothly with the metric.
#ifndef GHMC_MESH_HPP
#define GHMC_MESH_HPP

#include "ghmc/delaunay.hpp"
#include "ghmc/fuchsian.hpp"

#include <Eigen/Sparse>

#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <unordered_map>

namespace ghmc {

using ScalarField = Eigen::VectorXd;
using OperatorField = std::vector<Mat2>;
using CocycleVec = Eigen::Matrix<double, 3 * kNumGenerators, 1>;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Frame = Eigen::Matrix<double, 3, 2>;

/// Function on the universal cover with phi(g x) = phi(x) + <tau(g), g x>;
/// tau = 0 gives an ordinary function on the surface.
struct TwistedScalar {
  ScalarField values;
  CocycleVec tau = CocycleVec::Zero();
};

/// Weight of the centre-misfit term in the regression Hessian.
constexpr double kHessianStabilization = 3.0;

struct CornerLift {
  int vertex = 0;
  Word word;
};

struct MeshTemplate {
  Vec21 center;
  double target_edge = 0.1;
  std::vector<Word> side_words;  ///< sides of the fan polygon, counter-clockwise
  struct Anchor {
    int cell = 0;  ///< fan triangle (center, v_cell, v_cell+1)
    Eigen::Vector3d bary;
  };
  std::vector<Anchor> anchors;
  std::vector<std::array<CornerLift, 3>> faces;
};

struct MeshFace {
  std::array<int, 3> v;
  std::array<Iso21, 3> lift;
  std::array<CocycleJacobian, 3> jac;
  std::array<Vec21, 3> pos;      ///< lifted corner positions
  std::array<double, 3> angle;   ///< interior angle at each corner
  std::array<double, 3> length;  ///< length of the edge opposite each corner
  double area = 0.0;
};

/// A neighbour of a vertex in the universal cover: class `vertex` placed by
/// `lift` relative to the canonical position of the centre vertex.
struct StencilPoint {
  int vertex = 0;
  Iso21 lift = Iso21::Identity();
  CocycleJacobian jac = CocycleJacobian::Zero();
  Vec21 pos = Vec21::Zero();
};

struct Stencil {
  std::vector<StencilPoint> points;  ///< points[0] is the centre itself
  Eigen::Matrix<double, 2, Eigen::Dynamic> grad;
  Eigen::Matrix<double, 3, Eigen::Dynamic> hess;  ///< rows H11, H12, H22
  Eigen::Matrix<double, 2, 3 * kNumGenerators> grad_twist;
  Eigen::Matrix<double, 3, 3 * kNumGenerators> hess_twist;
};

struct FaceNeighbor {
  int face = -1;
  int edge = -1;        ///< edge index in the neighbour (opposite corner)
  Iso21 deck;           ///< the neighbour's copy adjacent to this face is deck * face
  Word deck_word;
};

namespace detail {

inline Frame tangent_frame(const Vec21& x) {
  Vec21 e1 = tangent_projector(x) * Vec21(1.0, 0.0, 0.0);
  e1 /= std::sqrt(mink_norm2(e1));
  Vec21 e2 = mink_cross(x, e1);
  Frame e;
  e.col(0) = e1;
  e.col(1) = e2;
  return e;
}

inline Eigen::Vector2d normal_coords(const Vec21& x, const Frame& e, const Vec21& y) {
  // the tangential part of y has length sinh d
  const Vec21 u = y + mink_inner(x, y) * x;
  const double sh = std::sqrt(std::max(mink_norm2(u), 0.0));
  const double scale = sh < 1e-8 ? 1.0 : std::asinh(sh) / sh;
  return scale * Eigen::Vector2d(mink_inner(u, e.col(0)), mink_inner(u, e.col(1)));
}

inline double cot(double a) { return std::cos(a) / std::sin(a); }

inline Vec21 polygon_vertex(const Vec21& n0, const Vec21& n1) {
  Vec21 x = mink_cross(n0, n1);
  if (x[2] < 0) x = -x;
  return hyp_normalize(x);
}

}  // namespace detail

class EquivariantMesh {
 public:
  EquivariantMesh(MeshTemplate tmpl, const MarkedMetric& m) : tmpl_(std::move(tmpl)), metric_(m) {
    place_polygon();
    place_vertices();
    build_faces();
    build_operators();
  }

  const MeshTemplate& mesh_template() const { return tmpl_; }
  const MarkedMetric& metric() const { return metric_; }
  int num_vertices() const { return static_cast<int>(pos_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  int num_edges() const { return num_edges_; }
  int euler_characteristic() const { return num_vertices() - num_edges() + num_faces(); }

  const std::vector<Vec21>& positions() const { return pos_; }
  const Vec21& position(int k) const { return pos_[k]; }
  const Frame& frame(int k) const { return frames_[k]; }
  const std::vector<MeshFace>& faces() const { return faces_; }
  const std::array<FaceNeighbor, 3>& face_neighbors(int f) const { return face_nbrs_[f]; }
  const ScalarField& mass() const { return mass_; }
  const Stencil& stencil(int k) const { return stencils_[k]; }
  const Vec21& center() const { return tmpl_.center; }

  /// Polygon vertices and the side elements for the current metric.
  const std::vector<Vec21>& polygon() const { return poly_; }
  const std::vector<Iso21>& side_elements() const { return side_mats_; }
  const std::vector<Vec21>& side_normals() const { return side_normals_; }

  double total_area() const { return mass_.sum(); }
  double min_angle() const { return min_angle_; }
  double max_edge() const { return max_edge_; }
  double mean_edge() const { return mean_edge_; }

  /// Half-cotangent stiffness K (positive semidefinite, zero row sums).
  const SparseMatrix& stiffness() const { return stiffness_; }
  /// K applied to a twisted function is K * values - twist_stiffness * tau.
  const Eigen::Matrix<double, Eigen::Dynamic, 3 * kNumGenerators>& twist_stiffness() const { return twist_stiffness_; }

  /// Lumped Laplacian Delta = -M^{-1} K.
  ScalarField laplacian(const ScalarField& u) const { return -(stiffness_ * u).cwiseQuotient(mass_); }

  double integrate(const ScalarField& u) const { return mass_.dot(u); }

  Mat2 hessian_at(int k, const TwistedScalar& u) const {
    const Stencil& s = stencils_[k];
    Eigen::Vector3d h = s.hess_twist * u.tau;
    for (size_t j = 0; j < s.points.size(); ++j) h += s.hess.col(j) * u.values[s.points[j].vertex];
    return (Mat2() << h[0], h[1], h[1], h[2]).finished();
  }

  Eigen::Vector2d gradient_at(int k, const TwistedScalar& u) const {
    const Stencil& s = stencils_[k];
    Eigen::Vector2d g = s.grad_twist * u.tau;
    for (size_t j = 0; j < s.points.size(); ++j) g += s.grad.col(j) * u.values[s.points[j].vertex];
    return g;
  }

  OperatorField hessian(const TwistedScalar& u) const {
    OperatorField h(num_vertices());
    for (int k = 0; k < num_vertices(); ++k) h[k] = hessian_at(k, u);
    return h;
  }

  OperatorField hessian(const ScalarField& u) const { return hessian(TwistedScalar{u, CocycleVec::Zero()}); }

  /// Sparse maps u -> (H11, H12, H22) at every vertex and u -> Tr Hess u.
  const std::array<SparseMatrix, 3>& hessian_matrices() const { return hess_mats_; }
  const SparseMatrix& hessian_trace_matrix() const { return hess_trace_; }
  /// Tr Hess of a twisted function is hessian_trace_matrix * values + this * tau.
  const Eigen::Matrix<double, Eigen::Dynamic, 3 * kNumGenerators>& hessian_trace_twist() const { return hess_trace_twist_; }

  /// Ambient form of an operator at vertex k: E M E^T eta.
  Eigen::Matrix3d ambient(int k, const Mat2& m) const {
    return frames_[k] * m * frames_[k].transpose() * minkowski_metric();
  }

  /// Moves y into the polygon by side pairings; returns (z, g) with z = g y.
  std::pair<Vec21, Iso21> reduce_to_domain(const Vec21& y) const {
    const auto r = reduce_with_word(y);
    return {r.point, r.element};
  }

  struct Location {
    int face = -1;
    Iso21 deck = Iso21::Identity();  ///< y lies in deck * (lifted face)
    Word deck_word;                  ///< reduced word of deck
    Eigen::Vector3d bary;            ///< y is proportional to sum_i bary_i * corner_i, sum bary = 1
  };

  /// Face containing an arbitrary point of the universal cover, found by a
  /// walk across edges from a face meeting the polygon centre.
  Location locate(const Vec21& y) const {
    const auto red = reduce_with_word(y);
    const Vec21& z = red.point;
    Location loc;
    loc.face = start_face_;
    loc.deck = Iso21::Identity();
    Word walk;
    for (int steps = 0; steps < 20 * num_faces() + 100; ++steps) {
      const MeshFace& f = faces_[loc.face];
      Eigen::Matrix3d p;
      for (int c = 0; c < 3; ++c) p.col(c) = loc.deck * f.pos[c];
      const Eigen::Vector3d w = p.partialPivLu().solve(z);
      int e = 0;
      w.minCoeff(&e);
      if (w[e] >= -1e-12 * w.cwiseAbs().maxCoeff()) {
        loc.bary = w / w.sum();
        loc.deck_word = word_reduce(word_concat(word_inverse(red.word), walk));
        loc.deck = metric_.eval(loc.deck_word);
        return loc;
      }
      const FaceNeighbor& nb = face_nbrs_[loc.face][e];
      loc.deck = loc.deck * nb.deck;
      walk = word_reduce(word_concat(walk, nb.deck_word));
      loc.face = nb.face;
    }
    throw SolverError("locate: walk did not terminate");
  }

  /// Writes the quotient mesh: a header "V F", one "x1 x2 x3" line per vertex
  /// class, then one 0-based "a b c" line per face.
  void write(std::ostream& os) const {
    os << num_vertices() << ' ' << num_faces() << '\n';
    os.precision(17);
    for (const auto& x : pos_) os << x[0] << ' ' << x[1] << ' ' << x[2] << '\n';
    for (const auto& f : faces_) os << f.v[0] << ' ' << f.v[1] << ' ' << f.v[2] << '\n';
  }

 private:
  struct Reduction {
    Vec21 point;
    Iso21 element;
    Word word;  ///< point = eval(word) * y
  };

  Reduction reduce_with_word(const Vec21& y) const {
    Reduction r{y, Iso21::Identity(), {}};
    for (int it = 0; it < 10000; ++it) {
      int worst = -1;
      double best = 1e-13 * r.point[2];
      for (size_t i = 0; i < side_normals_.size(); ++i) {
        const double v = mink_inner(r.point, side_normals_[i]) / side_norm_len_[i];
        if (v > best) {
          best = v;
          worst = static_cast<int>(i);
        }
      }
      if (worst < 0) {
        r.word = word_reduce(r.word);
        r.element = metric_.eval(r.word);
        return r;
      }
      const Iso21 gi = iso_inverse(side_mats_[worst]);
      r.point = hyp_normalize(gi * r.point);
      r.element = gi * r.element;
      r.word = word_concat(word_inverse(tmpl_.side_words[worst]), r.word);
    }
    throw SolverError("reduce_to_domain: did not reach the fundamental polygon");
  }

  void place_polygon() {
    const Vec21& p = tmpl_.center;
    const int n = static_cast<int>(tmpl_.side_words.size());
    for (const auto& w : tmpl_.side_words) {
      side_mats_.push_back(metric_.eval(w));
      side_normals_.push_back(side_mats_.back() * p - p);
      side_norm_len_.push_back(std::sqrt(mink_norm2(side_normals_.back())));
    }
    for (int i = 0; i < n; ++i) poly_.push_back(detail::polygon_vertex(side_normals_[(i + n - 1) % n], side_normals_[i]));
  }

  void place_vertices() {
    const int n = static_cast<int>(poly_.size());
    const Eigen::Vector2d kc = detail::hyp_to_klein(tmpl_.center);
    for (const auto& a : tmpl_.anchors) {
      const Eigen::Vector2d k = a.bary[0] * kc + a.bary[1] * detail::hyp_to_klein(poly_[a.cell]) +
                                a.bary[2] * detail::hyp_to_klein(poly_[(a.cell + 1) % n]);
      pos_.push_back(detail::klein_to_hyp(k));
    }
    for (const auto& x : pos_) frames_.push_back(detail::tangent_frame(x));
  }

  const std::pair<Iso21, CocycleJacobian>& lift_of(const Word& w) {
    auto it = lift_cache_.find(w);
    if (it == lift_cache_.end())
      it = lift_cache_.emplace(w, std::make_pair(metric_.eval(w), cocycle_jacobian(metric_.gens, w))).first;
    return it->second;
  }

  void build_faces() {
    const int nv = static_cast<int>(pos_.size());
    mass_ = ScalarField::Zero(nv);
    min_angle_ = std::numbers::pi;
    max_edge_ = 0.0;
    double edge_sum = 0.0;
    for (const auto& tf : tmpl_.faces) {
      MeshFace f;
      for (int c = 0; c < 3; ++c) {
        f.v[c] = tf[c].vertex;
        const auto& [g, j] = lift_of(tf[c].word);
        f.lift[c] = g;
        f.jac[c] = j;
        f.pos[c] = hyp_normalize(g * pos_[f.v[c]]);
      }
      double sum = 0.0;
      for (int c = 0; c < 3; ++c) {
        f.angle[c] = detail::hyp_angle(f.pos[c], f.pos[(c + 2) % 3], f.pos[(c + 1) % 3]);
        f.length[c] = hyp_dist(f.pos[(c + 1) % 3], f.pos[(c + 2) % 3]);
        sum += f.angle[c];
        min_angle_ = std::min(min_angle_, f.angle[c]);
        max_edge_ = std::max(max_edge_, f.length[c]);
        edge_sum += f.length[c];
      }
      // orientation: counter-clockwise as seen from the future
      const double orient = (f.pos[1] - f.pos[0]).cross(f.pos[2] - f.pos[0]).dot(f.pos[0] + f.pos[1] + f.pos[2]);
      if (!(orient > 0)) throw DomainError("build_mesh: inverted face");
      f.area = std::numbers::pi - sum;
      for (int c = 0; c < 3; ++c) mass_[f.v[c]] += f.area / 3.0;
      faces_.push_back(std::move(f));
    }
    mean_edge_ = edge_sum / (3.0 * faces_.size());
    for (int fi = 0; fi < num_faces(); ++fi) {
      Eigen::Matrix3d p;
      for (int c = 0; c < 3; ++c) p.col(c) = faces_[fi].pos[c];
      if (p.partialPivLu().solve(tmpl_.center).minCoeff() >= 0) start_face_ = fi;
    }
    build_adjacency();
  }

  // Faces sharing an edge in the universal cover are matched through the
  // relative position of the edge endpoints.
  void build_adjacency() {
    struct HalfEdge {
      int face, edge;
      Vec21 rel;  // far endpoint seen from the canonical near endpoint
    };
    std::map<std::pair<int, int>, std::vector<HalfEdge>> table;
    for (int fi = 0; fi < num_faces(); ++fi) {
      const auto& f = faces_[fi];
      for (int e = 0; e < 3; ++e) {
        const int a = (e + 1) % 3, b = (e + 2) % 3;
        table[{f.v[a], f.v[b]}].push_back({fi, e, iso_inverse(f.lift[a]) * f.pos[b]});
      }
    }
    face_nbrs_.assign(faces_.size(), {});
    int matched = 0;
    for (int fi = 0; fi < num_faces(); ++fi) {
      const auto& f = faces_[fi];
      for (int e = 0; e < 3; ++e) {
        const int a = (e + 1) % 3, b = (e + 2) % 3;
        // the neighbour traverses the edge from v[b] to v[a]
        const auto it = table.find({f.v[b], f.v[a]});
        const Vec21 want = iso_inverse(f.lift[b]) * f.pos[a];
        int found = -1;
        if (it != table.end())
          for (size_t h = 0; h < it->second.size(); ++h)
            if ((it->second[h].rel - want).norm() < 1e-7 * want.norm() && it->second[h].face * 3 + it->second[h].edge != fi * 3 + e)
              found = static_cast<int>(h);
        if (found < 0) throw DomainError("build_mesh: edge without a neighbouring face");
        const HalfEdge& h = it->second[found];
        const auto& g = faces_[h.face];
        // corner of g holding v[b] is (h.edge + 1) % 3
        const int gb = (h.edge + 1) % 3;
        FaceNeighbor nb;
        nb.face = h.face;
        nb.edge = h.edge;
        nb.deck = f.lift[b] * iso_inverse(g.lift[gb]);
        nb.deck_word = word_reduce(word_concat(tmpl_.faces[fi][b].word, word_inverse(tmpl_.faces[h.face][gb].word)));
        face_nbrs_[fi][e] = nb;
        ++matched;
      }
    }
    num_edges_ = matched / 2;
  }

  void build_operators() {
    const int nv = num_vertices();
    using Triplet = Eigen::Triplet<double>;
    std::vector<Triplet> trips;
    twist_stiffness_ = Eigen::Matrix<double, Eigen::Dynamic, 3 * kNumGenerators>::Zero(nv, 3 * kNumGenerators);
    const auto& eta = minkowski_metric();

    // 1-ring neighbours with relative lifts, from the faces
    std::vector<std::vector<StencilPoint>> ring(nv);
    auto add_ring = [&](int k, const StencilPoint& sp) {
      for (const auto& q : ring[k])
        if (q.vertex == sp.vertex && (q.pos - sp.pos).norm() < 1e-9 * sp.pos.norm()) return;
      ring[k].push_back(sp);
    };

    for (const auto& f : faces_) {
      for (int c = 0; c < 3; ++c) {
        const int a = (c + 1) % 3, b = (c + 2) % 3;
        const double w = 0.5 * detail::cot(f.angle[c]);
        trips.emplace_back(f.v[a], f.v[a], w);
        trips.emplace_back(f.v[b], f.v[b], w);
        trips.emplace_back(f.v[a], f.v[b], -w);
        trips.emplace_back(f.v[b], f.v[a], -w);
        // canonical-frame differences of a twisted function along the edge
        twist_stiffness_.row(f.v[a]) += w * f.pos[b].transpose() * eta * (f.jac[b] - f.jac[a]);
        twist_stiffness_.row(f.v[b]) += w * f.pos[a].transpose() * eta * (f.jac[a] - f.jac[b]);
      }
      for (int a = 0; a < 3; ++a) {
        const Iso21 inv = iso_inverse(f.lift[a]);
        for (int b = 0; b < 3; ++b) {
          if (a == b) continue;
          StencilPoint sp;
          sp.vertex = f.v[b];
          sp.lift = inv * f.lift[b];
          sp.jac = inv * (f.jac[b] - f.jac[a]);
          sp.pos = inv * f.pos[b];
          add_ring(f.v[a], sp);
        }
      }
    }
    stiffness_.resize(nv, nv);
    stiffness_.setFromTriplets(trips.begin(), trips.end());

    stencils_.resize(nv);
    std::vector<Triplet> ht[3], tr;
    for (int k = 0; k < nv; ++k) {
      Stencil& s = stencils_[k];
      s.points.push_back({k, Iso21::Identity(), CocycleJacobian::Zero(), pos_[k]});
      auto add = [&](const StencilPoint& sp) {
        if (sp.vertex == k && (sp.pos - pos_[k]).norm() < 1e-9 * pos_[k].norm()) return;
        for (const auto& q : s.points)
          if (q.vertex == sp.vertex && (q.pos - sp.pos).norm() < 1e-9 * sp.pos.norm()) return;
        s.points.push_back(sp);
      };
      for (const auto& n1 : ring[k]) add(n1);
      for (const auto& n1 : ring[k])
        for (const auto& n2 : ring[n1.vertex]) {
          StencilPoint sp;
          sp.vertex = n2.vertex;
          sp.lift = n1.lift * n2.lift;
          sp.jac = n1.jac + n1.lift * n2.jac;
          sp.pos = hyp_normalize(n1.lift * n2.pos);
          add(sp);
        }
      fit_stencil(k);
      for (size_t j = 0; j < s.points.size(); ++j) {
        for (int r = 0; r < 3; ++r) ht[r].emplace_back(k, s.points[j].vertex, s.hess(r, j));
        tr.emplace_back(k, s.points[j].vertex, s.hess(0, j) + s.hess(2, j));
      }
    }
    for (int r = 0; r < 3; ++r) {
      hess_mats_[r].resize(nv, nv);
      hess_mats_[r].setFromTriplets(ht[r].begin(), ht[r].end());
    }
    hess_trace_twist_.resize(nv, 3 * kNumGenerators);
    for (int k = 0; k < nv; ++k) hess_trace_twist_.row(k) = stencils_[k].hess_twist.row(0) + stencils_[k].hess_twist.row(2);
    hess_trace_.resize(nv, nv);
    hess_trace_.setFromTriplets(tr.begin(), tr.end());
  }

  // Cubic least-squares fit in geodesic normal coordinates at the vertex;
  // Christoffel symbols vanish there, so the quadratic coefficients are the
  // covariant Hessian.
  void fit_stencil(int k) {
    Stencil& s = stencils_[k];
    const int n = static_cast<int>(s.points.size());
    if (n < 12) throw DomainError("hessian: stencil too small for the regression (pathological ring)");
    std::vector<Eigen::Vector2d> y(n);
    double scale = 0.0;
    for (int j = 0; j < n; ++j) {
      y[j] = detail::normal_coords(pos_[k], frames_[k], s.points[j].pos);
      scale = std::max(scale, y[j].norm());
    }
    Eigen::MatrixXd v(n, 10);
    for (int j = 0; j < n; ++j) {
      const double a = y[j][0] / scale, b = y[j][1] / scale;
      v.row(j) << 1, a, b, 0.5 * a * a, a * b, 0.5 * b * b, a * a * a, a * a * b, a * b * b, b * b * b;
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(v);
    cod.setThreshold(1e-10);
    if (cod.rank() < 10) throw DomainError("hessian: rank-deficient regression (pathological ring)");
    const Eigen::MatrixXd pinv = cod.pseudoInverse();
    s.grad = pinv.middleRows(1, 2) / scale;
    s.hess = pinv.middleRows(3, 3) / (scale * scale);
    // Stabilization: the misfit of the centre value, which vanishes on cubic
    // data, is subtracted from the diagonal. It is O(h^2) on smooth functions
    // and damps the oscillatory modes that least-squares Hessians cannot see.
    Eigen::RowVectorXd misfit = -pinv.row(0);
    misfit[0] += 1.0;
    s.hess.row(0) -= kHessianStabilization * misfit / (scale * scale);
    s.hess.row(2) -= kHessianStabilization * misfit / (scale * scale);
    // a twisted value at a lifted point carries the extra term <tau(g), g x>
    Eigen::Matrix<double, Eigen::Dynamic, 3 * kNumGenerators> tw(n, 3 * kNumGenerators);
    for (int j = 0; j < n; ++j) tw.row(j) = s.points[j].pos.transpose() * minkowski_metric() * s.points[j].jac;
    s.grad_twist = s.grad * tw;
    s.hess_twist = s.hess * tw;
  }

  MeshTemplate tmpl_;
  MarkedMetric metric_;
  std::vector<Iso21> side_mats_;
  std::vector<Vec21> side_normals_;
  std::vector<double> side_norm_len_;
  std::vector<Vec21> poly_;
  std::vector<Vec21> pos_;
  std::vector<Frame> frames_;
  std::vector<MeshFace> faces_;
  std::vector<std::array<FaceNeighbor, 3>> face_nbrs_;
  std::map<Word, std::pair<Iso21, CocycleJacobian>> lift_cache_;
  ScalarField mass_;
  SparseMatrix stiffness_;
  Eigen::Matrix<double, Eigen::Dynamic, 3 * kNumGenerators> twist_stiffness_;
  std::vector<Stencil> stencils_;
  std::array<SparseMatrix, 3> hess_mats_;
  SparseMatrix hess_trace_;
  Eigen::Matrix<double, Eigen::Dynamic, 3 * kNumGenerators> hess_trace_twist_;
  int num_edges_ = 0;
  double min_angle_ = 0.0, max_edge_ = 0.0, mean_edge_ = 0.0;
  int start_face_ = 0;
};

namespace detail {

// Polar bucket grid around a centre point for hyperbolic radius queries.
class PolarGrid {
 public:
  PolarGrid(const Vec21& center, double radius, double max_r)
      : c_(center), frame_(tangent_frame(center)), r_(radius) {
    const int bands = static_cast<int>(max_r / radius) + 2;
    for (int b = 0; b < bands; ++b) {
      const double inner = b * radius;
      const double width = inner < radius ? 2.0 * std::numbers::pi : radius / std::sinh(inner);
      counts_.push_back(std::max(1, static_cast<int>(2.0 * std::numbers::pi / width)));
      cells_.emplace_back(counts_.back());
    }
  }

  void insert(const Vec21& x, int id) {
    const auto [b, t] = key(x);
    cells_[b][t].push_back({x, id});
  }

  template <typename F>
  void for_each_near(const Vec21& x, F&& fn) const {
    const Eigen::Vector2d y = normal_coords(c_, frame_, x);
    const double rho = y.norm();
    const double theta = std::atan2(y[1], y[0]);
    const int b0 = std::min<int>(static_cast<int>(rho / r_), static_cast<int>(cells_.size()) - 1);
    for (int b = std::max(0, b0 - 1); b <= std::min<int>(b0 + 1, static_cast<int>(cells_.size()) - 1); ++b) {
      const int n = counts_[b];
      int span = n;
      if (rho > r_) {
        const double dtheta = std::asin(std::min(1.0, std::sinh(r_) / std::sinh(rho)));
        span = std::min(n, static_cast<int>(dtheta / (2.0 * std::numbers::pi) * n) + 2);
      }
      const int t0 = angle_cell(theta, n);
      if (2 * span + 1 >= n) {
        for (int t = 0; t < n; ++t)
          for (const auto& e : cells_[b][t]) fn(e.first, e.second);
      } else {
        for (int dt = -span; dt <= span; ++dt)
          for (const auto& e : cells_[b][((t0 + dt) % n + n) % n]) fn(e.first, e.second);
      }
    }
  }

 private:
  static int angle_cell(double theta, int n) {
    int t = static_cast<int>((theta + std::numbers::pi) / (2.0 * std::numbers::pi) * n);
    return std::clamp(t, 0, n - 1);
  }
  std::pair<int, int> key(const Vec21& x) const {
    const Eigen::Vector2d y = normal_coords(c_, frame_, x);
    const int b = std::min<int>(static_cast<int>(y.norm() / r_), static_cast<int>(cells_.size()) - 1);
    return {b, angle_cell(std::atan2(y[1], y[0]), counts_[b])};
  }

  Vec21 c_;
  Frame frame_;
  double r_;
  std::vector<int> counts_;
  std::vector<std::vector<std::vector<std::pair<Vec21, int>>>> cells_;
};

inline double side_excess(const FundamentalDomain& d, const Vec21& y) {
  double worst = -1e300;
  for (const auto& n : d.side_normals) worst = std::max(worst, std::asinh(mink_inner(y, n) / std::sqrt(mink_norm2(n))));
  return worst;
}

inline std::pair<Vec21, int> reduce_into(const FundamentalDomain& d, const std::vector<Iso21>& pairing, Vec21 y) {
  for (int it = 0; it < 1000; ++it) {
    int worst = -1;
    double best = 0.0;
    for (size_t i = 0; i < d.side_normals.size(); ++i) {
      const double v = mink_inner(y, d.side_normals[i]) / std::sqrt(mink_norm2(d.side_normals[i]));
      if (v > best) {
        best = v;
        worst = static_cast<int>(i);
      }
    }
    if (worst < 0) return {y, it};
    y = hyp_normalize(pairing[worst] * y);
  }
  throw SolverError("build_mesh: sample could not be reduced into the domain");
}

// Tiles g D whose centres lie within `reach` of the centre of D, found by a
// breadth-first walk across sides; tiles meeting a neighbourhood of D form an
// edge-connected set, so the walk cannot miss one.
inline std::vector<GroupElement> tiles_near(const FundamentalDomain& d, const MarkedMetric& m, double reach) {
  const double limit = std::cosh(reach);
  std::vector<GroupElement> out;
  std::vector<GroupElement> queue = {GroupElement{}};
  std::vector<Vec21> seen = {d.center};
  for (size_t head = 0; head < queue.size(); ++head) {
    const GroupElement g = queue[head];
    for (const auto& s : d.side_elements) {
      GroupElement h{word_reduce(word_concat(g.word, s.word)), Iso21::Identity()};
      h.matrix = m.eval(h.word);
      const Vec21 hp = h.matrix * d.center;
      if (-mink_inner(d.center, hp) > limit) continue;
      bool dup = false;
      for (const auto& q : seen)
        if (-mink_inner(q, hp) < 1.0 + 1e-10) dup = true;
      if (dup) continue;
      seen.push_back(hp);
      queue.push_back(h);
      out.push_back(h);
    }
  }
  return out;
}

// Minimum side length of the Dirichlet polygon, used to pick a well-shaped centre.
inline double min_side(const FundamentalDomain& d) {
  double m = 1e300;
  for (int i = 0; i < d.num_sides(); ++i) m = std::min(m, hyp_dist(d.vertices[i], d.vertices[(i + 1) % d.num_sides()]));
  return m;
}

}  // namespace detail

/// Combinatorics of an equivariant mesh of the surface of m. Vertices form a
/// Poisson-disk sample of spacing 0.6 * target_edge on the closed
/// surface; faces are its hyperbolic Delaunay triangulation.
inline MeshTemplate build_template(const MarkedMetric& m, double target_edge, std::uint64_t seed = 1) {
  if (!(target_edge >= 0.02 && target_edge <= 0.5)) throw DomainError("build_mesh: target_edge must lie in [0.02, 0.5]");

  // centre: the best of a few base points by shortest polygon side
  std::optional<FundamentalDomain> dom;
  double best = -1.0;
  for (int i = 0; i < 9; ++i) {
    const double r = i == 0 ? 0.0 : (i < 5 ? 0.12 : 0.3);
    const double a = 0.37 + 1.57 * i;
    const Vec21 p = detail::klein_to_hyp({0.0713 + r * std::cos(a), 0.0419 + r * std::sin(a)});
    FundamentalDomain d = dirichlet_domain(m, p);
    const double s = detail::min_side(d);
    if (s > best) {
      best = s;
      dom = std::move(d);
    }
  }
  const FundamentalDomain& d = *dom;
  const Vec21 p = d.center;
  const int nsides = d.num_sides();
  std::vector<Iso21> pairing;
  for (const auto& g : d.pairing) pairing.push_back(g.matrix);
  double radius = 0.0;
  for (const auto& v : d.vertices) radius = std::max(radius, hyp_dist(p, v));

  const double r = 0.6 * target_edge;
  const double band = 3.0 * r;
  // group elements whose translates of D come within `band` of D
  const std::vector<GroupElement> near = detail::tiles_near(d, m, 2.0 * radius + band);

  for (int attempt = 0; attempt < 5; ++attempt) {
    std::mt19937_64 rng(seed + 7919 * attempt);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<Vec21> pts;                     // canonical samples
    std::vector<std::pair<int, int>> copies;    // extended point -> (sample, element index or -1)
    std::vector<Vec21> ext;
    detail::PolarGrid grid(p, r, radius + band + r);

    auto far_enough = [&](const Vec21& y) {
      bool ok = true;
      grid.for_each_near(y, [&](const Vec21& q, int) {
        if (ok && -mink_inner(q, y) < std::cosh(r)) ok = false;
      });
      return ok;
    };
    auto accept = [&](const Vec21& y) {
      const int id = static_cast<int>(pts.size());
      pts.push_back(y);
      auto push = [&](const Vec21& q, int g) {
        copies.push_back({id, g});
        ext.push_back(q);
        grid.insert(q, static_cast<int>(ext.size()) - 1);
      };
      push(y, -1);
      for (size_t g = 0; g < near.size(); ++g) {
        const Vec21 q = hyp_normalize(near[g].matrix * y);
        if (detail::side_excess(d, q) <= band) push(q, static_cast<int>(g));
      }
    };

    accept(p);
    std::vector<int> active = {0};
    while (!active.empty()) {
      const size_t pick = static_cast<size_t>(unif(rng) * active.size()) % active.size();
      const Vec21 a = pts[active[pick]];
      const Frame fa = detail::tangent_frame(a);
      bool placed = false;
      for (int trial = 0; trial < 40 && !placed; ++trial) {
        const double th = 2.0 * std::numbers::pi * unif(rng);
        const double dist = r * (1.0 + unif(rng) * 1.0) * 1.0001;
        const Vec21 u = std::cos(th) * fa.col(0) + std::sin(th) * fa.col(1);
        const auto [y, steps] = detail::reduce_into(d, pairing, hyp_geodesic(a, u, dist));
        (void)steps;
        if (!d.contains(y, 0.0) || !far_enough(y)) continue;
        accept(y);
        active.push_back(static_cast<int>(pts.size()) - 1);
        placed = true;
      }
      if (!placed) {
        active[pick] = active.back();
        active.pop_back();
      }
    }

    // Delaunay in the Poincare disk centred at p; hyperbolic circles are
    // Euclidean circles there.
    const Iso21 to_origin = iso_inverse(hyp_boost_to(p));
    std::vector<Eigen::Vector2d> planar(ext.size());
    for (size_t i = 0; i < ext.size(); ++i) {
      const Vec21 q = to_origin * ext[i];
      planar[i] = Eigen::Vector2d(q[0], q[1]) / (1.0 + q[2]);
    }
    std::vector<int> order(ext.size());
    std::iota(order.begin(), order.end(), 0);
    const int bins = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(ext.size()) / 4.0)));
    auto bin = [&](int i) {
      const int bx = std::clamp(static_cast<int>((planar[i][0] + 1.0) * 0.5 * bins), 0, bins - 1);
      const int by = std::clamp(static_cast<int>((planar[i][1] + 1.0) * 0.5 * bins), 0, bins - 1);
      return std::make_pair(bx, bx % 2 ? bins - 1 - by : by);
    };
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const auto ka = bin(a), kb = bin(b);
      return ka != kb ? ka < kb : a < b;
    });
    std::vector<Eigen::Vector2d> sorted(ext.size());
    for (size_t i = 0; i < order.size(); ++i) sorted[i] = planar[order[i]];
    const auto tris = delaunay_triangulate(sorted);

    MeshTemplate t;
    t.center = p;
    t.target_edge = target_edge;
    for (const auto& g : d.side_elements) t.side_words.push_back(g.word);
    for (const auto& tri : tris) {
      const Vec21 c = hyp_normalize(ext[order[tri[0]]] + ext[order[tri[1]]] + ext[order[tri[2]]]);
      if (!d.contains(c, 0.0)) continue;
      // planar Delaunay triangles on the outer rim of the band are not
      // hyperbolic Delaunay triangles; true ones have small circumcircles
      const Vec21& q0 = ext[order[tri[0]]];
      Vec21 cc = mink_cross(ext[order[tri[1]]] - q0, ext[order[tri[2]]] - q0);
      if (!(mink_norm2(cc) < 0)) continue;
      if (cc[2] < 0) cc = -cc;
      if (-mink_inner(hyp_normalize(cc), q0) > std::cosh(2.0 * r)) continue;
      std::array<CornerLift, 3> f;
      for (int k = 0; k < 3; ++k) {
        const auto [id, g] = copies[order[tri[k]]];
        f[k].vertex = id;
        if (g >= 0) f[k].word = near[g].word;
      }
      t.faces.push_back(std::move(f));
    }
    // anchors in the fan cells of the polygon
    const Eigen::Vector2d kc = detail::hyp_to_klein(p);
    for (const auto& x : pts) {
      const Eigen::Vector2d k = detail::hyp_to_klein(x);
      MeshTemplate::Anchor best_anchor;
      double best_min = -1e300;
      for (int i = 0; i < nsides; ++i) {
        Eigen::Matrix3d a;
        const Eigen::Vector2d k1 = detail::hyp_to_klein(d.vertices[i]);
        const Eigen::Vector2d k2 = detail::hyp_to_klein(d.vertices[(i + 1) % nsides]);
        a << kc[0], k1[0], k2[0], kc[1], k1[1], k2[1], 1, 1, 1;
        const Eigen::Vector3d b = a.partialPivLu().solve(Eigen::Vector3d(k[0], k[1], 1.0));
        if (b.minCoeff() > best_min) {
          best_min = b.minCoeff();
          best_anchor = {i, b};
        }
      }
      t.anchors.push_back(best_anchor);
    }

    try {
      EquivariantMesh mesh(t, m);
      const bool ok = mesh.euler_characteristic() == -2 && mesh.min_angle() > 5.0 * std::numbers::pi / 180.0 &&
                      mesh.max_edge() <= 1.5 * target_edge && std::abs(mesh.total_area() - 4.0 * std::numbers::pi) <= 1e-4;
      if (ok) return t;
    } catch (const DomainError&) {
      // rejected; try the next seed
    }
  }
  throw DomainError("build_mesh: degenerate triangulation after retry budget");
}

inline EquivariantMesh build_mesh(const MarkedMetric& m, double target_edge, std::uint64_t seed = 1) {
  return EquivariantMesh(build_template(m, target_edge, seed), m);
}

/// Trace, determinant and the rotation J by +90 degrees in the vertex frames.
inline ScalarField field_trace(const OperatorField& f) {
  ScalarField t(f.size());
  for (size_t i = 0; i < f.size(); ++i) t[i] = f[i].trace();
  return t;
}

inline ScalarField field_det(const OperatorField& f) {
  ScalarField t(f.size());
  for (size_t i = 0; i < f.size(); ++i) t[i] = f[i].determinant();
  return t;
}

inline const Mat2& rotation_j() {
  static const Mat2 j = (Mat2() << 0, -1, 1, 0).finished();
  return j;
}

/// M -> M J.
inline OperatorField field_rotate(const OperatorField& f) {
  OperatorField r(f.size());
  for (size_t i = 0; i < f.size(); ++i) r[i] = f[i] * rotation_j();
  return r;
}

inline OperatorField field_compose(const OperatorField& a, const OperatorField& b) {
  OperatorField r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] * b[i];
  return r;
}

inline OperatorField field_scaled_identity(const ScalarField& f) {
  OperatorField r(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) r[i] = f[i] * Mat2::Identity();
  return r;
}

inline OperatorField field_axpy(double a, const OperatorField& x, const OperatorField& y) {
  OperatorField r(y.size());
  for (size_t i = 0; i < y.size(); ++i) r[i] = a * x[i] + y[i];
  return r;
}

/// L2 inner product sum_k m_k Tr(A_k^T B_k).
inline double field_dot(const EquivariantMesh& mesh, const OperatorField& a, const OperatorField& b) {
  double s = 0.0;
  for (int k = 0; k < mesh.num_vertices(); ++k) s += mesh.mass()[k] * (a[k].transpose() * b[k]).trace();
  return s;
}

inline double field_norm(const EquivariantMesh& mesh, const OperatorField& a) { return std::sqrt(field_dot(mesh, a, a)); }

inline double max_asymmetry(const OperatorField& f) {
  double m = 0.0;
  for (const auto& x : f) m = std::max(m, (x - x.transpose()).cwiseAbs().maxCoeff());
  return m;
}

/// Per-face values: corner values transported to the face centroid and
/// averaged, in the frame of the centroid.
inline OperatorField face_average(const EquivariantMesh& mesh, const OperatorField& f) {
  OperatorField out;
  out.reserve(mesh.num_faces());
  const auto& eta = minkowski_metric();
  for (const auto& face : mesh.faces()) {
    const Vec21 c = hyp_normalize(face.pos[0] + face.pos[1] + face.pos[2]);
    const Frame fc = detail::tangent_frame(c);
    Mat2 acc = Mat2::Zero();
    for (int k = 0; k < 3; ++k) {
      const Vec21& x = face.pos[k];
      Frame e;  // frame of the corner, lifted and transported to c
      for (int j = 0; j < 2; ++j)
        e.col(j) = hyp_transport(x, c, face.lift[k] * mesh.frame(face.v[k]).col(j));
      const Eigen::Matrix2d r = fc.transpose() * eta * e;
      acc += r * f[face.v[k]] * r.transpose();
    }
    out.push_back(acc / 3.0);
  }
  return out;
}

}  // namespace ghmc

#endif  // GHMC_MESH_HPP
