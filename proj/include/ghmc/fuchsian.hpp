// Marked genus-2 hyperbolic structures: Fenchel-Nielsen coordinates,
// holonomy in SO(2,1), the marking-curve length coordinates and Dirichlet
// fundamental domains.
//
// The surface is cut along a separating curve c into two one-holed tori
// T1 = <a1,b1> and T2 = <a2,b2>, with [a1,b1] = c and [a2,b2] = c^{-1}.
// FN lengths are (l(a1), l(a2), l(c)); twists are taken along a1, a2, c.
#ifndef GHMC_FUCHSIAN_HPP
#define GHMC_FUCHSIAN_HPP

#include "ghmc/minkowski.hpp"

#include <algorithm>
#include <map>
#include <numbers>
#include <limits>
#include <numeric>
#include <optional>
#include <set>

namespace ghmc {

struct FNCoords {
  std::array<double, 3> length{2.0, 2.0, 2.0};
  std::array<double, 3> twist{0.0, 0.0, 0.0};

  Eigen::Matrix<double, 6, 1> as_vector() const {
    Eigen::Matrix<double, 6, 1> v;
    v << length[0], length[1], length[2], twist[0], twist[1], twist[2];
    return v;
  }
  static FNCoords from_vector(const Eigen::Matrix<double, 6, 1>& v) {
    FNCoords c;
    for (int i = 0; i < 3; ++i) {
      c.length[i] = v[i];
      c.twist[i] = v[3 + i];
    }
    return c;
  }
  friend bool operator==(const FNCoords&, const FNCoords&) = default;
};

constexpr int kNumMarkingCurves = 9;
using MarkingLengths = Eigen::Matrix<double, kNumMarkingCurves, 1>;

/// The fixed marking set: a1, b1, a1b1, a2, b2, a2b2, [a1,b1], a1a2, b1b2.
inline const std::array<Word, kNumMarkingCurves>& marking_words() {
  static const std::array<Word, kNumMarkingCurves> words = {
      Word{1}, Word{2}, Word{1, 2}, Word{3}, Word{4}, Word{3, 4}, Word{1, 2, -1, -2}, Word{1, 3}, Word{2, 4}};
  return words;
}

struct MarkedMetric {
  FNCoords fn;
  std::array<Mat2, kNumGenerators> sl2;
  GeneratorMap gens;
  MarkingLengths lengths;

  /// Word image, multiplied in SL(2,R) and converted once.
  Iso21 eval(std::span<const int> w) const { return psl2_to_so21(eval_sl2(w)); }

  Mat2 eval_sl2(std::span<const int> w) const {
    Mat2 r = Mat2::Identity();
    for (int s : w) {
      const Mat2& g = sl2[std::abs(s) - 1];
      r = s > 0 ? Mat2(r * g) : Mat2(r * (Mat2() << g(1, 1), -g(0, 1), -g(1, 0), g(0, 0)).finished());
    }
    return r;
  }
};

/// Translation length from an SO(2,1) trace.
inline double translation_length(const Iso21& g) {
  const double c = 0.5 * (g.trace() - 1.0);
  if (!(c > 1.0 + 1e-12)) throw DomainError("curve_length: element is not hyperbolic");
  return std::acosh(c);
}

inline double curve_length(const MarkedMetric& m, std::span<const int> w) {
  const Word r = word_reduce(w);
  if (r.empty()) throw DomainError("curve_length: trivial word");
  return translation_length(m.eval(r));
}

namespace detail {

inline Mat2 sl2_diag(double t) { return (Mat2() << std::exp(0.5 * t), 0, 0, std::exp(-0.5 * t)).finished(); }

inline Mat2 sl2_inv(const Mat2& g) { return (Mat2() << g(1, 1), -g(0, 1), -g(1, 0), g(0, 0)).finished(); }

inline Mat2 sl2_commutator(const Mat2& a, const Mat2& b) { return a * b * sl2_inv(a) * sl2_inv(b); }

// One-holed torus with interior curve a of length l, boundary length L and
// twist t along a: a is the translation by l along the axis through i, b is
// the translation across the common perpendicular followed by the twist.
inline std::pair<Mat2, Mat2> one_holed_torus(double l, double boundary, double t) {
  const double half = std::asinh(std::cosh(0.25 * boundary) / std::sinh(0.5 * l));
  const Mat2 p = (Mat2() << std::cosh(half), std::sinh(half), std::sinh(half), std::cosh(half)).finished();
  return {sl2_diag(l), p * sl2_diag(t)};
}

// Eigenbasis (unit determinant) of a hyperbolic SL(2,R) element, the first
// column for the eigenvalue of larger modulus.
inline Mat2 hyperbolic_eigenbasis(const Mat2& k) {
  const double tr = k.trace();
  const double disc = std::sqrt(std::max(tr * tr - 4.0, 0.0));
  const double big = tr >= 0 ? 0.5 * (tr + disc) : 0.5 * (tr - disc);
  const double small = 1.0 / big;
  auto eigvec = [&](double lambda) {
    const Eigen::Vector2d u(k(0, 1), lambda - k(0, 0));
    const Eigen::Vector2d w(lambda - k(1, 1), k(1, 0));
    return u.norm() >= w.norm() ? Eigen::Vector2d(u.normalized()) : Eigen::Vector2d(w.normalized());
  };
  Mat2 v;
  v.col(0) = eigvec(big);
  v.col(1) = eigvec(small);
  v.col(1) /= v.determinant();
  return v;
}


// Conjugator taking the commutator of (a, b) to diagonal form, with the foot
// of the common perpendicular from the axis of a on the imaginary axis at i.
inline Mat2 perpendicular_frame(const Mat2& a, const Mat2& b) {
  const Mat2 n = hyperbolic_eigenbasis(sl2_commutator(a, b));
  const Mat2 x = sl2_inv(n) * a * n;
  const double uv = -x(0, 1) / x(1, 0);  // product of the fixed points of x
  if (!(uv > 0.0)) throw DomainError("fn_to_holonomy: generator axis meets the boundary axis");
  return n * sl2_diag(0.5 * std::log(uv));
}

inline Mat2 sl2_rotation(double a) {
  return (Mat2() << std::cos(a), -std::sin(a), std::sin(a), std::cos(a)).finished();
}

// SL(2,R) element moving the origin to q along the geodesic, without rotation.
inline Mat2 sl2_boost_to(const Vec21& q) {
  const double r = std::acosh(std::max(1.0, q[2]));
  if (r < 1e-15) return Mat2::Identity();
  const double psi = std::atan2(q[1], q[0]);
  for (double sign : {1.0, -1.0}) {
    const double a = sign * 0.5 * (psi - 0.5 * std::numbers::pi);
    const Mat2 h = sl2_rotation(a) * sl2_diag(r) * sl2_rotation(-a);
    if ((psl2_to_so21(h) * hyp_origin() - q).norm() < 1e-9 * q[2]) return h;
  }
  throw Error("sl2_boost_to: failed to lift the boost");
}

// Conjugator placing at the origin the point minimising the total displacement
// sum_k cosh d(q, g_k q) of the generators; keeps matrix entries small.
inline Mat2 balancing_conjugator(const std::array<Mat2, kNumGenerators>& gens) {
  std::array<Iso21, kNumGenerators> so;
  for (int k = 0; k < kNumGenerators; ++k) so[k] = psl2_to_so21(gens[k]);
  auto point = [](const Eigen::Vector2d& v) {
    const double r = v.norm();
    if (r < 1e-300) return hyp_origin();
    return Vec21(std::sinh(r) * v[0] / r, std::sinh(r) * v[1] / r, std::cosh(r));
  };
  auto energy = [&](const Eigen::Vector2d& v) {
    const Vec21 q = point(v);
    double e = 0.0;
    for (const auto& g : so) e -= mink_inner(q, g * q);
    return e;
  };
  Eigen::Vector2d v = Eigen::Vector2d::Zero();
  double e = energy(v);
  const double h = 1e-4;
  for (int it = 0; it < 100; ++it) {
    Eigen::Vector2d grad;
    Eigen::Matrix2d hess;
    for (int i = 0; i < 2; ++i) {
      Eigen::Vector2d di = Eigen::Vector2d::Zero();
      di[i] = h;
      grad[i] = (energy(v + di) - energy(v - di)) / (2 * h);
      for (int j = 0; j < 2; ++j) {
        Eigen::Vector2d dj = Eigen::Vector2d::Zero();
        dj[j] = h;
        hess(i, j) = (energy(v + di + dj) - energy(v + di - dj) - energy(v - di + dj) + energy(v - di - dj)) / (4 * h * h);
      }
    }
    Eigen::Vector2d step = -hess.ldlt().solve(grad);
    if (!step.allFinite() || grad.dot(step) >= 0) step = -grad / std::max(1.0, hess.trace());
    double t = 1.0;
    while (t > 1e-8 && energy(v + t * step) > e) t *= 0.5;
    v += t * step;
    const double en = energy(v);
    const bool done = (t * step).norm() < 1e-12 || std::abs(e - en) < 1e-15 * std::abs(e);
    e = en;
    if (done) break;
  }
  return sl2_boost_to(point(v));
}

}  // namespace detail

/// Holonomy of the marked metric with the given FN coordinates.
inline MarkedMetric fn_to_holonomy(const FNCoords& c) {
  for (double l : c.length)
    if (!(l > 0.0) || !std::isfinite(l)) throw DomainError("fn_to_holonomy: pants lengths must be positive");
  for (double t : c.twist)
    if (!std::isfinite(t)) throw DomainError("fn_to_holonomy: twists must be finite");

  using detail::sl2_inv;
  const double boundary = c.length[2];
  const auto [a1p, b1p] = detail::one_holed_torus(c.length[0], boundary, c.twist[0]);
  const auto [a2p, b2p] = detail::one_holed_torus(c.length[1], boundary, c.twist[1]);
  // Conjugate each torus so that its boundary commutator is diagonal and the
  // common perpendicular from a_i to the separating curve ends at i, then rotate the second torus by
  // pi about the origin so that [a2,b2] = [a1,b1]^{-1}, and twist along c.
  const Mat2 n1 = detail::perpendicular_frame(a1p, b1p);
  const Mat2 n2 = detail::perpendicular_frame(a2p, b2p);
  const Mat2 rot = (Mat2() << 0, 1, -1, 0).finished();
  const Mat2 g1 = sl2_inv(n1);
  const Mat2 g2 = detail::sl2_diag(c.twist[2]) * rot * sl2_inv(n2);

  std::array<Mat2, kNumGenerators> raw = {g1 * a1p * n1, g1 * b1p * n1, g2 * a2p * sl2_inv(g2),
                                          g2 * b2p * sl2_inv(g2)};
  const Mat2 centre = detail::balancing_conjugator(raw);
  const Mat2 centre_inv = sl2_inv(centre);

  MarkedMetric m;
  m.fn = c;
  for (int k = 0; k < kNumGenerators; ++k) m.sl2[k] = centre_inv * raw[k] * centre;
  for (int k = 0; k < kNumGenerators; ++k) m.gens[k] = psl2_to_so21(m.sl2[k]);

  const double rel = (m.eval(relator_word()) - Iso21::Identity()).cwiseAbs().maxCoeff();
  if (!(rel <= 1e-9)) throw DomainError("fn_to_holonomy: relator residual " + std::to_string(rel));
  for (int i = 0; i < kNumMarkingCurves; ++i) m.lengths[i] = curve_length(m, marking_words()[i]);
  if (m.lengths.minCoeff() < 1e-6) throw DomainError("fn_to_holonomy: degenerate marking (non-discrete holonomy)");
  return m;
}

/// Max log-ratio of marking-curve lengths.
inline double teich_distance(const MarkingLengths& l1, const MarkingLengths& l2) {
  return (l1.array() / l2.array()).log().abs().maxCoeff();
}

inline double teich_distance(const MarkedMetric& m1, const MarkedMetric& m2) {
  return teich_distance(m1.lengths, m2.lengths);
}

/// FN coordinates whose marking lengths best match the given ones
/// (Levenberg-Marquardt on log-lengths, started at `guess`).
inline FNCoords fit_fn_to_lengths(const MarkingLengths& target, const FNCoords& guess, double tol = 1e-13,
                                  int max_iter = 100) {
  using Vec6 = Eigen::Matrix<double, 6, 1>;
  auto residual = [&](const Vec6& x) -> MarkingLengths {
    return (fn_to_holonomy(FNCoords::from_vector(x)).lengths.array().log() - target.array().log()).matrix();
  };
  Vec6 x = guess.as_vector();
  MarkingLengths r = residual(x);
  double lambda = 1e-3;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::Matrix<double, kNumMarkingCurves, 6> jac;
    for (int j = 0; j < 6; ++j) {
      const double h = 1e-6;
      Vec6 xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      jac.col(j) = (residual(xp) - residual(xm)) / (2 * h);
    }
    const Eigen::Matrix<double, 6, 6> jtj = jac.transpose() * jac;
    const Vec6 g = jac.transpose() * r;
    bool accepted = false;
    for (int tries = 0; tries < 20 && !accepted; ++tries) {
      Eigen::Matrix<double, 6, 6> lhs = jtj;
      lhs.diagonal() *= (1.0 + lambda);
      const Vec6 step = -lhs.ldlt().solve(g);
      Vec6 xn = x + step;
      if ((xn.head<3>().array() <= 0.0).any()) {
        lambda *= 10;
        continue;
      }
      const MarkingLengths rn = residual(xn);
      if (rn.squaredNorm() <= r.squaredNorm()) {
        x = xn;
        const bool small = step.norm() < tol;
        r = rn;
        lambda = std::max(lambda / 10, 1e-12);
        accepted = true;
        if (small) return FNCoords::from_vector(x);
      } else {
        lambda *= 10;
      }
    }
    if (!accepted || r.norm() < 1e-15) break;
  }
  return FNCoords::from_vector(x);
}

/// A group element together with the word that produced it.
struct GroupElement {
  Word word;
  Iso21 matrix = Iso21::Identity();
};

struct FundamentalDomain {
  Vec21 center;
  std::vector<Vec21> vertices;          ///< on the hyperboloid, counter-clockwise
  std::vector<GroupElement> side_elements;  ///< side i lies on the bisector of center and g_i(center)
  std::vector<int> partner;             ///< side paired with side i
  std::vector<GroupElement> pairing;    ///< g_i^{-1}: maps side i onto side partner[i]
  std::vector<Vec21> side_normals;      ///< x in domain iff <x, n_i> <= 0 for all i
  double area = 0.0;

  int num_sides() const { return static_cast<int>(vertices.size()); }
  bool contains(const Vec21& x, double tol = 1e-12) const {
    for (const auto& n : side_normals)
      if (mink_inner(x, n) > tol * std::max(1.0, x[2])) return false;
    return true;
  }
};

namespace detail {

inline Vec21 klein_to_hyp(const Eigen::Vector2d& k) {
  const double s = 1.0 - k.squaredNorm();
  if (!(s > 0.0)) throw DomainError("klein_to_hyp: point outside the disk");
  return Vec21(k[0], k[1], 1.0) / std::sqrt(s);
}

inline Eigen::Vector2d hyp_to_klein(const Vec21& x) { return {x[0] / x[2], x[1] / x[2]}; }

// Interior angle at v of the geodesic polygon with neighbours u, w.
inline double hyp_angle(const Vec21& v, const Vec21& u, const Vec21& w) {
  const Vec21 tu = hyp_log(v, u).first;
  const Vec21 tw = hyp_log(v, w).first;
  return std::acos(std::clamp(mink_inner(tu, tw), -1.0, 1.0));
}

inline double polygon_area(const std::vector<Vec21>& verts) {
  const int n = static_cast<int>(verts.size());
  double angles = 0.0;
  for (int i = 0; i < n; ++i) angles += hyp_angle(verts[i], verts[(i + n - 1) % n], verts[(i + 1) % n]);
  return (n - 2) * std::numbers::pi - angles;
}

struct KleinPolygon {
  std::vector<Eigen::Vector2d> pts;
  std::vector<int> labels;  // edge i joins pts[i], pts[i+1]
};

// Clips by {k : <(k,1), q> <= 0}.
inline KleinPolygon clip(const KleinPolygon& poly, const Vec21& q, int label) {
  auto value = [&](const Eigen::Vector2d& k) { return k[0] * q[0] + k[1] * q[1] - q[2]; };
  KleinPolygon out;
  const int n = static_cast<int>(poly.pts.size());
  for (int i = 0; i < n; ++i) {
    const auto& a = poly.pts[i];
    const auto& b = poly.pts[(i + 1) % n];
    const double va = value(a), vb = value(b);
    if (va <= 0.0) {
      out.pts.push_back(a);
      out.labels.push_back(poly.labels[i]);
      if (vb > 0.0) {
        // leaving: the crossing point starts the new edge on the clip line
        const double t = va / (va - vb);
        out.pts.push_back(a + t * (b - a));
        out.labels.push_back(label);
      }
    } else if (vb <= 0.0) {
      const double t = va / (va - vb);
      out.pts.push_back(a + t * (b - a));
      out.labels.push_back(poly.labels[i]);
    }
  }
  // drop near-duplicate points
  KleinPolygon clean;
  const int m = static_cast<int>(out.pts.size());
  for (int i = 0; i < m; ++i) {
    const int prev = clean.pts.empty() ? -1 : static_cast<int>(clean.pts.size()) - 1;
    if (prev >= 0 && (clean.pts[prev] - out.pts[i]).norm() < 1e-14) {
      clean.labels[prev] = out.labels[i];
      continue;
    }
    clean.pts.push_back(out.pts[i]);
    clean.labels.push_back(out.labels[i]);
  }
  if (clean.pts.size() > 1 && (clean.pts.front() - clean.pts.back()).norm() < 1e-14) {
    clean.pts.pop_back();
    clean.labels.pop_back();
  }
  return clean;
}

inline Word reduced_product(const Word& a, const Word& b) { return word_reduce(word_concat(a, b)); }

}  // namespace detail

namespace detail {

// Intersection of the bisector half-planes of the candidates, nearest first.
inline KleinPolygon dirichlet_polygon(const Vec21& center, const std::vector<GroupElement>& cands) {
  std::vector<int> order(cands.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> dist(cands.size());
  for (size_t i = 0; i < cands.size(); ++i) dist[i] = -mink_inner(center, cands[i].matrix * center);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return dist[a] < dist[b]; });

  KleinPolygon poly;
  poly.pts = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
  poly.labels = {-1, -1, -1, -1};
  for (int idx : order) {
    if (dist[idx] < 1.0 + 1e-9) continue;
    poly = clip(poly, cands[idx].matrix * center - center, idx);
    if (poly.pts.size() < 3) break;
  }
  return poly;
}

}  // namespace detail

/// Dirichlet domain cut out by the candidate elements around `center`, or
/// nothing if they do not close a compact polygon of area 4 pi with paired sides.
inline std::optional<FundamentalDomain> dirichlet_from_candidates(const Vec21& center,
                                                                 const std::vector<GroupElement>& cands) {
  const detail::KleinPolygon poly = detail::dirichlet_polygon(center, cands);
  if (poly.pts.size() < 3) return std::nullopt;
  for (const auto& k : poly.pts)
    if (k.squaredNorm() >= 1.0 - 1e-12) return std::nullopt;
  for (int l : poly.labels)
    if (l < 0) return std::nullopt;

  FundamentalDomain d;
  d.center = center;
  for (const auto& k : poly.pts) d.vertices.push_back(detail::klein_to_hyp(k));
  // counter-clockwise in the Klein disk
  double signed_area = 0.0;
  const int n = static_cast<int>(poly.pts.size());
  for (int i = 0; i < n; ++i) {
    const auto& a = poly.pts[i];
    const auto& b = poly.pts[(i + 1) % n];
    signed_area += a[0] * b[1] - a[1] * b[0];
  }
  if (signed_area < 0) throw Error("dirichlet_domain: unexpected orientation");
  for (int i = 0; i < n; ++i) {
    d.side_elements.push_back(cands[poly.labels[i]]);
    d.side_normals.push_back(cands[poly.labels[i]].matrix * center - center);
  }
  d.area = detail::polygon_area(d.vertices);
  if (std::abs(d.area - 4.0 * std::numbers::pi) > 1e-6) return std::nullopt;

  d.partner.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    const Iso21 inv = iso_inverse(d.side_elements[i].matrix);
    for (int j = 0; j < n; ++j)
      if ((d.side_elements[j].matrix - inv).cwiseAbs().maxCoeff() < 1e-8 * std::max(1.0, inv.cwiseAbs().maxCoeff()))
        d.partner[i] = j;
    if (d.partner[i] < 0) return std::nullopt;
    d.pairing.push_back({word_inverse(d.side_elements[i].word), inv});
  }
  return d;
}

/// Orbit of p under the holonomy group, enumerated breadth-first over the
/// generators. Elements moving p by more than `radius` are kept but not expanded.
class OrbitEnumerator {
 public:
  OrbitEnumerator(const MarkedMetric& m, const Vec21& p) : m_(m), p_(p) {
    visit({Word{}, Mat2::Identity()});
  }

  /// Expands every known element within `radius` of p.
  void grow(double radius) {
    const double limit = std::cosh(radius);
    while (!open_.empty()) {
      std::vector<int> keep;
      std::vector<int> expand;
      for (int i : open_) (cosh_disp_[i] <= limit ? expand : keep).push_back(i);
      if (expand.empty()) break;
      open_ = std::move(keep);
      for (int i : expand)
        for (int s : {1, -1, 2, -2, 3, -3, 4, -4}) {
          const Word& w = words_[i];
          if (!w.empty() && w.back() == -s) continue;
          const Mat2& g = m_.sl2[std::abs(s) - 1];
          const Mat2 gs = s > 0 ? g : detail::sl2_inv(g);
          Word child = w;
          child.push_back(s);
          visit({std::move(child), Mat2(sl2_[i] * gs)});
        }
    }
  }

  /// All nontrivial elements found so far.
  std::vector<GroupElement> elements() const {
    std::vector<GroupElement> out;
    for (size_t i = 1; i < words_.size(); ++i) out.push_back({words_[i], psl2_to_so21(sl2_[i])});
    return out;
  }

 private:
  using Key = std::pair<long long, long long>;

  void visit(std::pair<Word, Mat2> e) {
    const Vec21 gp = psl2_to_so21(e.second) * p_;
    const Key key{std::llround(gp[0] * 1e6), std::llround(gp[1] * 1e6)};
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy)
        if (seen_.count({key.first + dx, key.second + dy})) return;
    seen_.insert(key);
    open_.push_back(static_cast<int>(words_.size()));
    words_.push_back(std::move(e.first));
    sl2_.push_back(e.second);
    cosh_disp_.push_back(-mink_inner(p_, gp));
  }

  const MarkedMetric& m_;
  Vec21 p_;
  std::set<Key> seen_;
  std::vector<Word> words_;
  std::vector<Mat2> sl2_;
  std::vector<double> cosh_disp_;
  std::vector<int> open_;
};

/// Dirichlet domain of the holonomy group around p. The orbit is enumerated
/// out to a growing radius until the bisectors close a polygon of area 4 pi,
/// which certifies that no further element can cut it.
inline FundamentalDomain dirichlet_domain(const MarkedMetric& m, const Vec21& p, double max_radius = 16.0) {
  if (!on_hyperboloid(p, 1e-10)) throw DomainError("dirichlet_domain: base point not on the hyperboloid");
  OrbitEnumerator orbit(m, p);
  double radius = 4.0;
  while (true) {
    orbit.grow(radius);
    const std::vector<GroupElement> cands = orbit.elements();
    if (auto d = dirichlet_from_candidates(p, cands)) return *d;
    const detail::KleinPolygon poly = detail::dirichlet_polygon(p, cands);
    double next = radius + 1.0;
    if (poly.pts.size() >= 3 && std::all_of(poly.labels.begin(), poly.labels.end(), [](int l) { return l >= 0; }) &&
        std::all_of(poly.pts.begin(), poly.pts.end(), [](const auto& k) { return k.squaredNorm() < 1.0 - 1e-15; })) {
      double r = 0.0;
      for (const auto& k : poly.pts) r = std::max(r, hyp_dist(p, detail::klein_to_hyp(k)));
      next = std::max(next, 2.0 * r + 1.0);
    }
    if (radius >= max_radius) break;
    radius = std::min(next, max_radius);
  }
  throw SolverError("dirichlet_domain: orbit radius exhausted before the polygon closed");
}

}  // namespace ghmc

#endif  // GHMC_FUCHSIAN_HPP
