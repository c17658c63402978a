// Incremental Bowyer-Watson Delaunay triangulation of planar points.
#ifndef GHMC_DELAUNAY_HPP
#define GHMC_DELAUNAY_HPP

#include "ghmc/minkowski.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <vector>

namespace ghmc {

namespace detail {

inline double orient2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
}

// Positive iff d lies inside the circumcircle of the counter-clockwise triangle abc.
inline double incircle(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c,
                       const Eigen::Vector2d& d) {
  const double adx = a[0] - d[0], ady = a[1] - d[1];
  const double bdx = b[0] - d[0], bdy = b[1] - d[1];
  const double cdx = c[0] - d[0], cdy = c[1] - d[1];
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

}  // namespace detail

/// Delaunay triangulation; returns counter-clockwise index triples. Points are
/// inserted in the given order, so callers should pass a spatially coherent order.
inline std::vector<std::array<int, 3>> delaunay_triangulate(const std::vector<Eigen::Vector2d>& input) {
  struct Tri {
    std::array<int, 3> v;
    std::array<int, 3> nbr;  // nbr[i] is across the edge opposite v[i]
    bool alive;
  };
  const int n = static_cast<int>(input.size());
  if (n < 3) throw DomainError("delaunay_triangulate: need at least three points");

  Eigen::Vector2d lo = input[0], hi = input[0];
  for (const auto& p : input) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Eigen::Vector2d mid = 0.5 * (lo + hi);
  const double span = std::max((hi - lo).maxCoeff(), 1e-12);
  std::vector<Eigen::Vector2d> pts = input;
  pts.push_back(mid + Eigen::Vector2d(-40 * span, -30 * span));
  pts.push_back(mid + Eigen::Vector2d(40 * span, -30 * span));
  pts.push_back(mid + Eigen::Vector2d(0, 40 * span));

  std::vector<Tri> tris;
  tris.push_back({{n, n + 1, n + 2}, {-1, -1, -1}, true});
  int last = 0;

  std::vector<int> cavity, stack, mark(1, -1);
  for (int ip = 0; ip < n; ++ip) {
    const Eigen::Vector2d& q = pts[ip];
    // visibility walk to a triangle containing q
    int t = last;
    for (int steps = 0;; ++steps) {
      if (steps > 4 * static_cast<int>(tris.size()) + 16) throw SolverError("delaunay_triangulate: walk did not terminate");
      const Tri& tr = tris[t];
      int next = -1;
      for (int k = 0; k < 3; ++k) {
        const int e = (k + ip) % 3;
        if (detail::orient2d(pts[tr.v[(e + 1) % 3]], pts[tr.v[(e + 2) % 3]], q) < 0) {
          next = tr.nbr[e];
          break;
        }
      }
      if (next < 0) break;
      t = next;
    }
    // cavity of triangles whose circumcircle contains q
    mark.resize(tris.size(), -1);
    cavity.clear();
    stack.assign(1, t);
    mark[t] = ip;
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      cavity.push_back(c);
      for (int k = 0; k < 3; ++k) {
        const int nb = tris[c].nbr[k];
        if (nb < 0 || mark[nb] == ip) continue;
        const Tri& tn = tris[nb];
        if (detail::incircle(pts[tn.v[0]], pts[tn.v[1]], pts[tn.v[2]], q) > 0) {
          mark[nb] = ip;
          stack.push_back(nb);
        }
      }
    }
    // boundary edges of the cavity, re-triangulated as a fan around q
    struct Edge {
      int a, b, outside;
    };
    std::vector<Edge> boundary;
    for (int c : cavity) {
      const Tri& tr = tris[c];
      for (int k = 0; k < 3; ++k) {
        const int nb = tr.nbr[k];
        if (nb >= 0 && mark[nb] == ip) continue;
        boundary.push_back({tr.v[(k + 1) % 3], tr.v[(k + 2) % 3], nb});
      }
    }
    for (int c : cavity) tris[c].alive = false;
    std::vector<int> created;
    for (const auto& e : boundary) {
      const int id = static_cast<int>(tris.size());
      tris.push_back({{e.a, e.b, ip}, {-1, -1, e.outside}, true});
      if (e.outside >= 0) {
        Tri& o = tris[e.outside];
        for (int k = 0; k < 3; ++k)
          if (o.v[(k + 1) % 3] == e.b && o.v[(k + 2) % 3] == e.a) o.nbr[k] = id;
      }
      created.push_back(id);
    }
    // link the fan: triangle (a, b, q) meets (b, c, q) across edge (b, q)
    for (int id : created)
      for (int jd : created) {
        if (id == jd) continue;
        if (tris[jd].v[0] == tris[id].v[1]) {
          tris[id].nbr[0] = jd;  // edge (b, q) is opposite a
          tris[jd].nbr[1] = id;  // edge (q, b') is opposite b' in the other
        }
      }
    last = created.front();
  }

  std::vector<std::array<int, 3>> out;
  for (const auto& tr : tris)
    if (tr.alive && tr.v[0] < n && tr.v[1] < n && tr.v[2] < n) out.push_back(tr.v);
  return out;
}

}  // namespace ghmc

#endif  // GHMC_DELAUNAY_HPP
