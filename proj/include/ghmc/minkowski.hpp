// Linear algebra of R^{2,1}: the hyperboloid model of H^2, SO(2,1),
// the affine group SO(2,1) x| R^{2,1} and group cocycles.
//
// Signature is (+,+,-). The hyperbolic plane is the upper sheet
// {x : <x,x> = -1, x_3 > 0}.
#ifndef GHMC_MINKOWSKI_HPP
#define GHMC_MINKOWSKI_HPP

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ghmc {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver failed to converge or lost an invariant.
class SolverError : public Error {
 public:
  using Error::Error;
};

using Vec21 = Eigen::Vector3d;
using Iso21 = Eigen::Matrix3d;
using Mat2 = Eigen::Matrix2d;

/// Word in the surface-group generators a1=1, b1=2, a2=3, b2=4; a negative
/// entry is the inverse generator.
using Word = std::vector<int>;

constexpr int kNumGenerators = 4;

/// Generator images (a1, b1, a2, b2).
using GeneratorMap = std::array<Iso21, kNumGenerators>;

/// Cocycle values on (a1, b1, a2, b2), one column per generator.
using Cocycle = Eigen::Matrix<double, 3, kNumGenerators>;

/// Linear map from the 12 stacked generator values of a cocycle to R^{2,1}.
using CocycleJacobian = Eigen::Matrix<double, 3, 3 * kNumGenerators>;

inline const Eigen::Matrix3d& minkowski_metric() {
  static const Eigen::Matrix3d eta = Eigen::Vector3d(1.0, 1.0, -1.0).asDiagonal();
  return eta;
}

inline double mink_inner(const Vec21& x, const Vec21& y) {
  return x[0] * y[0] + x[1] * y[1] - x[2] * y[2];
}

inline double mink_norm2(const Vec21& x) { return mink_inner(x, x); }

/// Lorentzian cross product: <u x v, w> = det(u, v, w).
inline Vec21 mink_cross(const Vec21& u, const Vec21& v) {
  Vec21 c = u.cross(v);
  c[2] = -c[2];
  return c;
}

inline Vec21 hyp_origin() { return {0.0, 0.0, 1.0}; }

/// Rescales a future timelike vector onto the hyperboloid.
inline Vec21 hyp_normalize(const Vec21& x) {
  const double n2 = -mink_norm2(x);
  if (!(n2 > 0.0) || x[2] <= 0.0) throw DomainError("hyp_normalize: vector is not future timelike");
  return x / std::sqrt(n2);
}

inline bool on_hyperboloid(const Vec21& x, double tol = 1e-12) {
  return std::abs(mink_norm2(x) + 1.0) <= tol * std::max(1.0, x[2] * x[2]) && x[2] > 0.0;
}

/// Hyperbolic distance arccosh(-<x,y>).
inline double hyp_dist(const Vec21& x, const Vec21& y) {
  const double c = -mink_inner(x, y);
  if (c < 1.0 - 1e-9) throw DomainError("hyp_dist: points are not on the upper hyperboloid");
  return c <= 1.0 ? 0.0 : std::acosh(c);
}

/// Orthogonal projection onto the tangent plane x^perp.
inline Eigen::Matrix3d tangent_projector(const Vec21& x) {
  return Eigen::Matrix3d::Identity() + x * (minkowski_metric() * x).transpose();
}

/// Point at distance s along the unit-speed geodesic from x with velocity u.
inline Vec21 hyp_geodesic(const Vec21& x, const Vec21& u, double s) {
  return std::cosh(s) * x + std::sinh(s) * u;
}

/// Unit tangent at x pointing to y, and the distance.
inline std::pair<Vec21, double> hyp_log(const Vec21& x, const Vec21& y) {
  const double d = hyp_dist(x, y);
  if (d < 1e-300) return {Vec21::Zero(), 0.0};
  Vec21 u = y + mink_inner(x, y) * x;  // tangential part of y
  const double n = std::sqrt(std::max(mink_norm2(u), 0.0));
  return {u / n, d};
}

/// Pure boost taking the origin to q.
inline Iso21 hyp_boost_to(const Vec21& q) {
  const Eigen::Vector2d s(q[0], q[1]);
  Iso21 b;
  b.topLeftCorner<2, 2>() = Eigen::Matrix2d::Identity() + s * s.transpose() / (1.0 + q[2]);
  b.topRightCorner<2, 1>() = s;
  b.bottomLeftCorner<1, 2>() = s.transpose();
  b(2, 2) = q[2];
  return b;
}

/// Parallel transport of the tangent vector v at x to y along the geodesic.
inline Vec21 hyp_transport(const Vec21& x, const Vec21& y, const Vec21& v) {
  return v + mink_inner(v, y) / (1.0 - mink_inner(x, y)) * (x + y);
}

/// Inverse of an element of O(2,1): eta * g^T * eta.
inline Iso21 iso_inverse(const Iso21& g) {
  const auto& eta = minkowski_metric();
  return eta * g.transpose() * eta;
}

/// Largest entry of g^T eta g - eta.
inline double iso_defect(const Iso21& g) {
  const auto& eta = minkowski_metric();
  return (g.transpose() * eta * g - eta).cwiseAbs().maxCoeff();
}

/// Nearest element of SO(2,1) to an almost-isometry, by the Newton-Schulz
/// iteration g <- g (3 - g^{-1}_eta g) / 2 with g^{-1}_eta = eta g^T eta.
inline Iso21 iso_project(Iso21 g) {
  for (int it = 0; it < 8 && iso_defect(g) > 1e-15; ++it) g = 0.5 * g * (3.0 * Iso21::Identity() - iso_inverse(g) * g);
  return g;
}

/// Adjoint representation PSL(2,R) -> SO(2,1). Trace-free 2x2 matrices are
/// identified with R^{2,1} through the basis diag(1,-1), [[0,1],[1,0]],
/// [[0,1],[-1,0]], on which -det is the Minkowski form.
inline Iso21 psl2_to_so21(const Mat2& g) {
  const Mat2 gi = (Mat2() << g(1, 1), -g(0, 1), -g(1, 0), g(0, 0)).finished() / g.determinant();
  const std::array<Mat2, 3> basis = {(Mat2() << 1, 0, 0, -1).finished(),
                                     (Mat2() << 0, 1, 1, 0).finished(),
                                     (Mat2() << 0, 1, -1, 0).finished()};
  Iso21 r;
  for (int j = 0; j < 3; ++j) {
    const Mat2 y = g * basis[j] * gi;
    r(0, j) = y(0, 0);
    r(1, j) = 0.5 * (y(0, 1) + y(1, 0));
    r(2, j) = 0.5 * (y(0, 1) - y(1, 0));
  }
  return r;
}

/// Element (g, X) of SO(2,1) x| R^{2,1} acting by y -> g y + X.
struct AffineIso {
  Iso21 linear = Iso21::Identity();
  Vec21 translation = Vec21::Zero();

  Vec21 apply(const Vec21& y) const { return linear * y + translation; }
};

/// (g,X).(h,Y) = (gh, X + gY).
inline AffineIso aff_compose(const AffineIso& a, const AffineIso& b) {
  return {a.linear * b.linear, a.translation + a.linear * b.translation};
}

inline AffineIso aff_inverse(const AffineIso& a) {
  const Iso21 gi = iso_inverse(a.linear);
  return {gi, -gi * a.translation};
}

inline Word word_inverse(std::span<const int> w) {
  Word r(w.rbegin(), w.rend());
  for (int& s : r) s = -s;
  return r;
}

inline Word word_concat(std::span<const int> a, std::span<const int> b) {
  Word r(a.begin(), a.end());
  r.insert(r.end(), b.begin(), b.end());
  return r;
}

/// Freely reduces a word (cancels adjacent s, -s pairs).
inline Word word_reduce(std::span<const int> w) {
  Word r;
  r.reserve(w.size());
  for (int s : w) {
    if (!r.empty() && r.back() == -s)
      r.pop_back();
    else
      r.push_back(s);
  }
  return r;
}

/// Surface relator [a1,b1][a2,b2].
inline Word relator_word() { return {1, 2, -1, -2, 3, 4, -3, -4}; }

inline Iso21 eval_word(const GeneratorMap& rho, std::span<const int> w) {
  Iso21 m = Iso21::Identity();
  for (int s : w) {
    const Iso21& g = rho[std::abs(s) - 1];
    m = s > 0 ? Iso21(m * g) : Iso21(m * iso_inverse(g));
  }
  return m;
}

/// The cocycle value on a word as a linear function of the 12 generator
/// values: tau(w) = J * vec(tau), vec stacking the columns a1, b1, a2, b2.
inline CocycleJacobian cocycle_jacobian(const GeneratorMap& rho, std::span<const int> w) {
  CocycleJacobian jac = CocycleJacobian::Zero();
  Iso21 prefix = Iso21::Identity();
  for (int s : w) {
    const int k = std::abs(s) - 1;
    const Iso21& g = rho[k];
    if (s > 0) {
      jac.block<3, 3>(0, 3 * k) += prefix;
      prefix = prefix * g;
    } else {
      const Iso21 gi = iso_inverse(g);
      // tau(g^{-1}) = -rho(g)^{-1} tau(g)
      jac.block<3, 3>(0, 3 * k) -= prefix * gi;
      prefix = prefix * gi;
    }
  }
  return jac;
}

inline Eigen::Matrix<double, 12, 1> cocycle_vec(const Cocycle& tau) {
  return Eigen::Map<const Eigen::Matrix<double, 12, 1>>(tau.data());
}

inline Cocycle cocycle_from_vec(const Eigen::Matrix<double, 12, 1>& v) {
  return Eigen::Map<const Cocycle>(v.data());
}

/// Unique extension of generator values satisfying tau(gh) = tau(g) + rho(g) tau(h).
inline Vec21 cocycle_eval(const GeneratorMap& rho, const Cocycle& tau, std::span<const int> w) {
  Vec21 acc = Vec21::Zero();
  Iso21 prefix = Iso21::Identity();
  for (int s : w) {
    const int k = std::abs(s) - 1;
    const Iso21& g = rho[k];
    if (s > 0) {
      acc += prefix * tau.col(k);
      prefix = prefix * g;
    } else {
      const Iso21 gi = iso_inverse(g);
      acc -= prefix * gi * tau.col(k);
      prefix = prefix * gi;
    }
  }
  return acc;
}

/// Coboundary g -> V - rho(g) V evaluated on the generators.
inline Cocycle coboundary(const GeneratorMap& rho, const Vec21& v) {
  Cocycle tau;
  for (int k = 0; k < kNumGenerators; ++k) tau.col(k) = v - rho[k] * v;
  return tau;
}

struct CoboundaryFit {
  Vec21 vertex = Vec21::Zero();
  double residual = 0.0;
};

/// Least-squares V with tau(g) ~ V - rho(g) V on the generators. The residual
/// vanishes iff tau is a coboundary.
inline CoboundaryFit coboundary_reduce(const GeneratorMap& rho, const Cocycle& tau) {
  Eigen::Matrix<double, 12, 3> a;
  Eigen::Matrix<double, 12, 1> b = cocycle_vec(tau);
  for (int k = 0; k < kNumGenerators; ++k)
    a.block<3, 3>(3 * k, 0) = Iso21::Identity() - rho[k];
  Eigen::JacobiSVD<Eigen::Matrix<double, 12, 3>> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (s[2] <= 1e-10 * s[0])
    throw DomainError("coboundary_reduce: representation has an invariant vector (reducible)");
  CoboundaryFit fit;
  fit.vertex = svd.solve(b);
  fit.residual = (a * fit.vertex - b).norm();
  return fit;
}

}  // namespace ghmc

#endif  // GHMC_MINKOWSKI_HPP
