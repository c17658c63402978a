// Codazzi fields on a hyperbolic mesh: the d^nabla residual, the trace
// equation, the decomposition M = A + (f Id - Hess f) and the 6-dimensional
// space of trace-free Codazzi fields.
//
// A symmetric field M is Codazzi iff the R^{2,1}-valued 1-form v -> M v is
// closed on the hyperboloid; the residual of a face is the loop integral of
// this form around its boundary, with corner values interpolated linearly in
// a parallel frame along each edge.
#ifndef GHMC_CODAZZI_HPP
#define GHMC_CODAZZI_HPP

#include "ghmc/mesh.hpp"
#include "ghmc/sparse_eigen.hpp"

#include <Eigen/SparseLU>

#include <memory>
#include <optional>

namespace ghmc {

namespace detail {

// Integral over s in [0, d] of (1 - s/d) times the parallel transport of the
// tangent vector w at x along the geodesic from x to y.
inline Vec21 tapered_transport_integral(const Vec21& x, const Vec21& y, const Vec21& w) {
  const auto [u, d] = hyp_log(x, y);
  if (d < 1e-12) return Vec21::Zero();
  const double alpha = mink_inner(w, u);
  const Vec21 normal = w - alpha * u;  // constant along the geodesic
  const double ks = d < 1e-3 ? d * d / 6.0 * (1.0 + d * d / 20.0) : std::sinh(d) / d - 1.0;
  const double kc = d < 1e-3 ? 0.5 * d * (1.0 + d * d / 12.0) : (std::cosh(d) - 1.0) / d;
  return alpha * (ks * x + kc * u) + 0.5 * d * normal;
}

// Positive-definite norm of a vector relative to the hyperboloid point c.
inline double frame_norm2(const Vec21& r, const Vec21& c) {
  const double l = mink_inner(r, c);
  return mink_norm2(r) + 2.0 * l * l;
}

inline Frame lifted_frame(const EquivariantMesh& mesh, const MeshFace& f, int corner) {
  return f.lift[corner] * mesh.frame(f.v[corner]);
}

// Unit tangents at each corner towards the next and previous corners.
inline std::array<std::array<Vec21, 2>, 3> corner_tangents(const MeshFace& f) {
  std::array<std::array<Vec21, 2>, 3> t;
  for (int c = 0; c < 3; ++c) {
    t[c][0] = hyp_log(f.pos[c], f.pos[(c + 1) % 3]).first;
    t[c][1] = hyp_log(f.pos[c], f.pos[(c + 2) % 3]).first;
  }
  return t;
}

inline Vec21 face_centroid(const MeshFace& f) { return hyp_normalize(f.pos[0] + f.pos[1] + f.pos[2]); }

}  // namespace detail

/// Loop integral of v -> M v around each face; zero for Codazzi fields up to
/// discretization error, and exactly zero for M = Id.
inline std::vector<Vec21> loop_residuals(const EquivariantMesh& mesh, const OperatorField& m) {
  const auto& eta = minkowski_metric();
  std::vector<Vec21> out;
  out.reserve(mesh.num_faces());
  for (const auto& f : mesh.faces()) {
    const auto t = detail::corner_tangents(f);
    Vec21 r = Vec21::Zero();
    for (int c = 0; c < 3; ++c) {
      const Frame e = detail::lifted_frame(mesh, f, c);
      const Mat2& mc = m[f.v[c]];
      const Vec21 fwd = e * (mc * (e.transpose() * eta * t[c][0]));
      const Vec21 back = e * (mc * (e.transpose() * eta * t[c][1]));
      r += detail::tapered_transport_integral(f.pos[c], f.pos[(c + 1) % 3], fwd);
      r -= detail::tapered_transport_integral(f.pos[c], f.pos[(c + 2) % 3], back);
    }
    out.push_back(r);
  }
  return out;
}

/// L2 norm of the discrete d^nabla M: sqrt(sum_f |r_f|^2 / area_f).
inline double dnabla_residual(const EquivariantMesh& mesh, const OperatorField& m) {
  const auto r = loop_residuals(mesh, m);
  double s = 0.0;
  for (int i = 0; i < mesh.num_faces(); ++i) {
    const auto& f = mesh.faces()[i];
    s += detail::frame_norm2(r[i], detail::face_centroid(f)) / f.area;
  }
  return std::sqrt(s);
}

struct CodazziCertificate {
  double residual = 0.0;  ///< dnabla_residual
  double relative = 0.0;  ///< residual / L2 norm of the field
  double target_edge = 0.0;
};

inline CodazziCertificate codazzi_certificate(const EquivariantMesh& mesh, const OperatorField& m) {
  CodazziCertificate c;
  c.residual = dnabla_residual(mesh, m);
  const double n = field_norm(mesh, m);
  c.relative = n > 0 ? c.residual / n : 0.0;
  c.target_edge = mesh.mesh_template().target_edge;
  return c;
}

/// f Id - Hess f.
inline OperatorField hessian_field(const EquivariantMesh& mesh, const TwistedScalar& f) {
  OperatorField h = mesh.hessian(f);
  for (int k = 0; k < mesh.num_vertices(); ++k) h[k] = f.values[k] * Mat2::Identity() - h[k];
  return h;
}

inline OperatorField hessian_field(const EquivariantMesh& mesh, const ScalarField& f) {
  return hessian_field(mesh, TwistedScalar{f, CocycleVec::Zero()});
}

struct Decomposition {
  OperatorField a;                ///< trace-free part
  ScalarField f;                  ///< M = A + (f Id - Hess f)
  double reconstruction = 0.0;    ///< |M - A - (f Id - Hess f)| / |M|
  double pairing = 0.0;           ///< |<A, f Id - Hess f>| / (|A| |f Id - Hess f|)
  double max_trace = 0.0;         ///< sup |Tr A|
};

/// Trace-free Codazzi fields A_k = Hess phi_k - phi_k Id for twisted
/// functions phi_k with (Tr Hess - 2) phi_k = 0, one per class of H^1.
struct TraceFreeBasis {
  std::array<OperatorField, 6> fields;
  std::array<TwistedScalar, 6> potentials;
  Eigen::Matrix<double, 6, 6> gram = Eigen::Matrix<double, 6, 6>::Identity();
  double j_closure = 0.0;  ///< sup_k |A_k J - P(A_k J)| / |A_k J|
};

/// Spectrum of the quadratic form sum_f |r_f(A)|^2 / area_f on trace-free
/// per-vertex fields, relative to the L2 norm.
struct KernelCertificate {
  Eigen::VectorXd eigenvalues;  ///< lowest modes, ascending
  int dimension = 0;            ///< index of the largest consecutive gap
  double gap_ratio = 0.0;       ///< lambda_{dim+1} / lambda_dim
  double j_closure = 0.0;       ///< J-rotation defect of the kernel modes
  std::vector<OperatorField> modes;
};

/// Solver state shared by the Codazzi operations on one mesh.
class CodazziSolver {
 public:
  explicit CodazziSolver(const EquivariantMesh& mesh) : mesh_(mesh) {
    const int n = mesh.num_vertices();
    SparseMatrix cot = mesh.stiffness();
    for (int k = 0; k < n; ++k) cot.coeffRef(k, k) += 2.0 * mesh.mass()[k];
    cotan_.compute(cot);
    if (cotan_.info() != Eigen::Success) throw SolverError("solve_trace_equation: factorization failed");
    SparseMatrix reg = mesh.hessian_trace_matrix();
    for (int k = 0; k < n; ++k) reg.coeffRef(k, k) -= 2.0;
    reg.makeCompressed();
    regression_.compute(reg);
    if (regression_.info() != Eigen::Success) throw SolverError("decompose: (Tr Hess - 2) is singular on this mesh");
  }

  const EquivariantMesh& mesh() const { return mesh_; }

  /// The f with (Delta - 2) f = -Tr M, Delta the lumped cotangent Laplacian.
  ScalarField solve_trace_equation(const OperatorField& m) const {
    const ScalarField rhs = mesh_.mass().cwiseProduct(field_trace(m));
    ScalarField f = cotan_.solve(rhs);
    check_residual(mesh_.stiffness() * f + 2.0 * mesh_.mass().cwiseProduct(f), rhs, "solve_trace_equation");
    return f;
  }

  /// Twisted solution of (Tr Hess - 2) phi = rhs with the given cocycle.
  TwistedScalar solve_regression(const ScalarField& rhs, const CocycleVec& tau = CocycleVec::Zero()) const {
    const ScalarField b = rhs - mesh_.hessian_trace_twist() * tau;
    TwistedScalar phi{regression_.solve(b), tau};
    check_residual(mesh_.hessian_trace_matrix() * phi.values - 2.0 * phi.values, b, "decompose");
    return phi;
  }

  /// Relative Codazzi residual of smooth fields f Id - Hess f on this mesh,
  /// with f smoothed from low Laplace eigenfunctions; the scale for
  /// decompose's gate.
  double baseline() const {
    if (!baseline_) {
      const int n = mesh_.num_vertices();
      SparseMatrix mass(n, n);
      for (int k = 0; k < n; ++k) mass.insert(k, k) = mesh_.mass()[k];
      const EigenPairs ep = lowest_eigenpairs(mesh_.stiffness(), mass, 4, -1.0, 1e-8);
      double b = 0.0;
      for (int j = 1; j < 4; ++j) {
        const ScalarField f = solve_regression(ep.vectors.col(j)).values;
        b = std::max(b, codazzi_certificate(mesh_, hessian_field(mesh_, f)).relative);
      }
      baseline_ = b;
    }
    return *baseline_;
  }

  /// M = A + (f Id - Hess f) with Tr A = 0 at every vertex. The trace
  /// equation uses the regression Hessian, so the split is exact on the mesh.
  /// Fails when M is further from Codazzi than gate_factor times the baseline.
  Decomposition decompose(const OperatorField& m, std::optional<double> gate_factor = 10.0) const {
    if (static_cast<int>(m.size()) != mesh_.num_vertices()) throw DomainError("decompose: field size does not match the mesh");
    if (gate_factor) {
      const auto cert = codazzi_certificate(mesh_, m);
      if (cert.relative > *gate_factor * baseline())
        throw DomainError("decompose: field is not Codazzi (relative residual " + std::to_string(cert.relative) +
                          " above gate " + std::to_string(*gate_factor * baseline()) + ")");
    }
    Decomposition d;
    d.f = solve_regression(-field_trace(m)).values;
    const OperatorField h = hessian_field(mesh_, d.f);
    d.a.resize(m.size());
    for (size_t k = 0; k < m.size(); ++k) {
      d.a[k] = m[k] - h[k];
      d.max_trace = std::max(d.max_trace, std::abs(d.a[k].trace()));
    }
    const double nm = field_norm(mesh_, m);
    OperatorField rec(m.size());
    for (size_t k = 0; k < m.size(); ++k) rec[k] = m[k] - d.a[k] - h[k];
    d.reconstruction = nm > 0 ? field_norm(mesh_, rec) / nm : 0.0;
    const double na = field_norm(mesh_, d.a), nh = field_norm(mesh_, h);
    d.pairing = na > 0 && nh > 0 ? std::abs(field_dot(mesh_, d.a, h)) / (na * nh) : 0.0;
    return d;
  }

  /// Orthonormal basis of trace-free Codazzi fields built from H^1(rho).
  TraceFreeBasis tracefree_basis() const {
    const GeneratorMap& gens = mesh_.metric().gens;
    // cocycles orthogonal to the coboundaries
    Eigen::Matrix<double, 6, 12> constraints;
    constraints.topRows<3>() = cocycle_jacobian(gens, relator_word());
    for (int j = 0; j < 3; ++j) constraints.row(3 + j) = cocycle_vec(coboundary(gens, Vec21::Unit(j))).transpose();
    Eigen::JacobiSVD<Eigen::Matrix<double, 6, 12>> svd(constraints, Eigen::ComputeFullV);
    const Eigen::Matrix<double, 12, 6> cocycles = svd.matrixV().rightCols<6>();

    TraceFreeBasis b;
    for (int k = 0; k < 6; ++k) {
      b.potentials[k] = solve_regression(ScalarField::Zero(mesh_.num_vertices()), cocycles.col(k));
      b.fields[k] = potential_field(b.potentials[k]);
    }
    Eigen::Matrix<double, 6, 6> g;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j <= i; ++j) g(i, j) = g(j, i) = field_dot(mesh_, b.fields[i], b.fields[j]);
    const Eigen::LLT<Eigen::Matrix<double, 6, 6>> llt(g);
    if (llt.info() != Eigen::Success) throw SolverError("tracefree_basis: Gram matrix is not positive definite");
    const Eigen::Matrix<double, 6, 6> t = llt.matrixU().solve(Eigen::Matrix<double, 6, 6>::Identity());
    TraceFreeBasis ob;
    for (int k = 0; k < 6; ++k) {
      ob.potentials[k] = TwistedScalar{ScalarField::Zero(mesh_.num_vertices()), CocycleVec::Zero()};
      for (int j = 0; j <= k; ++j) {
        ob.potentials[k].values += t(j, k) * b.potentials[j].values;
        ob.potentials[k].tau += t(j, k) * b.potentials[j].tau;
      }
      ob.fields[k] = potential_field(ob.potentials[k]);
    }
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j <= i; ++j) ob.gram(i, j) = ob.gram(j, i) = field_dot(mesh_, ob.fields[i], ob.fields[j]);
    for (int k = 0; k < 6; ++k) ob.j_closure = std::max(ob.j_closure, span_defect(ob.fields, field_rotate(ob.fields[k])));
    return ob;
  }

  /// Hess phi - phi Id.
  OperatorField potential_field(const TwistedScalar& phi) const {
    OperatorField a = mesh_.hessian(phi);
    for (int k = 0; k < mesh_.num_vertices(); ++k) a[k] -= phi.values[k] * Mat2::Identity();
    return a;
  }

  /// Relative L2 distance of f from the span of an L2-orthonormal family.
  template <typename Family>
  double span_defect(const Family& basis, const OperatorField& f) const {
    OperatorField r = f;
    for (const auto& e : basis) r = field_axpy(-field_dot(mesh_, e, f), e, r);
    const double n = field_norm(mesh_, f);
    return n > 0 ? field_norm(mesh_, r) / n : 0.0;
  }

  /// Lowest modes of the Codazzi residual form on trace-free fields: an
  /// independent certificate that the kernel is 6-dimensional.
  KernelCertificate kernel_certificate(int modes = 8, double shift = -1e-3) const {
    const int n = mesh_.num_vertices();
    const auto& eta = minkowski_metric();
    const Mat2 da = (Mat2() << 1, 0, 0, -1).finished();
    const Mat2 db = (Mat2() << 0, 1, 1, 0).finished();
    std::vector<Eigen::Triplet<double>> trips;
    for (const auto& f : mesh_.faces()) {
      const auto t = detail::corner_tangents(f);
      Eigen::Matrix<double, 3, 6> rf;
      for (int c = 0; c < 3; ++c) {
        const Frame e = detail::lifted_frame(mesh_, f, c);
        for (int j = 0; j < 2; ++j) {
          const Mat2& dm = j == 0 ? da : db;
          const Vec21 fwd = e * (dm * (e.transpose() * eta * t[c][0]));
          const Vec21 back = e * (dm * (e.transpose() * eta * t[c][1]));
          rf.col(2 * c + j) = detail::tapered_transport_integral(f.pos[c], f.pos[(c + 1) % 3], fwd) -
                              detail::tapered_transport_integral(f.pos[c], f.pos[(c + 2) % 3], back);
        }
      }
      const Vec21 cen = detail::face_centroid(f);
      const Eigen::Matrix3d w = eta + 2.0 * (eta * cen) * (eta * cen).transpose();
      const Eigen::Matrix<double, 6, 6> local = rf.transpose() * w * rf / f.area;
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) trips.emplace_back(2 * f.v[i / 2] + i % 2, 2 * f.v[j / 2] + j % 2, local(i, j));
    }
    SparseMatrix q(2 * n, 2 * n), mass(2 * n, 2 * n);
    q.setFromTriplets(trips.begin(), trips.end());
    for (int k = 0; k < n; ++k) {
      mass.insert(2 * k, 2 * k) = 2.0 * mesh_.mass()[k];
      mass.insert(2 * k + 1, 2 * k + 1) = 2.0 * mesh_.mass()[k];
    }
    const EigenPairs ep = lowest_eigenpairs(q, mass, modes, shift, 1e-10, 2000);

    KernelCertificate kc;
    kc.eigenvalues = ep.values;
    for (int i = 0; i + 1 < modes; ++i) {
      const double ratio = ep.values[i + 1] / std::max(ep.values[i], 1e-300);
      if (ratio > kc.gap_ratio) {
        kc.gap_ratio = ratio;
        kc.dimension = i + 1;
      }
    }
    for (int i = 0; i < kc.dimension; ++i) {
      OperatorField a(n);
      for (int k = 0; k < n; ++k) {
        const double x = ep.vectors(2 * k, i), y = ep.vectors(2 * k + 1, i);
        a[k] << x, y, y, -x;
      }
      kc.modes.push_back(std::move(a));
    }
    for (const auto& a : kc.modes) kc.j_closure = std::max(kc.j_closure, span_defect(kc.modes, field_rotate(a)));
    return kc;
  }

 private:
  static void check_residual(const ScalarField& lhs, const ScalarField& rhs, const char* what) {
    const double scale = std::max(rhs.cwiseAbs().maxCoeff(), 1e-300);
    if (!((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10 * scale) && rhs.cwiseAbs().maxCoeff() > 0)
      throw SolverError(std::string(what) + ": linear solve lost accuracy");
  }

  const EquivariantMesh& mesh_;
  Eigen::SimplicialLDLT<SparseMatrix> cotan_;
  Eigen::SparseLU<SparseMatrix> regression_;
  mutable std::optional<double> baseline_;
};

}  // namespace ghmc

#endif  // GHMC_CODAZZI_HPP
