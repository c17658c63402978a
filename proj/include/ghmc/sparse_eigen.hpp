// Lowest eigenpairs of a sparse symmetric pencil Q x = lambda N x, Q positive
// semidefinite and N positive definite, by shift-invert subspace iteration
// with Rayleigh-Ritz extraction.
#ifndef GHMC_SPARSE_EIGEN_HPP
#define GHMC_SPARSE_EIGEN_HPP

#include "ghmc/minkowski.hpp"

#include <Eigen/Sparse>

#include <random>

namespace ghmc {

struct EigenPairs {
  Eigen::VectorXd values;   ///< ascending
  Eigen::MatrixXd vectors;  ///< N-orthonormal columns
  int iterations = 0;
};

/// The `count` smallest eigenpairs. `shift` must lie below the spectrum.
inline EigenPairs lowest_eigenpairs(const Eigen::SparseMatrix<double>& q, const Eigen::SparseMatrix<double>& n,
                                    int count, double shift, double tol = 1e-10, int max_iter = 500,
                                    std::uint64_t seed = 7) {
  const Eigen::Index dim = q.rows();
  const int block = std::min<Eigen::Index>(dim, 2 * count + 4);
  Eigen::SparseMatrix<double> op = q - shift * n;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(op);
  if (ldlt.info() != Eigen::Success) throw SolverError("lowest_eigenpairs: shifted factorization failed");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd x(dim, block);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = gauss(rng);

  EigenPairs out;
  Eigen::VectorXd prev = Eigen::VectorXd::Constant(count, 1e300);
  for (int it = 1; it <= max_iter; ++it) {
    x = ldlt.solve(Eigen::MatrixXd(n * x));
    // Rayleigh-Ritz on span(x)
    const Eigen::MatrixXd qx = q * x, nx = n * x;
    Eigen::MatrixXd qs = x.transpose() * qx, ns = x.transpose() * nx;
    qs = 0.5 * (qs + qs.transpose()).eval();
    ns = 0.5 * (ns + ns.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ritz(qs, ns);
    if (ritz.info() != Eigen::Success) throw SolverError("lowest_eigenpairs: Rayleigh-Ritz step failed");
    x = x * ritz.eigenvectors();
    const Eigen::VectorXd vals = ritz.eigenvalues().head(count);
    const double scale = std::max(vals.cwiseAbs().maxCoeff(), 1e-300);
    if ((vals - prev).cwiseAbs().maxCoeff() <= tol * scale) {
      out.values = vals;
      out.vectors = x.leftCols(count);
      out.iterations = it;
      return out;
    }
    prev = vals;
  }
  throw SolverError("lowest_eigenpairs: subspace iteration did not converge");
}

}  // namespace ghmc

#endif  // GHMC_SPARSE_EIGEN_HPP
