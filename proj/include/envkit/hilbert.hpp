// Copyright (c) 2026 envkit developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "envkit/errors.hpp"
#include "envkit/tolerances.hpp"

namespace envkit::hilbert {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using envkit::CertificationError;
using envkit::Tolerances;
using envkit::ValidationError;

/// Pure state of a bipartite system.  Amplitudes are stored row-major over
/// the computational product basis: amplitude(k * d2 + l) multiplies
/// |k> (x) |l>.
class BipartiteState {
 public:
  /// Validates dimensions (d1*d2 == amplitudes.size(), both >= 1) and unit
  /// norm within tol.tol_norm.
  BipartiteState(Vector amplitudes, Eigen::Index d1, Eigen::Index d2,
                 const Tolerances& tol = {});

  Eigen::Index d1() const { return d1_; }
  Eigen::Index d2() const { return d2_; }
  const Vector& amplitudes() const { return amps_; }

  /// The d1 x d2 amplitude matrix A with A(k, l) = amplitude(k * d2 + l).
  Matrix amplitude_matrix() const;

  /// Flat index of |k> (x) |l>.
  Eigen::Index flat(Eigen::Index k, Eigen::Index l) const { return k * d2_ + l; }

 private:
  Vector amps_;
  Eigen::Index d1_;
  Eigen::Index d2_;
};

/// Density operator with a cached spectral decomposition.  Validated to be
/// Hermitian (tol_op), unit trace (tol_norm) and positive semidefinite up to
/// -tol_psd on the spectrum.
class DensityOperator {
 public:
  explicit DensityOperator(Matrix rho, const Tolerances& tol = {});

  Eigen::Index dim() const { return mat_.rows(); }
  const Matrix& matrix() const { return mat_; }

  /// Eigenvalues in descending order (clamped to >= 0).
  const RealVector& eigenvalues() const { return evals_; }
  /// Orthonormal eigenvectors; column i pairs with eigenvalues()(i).
  const Matrix& eigenvectors() const { return evecs_; }

 private:
  Matrix mat_;
  RealVector evals_;
  Matrix evecs_;
};

/// One cluster of (numerically equal) eigenvalues.
struct EigenCluster {
  double value = 0.0;       ///< representative eigenvalue (weighted mean)
  Eigen::Index multiplicity = 0;
  Eigen::Index first = 0;   ///< first column index in the descending ordering
  Matrix projector;         ///< orthogonal projector onto the eigenspace
};

/// Spectral decomposition resolved into distinct-eigenvalue clusters plus
/// the null space.
struct SpectralDecomposition {
  RealVector eigenvalues;   ///< descending, one entry per kept eigenvector
  Matrix eigenvectors;      ///< kept eigenvectors (columns), descending order
  std::vector<EigenCluster> clusters;  ///< positive clusters, descending value
  Matrix null_projector;    ///< projector onto the numerical null space
  Matrix support_projector; ///< complement of null_projector
  Eigen::Index rank = 0;
};

/// Tensor product of two pure states: result amplitude matrix a * b^T.
BipartiteState tensor(const Vector& a, const Vector& b,
                      const Tolerances& tol = {});

/// Partial scalar product <m|_1 psi: contracts a first-space vector against
/// a bipartite state, leaving an (unnormalized) second-space vector.
Vector partial_scalar_product(const Vector& m, const BipartiteState& psi);

/// Partial scalar product against the second space: <m|_2 psi.
Vector partial_scalar_product_second(const Vector& m, const BipartiteState& psi);

/// Reduced density operator of subsystem `side` (1 or 2).
DensityOperator reduced_density(const BipartiteState& psi, int side,
                                const Tolerances& tol = {});

/// Partial trace of an operator on H1 (x) H2 over the complementary factor;
/// returns the operator on subsystem `side` (1 or 2).
Matrix partial_trace(const Matrix& op, Eigen::Index d1, Eigen::Index d2,
                     int side);

/// Hilbert-Schmidt inner product tr(a^dagger b).
Complex hs_inner(const Matrix& a, const Matrix& b);

/// Hilbert-Schmidt (Frobenius) distance ||a - b||.
double hs_distance(const Matrix& a, const Matrix& b);

/// Spectral decomposition of a density operator with eigenvalue clustering:
/// descending eigenvalues are grouped transitively whenever adjacent values
/// differ by less than tol.eps_cluster; eigenvalues below tol.eps_rank are
/// assigned to the null space.
SpectralDecomposition spectral(const DensityOperator& rho,
                               const Tolerances& tol = {});

/// True when m is Hermitian within tol_op.
bool is_hermitian(const Matrix& m, double tol_op);

/// True when m is unitary within tol_op (m^dagger m == identity).
bool is_unitary(const Matrix& m, double tol_op);

/// True when m is an orthogonal projector within tol_op.
bool is_projector(const Matrix& m, double tol_op);

/// Kronecker product a (x) b (row-major composite index convention).
Matrix kron(const Matrix& a, const Matrix& b);

/// Applies u1 (x) identity to a bipartite state.
BipartiteState apply_first(const Matrix& u1, const BipartiteState& psi,
                           const Tolerances& tol = {});

/// Applies identity (x) u2 to a bipartite state.
BipartiteState apply_second(const Matrix& u2, const BipartiteState& psi,
                            const Tolerances& tol = {});

}  // namespace envkit::hilbert
