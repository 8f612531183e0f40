// Copyright (c) 2026 envkit developers
// SPDX-License-Identifier: Apache-2.0

#include "envkit/twins.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <sstream>

#include "envkit/random.hpp"

namespace envkit::twins {

namespace {

void require_unitary(const Matrix& u, Eigen::Index dim, const char* what,
                     double tol_op) {
  if (u.rows() != dim || u.cols() != dim) {
    std::ostringstream out;
    out << what << ": expected a " << dim << "x" << dim << " matrix, got "
        << u.rows() << "x" << u.cols();
    throw ValidationError(out.str());
  }
  if (!hilbert::is_unitary(u, tol_op)) {
    throw ValidationError(std::string(what) + ": matrix is not unitary");
  }
}

double commutator_norm(const Matrix& a, const Matrix& b) {
  return (a * b - b * a).norm();
}

void require_commuting(const Matrix& op, const Matrix& rho, const char* what,
                       double tol_commute) {
  const double dev = commutator_norm(op, rho);
  if (dev > tol_commute) {
    std::ostringstream out;
    out << what
        << ": input does not commute with the reduced density (commutator "
           "norm "
        << dev << ", tolerance " << tol_commute << "), so no counterpart "
        << "exists";
    throw NoTwinError(out.str());
  }
}

TwinPair certified(Matrix u1, Matrix u2, const SubsystemPicture& picture,
                   const char* what, const Tolerances& tol) {
  const BipartiteState psi = picture.state(tol);
  const TwinCheck check = is_twin_pair(u1, u2, psi, false, tol);
  if (!check.ok) {
    std::ostringstream out;
    out << what << ": certification failed with residual " << check.residual;
    throw CertificationError(out.str());
  }
  return TwinPair{std::move(u1), std::move(u2), check.residual};
}

// Unitary on C^n mapping unit vector a to unit vector b, identity on the
// orthogonal complement of span{a, b}.
Matrix rotation_between(const Vector& a, const Vector& b) {
  const Eigen::Index n = a.size();
  const Matrix id = Matrix::Identity(n, n);
  Complex overlap = a.dot(b);  // a^dagger b
  Vector rest = b - overlap * a;
  const double rest_norm = rest.norm();
  if (rest_norm < 1e-14) {
    // b is a phase times a; rotate by that phase inside span{a}.
    const double mod = std::abs(overlap);
    const Complex phase = mod > 0.0 ? overlap / mod : Complex(1.0, 0.0);
    return id + (phase - 1.0) * (a * a.adjoint());
  }
  const Vector e2 = rest / rest_norm;
  // In the plane span{a, e2}: b = overlap * a + rest_norm * e2, and
  // b_perp = -rest_norm * a + conj(overlap) * e2 completes the 2x2 unitary.
  const Vector b_perp = -rest_norm * a + std::conj(overlap) * e2;
  return b * a.adjoint() + b_perp * e2.adjoint() + id - a * a.adjoint() -
         e2 * e2.adjoint();
}

}  // namespace

TwinCheck is_twin_pair(const Matrix& u1, const Matrix& u2,
                       const BipartiteState& psi, bool allow_phase,
                       const Tolerances& tol) {
  require_unitary(u1, psi.d1(), "twin check (first side)", tol.tol_op);
  require_unitary(u2, psi.d2(), "twin check (second side)", tol.tol_op);
  const Matrix a = psi.amplitude_matrix();
  const Matrix lhs = u1 * a;
  const Matrix rhs = a * u2.transpose();

  TwinCheck check;
  if (allow_phase) {
    const Complex inner = hilbert::hs_inner(rhs, lhs);
    check.phase = std::abs(inner) > 0.0 ? std::arg(inner) : 0.0;
    const Complex factor = std::polar(1.0, check.phase);
    check.residual = (lhs - factor * rhs).norm();
  } else {
    check.residual = (lhs - rhs).norm();
  }
  check.ok = check.residual <= tol.tol_twin;
  return check;
}

TwinPair twin_of(const Matrix& u1, const SubsystemPicture& picture,
                 const Tolerances& tol) {
  require_unitary(u1, picture.d1, "twin construction", tol.tol_op);
  require_commuting(u1, picture.rho1(), "twin construction", tol.tol_commute);
  // The counterpart acts as the antiunitarily conjugated inverse on the
  // support of the second reduced density and as identity on its null space.
  Matrix u2 = picture.ua.conjugate_operator(u1.adjoint()) + picture.q2_null;
  return certified(u1, std::move(u2), picture, "twin construction", tol);
}

TwinPair sample_twin(const SubsystemPicture& picture, std::mt19937_64& rng,
                     const Tolerances& tol) {
  Matrix u1 = picture.q1_null;
  for (Eigen::Index j = 0; j < picture.cluster_count(); ++j) {
    const Matrix block = picture.basis1_block(j);
    u1 += block * rnd::haar_unitary(picture.multiplicities[j], rng) *
          block.adjoint();
  }
  Matrix u2 = picture.ua.conjugate_operator(u1.adjoint()) + picture.q2_null;
  return certified(std::move(u1), std::move(u2), picture, "twin sampling",
                   tol);
}

TwinPair swap_twin(const Vector& phi, const Vector& phi_prime,
                   const SubsystemPicture& picture, const Tolerances& tol) {
  if (phi.size() != picture.d1 || phi_prime.size() != picture.d1) {
    throw ValidationError("swap construction: vectors live in the wrong space");
  }
  if (std::abs(phi.norm() - 1.0) > tol.tol_norm ||
      std::abs(phi_prime.norm() - 1.0) > tol.tol_norm) {
    throw ValidationError("swap construction: vectors must be unit norm");
  }
  // Both vectors must lie in one eigen-subspace of the first reduced density.
  Eigen::Index home = -1;
  for (Eigen::Index j = 0; j < picture.cluster_count(); ++j) {
    const double res_a = (picture.q1_blocks[j] * phi - phi).norm();
    const double res_b = (picture.q1_blocks[j] * phi_prime - phi_prime).norm();
    if (res_a <= tol.tol_op && res_b <= tol.tol_op) {
      home = j;
      break;
    }
  }
  if (home < 0) {
    std::ostringstream out;
    out << "swap construction: the two vectors do not co-reside in a single "
           "eigen-subspace of the reduced density (projection residuals";
    for (Eigen::Index j = 0; j < picture.cluster_count(); ++j) {
      out << " [" << (picture.q1_blocks[j] * phi - phi).norm() << ", "
          << (picture.q1_blocks[j] * phi_prime - phi_prime).norm() << "]";
    }
    out << ")";
    throw NotCoResidentError(out.str());
  }

  const Matrix block = picture.basis1_block(home);
  Vector a = block.adjoint() * phi;
  Vector b = block.adjoint() * phi_prime;
  a /= a.norm();
  b /= b.norm();
  const Matrix w = rotation_between(a, b);
  const Matrix u1 = Matrix::Identity(picture.d1, picture.d1) +
                    block * (w - Matrix::Identity(w.rows(), w.cols())) *
                        block.adjoint();
  Matrix u2 = picture.ua.conjugate_operator(u1.adjoint()) + picture.q2_null;
  TwinPair pair =
      certified(u1, std::move(u2), picture, "swap construction", tol);
  const double mapped = (pair.u1 * phi - phi_prime).norm();
  if (mapped > tol.tol_recon) {
    std::ostringstream out;
    out << "swap construction: image deviates from the target by " << mapped;
    throw CertificationError(out.str());
  }
  return pair;
}

TwinPair compose(const TwinPair& later, const TwinPair& earlier,
                 const SubsystemPicture& picture, const Tolerances& tol) {
  // First members compose as usual; second members in the reversed order.
  Matrix u1 = later.u1 * earlier.u1;
  Matrix u2 = earlier.u2 * later.u2;
  return certified(std::move(u1), std::move(u2), picture, "twin composition",
                   tol);
}

TwinPair inverse(const TwinPair& pair, const SubsystemPicture& picture,
                 const Tolerances& tol) {
  return certified(pair.u1.adjoint(), pair.u2.adjoint(), picture,
                   "twin inversion", tol);
}

TwinHermitian twin_hermitian_of(const Matrix& h1,
                                const SubsystemPicture& picture,
                                const Tolerances& tol) {
  if (h1.rows() != picture.d1 || h1.cols() != picture.d1) {
    throw ValidationError("hermitian twin: matrix has the wrong dimension");
  }
  if (!hilbert::is_hermitian(h1, tol.tol_op)) {
    throw ValidationError("hermitian twin: matrix is not Hermitian");
  }
  require_commuting(h1, picture.rho1(), "hermitian twin", tol.tol_commute);
  Matrix h2 = picture.ua.conjugate_operator(h1);
  h2 = ((h2 + h2.adjoint()) / 2.0).eval();

  const Matrix a = picture.state(tol).amplitude_matrix();
  const double residual = (h1 * a - a * h2.transpose()).norm();
  if (residual > tol.tol_twin) {
    std::ostringstream out;
    out << "hermitian twin: certification failed with residual " << residual;
    throw CertificationError(out.str());
  }
  return TwinHermitian{std::move(h2), residual};
}

Matrix hermitian_to_unitary(const Matrix& h, const SubsystemPicture& picture,
                            int side, const Tolerances& tol) {
  if (side != 1 && side != 2) {
    throw ValidationError("exponential bridge: side must be 1 or 2");
  }
  const Eigen::Index dim = side == 1 ? picture.d1 : picture.d2;
  if (h.rows() != dim || h.cols() != dim) {
    throw ValidationError("exponential bridge: matrix has the wrong dimension");
  }
  if (!hilbert::is_hermitian(h, tol.tol_op)) {
    throw ValidationError("exponential bridge: matrix is not Hermitian");
  }
  const Matrix rho = side == 1 ? picture.rho1() : picture.rho2();
  require_commuting(h, rho, "exponential bridge", tol.tol_commute);

  const Matrix q = side == 1 ? picture.ua.q1 : picture.ua.q2;
  Matrix restricted = q * h * q;
  restricted = ((restricted + restricted.adjoint()) / 2.0).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(restricted);
  if (solver.info() != Eigen::Success) {
    throw CertificationError("exponential bridge: eigendecomposition failed");
  }
  // exp(i * restricted): null-space eigenvalues are zero, so the null space
  // automatically carries the identity.
  Vector phases(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    phases(k) = std::polar(1.0, solver.eigenvalues()(k));
  }
  Matrix u = solver.eigenvectors() * phases.asDiagonal() *
             solver.eigenvectors().adjoint();
  if (!hilbert::is_unitary(u, 1e3 * tol.tol_op)) {
    throw CertificationError("exponential bridge: result failed unitarity");
  }
  return u;
}

Matrix unitary_to_hermitian(const Matrix& u, const SubsystemPicture& picture,
                            int side, const Tolerances& tol) {
  if (side != 1 && side != 2) {
    throw ValidationError("logarithm bridge: side must be 1 or 2");
  }
  const Eigen::Index dim = side == 1 ? picture.d1 : picture.d2;
  require_unitary(u, dim, "logarithm bridge", tol.tol_op);
  const Matrix rho = side == 1 ? picture.rho1() : picture.rho2();
  require_commuting(u, rho, "logarithm bridge", tol.tol_commute);

  const Matrix basis =
      side == 1 ? picture.decomposition.basis1 : picture.decomposition.basis2;
  const Eigen::Index rank = basis.cols();
  const Matrix u_support = basis.adjoint() * u * basis;
  if (!hilbert::is_unitary(u_support, 1e3 * tol.tol_op)) {
    throw CertificationError(
        "logarithm bridge: the unitary does not preserve the support of the "
        "reduced density");
  }
  Eigen::ComplexSchur<Matrix> schur(u_support);
  if (schur.info() != Eigen::Success) {
    throw CertificationError("logarithm bridge: Schur decomposition failed");
  }
  const Matrix t = schur.matrixT();
  const double off = Matrix(t.triangularView<Eigen::StrictlyUpper>()).norm();
  if (off > 1e3 * tol.tol_op) {
    throw CertificationError(
        "logarithm bridge: restricted unitary is not numerically normal");
  }
  // Eigenphases normalized to [0, 2*pi) make the generator canonical.
  Eigen::VectorXd theta(rank);
  for (Eigen::Index k = 0; k < rank; ++k) {
    double p = std::arg(t(k, k));
    if (p < 0.0) p += 2.0 * std::numbers::pi;
    theta(k) = p;
  }
  Matrix h_support =
      schur.matrixU() * theta.asDiagonal() * schur.matrixU().adjoint();
  h_support = ((h_support + h_support.adjoint()) / 2.0).eval();
  Matrix h = basis * h_support * basis.adjoint();
  h = ((h + h.adjoint()) / 2.0).eval();

  // Round trip: the exponential must restore the unitary on the support.
  Vector phases(rank);
  for (Eigen::Index k = 0; k < rank; ++k) {
    phases(k) = std::polar(1.0, theta(k));
  }
  const Matrix rebuilt =
      schur.matrixU() * phases.asDiagonal() * schur.matrixU().adjoint();
  const double dev = (rebuilt - u_support).norm();
  if (dev > tol.tol_recon) {
    std::ostringstream out;
    out << "logarithm bridge: round trip deviates by " << dev;
    throw CertificationError(out.str());
  }
  return h;
}

MixedTwinCheck is_mixed_twin(const Matrix& h1, const Matrix& h2,
                             const DensityOperator& rho12,
                             const Tolerances& tol) {
  const Eigen::Index d1 = h1.rows();
  const Eigen::Index d2 = h2.rows();
  if (h1.rows() != h1.cols() || h2.rows() != h2.cols()) {
    throw ValidationError("mixed twin check: operators must be square");
  }
  if (rho12.dim() != d1 * d2) {
    throw ValidationError(
        "mixed twin check: density dimension does not factor as d1*d2");
  }
  if (!hilbert::is_hermitian(h1, tol.tol_op) ||
      !hilbert::is_hermitian(h2, tol.tol_op)) {
    throw ValidationError("mixed twin check: operators must be Hermitian");
  }
  const Matrix id1 = Matrix::Identity(d1, d1);
  const Matrix id2 = Matrix::Identity(d2, d2);
  const Matrix lhs = hilbert::kron(h1, id2) * rho12.matrix();
  const Matrix rhs = hilbert::kron(id1, h2) * rho12.matrix();

  MixedTwinCheck check;
  check.residual = (lhs - rhs).norm();
  check.ok = check.residual <= tol.tol_twin;
  const Matrix rho1 = hilbert::partial_trace(rho12.matrix(), d1, d2, 1);
  const Matrix rho2 = hilbert::partial_trace(rho12.matrix(), d1, d2, 2);
  check.commutator1 = commutator_norm(h1, rho1);
  check.commutator2 = commutator_norm(h2, rho2);
  if (check.ok && (check.commutator1 > tol.tol_commute ||
                   check.commutator2 > tol.tol_commute)) {
    std::ostringstream out;
    out << "mixed twin check: identity holds (residual " << check.residual
        << ") but a derived commutator is large (" << check.commutator1 << ", "
        << check.commutator2 << "); numerical inconsistency";
    throw CertificationError(out.str());
  }
  return check;
}

}  // namespace envkit::twins
