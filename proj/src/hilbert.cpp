// Copyright (c) 2026 envkit developers
// SPDX-License-Identifier: Apache-2.0

#include "envkit/hilbert.hpp"

#include <Eigen/Eigenvalues>
#include <sstream>

namespace envkit::hilbert {

namespace {

std::string dim_text(Eigen::Index r, Eigen::Index c) {
  std::ostringstream out;
  out << r << "x" << c;
  return out.str();
}

}  // namespace

BipartiteState::BipartiteState(Vector amplitudes, Eigen::Index d1,
                               Eigen::Index d2, const Tolerances& tol)
    : amps_(std::move(amplitudes)), d1_(d1), d2_(d2) {
  if (d1_ < 1 || d2_ < 1) {
    throw ValidationError("bipartite state: factor dimensions must be >= 1");
  }
  if (amps_.size() != d1_ * d2_) {
    std::ostringstream out;
    out << "bipartite state: amplitude count " << amps_.size()
        << " does not match d1*d2 = " << d1_ * d2_;
    throw ValidationError(out.str());
  }
  const double norm = amps_.norm();
  if (std::abs(norm - 1.0) > tol.tol_norm) {
    std::ostringstream out;
    out << "bipartite state: norm " << norm << " deviates from 1 by more than "
        << tol.tol_norm;
    throw ValidationError(out.str());
  }
}

Matrix BipartiteState::amplitude_matrix() const {
  return Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic,
                                        Eigen::RowMajor>>(amps_.data(), d1_,
                                                          d2_);
}

DensityOperator::DensityOperator(Matrix rho, const Tolerances& tol)
    : mat_(std::move(rho)) {
  if (mat_.rows() != mat_.cols() || mat_.rows() < 1) {
    throw ValidationError("density operator: matrix must be square, got " +
                          dim_text(mat_.rows(), mat_.cols()));
  }
  if (!is_hermitian(mat_, tol.tol_op)) {
    throw ValidationError("density operator: matrix is not Hermitian");
  }
  const double trace = mat_.trace().real();
  if (std::abs(trace - 1.0) > tol.tol_norm) {
    std::ostringstream out;
    out << "density operator: trace " << trace << " deviates from 1";
    throw ValidationError(out.str());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(mat_);
  if (solver.info() != Eigen::Success) {
    throw ValidationError("density operator: eigendecomposition failed");
  }
  const Eigen::Index n = mat_.rows();
  evals_.resize(n);
  evecs_.resize(n, n);
  // Solver returns ascending order; store descending.
  for (Eigen::Index i = 0; i < n; ++i) {
    double v = solver.eigenvalues()(n - 1 - i);
    if (v < -tol.tol_psd) {
      std::ostringstream out;
      out << "density operator: negative eigenvalue " << v;
      throw ValidationError(out.str());
    }
    evals_(i) = v < 0.0 ? 0.0 : v;
    evecs_.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
}

BipartiteState tensor(const Vector& a, const Vector& b, const Tolerances& tol) {
  if (a.size() < 1 || b.size() < 1) {
    throw ValidationError("tensor: factors must be non-empty");
  }
  const Eigen::Index d1 = a.size();
  const Eigen::Index d2 = b.size();
  Vector amps(d1 * d2);
  for (Eigen::Index k = 0; k < d1; ++k) {
    amps.segment(k * d2, d2) = a(k) * b;
  }
  return BipartiteState(std::move(amps), d1, d2, tol);
}

Vector partial_scalar_product(const Vector& m, const BipartiteState& psi) {
  if (m.size() != psi.d1()) {
    throw ValidationError(
        "partial scalar product: vector lives in the wrong space (size " +
        std::to_string(m.size()) + ", expected " + std::to_string(psi.d1()) +
        ")");
  }
  // <m|_1 psi = sum_k conj(m_k) * A.row(k).
  return psi.amplitude_matrix().transpose() * m.conjugate();
}

Vector partial_scalar_product_second(const Vector& m,
                                     const BipartiteState& psi) {
  if (m.size() != psi.d2()) {
    throw ValidationError(
        "partial scalar product: vector lives in the wrong space (size " +
        std::to_string(m.size()) + ", expected " + std::to_string(psi.d2()) +
        ")");
  }
  return psi.amplitude_matrix() * m.conjugate();
}

DensityOperator reduced_density(const BipartiteState& psi, int side,
                                const Tolerances& tol) {
  if (side != 1 && side != 2) {
    throw ValidationError("reduced density: side must be 1 or 2");
  }
  const Matrix a = psi.amplitude_matrix();
  Matrix rho;
  if (side == 1) {
    rho = a * a.adjoint();
  } else {
    rho = a.transpose() * a.conjugate();
  }
  // Symmetrize to wash out round-off before validation.
  rho = ((rho + rho.adjoint()) / 2.0).eval();
  return DensityOperator(std::move(rho), tol);
}

Matrix partial_trace(const Matrix& op, Eigen::Index d1, Eigen::Index d2,
                     int side) {
  if (op.rows() != d1 * d2 || op.cols() != d1 * d2) {
    throw ValidationError("partial trace: operator must be (d1*d2) square");
  }
  if (side != 1 && side != 2) {
    throw ValidationError("partial trace: side must be 1 or 2");
  }
  if (side == 1) {
    Matrix out = Matrix::Zero(d1, d1);
    for (Eigen::Index k = 0; k < d1; ++k) {
      for (Eigen::Index kp = 0; kp < d1; ++kp) {
        Complex sum = 0.0;
        for (Eigen::Index l = 0; l < d2; ++l) {
          sum += op(k * d2 + l, kp * d2 + l);
        }
        out(k, kp) = sum;
      }
    }
    return out;
  }
  Matrix out = Matrix::Zero(d2, d2);
  for (Eigen::Index l = 0; l < d2; ++l) {
    for (Eigen::Index lp = 0; lp < d2; ++lp) {
      Complex sum = 0.0;
      for (Eigen::Index k = 0; k < d1; ++k) {
        sum += op(k * d2 + l, k * d2 + lp);
      }
      out(l, lp) = sum;
    }
  }
  return out;
}

Complex hs_inner(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ValidationError("hs inner product: shape mismatch " +
                          dim_text(a.rows(), a.cols()) + " vs " +
                          dim_text(b.rows(), b.cols()));
  }
  return (a.adjoint() * b).trace();
}

double hs_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ValidationError("hs distance: shape mismatch " +
                          dim_text(a.rows(), a.cols()) + " vs " +
                          dim_text(b.rows(), b.cols()));
  }
  return (a - b).norm();
}

SpectralDecomposition spectral(const DensityOperator& rho,
                               const Tolerances& tol) {
  const RealVector& all_vals = rho.eigenvalues();
  const Matrix& all_vecs = rho.eigenvectors();
  const Eigen::Index n = rho.dim();

  Eigen::Index rank = 0;
  while (rank < n && all_vals(rank) >= tol.eps_rank) ++rank;

  SpectralDecomposition out;
  out.rank = rank;
  out.eigenvalues = all_vals.head(rank);
  out.eigenvectors = all_vecs.leftCols(rank);

  // Transitive clustering: consecutive descending eigenvalues closer than
  // eps_cluster land in the same cluster.
  Eigen::Index start = 0;
  while (start < rank) {
    Eigen::Index stop = start + 1;
    while (stop < rank &&
           out.eigenvalues(stop - 1) - out.eigenvalues(stop) < tol.eps_cluster) {
      ++stop;
    }
    EigenCluster cluster;
    cluster.first = start;
    cluster.multiplicity = stop - start;
    cluster.value =
        out.eigenvalues.segment(start, stop - start).mean();
    const Matrix block = out.eigenvectors.middleCols(start, stop - start);
    cluster.projector = block * block.adjoint();
    out.clusters.push_back(std::move(cluster));
    start = stop;
  }

  out.support_projector =
      out.eigenvectors * out.eigenvectors.adjoint();
  out.null_projector = Matrix::Identity(n, n) - out.support_projector;
  return out;
}

bool is_hermitian(const Matrix& m, double tol_op) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).norm() <= tol_op;
}

bool is_unitary(const Matrix& m, double tol_op) {
  if (m.rows() != m.cols()) return false;
  const Matrix id = Matrix::Identity(m.rows(), m.cols());
  return (m.adjoint() * m - id).norm() <= tol_op &&
         (m * m.adjoint() - id).norm() <= tol_op;
}

bool is_projector(const Matrix& m, double tol_op) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).norm() <= tol_op && (m * m - m).norm() <= tol_op;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

BipartiteState apply_first(const Matrix& u1, const BipartiteState& psi,
                           const Tolerances& tol) {
  if (u1.rows() != psi.d1() || u1.cols() != psi.d1()) {
    throw ValidationError("apply_first: operator must be d1 square");
  }
  const Matrix a = u1 * psi.amplitude_matrix();
  Vector amps(psi.d1() * psi.d2());
  for (Eigen::Index k = 0; k < psi.d1(); ++k) {
    amps.segment(k * psi.d2(), psi.d2()) = a.row(k).transpose();
  }
  return BipartiteState(std::move(amps), psi.d1(), psi.d2(), tol);
}

BipartiteState apply_second(const Matrix& u2, const BipartiteState& psi,
                            const Tolerances& tol) {
  if (u2.rows() != psi.d2() || u2.cols() != psi.d2()) {
    throw ValidationError("apply_second: operator must be d2 square");
  }
  const Matrix a = psi.amplitude_matrix() * u2.transpose();
  Vector amps(psi.d1() * psi.d2());
  for (Eigen::Index k = 0; k < psi.d1(); ++k) {
    amps.segment(k * psi.d2(), psi.d2()) = a.row(k).transpose();
  }
  return BipartiteState(std::move(amps), psi.d1(), psi.d2(), tol);
}

}  // namespace envkit::hilbert
