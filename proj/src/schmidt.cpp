// Copyright (c) 2026 envkit developers
// SPDX-License-Identifier: Apache-2.0

#include "envkit/schmidt.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <numeric>
#include <sstream>

#include "envkit/random.hpp"

namespace envkit::schmidt {

namespace {

// First index of the largest-modulus component of v.
Eigen::Index leading_index(const Vector& v) {
  Eigen::Index best = 0;
  double best_mod = std::abs(v(0));
  for (Eigen::Index k = 1; k < v.size(); ++k) {
    const double m = std::abs(v(k));
    if (m > best_mod) {
      best_mod = m;
      best = k;
    }
  }
  return best;
}

// Rotate the pair of basis columns so that basis1's leading component is
// real positive; the compensating phase goes into basis2.
void fix_column_phase(Matrix& basis1, Matrix& basis2, Eigen::Index col) {
  const Eigen::Index k = leading_index(basis1.col(col));
  const Complex lead = basis1(k, col);
  const double mod = std::abs(lead);
  if (mod == 0.0) return;
  const Complex phase = lead / mod;
  basis1.col(col) *= std::conj(phase);
  basis2.col(col) *= phase;
}

// Lexicographic order on (re, im) pairs of the column entries.
bool column_less(const Matrix& m, Eigen::Index a, Eigen::Index b) {
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    const Complex x = m(k, a);
    const Complex y = m(k, b);
    if (x.real() != y.real()) return x.real() < y.real();
    if (x.imag() != y.imag()) return x.imag() < y.imag();
  }
  return false;
}

// Group indices [0, count) of descending values into transitive clusters:
// consecutive entries closer than gap stay together.  Returns pairs of
// (first, size).
std::vector<std::pair<Eigen::Index, Eigen::Index>> cluster_ranges(
    const RealVector& values, double gap) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  Eigen::Index start = 0;
  const Eigen::Index count = values.size();
  while (start < count) {
    Eigen::Index stop = start + 1;
    while (stop < count && values(stop - 1) - values(stop) < gap) ++stop;
    out.emplace_back(start, stop - start);
    start = stop;
  }
  return out;
}

}  // namespace

Matrix expand_in_basis(const BipartiteState& psi, const Matrix& basis1,
                       const Tolerances& tol) {
  if (basis1.rows() != psi.d1()) {
    throw ValidationError("expansion basis lives in the wrong space");
  }
  const Matrix gram =
      basis1.adjoint() * basis1 -
      Matrix::Identity(basis1.cols(), basis1.cols());
  if (gram.norm() > tol.tol_op) {
    throw ValidationError("expansion basis is not orthonormal");
  }
  Matrix coeffs(psi.d2(), basis1.cols());
  for (Eigen::Index m = 0; m < basis1.cols(); ++m) {
    coeffs.col(m) = hilbert::partial_scalar_product(basis1.col(m), psi);
  }
  return coeffs;
}

SchmidtDecomposition canonical_schmidt(const BipartiteState& psi,
                                       const Tolerances& tol) {
  const Matrix a = psi.amplitude_matrix();
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::Index full = svd.singularValues().size();

  // Keep coefficients whose squares clear the rank cutoff.
  Eigen::Index rank = 0;
  while (rank < full) {
    const double s = svd.singularValues()(rank);
    if (s * s < tol.eps_rank) break;
    ++rank;
  }
  if (rank == 0) {
    throw ValidationError("schmidt decomposition: state has numerical rank 0");
  }

  SchmidtDecomposition dec;
  dec.coefficients = svd.singularValues().head(rank);
  dec.basis1 = svd.matrixU().leftCols(rank);
  // A = U S V^dagger means psi = sum_i s_i u_i (x) conj(v_i).
  dec.basis2 = svd.matrixV().leftCols(rank).conjugate();

  for (Eigen::Index i = 0; i < rank; ++i) {
    fix_column_phase(dec.basis1, dec.basis2, i);
  }

  // Deterministic column order inside each degenerate cluster.
  RealVector squares = dec.coefficients.array().square();
  for (const auto& [first, size] : cluster_ranges(squares, tol.eps_cluster)) {
    if (size < 2) continue;
    std::vector<Eigen::Index> order(size);
    std::iota(order.begin(), order.end(), first);
    std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
      return column_less(dec.basis1, x, y);
    });
    Matrix b1 = dec.basis1.middleCols(first, size);
    Matrix b2 = dec.basis2.middleCols(first, size);
    RealVector c = dec.coefficients.segment(first, size);
    for (Eigen::Index t = 0; t < size; ++t) {
      dec.basis1.col(first + t) = b1.col(order[t] - first);
      dec.basis2.col(first + t) = b2.col(order[t] - first);
      dec.coefficients(first + t) = c(order[t] - first);
    }
  }
  return dec;
}

CorrelationOperator correlation_operator(const SchmidtDecomposition& dec) {
  CorrelationOperator op;
  op.v = dec.basis2 * dec.basis1.transpose();
  op.q1 = dec.basis1 * dec.basis1.adjoint();
  op.q2 = dec.basis2 * dec.basis2.adjoint();
  return op;
}

CorrelationOperator correlation_operator(const BipartiteState& psi,
                                         const Tolerances& tol) {
  return correlation_operator(canonical_schmidt(psi, tol));
}

double uniqueness_trial(const SchmidtDecomposition& dec,
                        const CorrelationOperator& reference,
                        const BipartiteState& psi, std::mt19937_64& rng,
                        const Tolerances& tol) {
  const RealVector squares = dec.coefficients.array().square();
  const auto ranges = cluster_ranges(squares, tol.eps_cluster);
  const Eigen::Index rank = dec.coefficients.size();

  // Rotate each eigen-sub-basis by a Haar block (a random phase when the
  // cluster is nondegenerate), then recover the partner vectors from the
  // state itself instead of reusing the reference pairing.
  Matrix rotated = dec.basis1;
  for (const auto& [first, size] : ranges) {
    rotated.middleCols(first, size) =
        dec.basis1.middleCols(first, size) * rnd::haar_unitary(size, rng);
  }
  Matrix partners(psi.d2(), rank);
  for (Eigen::Index m = 0; m < rank; ++m) {
    Vector p = hilbert::partial_scalar_product(rotated.col(m), psi);
    const double n = p.norm();
    if (n <= 0.0) {
      throw CertificationError(
          "uniqueness certificate: rotated basis vector has vanishing "
          "partner");
    }
    partners.col(m) = p / n;
  }
  const Matrix rebuilt = partners * rotated.transpose();
  return (rebuilt - reference.v).norm();
}

double uniqueness_certificate(const BipartiteState& psi, int trials,
                              std::mt19937_64& rng, const Tolerances& tol) {
  if (trials <= 0) {
    throw ValidationError("uniqueness certificate: trials must be >= 1");
  }
  const SchmidtDecomposition dec = canonical_schmidt(psi, tol);
  const CorrelationOperator reference = correlation_operator(dec);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    worst = std::max(worst, uniqueness_trial(dec, reference, psi, rng, tol));
  }
  return worst;
}

BipartiteState strong_schmidt_reconstruct(const DensityOperator& rho1,
                                          const CorrelationOperator& ua,
                                          const Tolerances& tol) {
  if (ua.v.cols() != rho1.dim()) {
    throw ValidationError(
        "reconstruction: correlation operator acts on the wrong first space");
  }
  const hilbert::SpectralDecomposition spec = hilbert::spectral(rho1, tol);
  if ((ua.q1 - spec.support_projector).norm() > tol.tol_op) {
    throw ValidationError(
        "reconstruction: correlation operator support does not match "
        "supp(rho1)");
  }
  const Eigen::Index d1 = rho1.dim();
  const Eigen::Index d2 = ua.v.rows();
  Vector amps = Vector::Zero(d1 * d2);
  for (Eigen::Index i = 0; i < spec.rank; ++i) {
    const Vector v1 = spec.eigenvectors.col(i);
    const Vector v2 = ua.apply(v1);
    const double c = std::sqrt(spec.eigenvalues(i));
    for (Eigen::Index k = 0; k < d1; ++k) {
      amps.segment(k * d2, d2) += c * v1(k) * v2;
    }
  }
  return BipartiteState(std::move(amps), d1, d2, tol);
}

SubsystemPicture subsystem_picture(const BipartiteState& psi,
                                   const Tolerances& tol) {
  SubsystemPicture pic;
  pic.d1 = psi.d1();
  pic.d2 = psi.d2();
  pic.state_amplitudes = psi.amplitudes();
  pic.decomposition = canonical_schmidt(psi, tol);
  pic.ua = correlation_operator(pic.decomposition);

  const RealVector squares = pic.decomposition.coefficients.array().square();
  for (const auto& [first, size] : cluster_ranges(squares, tol.eps_cluster)) {
    pic.offsets.push_back(first);
    pic.multiplicities.push_back(size);
    const Matrix b1 = pic.decomposition.basis1.middleCols(first, size);
    const Matrix b2 = pic.decomposition.basis2.middleCols(first, size);
    pic.q1_blocks.push_back(b1 * b1.adjoint());
    pic.q2_blocks.push_back(b2 * b2.adjoint());
  }
  const Eigen::Index clusters = pic.cluster_count();
  pic.distinct_eigenvalues.resize(clusters);
  for (Eigen::Index j = 0; j < clusters; ++j) {
    pic.distinct_eigenvalues(j) =
        squares.segment(pic.offsets[j], pic.multiplicities[j]).mean();
  }
  pic.q1_null = Matrix::Identity(pic.d1, pic.d1) - pic.ua.q1;
  pic.q2_null = Matrix::Identity(pic.d2, pic.d2) - pic.ua.q2;

  // Structural certification: the side-2 eigen-projectors must be the
  // conjugated side-1 ones, and the conjugated reduced density must equal
  // the side-2 reduced density on its support.
  for (Eigen::Index j = 0; j < clusters; ++j) {
    const double dev =
        (pic.q2_blocks[j] - pic.ua.conjugate_operator(pic.q1_blocks[j]))
            .norm();
    if (dev > tol.tol_op) {
      std::ostringstream out;
      out << "subsystem picture: eigen-projector pairing failed on cluster "
          << j << " (residual " << dev << ")";
      throw CertificationError(out.str());
    }
  }
  const Matrix rho1 = hilbert::reduced_density(psi, 1, tol).matrix();
  const Matrix rho2 = hilbert::reduced_density(psi, 2, tol).matrix();
  const Matrix carried = pic.ua.conjugate_operator(rho1);
  const Matrix restricted = pic.ua.q2 * rho2 * pic.ua.q2;
  const double dev = (carried - restricted).norm();
  if (dev > tol.tol_op) {
    std::ostringstream out;
    out << "subsystem picture: conjugated reduced density deviates by " << dev;
    throw CertificationError(out.str());
  }
  return pic;
}

}  // namespace envkit::schmidt
