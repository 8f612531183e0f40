// Copyright (c) 2026 envkit developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "envkit/hilbert.hpp"

namespace envkit::schmidt {

using hilbert::BipartiteState;
using hilbert::Complex;
using hilbert::DensityOperator;
using hilbert::Matrix;
using hilbert::RealVector;
using hilbert::Tolerances;
using hilbert::Vector;

/// Canonical Schmidt decomposition of a bipartite pure state:
///   psi = sum_i c_i |i>_1 (x) |i>_2,  c_i > 0 descending.
/// Conventions making the output reproducible:
///  * coefficients descending; squared coefficients below eps_rank dropped;
///  * phases chosen so that each basis1 column has its first
///    largest-modulus component real positive (phase freedom pushed into
///    basis2);
///  * within a cluster of equal coefficients (eps_cluster on the squares,
///    transitive), columns ordered lexicographically by (re, im) entries of
///    basis1 after phase fixing.
struct SchmidtDecomposition {
  RealVector coefficients;  ///< c_i > 0, descending
  Matrix basis1;            ///< d1 x r, orthonormal columns
  Matrix basis2;            ///< d2 x r, orthonormal columns
};

/// Antiunitary correlation operator between the two subsystem supports,
/// factored as (linear isometry V) composed with entrywise conjugation in
/// the fixed computational basis of the first space:
///   apply(x) = V * conj(x).
/// V maps the conjugated support of rho1 onto the support of rho2; q1 / q2
/// are the support projectors of the two reduced densities.
struct CorrelationOperator {
  Matrix v;   ///< d2 x d1 partial isometry
  Matrix q1;  ///< projector onto supp(rho1), d1 x d1
  Matrix q2;  ///< projector onto supp(rho2), d2 x d2

  /// Antiunitary action on a first-space vector.
  Vector apply(const Vector& x) const { return v * x.conjugate(); }

  /// Conjugation of a first-space operator into a second-space operator:
  /// m |-> V conj(m) V^dagger (supported on supp(rho2)).
  Matrix conjugate_operator(const Matrix& m) const {
    return v * m.conjugate() * v.adjoint();
  }

  /// Inverse antiunitary action on a second-space vector.
  Vector apply_inverse(const Vector& y) const {
    return (v.adjoint() * y).conjugate();
  }
};

/// Complete correlated-subsystem picture of a bipartite state: the distinct
/// reduced-density eigenvalues, the paired eigen-projectors on both sides,
/// the paired eigen-sub-bases, and the correlation operator tying them.
struct SubsystemPicture {
  Eigen::Index d1 = 0;
  Eigen::Index d2 = 0;
  Vector state_amplitudes;  ///< the analyzed state (row-major product basis)
  SchmidtDecomposition decomposition;
  RealVector distinct_eigenvalues;          ///< r_j, descending
  std::vector<Eigen::Index> multiplicities; ///< d_j
  std::vector<Eigen::Index> offsets;        ///< first column of cluster j
  std::vector<Matrix> q1_blocks;            ///< eigen-projectors, side 1
  std::vector<Matrix> q2_blocks;            ///< eigen-projectors, side 2
  Matrix q1_null;                           ///< null-space projector, side 1
  Matrix q2_null;                           ///< null-space projector, side 2
  CorrelationOperator ua;

  Eigen::Index rank() const { return decomposition.coefficients.size(); }
  Eigen::Index cluster_count() const {
    return static_cast<Eigen::Index>(multiplicities.size());
  }
  /// Columns of the side-1 (side-2) eigen-sub-basis spanning cluster j.
  Matrix basis1_block(Eigen::Index j) const {
    return decomposition.basis1.middleCols(offsets[j], multiplicities[j]);
  }
  Matrix basis2_block(Eigen::Index j) const {
    return decomposition.basis2.middleCols(offsets[j], multiplicities[j]);
  }
  /// The analyzed state as a validated object.
  BipartiteState state(const Tolerances& tol = {}) const {
    return BipartiteState(state_amplitudes, d1, d2, tol);
  }
  /// Reduced density of the first subsystem, rebuilt from the decomposition.
  Matrix rho1() const {
    return decomposition.basis1 *
           decomposition.coefficients.array().square().matrix().asDiagonal() *
           decomposition.basis1.adjoint();
  }
  /// Reduced density of the second subsystem.
  Matrix rho2() const {
    return decomposition.basis2 *
           decomposition.coefficients.array().square().matrix().asDiagonal() *
           decomposition.basis2.adjoint();
  }
};

/// Generalized expansion of a bipartite state over an orthonormal basis of
/// the first space: psi = sum_m |m>_1 (x) |m>'_2 with unnormalized
/// coefficient vectors |m>'_2 = <m|_1 psi.  Column m of the result is the
/// coefficient vector of basis1 column m.
Matrix expand_in_basis(const BipartiteState& psi, const Matrix& basis1,
                       const Tolerances& tol = {});

/// Canonical Schmidt decomposition (see SchmidtDecomposition for the
/// conventions).  Throws ValidationError for non-normalized input.
SchmidtDecomposition canonical_schmidt(const BipartiteState& psi,
                                       const Tolerances& tol = {});

/// Builds the correlation operator of a state from its canonical Schmidt
/// decomposition: V = basis2 * basis1^T (so apply(x) = V conj(x)).
CorrelationOperator correlation_operator(const BipartiteState& psi,
                                         const Tolerances& tol = {});

/// Same, reusing an existing decomposition of the state.
CorrelationOperator correlation_operator(const SchmidtDecomposition& dec);

/// Monte-Carlo certificate that the correlation operator does not depend on
/// the freedom in the Schmidt decomposition: rotates each degenerate
/// eigen-sub-basis by a Haar-random block unitary, recomputes the partner
/// basis from the state itself, rebuilds V and returns the largest
/// Frobenius deviation over `trials` trials.  Throws for trials == 0.
double uniqueness_certificate(const BipartiteState& psi, int trials,
                              std::mt19937_64& rng, const Tolerances& tol = {});

/// One rotation trial of the uniqueness certificate: rotates the
/// eigen-sub-bases of `dec`, recovers the partner basis from `psi`, and
/// returns the Frobenius deviation of the rebuilt isometry from `reference`.
double uniqueness_trial(const SchmidtDecomposition& dec,
                        const CorrelationOperator& reference,
                        const BipartiteState& psi, std::mt19937_64& rng,
                        const Tolerances& tol = {});

/// Rebuilds the bipartite pure state determined by a reduced density and a
/// correlation operator:  psi = sum_i sqrt(r_i) |v_i>_1 (x) U_a |v_i>_1.
/// Requires the operator's first-side support to match supp(rho1).
BipartiteState strong_schmidt_reconstruct(const DensityOperator& rho1,
                                          const CorrelationOperator& ua,
                                          const Tolerances& tol = {});

/// Builds the full correlated-subsystem picture of a state and verifies the
/// structural identities (projector pairing, rho2 = conjugated rho1 on the
/// support) within tol.tol_op.
SubsystemPicture subsystem_picture(const BipartiteState& psi,
                                   const Tolerances& tol = {});

}  // namespace envkit::schmidt
