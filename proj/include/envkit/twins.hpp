// Copyright (c) 2026 envkit developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>

#include "envkit/schmidt.hpp"

namespace envkit::twins {

using hilbert::BipartiteState;
using hilbert::Complex;
using hilbert::DensityOperator;
using hilbert::Matrix;
using hilbert::Tolerances;
using hilbert::Vector;
using schmidt::SubsystemPicture;

/// Raised when a requested twin object does not exist because the input
/// fails the commutation condition with the relevant reduced density.
class NoTwinError : public CertificationError {
 public:
  using CertificationError::CertificationError;
};

/// Raised by the equiprobability construction when the two vectors do not
/// lie in a single eigen-subspace of the first reduced density.
class NotCoResidentError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A certified pair of unitaries acting identically on a bipartite state
/// from the two sides: (u1 (x) 1) psi == (1 (x) u2) psi.
struct TwinPair {
  Matrix u1;
  Matrix u2;
  double residual = 0.0;  ///< certification residual on the source state
};

/// Result of a twin verification.
struct TwinCheck {
  bool ok = false;
  double residual = 0.0;  ///< after phase fitting when allow_phase is set
  double phase = 0.0;     ///< fitted relative phase (0 when not requested)
};

/// Hermitian counterpart on the second subsystem.
struct TwinHermitian {
  Matrix h2;
  double residual = 0.0;  ///< || (h1 (x) 1) psi - (1 (x) h2) psi ||
};

/// Result of the mixed-state twin-Hermitian check.
struct MixedTwinCheck {
  bool ok = false;
  double residual = 0.0;     ///< || (h1 (x) 1) rho - (1 (x) h2) rho ||_HS
  double commutator1 = 0.0;  ///< || [h1, rho1] ||_HS (derived consequence)
  double commutator2 = 0.0;  ///< || [h2, rho2] ||_HS
};

/// Verifies the defining identity (u1 (x) 1) psi == (1 (x) u2) psi within
/// tol.tol_twin.  With allow_phase, fits the global phase lambda minimizing
/// || (u1 (x) 1) psi - e^{i lambda} (1 (x) u2) psi || and reports it.
TwinCheck is_twin_pair(const Matrix& u1, const Matrix& u2,
                       const BipartiteState& psi, bool allow_phase = false,
                       const Tolerances& tol = {});

/// Constructs the unique twin of u1 on the support of the second reduced
/// density (identity on its null space).  Requires [u1, rho1] == 0 within
/// tol.tol_commute; throws NoTwinError otherwise with the commutator norm.
TwinPair twin_of(const Matrix& u1, const SubsystemPicture& picture,
                 const Tolerances& tol = {});

/// Draws a Haar-random unitary from the group of twins of the state: an
/// independent Haar block on each eigen-subspace of rho1, identity on the
/// null space, with the matching second-side unitary.
TwinPair sample_twin(const SubsystemPicture& picture, std::mt19937_64& rng,
                     const Tolerances& tol = {});

/// Builds the twin pair whose first member maps phi to phi_prime, where both
/// vectors lie in the same eigen-subspace of rho1 (identity elsewhere).
/// Throws NotCoResidentError when the vectors do not co-reside.
TwinPair swap_twin(const Vector& phi, const Vector& phi_prime,
                   const SubsystemPicture& picture, const Tolerances& tol = {});

/// Group composition of twin pairs: first members compose left-to-right,
/// second members in the reversed order.  Re-certified on the state.
TwinPair compose(const TwinPair& later, const TwinPair& earlier,
                 const SubsystemPicture& picture, const Tolerances& tol = {});

/// Group inverse of a twin pair, re-certified on the state.
TwinPair inverse(const TwinPair& pair, const SubsystemPicture& picture,
                 const Tolerances& tol = {});

/// Hermitian twin: h2 acts on the second subsystem exactly as h1 does on
/// the first.  Requires [h1, rho1] == 0 within tol.tol_commute.
TwinHermitian twin_hermitian_of(const Matrix& h1,
                                const SubsystemPicture& picture,
                                const Tolerances& tol = {});

/// Exponential bridge: unitary e^{i h} on the support of the reduced
/// density of `side` (1 or 2), identity on its null space.  Requires
/// [h, rho_side] == 0 within tol.tol_commute.
Matrix hermitian_to_unitary(const Matrix& h, const SubsystemPicture& picture,
                            int side, const Tolerances& tol = {});

/// Inverse bridge: Hermitian generator of a unitary commuting with the
/// reduced density of `side`; eigenphases normalized to [0, 2*pi), zero on
/// the null space.  Round trip certified on the support.
Matrix unitary_to_hermitian(const Matrix& u, const SubsystemPicture& picture,
                            int side, const Tolerances& tol = {});

/// Mixed-state analogue: checks (h1 (x) 1) rho == (1 (x) h2) rho in
/// Hilbert-Schmidt norm; when it holds, certifies the derived commutation
/// of each h with its reduced density.
MixedTwinCheck is_mixed_twin(const Matrix& h1, const Matrix& h2,
                             const DensityOperator& rho12,
                             const Tolerances& tol = {});

}  // namespace envkit::twins
