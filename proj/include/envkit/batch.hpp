// Copyright (c) 2026 envkit developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "envkit/exec.hpp"
#include "envkit/twins.hpp"

namespace envkit::batch {

using hilbert::BipartiteState;
using hilbert::Tolerances;
using schmidt::SubsystemPicture;

/// Residuals of the four group-law checks on one random triple of twins.
struct GroupTrialResiduals {
  double closure = 0.0;        ///< certification residual of a composition
  double associativity = 0.0;  ///< matrix gap between the two bracketings
  double inverse_identity = 0.0;  ///< pair * inverse vs identity matrices
  double pair_residual = 0.0;  ///< worst certification residual of the triple
};

/// Outcome of the necessity sweep: random non-commuting first members must
/// never admit any of the random candidate counterparts.
struct NecessityOutcome {
  std::int64_t false_accepts = 0;
  double min_residual = 0.0;  ///< smallest rejection residual observed
};

/// Draws `count` twins of the state and returns their certification
/// residuals.  Every item uses its own seed-derived stream, so Serial and
/// Parallel execution produce identical output.
std::vector<double> twin_sample_residuals(const SubsystemPicture& picture,
                                          std::int64_t count,
                                          std::uint64_t seed, Execution exec,
                                          const Tolerances& tol = {});

/// Runs `trials` independent rotation trials of the correlation-operator
/// uniqueness certificate and returns the deviations.
std::vector<double> uniqueness_deviations(const BipartiteState& psi,
                                          std::int64_t trials,
                                          std::uint64_t seed, Execution exec,
                                          const Tolerances& tol = {});

/// Samples `count` random triples of twins and checks the group laws
/// (closure, associativity, inverses).
std::vector<GroupTrialResiduals> group_axiom_trials(
    const SubsystemPicture& picture, std::int64_t count, std::uint64_t seed,
    Execution exec, const Tolerances& tol = {});

/// For `instances` random unitaries that fail to commute with the first
/// reduced density (commutator norm >= commutator_floor), verifies that
/// none of `candidates` random counterparts passes the twin check.
NecessityOutcome twin_necessity(const SubsystemPicture& picture,
                                std::int64_t instances, std::int64_t candidates,
                                std::uint64_t seed, Execution exec,
                                const Tolerances& tol = {},
                                double commutator_floor = 1e-6);

}  // namespace envkit::batch
