// Copyright (c) 2026 envkit developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "envkit/batch.hpp"
#include "envkit/json_io.hpp"

namespace envkit::scenario {

using hilbert::BipartiteState;
using hilbert::Tolerances;
using io::json;

/// Recipe for a reproducible random bipartite state: Haar bases combined
/// with a prescribed or random spectrum.
struct StateSpec {
  Eigen::Index d1 = 2;
  Eigen::Index d2 = 2;
  Eigen::Index rank = 0;         ///< 0 means min(d1, d2)
  std::vector<double> spectrum;  ///< optional eigenvalues (must sum to 1)
};

/// Deterministic random state: spectrum (given or sampled) attached to
/// Haar-random orthonormal bases on both sides.
BipartiteState random_state(const StateSpec& spec, std::uint64_t seed,
                            const Tolerances& tol = {});

/// Resolves a state-source document: {"file": path}, {"random": {...}}, or
/// inline {"d1", "d2", "amplitudes"}.  The master seed feeds the random
/// branch exactly as the scenario runner does.
BipartiteState state_from_document(const json& source, std::uint64_t seed,
                                   const Tolerances& tol = {});

/// A parsed scenario document.
struct Scenario {
  std::string kind;
  std::uint64_t seed = 0;
  Tolerances tol;
  json raw;  ///< full document for kind-specific fields

  static Scenario from_json(const json& doc);
  static Scenario from_file(const std::string& path);
};

/// Result of running a scenario: the JSON report and the overall verdict.
struct RunResult {
  json report;
  bool passed = false;
};

/// Executes a scenario and assembles its certification report.  Throws
/// ValidationError for malformed documents; check failures are reported in
/// the result, not thrown.
RunResult run(const Scenario& scenario);

}  // namespace envkit::scenario
