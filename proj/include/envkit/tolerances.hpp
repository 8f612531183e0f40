// Copyright (c) 2026 envkit developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace envkit {

/// Numerical tolerances used by the certification routines.  Every check in
/// the library names one of these knobs; callers may override any of them
/// per call or globally (the CLI exposes --tol name=value and the
/// ENVKIT_DEFAULT_TOL environment variable).
struct Tolerances {
  double tol_norm = 1e-10;    ///< unit-norm / trace-one residuals
  double tol_op = 1e-10;      ///< operator identity residuals (Frobenius)
  double tol_psd = 1e-10;     ///< allowed eigenvalue negativity for densities
  double tol_recon = 1e-9;    ///< state reconstruction residuals
  double eps_cluster = 1e-8;  ///< eigenvalue clustering gap (transitive)
  double eps_rank = 1e-10;    ///< eigenvalues below this belong to the null space
  double tol_unique = 1e-8;   ///< correlation-operator uniqueness certificate
  double tol_twin = 1e-9;     ///< twin-pair certification residual
  double tol_commute = 1e-9;  ///< commutation preconditions
  double tol_oracle = 1e-6;   ///< allowed margin against randomized oracles

  /// Look up a tolerance by its field name.  Throws std::invalid_argument
  /// for unknown names.
  double get(const std::string& name) const;

  /// Override one tolerance by name.  Throws std::invalid_argument for
  /// unknown names or non-positive values.
  void set(const std::string& name, double value);

  /// Apply a comma-separated list of name=value overrides, e.g.
  /// "tol_twin=1e-8,eps_cluster=1e-7".  Empty string is a no-op.
  void apply_overrides(const std::string& spec);

  /// All tolerances as a name -> value map (stable alphabetical order).
  std::map<std::string, double> as_map() const;
};

}  // namespace envkit
