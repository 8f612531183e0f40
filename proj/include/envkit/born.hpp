// Copyright (c) 2026 envkit developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "envkit/exec.hpp"
#include "envkit/twins.hpp"

namespace envkit::born {

using hilbert::BipartiteState;
using hilbert::Complex;
using hilbert::DensityOperator;
using hilbert::Matrix;
using hilbert::RealVector;
using hilbert::Tolerances;
using hilbert::Vector;
using schmidt::SubsystemPicture;
using twins::TwinPair;

/// How a probability value was obtained.
enum class Route {
  Counting,      ///< relative frequency of fine-grained branches
  Eigenvector,   ///< eigenvalue of the reduced density as eigenvector weight
  ClosestState,  ///< weight of the closest density with the event as eigenstate
  Density,       ///< quadratic form <phi| rho |phi>
  Trace,         ///< tr(rho E) for a projector event
};

const char* route_name(Route route);

/// A certified probability statement.
struct ProbabilityReport {
  std::string event;                        ///< human-readable event label
  double value = 0.0;                       ///< probability
  Route route = Route::Density;             ///< derivation route
  std::map<std::string, double> residuals;  ///< certification residuals
  bool has_rational = false;                ///< exact rational value attached
  std::int64_t numerator = 0;
  std::int64_t denominator = 1;
  /// Slot for any additional dependence of the probability beyond the
  /// density operator and the event; intentionally never populated.
  std::optional<std::string> unknown_dependence;
};

/// Rational approximation of a density spectrum: distinct eigenvalues
/// r_j ~= numerators[j] / denominator with multiplicities, sharing one
/// denominator, with the integer identity
/// sum_j multiplicities[j] * numerators[j] == denominator.
struct RationalSpectrum {
  std::vector<std::int64_t> numerators;      ///< m_j, one per cluster
  std::int64_t denominator = 1;              ///< M
  std::vector<Eigen::Index> multiplicities;  ///< d_j
  std::vector<double> targets;               ///< the clustered eigenvalues r_j
  std::vector<Matrix> projectors;            ///< cluster eigen-projectors
  bool exact = false;                        ///< true when error < 1e-12
  double approximation_error = 0.0;          ///< max_j |r_j - m_j/M|

  Eigen::Index cluster_count() const {
    return static_cast<Eigen::Index>(numerators.size());
  }
};

/// Equal-amplitude fine-graining of a bipartite state over two label
/// spaces.  Amplitudes are stored row-major over (d1, d2, d3).  Carries the
/// generating spectrum and the side-1 eigen-sub-basis for counting.
struct TripartiteState {
  Vector amplitudes;
  Eigen::Index d1 = 0;
  Eigen::Index d2 = 0;
  Eigen::Index d3 = 0;
  RationalSpectrum spectrum;
  Matrix basis1;  ///< side-1 eigen-sub-basis columns grouped by cluster
};

/// Unitary on the second-and-third factor realizing the fine-graining.
struct FinegrainUnitary {
  Matrix u23;
  Eigen::Index d2 = 0;
  Eigen::Index d3 = 0;
  double residual = 0.0;  ///< action vs. directly built fine-grained state
};

/// Outcome of the equiprobability construction for two co-resident vectors.
struct StageOneCertificate {
  bool certified = false;
  std::string message;
  std::optional<TwinPair> pair;  ///< the swapping twin pair when certified
  Eigen::Index cluster = -1;     ///< eigen-subspace housing both vectors
  double probability_first = 0.0;
  double probability_second = 0.0;
  double probability_gap = 0.0;
};

/// One step of an approximating density sequence.
struct ContinuityStep {
  int index = 0;                  ///< step number n
  std::int64_t denominator_bound = 0;  ///< rational family: allowed M
  Matrix rho;                     ///< the approximating density
  double residual = 0.0;          ///< || rho1 - rho ||_HS
  double probability = 0.0;       ///< tracked-cluster eigenvalue of rho
  bool exact = false;
};

/// The two approximating families and the tracked limit.
struct ContinuityResult {
  std::vector<ContinuityStep> rational_family;
  std::vector<ContinuityStep> truncation_family;
  Eigen::Index tracked_cluster = 0;
  double target = 0.0;  ///< true eigenvalue of the tracked cluster
};

/// The density closest to rho among those having phi as an eigenstate.
struct ClosestDensity {
  DensityOperator rho_prime;
  double r_prime = 0.0;  ///< eigenvalue of rho_prime on phi
  double distance = 0.0; ///< || rho - rho_prime ||_HS
};

/// Result of the randomized closest-density search.
struct OracleResult {
  double best_distance = 0.0;
  Matrix best_candidate;
  std::uint64_t samples = 0;
};

/// Selective state change: normalized projected state and event weight.
struct SelectiveResult {
  DensityOperator state;
  double weight = 0.0;
};

/// One step of the isolated-system limit.
struct IsolatedStep {
  std::int64_t n = 0;
  double probability = 0.0;   ///< <phi| rho_n |phi>
  double deviation = 0.0;     ///< |probability - |<phi|psi>|^2|
  double hs_residual = 0.0;   ///< || rho_n - |psi><psi| ||_HS
  double purification_residual = 0.0;
};

/// The isolated-system limit table and its fitted 1/n decay.
struct IsolatedResult {
  std::vector<IsolatedStep> steps;
  double limit = 0.0;     ///< |<phi|psi>|^2
  double fitted_c = 0.0;  ///< least-squares C in deviation ~= C / n
  double fit_spread = 0.0;///< max_n |n * deviation_n - C|
  ProbabilityReport report;
};

/// Result of the finite-additivity identity tr(rho G) == sum_i tr(rho E_i).
struct AdditivityResult {
  bool ok = false;
  double whole = 0.0;
  double sum_parts = 0.0;
  double residual = 0.0;
};

/// Equiprobability certificate: builds the twin pair swapping phi and
/// phi_prime inside one eigen-subspace and certifies that both vectors
/// carry the same probability weight.  Returns certified == false (with the
/// reason) when the vectors do not co-reside.
StageOneCertificate stage_one_certificate(const SubsystemPicture& picture,
                                          const Vector& phi,
                                          const Vector& phi_prime,
                                          const Tolerances& tol = {});

/// Best single-denominator rational approximation of the density spectrum
/// with denominator <= max_denominator, repaired so that the weighted
/// numerators sum exactly to the denominator.
RationalSpectrum rational_spectrum(const DensityOperator& rho1,
                                   std::int64_t max_denominator,
                                   const Tolerances& tol = {});

/// Equal-amplitude fine-grained extension of psi over fresh label spaces
/// (dimensions default to the spectrum denominator).  Requires an exact
/// rational spectrum matching psi's first reduced density.
TripartiteState finegrain_state(const BipartiteState& psi,
                                const RationalSpectrum& spectrum,
                                Eigen::Index d2_override = 0,
                                Eigen::Index d3_override = 0,
                                const Tolerances& tol = {});

/// Unitary on the (second, third) factor turning psi (x) |first label> into
/// the fine-grained state; requires psi's second dimension to hold the
/// labels (d2 >= denominator).
FinegrainUnitary finegrain_unitary(const BipartiteState& psi,
                                   const RationalSpectrum& spectrum,
                                   Eigen::Index d3_override = 0,
                                   const Tolerances& tol = {});

/// Branch-counting probabilities of a fine-grained state: certifies the
/// uniform branch amplitudes, then reports the exact rational probability
/// of every eigenvalue cluster and every fine-grained vector.
std::vector<ProbabilityReport> counting_probabilities(
    const TripartiteState& phi123, const Tolerances& tol = {});

/// Approximating density sequences (shared-denominator rational family and
/// renormalized truncation family) with certified monotone residuals.
ContinuityResult continuity_sequence(const DensityOperator& rho1, int n_max,
                                     Eigen::Index tracked_cluster = 0,
                                     const Tolerances& tol = {});

/// The closest density to rho having phi as an eigenstate, its eigenvalue
/// on phi, and the Hilbert-Schmidt distance.
ClosestDensity closest_eigenstate_density(const DensityOperator& rho,
                                          const Vector& phi,
                                          const Tolerances& tol = {});

/// Randomized search over densities with phi as an eigenstate, for
/// cross-checking the closed-form minimizer.  Deterministic in the seed for
/// both execution policies.  Desk scale: dimension <= 6.
OracleResult closest_oracle(const DensityOperator& rho, const Vector& phi,
                            std::uint64_t samples, std::uint64_t seed,
                            Execution exec = Execution::Serial,
                            const Tolerances& tol = {});

/// Non-selective projective state change sum_k P_k rho P_k for a complete
/// orthogonal family of projectors.
DensityOperator lueders_state(const DensityOperator& rho,
                              const std::vector<Matrix>& projectors,
                              const Tolerances& tol = {});

/// Selective projective state change P rho P / tr(P rho); throws for
/// zero-weight events.
SelectiveResult selective_lueders(const DensityOperator& rho, const Matrix& p,
                                  const Tolerances& tol = {});

/// Pure-state limit: densities (1 - 1/n)|psi><psi| + (1/n) * (uniform on
/// the complement), each with an explicit certified purification, and the
/// fitted 1/n decay of |<phi|rho_n|phi> - |<phi|psi>|^2| over a decade grid
/// up to n_max.
IsolatedResult isolated_state_limit(const Vector& psi, const Vector& phi,
                                    std::int64_t n_max,
                                    const Tolerances& tol = {});

/// Probability of a unit-vector event: <phi| rho |phi>.
ProbabilityReport born_probability(const DensityOperator& rho,
                                   const Vector& phi,
                                   const Tolerances& tol = {});

/// Probability of a projector event: tr(rho E).
ProbabilityReport born_probability(const DensityOperator& rho,
                                   const Matrix& event,
                                   const Tolerances& tol = {});

/// Finite additivity of probability over an orthogonal decomposition of a
/// projector, including the rank-one trace-rule bridge.
AdditivityResult additivity_check(const DensityOperator& rho,
                                  const Matrix& whole,
                                  const std::vector<Matrix>& parts,
                                  const Tolerances& tol = {});

}  // namespace envkit::born
