// Copyright (c) 2026 envkit developers
// SPDX-License-Identifier: Apache-2.0

#include "envkit/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "envkit/random.hpp"

namespace envkit::scenario {

namespace {

using born::Route;
using hilbert::Matrix;
using hilbert::Vector;
using schmidt::SubsystemPicture;

// Distinct deterministic random streams per purpose.
enum Stream : std::uint64_t {
  kStateStream = 1,
  kPhiStream = 2,
  kPsiStream = 3,
  kOracleStream = 4,
  kBatchStream = 5,
  kVectorPairStream = 6,
};

double parse_spectrum_entry(const json& entry) {
  if (entry.is_number()) return entry.get<double>();
  if (entry.is_string()) {
    const std::string text = entry.get<std::string>();
    const auto slash = text.find('/');
    if (slash != std::string::npos) {
      const double num = std::stod(text.substr(0, slash));
      const double den = std::stod(text.substr(slash + 1));
      if (den == 0.0) throw ValidationError("spectrum: zero denominator");
      return num / den;
    }
    return std::stod(text);
  }
  throw ValidationError("spectrum entries must be numbers or \"a/b\" strings");
}

// Collects the per-check rows and the overall verdict.
class CheckList {
 public:
  void add(const std::string& name, double residual, double tolerance,
           json details = json::object()) {
    const bool pass = residual <= tolerance;
    all_pass_ = all_pass_ && pass;
    json row{{"name", name},
             {"pass", pass},
             {"residual", residual},
             {"tolerance", tolerance}};
    if (!details.empty()) row["details"] = std::move(details);
    rows_.push_back(std::move(row));
  }

  void add_flag(const std::string& name, bool pass,
                json details = json::object()) {
    all_pass_ = all_pass_ && pass;
    json row{{"name", name}, {"pass", pass}};
    if (!details.empty()) row["details"] = std::move(details);
    rows_.push_back(std::move(row));
  }

  void add_failure(const std::string& name, const std::string& reason) {
    all_pass_ = false;
    rows_.push_back(json{{"name", name}, {"pass", false}, {"error", reason}});
  }

  bool all_pass() const { return all_pass_; }
  json rows() const { return rows_; }

 private:
  json rows_ = json::array();
  bool all_pass_ = true;
};

BipartiteState state_from_scenario(const Scenario& s) {
  if (!s.raw.contains("state")) {
    throw ValidationError("scenario: missing state member");
  }
  return state_from_document(s.raw["state"], s.seed, s.tol);
}

hilbert::DensityOperator density_from_scenario(const Scenario& s,
                                               const char* member) {
  if (s.raw.contains(member)) {
    const json& r = s.raw[member];
    if (r.is_object() && r.contains("file")) {
      return hilbert::DensityOperator(
          io::decode_matrix(io::load_json_file(r["file"].get<std::string>())),
          s.tol);
    }
    if (r.is_array()) {
      return hilbert::DensityOperator(io::decode_matrix(r), s.tol);
    }
    throw ValidationError("scenario: density must be a matrix or a file ref");
  }
  // Fall back to the first reduced density of the scenario state.
  const BipartiteState psi = state_from_scenario(s);
  return hilbert::reduced_density(psi, 1, s.tol);
}

Vector vector_from_scenario(const Scenario& s, const char* member,
                            Eigen::Index dim, std::uint64_t stream) {
  if (s.raw.contains(member)) {
    Vector v = io::decode_vector(s.raw[member]);
    if (v.size() != dim) {
      throw ValidationError(std::string("scenario: ") + member +
                            " has the wrong dimension");
    }
    return v;
  }
  std::mt19937_64 rng(rnd::derive_seed(s.seed, stream));
  return rnd::haar_vector(dim, rng);
}

json stats_json(const std::vector<double>& values) {
  double max_value = 0.0;
  double sum = 0.0;
  for (const double v : values) {
    max_value = std::max(max_value, v);
    sum += v;
  }
  return json{{"count", values.size()},
              {"max", max_value},
              {"mean", values.empty() ? 0.0 : sum / values.size()}};
}

// --- kind: schmidt --------------------------------------------------------

void run_schmidt(const Scenario& s, CheckList& checks, json& payload) {
  const BipartiteState psi = state_from_scenario(s);
  payload["state_sha256"] = io::state_hash(psi);

  const schmidt::SchmidtDecomposition dec =
      schmidt::canonical_schmidt(psi, s.tol);
  payload["coefficients"] = io::encode(dec.coefficients);

  // Reconstruction: sum_i c_i |i>_1 (x) |i>_2 must restore the state.
  const Matrix rebuilt = dec.basis1 * dec.coefficients.asDiagonal() *
                         dec.basis2.transpose();
  double recon = 0.0;
  for (Eigen::Index k = 0; k < psi.d1(); ++k) {
    for (Eigen::Index l = 0; l < psi.d2(); ++l) {
      recon += std::norm(rebuilt(k, l) - psi.amplitudes()(k * psi.d2() + l));
    }
  }
  checks.add("schmidt-reconstruction", std::sqrt(recon), s.tol.tol_recon);

  const Eigen::Index rank = dec.coefficients.size();
  const Matrix id = Matrix::Identity(rank, rank);
  checks.add("basis1-orthonormal",
             (dec.basis1.adjoint() * dec.basis1 - id).norm(), s.tol.tol_op);
  checks.add("basis2-orthonormal",
             (dec.basis2.adjoint() * dec.basis2 - id).norm(), s.tol.tol_op);

  double order_violation = 0.0;
  for (Eigen::Index i = 1; i < rank; ++i) {
    order_violation = std::max(
        order_violation, dec.coefficients(i) - dec.coefficients(i - 1));
  }
  checks.add("coefficients-descending", order_violation, s.tol.eps_cluster);

  try {
    const SubsystemPicture pic = schmidt::subsystem_picture(psi, s.tol);
    payload["distinct_eigenvalues"] = io::encode(pic.distinct_eigenvalues);
    json mults = json::array();
    for (const auto d : pic.multiplicities) mults.push_back(d);
    payload["multiplicities"] = std::move(mults);

    checks.add("isometry-domain",
               (pic.ua.v.adjoint() * pic.ua.v - pic.ua.q1.conjugate()).norm(),
               s.tol.tol_op);
    checks.add("isometry-range",
               (pic.ua.v * pic.ua.v.adjoint() - pic.ua.q2).norm(),
               s.tol.tol_op);
    const Matrix rho2 = hilbert::reduced_density(psi, 2, s.tol).matrix();
    checks.add("density-pairing",
               (pic.ua.conjugate_operator(
                    hilbert::reduced_density(psi, 1, s.tol).matrix()) -
                pic.ua.q2 * rho2 * pic.ua.q2)
                   .norm(),
               s.tol.tol_op);
  } catch (const std::exception& err) {
    checks.add_failure("subsystem-picture", err.what());
  }

  const int trials = s.raw.value("trials", 20);
  const std::vector<double> deviations = batch::uniqueness_deviations(
      psi, trials, rnd::derive_seed(s.seed, kBatchStream), Execution::Parallel,
      s.tol);
  const double worst =
      deviations.empty()
          ? 0.0
          : *std::max_element(deviations.begin(), deviations.end());
  checks.add("correlation-uniqueness", worst, s.tol.tol_unique,
             stats_json(deviations));
}

// --- kind: twins ----------------------------------------------------------

void run_twins(const Scenario& s, CheckList& checks, json& payload) {
  const BipartiteState psi = state_from_scenario(s);
  payload["state_sha256"] = io::state_hash(psi);
  const SubsystemPicture pic = schmidt::subsystem_picture(psi, s.tol);

  const std::int64_t count = s.raw.value("count", 50);
  const std::vector<double> residuals = batch::twin_sample_residuals(
      pic, count, rnd::derive_seed(s.seed, kBatchStream), Execution::Parallel,
      s.tol);
  const double worst =
      residuals.empty()
          ? 0.0
          : *std::max_element(residuals.begin(), residuals.end());
  checks.add("twin-sample-residuals", worst, s.tol.tol_twin,
             stats_json(residuals));

  std::mt19937_64 rng(rnd::derive_seed(s.seed, kBatchStream + 100));
  const twins::TwinPair sample = twins::sample_twin(pic, rng, s.tol);
  json pair_json = io::encode(sample);
  pair_json["state_sha256"] = payload["state_sha256"];
  payload["example_pair"] = std::move(pair_json);

  // Invariance restatement: undoing the twin from the other side restores
  // the state exactly.
  const BipartiteState moved = hilbert::apply_second(
      sample.u2.adjoint(), hilbert::apply_first(sample.u1, psi, s.tol), s.tol);
  checks.add("invariance-restatement",
             (moved.amplitudes() - psi.amplitudes()).norm(), s.tol.tol_twin);

  // The constructed counterpart agrees with the sampled one on the support.
  const twins::TwinPair constructed = twins::twin_of(sample.u1, pic, s.tol);
  checks.add("counterpart-on-support",
             (pic.ua.q2 * (constructed.u2 - sample.u2) * pic.ua.q2).norm(),
             s.tol.tol_op);

  // Sampled first members are block-diagonal in the eigen-sub-basis.
  double off_block = 0.0;
  const Matrix folded = pic.decomposition.basis1.adjoint() * sample.u1 *
                        pic.decomposition.basis1;
  for (Eigen::Index ja = 0; ja < pic.cluster_count(); ++ja) {
    for (Eigen::Index jb = 0; jb < pic.cluster_count(); ++jb) {
      if (ja == jb) continue;
      off_block = std::max(
          off_block, folded
                         .block(pic.offsets[ja], pic.offsets[jb],
                                pic.multiplicities[ja], pic.multiplicities[jb])
                         .norm());
    }
  }
  checks.add("block-structure", off_block, 1e-8);
}

// --- kind: group ----------------------------------------------------------

void run_group(const Scenario& s, CheckList& checks, json& payload) {
  const BipartiteState psi = state_from_scenario(s);
  payload["state_sha256"] = io::state_hash(psi);
  const SubsystemPicture pic = schmidt::subsystem_picture(psi, s.tol);

  const std::int64_t count = s.raw.value("count", 100);
  const std::vector<batch::GroupTrialResiduals> trials =
      batch::group_axiom_trials(pic, count,
                                rnd::derive_seed(s.seed, kBatchStream),
                                Execution::Parallel, s.tol);
  double closure = 0.0, assoc = 0.0, inverse = 0.0, pairs = 0.0;
  for (const auto& t : trials) {
    closure = std::max(closure, t.closure);
    assoc = std::max(assoc, t.associativity);
    inverse = std::max(inverse, t.inverse_identity);
    pairs = std::max(pairs, t.pair_residual);
  }
  payload["trials"] = trials.size();
  checks.add("group-closure", closure, s.tol.tol_twin);
  checks.add("group-associativity", assoc, s.tol.tol_op);
  checks.add("group-inverse-identity", inverse, s.tol.tol_op);
  checks.add("group-member-certification", pairs, s.tol.tol_twin);
}

// --- kind: born-pipeline --------------------------------------------------

void run_born_pipeline(const Scenario& s, CheckList& checks, json& payload) {
  const BipartiteState psi = state_from_scenario(s);
  payload["state_sha256"] = io::state_hash(psi);
  const hilbert::DensityOperator rho1 = hilbert::reduced_density(psi, 1, s.tol);

  const std::int64_t max_den = s.raw.value("max_denominator", 64);
  const born::RationalSpectrum spectrum =
      born::rational_spectrum(rho1, max_den, s.tol);
  payload["spectrum"] = io::encode(spectrum);
  checks.add("rational-exactness", spectrum.approximation_error, 1e-12);
  if (!spectrum.exact) return;

  born::TripartiteState tri;
  try {
    tri = born::finegrain_state(psi, spectrum, 0, 0, s.tol);
  } catch (const std::exception& err) {
    checks.add_failure("finegrain-state", err.what());
    return;
  }
  checks.add_flag("finegrain-state", true,
                  json{{"d1", tri.d1}, {"d2", tri.d2}, {"d3", tri.d3}});

  std::vector<born::ProbabilityReport> reports;
  try {
    reports = born::counting_probabilities(tri, s.tol);
  } catch (const std::exception& err) {
    checks.add_failure("counting-probabilities", err.what());
    return;
  }
  json report_rows = json::array();
  for (const auto& r : reports) report_rows.push_back(io::encode(r));
  payload["probabilities"] = std::move(report_rows);

  // Cross-route agreement: counting vs the trace rule on each cluster.
  double worst_gap = 0.0;
  std::size_t row = 0;
  for (Eigen::Index j = 0; j < spectrum.cluster_count(); ++j) {
    const born::ProbabilityReport& counted = reports[row];
    const born::ProbabilityReport traced =
        born::born_probability(rho1, spectrum.projectors[j], s.tol);
    worst_gap = std::max(worst_gap, std::abs(counted.value - traced.value));
    row += 1 + static_cast<std::size_t>(spectrum.multiplicities[j]);
  }
  checks.add("counting-vs-trace", worst_gap, 1e-11);

  // Equiprobability across fine-grained branches via the swap certificate
  // on the (system+labels | copies) cut.
  const BipartiteState folded(tri.amplitudes, tri.d1 * tri.d2, tri.d3, s.tol);
  const SubsystemPicture pic12 = schmidt::subsystem_picture(folded, s.tol);
  std::mt19937_64 rng(rnd::derive_seed(s.seed, kVectorPairStream));
  const Matrix block = pic12.basis1_block(0);
  const Vector a = block * rnd::haar_vector(block.cols(), rng);
  const Vector b = block * rnd::haar_vector(block.cols(), rng);
  const born::StageOneCertificate cert =
      born::stage_one_certificate(pic12, a, b, s.tol);
  checks.add_flag("equiprobability-certificate", cert.certified,
                  json{{"message", cert.message},
                       {"probability_gap", cert.probability_gap}});
}

// --- kind: closest-state --------------------------------------------------

void run_closest(const Scenario& s, CheckList& checks, json& payload) {
  const hilbert::DensityOperator rho = density_from_scenario(s, "rho");
  const Vector phi =
      vector_from_scenario(s, "phi", rho.dim(), kPhiStream);

  std::optional<born::ClosestDensity> closest;
  try {
    closest.emplace(born::closest_eigenstate_density(rho, phi, s.tol));
  } catch (const std::exception& err) {
    checks.add_failure("closest-density", err.what());
    return;
  }
  payload["r_prime"] = closest->r_prime;
  payload["distance"] = closest->distance;

  // phi must be an exact eigenvector of the result.
  const Vector image = closest->rho_prime.matrix() * phi;
  checks.add("eigenstate-property",
             (image - closest->r_prime * phi).norm(), s.tol.tol_op);

  // Cross-route agreement with the quadratic form.
  const born::ProbabilityReport quadratic =
      born::born_probability(rho, phi, s.tol);
  checks.add("closest-vs-quadratic",
             std::abs(closest->r_prime - quadratic.value), 1e-12);

  const std::uint64_t samples = s.raw.value("samples", 10000);
  const born::OracleResult oracle =
      born::closest_oracle(rho, phi, samples,
                           rnd::derive_seed(s.seed, kOracleStream),
                           Execution::Parallel, s.tol);
  payload["oracle_best"] = oracle.best_distance;
  payload["oracle_samples"] = oracle.samples;
  checks.add("closest-optimality",
             std::max(0.0, closest->distance - oracle.best_distance),
             s.tol.tol_oracle);

  born::ProbabilityReport report = born::born_probability(rho, phi, s.tol);
  report.route = Route::ClosestState;
  report.event = "unit-vector event via the closest eigenstate density";
  report.value = closest->r_prime;
  report.residuals["distance"] = closest->distance;
  payload["report"] = io::encode(report);
}

// --- kind: continuity -----------------------------------------------------

void run_continuity(const Scenario& s, CheckList& checks, json& payload) {
  const hilbert::DensityOperator rho = density_from_scenario(s, "rho");
  const int n_max = s.raw.value("n_max", 12);
  const Eigen::Index tracked = s.raw.value("tracked_cluster", 0);

  born::ContinuityResult result;
  try {
    result = born::continuity_sequence(rho, n_max, tracked, s.tol);
  } catch (const std::exception& err) {
    checks.add_failure("continuity-sequence", err.what());
    return;
  }
  checks.add_flag("monotone-residuals", true);

  json rational = json::array();
  for (const auto& step : result.rational_family) {
    rational.push_back(json{{"n", step.index},
                            {"denominator_bound", step.denominator_bound},
                            {"residual", step.residual},
                            {"probability", step.probability},
                            {"exact", step.exact}});
  }
  json truncation = json::array();
  for (const auto& step : result.truncation_family) {
    truncation.push_back(json{{"n", step.index},
                              {"residual", step.residual},
                              {"probability", step.probability},
                              {"exact", step.exact}});
  }
  payload["rational_family"] = std::move(rational);
  payload["truncation_family"] = std::move(truncation);
  payload["target"] = result.target;

  const auto& final_step = result.rational_family.back();
  const double clusters =
      static_cast<double>(result.truncation_family.size());
  checks.add("rational-convergence",
             std::abs(final_step.probability - result.target),
             std::max(clusters / static_cast<double>(
                                     final_step.denominator_bound),
                      1e-12));
  checks.add_flag("truncation-terminates-exact",
                  result.truncation_family.back().exact);
}

// --- kind: isolated -------------------------------------------------------

void run_isolated(const Scenario& s, CheckList& checks, json& payload) {
  const Eigen::Index dim = s.raw.value("dim", 4);
  Vector psi = vector_from_scenario(s, "psi", dim, kPsiStream);
  Vector phi = vector_from_scenario(s, "phi", dim, kPhiStream);
  const std::int64_t n_max = s.raw.value("n_max", 1000000);

  born::IsolatedResult result;
  try {
    result = born::isolated_state_limit(psi, phi, n_max, s.tol);
  } catch (const std::exception& err) {
    checks.add_failure("isolated-limit", err.what());
    return;
  }
  json steps = json::array();
  for (const auto& step : result.steps) {
    steps.push_back(json{{"n", step.n},
                         {"probability", step.probability},
                         {"deviation", step.deviation},
                         {"hs_residual", step.hs_residual},
                         {"purification_residual", step.purification_residual}});
  }
  payload["steps"] = std::move(steps);
  payload["limit"] = result.limit;
  payload["fitted_c"] = result.fitted_c;
  payload["report"] = io::encode(result.report);

  checks.add("final-deviation", result.steps.back().deviation, 1e-5);
  checks.add("decay-fit-stability", result.fit_spread,
             1e-8 + 1e-6 * std::max(result.fitted_c, 1.0));
}

}  // namespace

BipartiteState random_state(const StateSpec& spec, std::uint64_t seed,
                            const Tolerances& tol) {
  if (spec.d1 < 1 || spec.d2 < 1) {
    throw ValidationError("random state: dimensions must be >= 1");
  }
  const Eigen::Index max_rank = std::min(spec.d1, spec.d2);
  Eigen::Index rank = spec.rank == 0 ? max_rank : spec.rank;
  if (rank < 1 || rank > max_rank) {
    throw ValidationError("random state: rank out of range");
  }
  std::mt19937_64 rng(seed);
  hilbert::RealVector weights;
  if (!spec.spectrum.empty()) {
    if (static_cast<Eigen::Index>(spec.spectrum.size()) > max_rank) {
      throw ValidationError("random state: spectrum longer than max rank");
    }
    rank = static_cast<Eigen::Index>(spec.spectrum.size());
    weights.resize(rank);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < rank; ++i) {
      if (spec.spectrum[i] <= 0.0) {
        throw ValidationError("random state: spectrum entries must be > 0");
      }
      weights(i) = spec.spectrum[i];
      sum += weights(i);
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ValidationError("random state: spectrum must sum to 1");
    }
    weights /= sum;
    std::sort(weights.data(), weights.data() + rank, std::greater<double>());
  } else {
    weights = rnd::random_spectrum(rank, rng);
  }
  const Matrix basis1 = rnd::haar_isometry(spec.d1, rank, rng);
  const Matrix basis2 = rnd::haar_isometry(spec.d2, rank, rng);
  const hilbert::DensityOperator rho1(
      basis1 * weights.asDiagonal() * basis1.adjoint(), tol);
  schmidt::CorrelationOperator ua;
  ua.v = basis2 * basis1.transpose();
  ua.q1 = basis1 * basis1.adjoint();
  ua.q2 = basis2 * basis2.adjoint();
  return schmidt::strong_schmidt_reconstruct(rho1, ua, tol);
}

BipartiteState state_from_document(const json& source, std::uint64_t seed,
                                   const Tolerances& tol) {
  if (source.is_object() && source.contains("file")) {
    return io::decode_state(
        io::load_json_file(source["file"].get<std::string>()), tol);
  }
  if (source.is_object() && source.contains("random")) {
    const json& r = source["random"];
    StateSpec spec;
    spec.d1 = r.value("d1", 2);
    spec.d2 = r.value("d2", 2);
    spec.rank = r.value("rank", 0);
    if (r.contains("spectrum")) {
      for (const auto& entry : r["spectrum"]) {
        spec.spectrum.push_back(parse_spectrum_entry(entry));
      }
    }
    return random_state(spec, rnd::derive_seed(seed, kStateStream), tol);
  }
  if (source.is_object() && source.contains("amplitudes")) {
    return io::decode_state(source, tol);
  }
  throw ValidationError(
      "state source must carry file, random, or inline amplitudes");
}

Scenario Scenario::from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("kind") || !doc["kind"].is_string()) {
    throw ValidationError("scenario: document must carry a string kind");
  }
  Scenario s;
  s.kind = doc["kind"].get<std::string>();
  s.seed = doc.value("seed", std::uint64_t{0});
  if (doc.contains("tolerances")) {
    if (!doc["tolerances"].is_object()) {
      throw ValidationError("scenario: tolerances must be an object");
    }
    for (const auto& [name, value] : doc["tolerances"].items()) {
      if (!value.is_number()) {
        throw ValidationError("scenario: tolerance values must be numbers");
      }
      s.tol.set(name, value.get<double>());
    }
  }
  s.raw = doc;
  return s;
}

Scenario Scenario::from_file(const std::string& path) {
  return from_json(io::load_json_file(path));
}

RunResult run(const Scenario& scenario) {
  CheckList checks;
  json payload = json::object();

  if (scenario.kind == "schmidt") {
    run_schmidt(scenario, checks, payload);
  } else if (scenario.kind == "twins") {
    run_twins(scenario, checks, payload);
  } else if (scenario.kind == "group") {
    run_group(scenario, checks, payload);
  } else if (scenario.kind == "born-pipeline") {
    run_born_pipeline(scenario, checks, payload);
  } else if (scenario.kind == "closest-state") {
    run_closest(scenario, checks, payload);
  } else if (scenario.kind == "continuity") {
    run_continuity(scenario, checks, payload);
  } else if (scenario.kind == "isolated") {
    run_isolated(scenario, checks, payload);
  } else {
    throw ValidationError("scenario: unknown kind \"" + scenario.kind + "\"");
  }

  RunResult result;
  result.passed = checks.all_pass();
  result.report = json{{"kind", scenario.kind},
                       {"seed", scenario.seed},
                       {"tolerances", json(scenario.tol.as_map())},
                       {"checks", checks.rows()},
                       {"passed", result.passed}};
  for (auto& [key, value] : payload.items()) {
    result.report[key] = std::move(value);
  }
  return result;
}

}  // namespace envkit::scenario
