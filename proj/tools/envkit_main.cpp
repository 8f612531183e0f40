// Copyright (c) 2026 envkit developers
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: scenario runner and report emitter.  Exit codes:
// 0 all checks pass, 2 any certification failure, 3 input error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "envkit/scenario.hpp"

namespace {

using envkit::CertificationError;
using envkit::Tolerances;
using envkit::ValidationError;
using envkit::io::json;

constexpr int kExitPass = 0;
constexpr int kExitCertification = 2;
constexpr int kExitInput = 3;

/// Options shared by every subcommand.
struct CommonOptions {
  std::uint64_t seed = 0;
  std::vector<std::string> tol_overrides;
  std::string out_path;
};

/// State-source options: a file or a random recipe.
struct StateOptions {
  std::string state_file;
  Eigen::Index d1 = 2;
  Eigen::Index d2 = 2;
  Eigen::Index rank = 0;
  std::string spectrum;  // comma-separated numbers or a/b fractions
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--seed", opt.seed, "Master seed for all randomness");
  cmd->add_option("--tol", opt.tol_overrides,
                  "Tolerance override name=value (repeatable)");
  cmd->add_option("--out", opt.out_path, "Write the JSON report to this path");
}

void add_state(CLI::App* cmd, StateOptions& opt) {
  cmd->add_option("--state", opt.state_file, "Bipartite state JSON file");
  cmd->add_option("--d1", opt.d1, "First-space dimension (random state)");
  cmd->add_option("--d2", opt.d2, "Second-space dimension (random state)");
  cmd->add_option("--rank", opt.rank,
                  "Schmidt rank (random state; 0 = min(d1,d2))");
  cmd->add_option("--spectrum", opt.spectrum,
                  "Comma-separated eigenvalues, fractions like 2/3 allowed");
}

/// Splits "name=value" (or "name=value,name=value") tokens into a JSON
/// tolerance object; later entries win.
void merge_tolerance_tokens(json& target, const std::string& spec) {
  std::stringstream stream(spec);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("tolerance override must look like name=value: " +
                            item);
    }
    const std::string name = item.substr(0, eq);
    std::size_t used = 0;
    const std::string text = item.substr(eq + 1);
    const double value = std::stod(text, &used);
    if (used != text.size()) {
      throw ValidationError("tolerance override has a malformed value: " +
                            item);
    }
    Tolerances{}.set(name, value);  // validates name and positivity
    target[name] = value;
  }
}

/// Tolerance resolution order: ENVKIT_DEFAULT_TOL, then the scenario
/// document, then --tol flags.
json resolved_tolerances(const json& doc_tolerances,
                         const std::vector<std::string>& flag_overrides) {
  json merged = json::object();
  if (const char* env = std::getenv("ENVKIT_DEFAULT_TOL")) {
    merge_tolerance_tokens(merged, env);
  }
  if (doc_tolerances.is_object()) {
    for (const auto& [name, value] : doc_tolerances.items()) {
      merged[name] = value;
    }
  }
  for (const std::string& spec : flag_overrides) {
    merge_tolerance_tokens(merged, spec);
  }
  return merged;
}

Tolerances direct_tolerances(const std::vector<std::string>& flag_overrides) {
  const json merged = resolved_tolerances(json::object(), flag_overrides);
  Tolerances tol;
  for (const auto& [name, value] : merged.items()) {
    tol.set(name, value.get<double>());
  }
  return tol;
}

json state_member(const StateOptions& opt) {
  if (!opt.state_file.empty()) {
    return json{{"file", opt.state_file}};
  }
  json random{{"d1", opt.d1}, {"d2", opt.d2}, {"rank", opt.rank}};
  if (!opt.spectrum.empty()) {
    json entries = json::array();
    std::stringstream stream(opt.spectrum);
    std::string item;
    while (std::getline(stream, item, ',')) {
      if (!item.empty()) entries.push_back(item);
    }
    random["spectrum"] = std::move(entries);
  }
  return json{{"random", std::move(random)}};
}

void print_checks(const json& report) {
  for (const auto& check : report["checks"]) {
    const bool pass = check["pass"].get<bool>();
    std::cout << (pass ? "[PASS] " : "[FAIL] ")
              << check["name"].get<std::string>();
    if (check.contains("residual")) {
      std::cout << "  residual=" << check["residual"].get<double>()
                << "  tolerance=" << check["tolerance"].get<double>();
    }
    if (check.contains("error")) {
      std::cout << "  error: " << check["error"].get<std::string>();
    }
    std::cout << '\n';
  }
}

void maybe_write(const std::string& path, const json& payload) {
  if (!path.empty()) {
    envkit::io::save_json_file(path, payload);
    std::cout << "report written to " << path << '\n';
  }
}

/// Runs a scenario document through the library and reports the verdict.
int run_document(json doc, const CommonOptions& common, bool seed_given) {
  if (seed_given || !doc.contains("seed")) doc["seed"] = common.seed;
  doc["tolerances"] = resolved_tolerances(
      doc.contains("tolerances") ? doc["tolerances"] : json::object(),
      common.tol_overrides);
  const envkit::scenario::Scenario scenario =
      envkit::scenario::Scenario::from_json(doc);
  const envkit::scenario::RunResult result = envkit::scenario::run(scenario);
  print_checks(result.report);
  std::cout << (result.passed ? "PASSED" : "FAILED") << '\n';
  maybe_write(common.out_path, result.report);
  return result.passed ? kExitPass : kExitCertification;
}

int write_continuity_csv(const std::string& path, const json& report) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open csv path: " + path);
  out << "family,n,denominator_bound,residual,probability,exact\n";
  for (const auto& step : report["rational_family"]) {
    out << "rational," << step["n"].get<int>() << ','
        << step["denominator_bound"].get<std::int64_t>() << ','
        << step["residual"].get<double>() << ','
        << step["probability"].get<double>() << ','
        << (step["exact"].get<bool>() ? 1 : 0) << '\n';
  }
  for (const auto& step : report["truncation_family"]) {
    out << "truncation," << step["n"].get<int>() << ",,"
        << step["residual"].get<double>() << ','
        << step["probability"].get<double>() << ','
        << (step["exact"].get<bool>() ? 1 : 0) << '\n';
  }
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "envkit: certified Schmidt decompositions, twin unitaries, and "
      "probability-rule derivations for bipartite pure states"};
  app.require_subcommand(1);

  // --- schmidt -------------------------------------------------------------
  CommonOptions schmidt_common;
  StateOptions schmidt_state;
  int schmidt_trials = 20;
  CLI::App* cmd_schmidt = app.add_subcommand(
      "schmidt", "Canonical Schmidt decomposition with certification");
  add_common(cmd_schmidt, schmidt_common);
  add_state(cmd_schmidt, schmidt_state);
  cmd_schmidt->add_option("--trials", schmidt_trials,
                          "Uniqueness-certificate rotation count");

  // --- twin ------------------------------------------------------------
  CLI::App* cmd_twin =
      app.add_subcommand("twin", "Twin-unitary construction and checks");
  cmd_twin->require_subcommand(1);

  CommonOptions twin_verify_common;
  std::string twin_verify_state, twin_verify_u1, twin_verify_u2;
  bool twin_verify_phase = false;
  CLI::App* cmd_twin_verify =
      cmd_twin->add_subcommand("verify", "Check whether (U1, U2) are twins");
  add_common(cmd_twin_verify, twin_verify_common);
  cmd_twin_verify->add_option("--state", twin_verify_state, "State JSON file")
      ->required();
  cmd_twin_verify->add_option("--u1", twin_verify_u1, "First unitary (JSON)")
      ->required();
  cmd_twin_verify->add_option("--u2", twin_verify_u2, "Second unitary (JSON)")
      ->required();
  cmd_twin_verify->add_flag("--allow-phase", twin_verify_phase,
                            "Accept agreement up to a global phase");

  CommonOptions twin_of_common;
  StateOptions twin_of_state;
  std::string twin_of_u1;
  CLI::App* cmd_twin_of = cmd_twin->add_subcommand(
      "of", "Construct the twin of a density-commuting unitary");
  add_common(cmd_twin_of, twin_of_common);
  add_state(cmd_twin_of, twin_of_state);
  cmd_twin_of->add_option("--u1", twin_of_u1, "First unitary (JSON)")
      ->required();

  CommonOptions twin_sample_common;
  StateOptions twin_sample_state;
  std::int64_t twin_sample_count = 50;
  CLI::App* cmd_twin_sample = cmd_twin->add_subcommand(
      "sample", "Sample random twin pairs and certify them");
  add_common(cmd_twin_sample, twin_sample_common);
  add_state(cmd_twin_sample, twin_sample_state);
  cmd_twin_sample->add_option("--count", twin_sample_count,
                              "Number of sampled pairs");

  // --- group ----------------------------------------------------------
  CommonOptions group_common;
  StateOptions group_state;
  std::int64_t group_count = 100;
  CLI::App* cmd_group = app.add_subcommand(
      "group", "Monte-Carlo certification of the twin-pair group axioms");
  add_common(cmd_group, group_common);
  add_state(cmd_group, group_state);
  cmd_group->add_option("--count", group_count, "Number of sampled triples");

  // --- born ------------------------------------------------------------
  CLI::App* cmd_born =
      app.add_subcommand("born", "Probability-rule derivation stages");
  cmd_born->require_subcommand(1);

  CommonOptions born_pipe_common;
  StateOptions born_pipe_state;
  std::int64_t born_pipe_max_den = 64;
  CLI::App* cmd_born_pipe = cmd_born->add_subcommand(
      "pipeline", "Rational spectrum, fine-graining, and branch counting");
  add_common(cmd_born_pipe, born_pipe_common);
  add_state(cmd_born_pipe, born_pipe_state);
  cmd_born_pipe->add_option("--max-denominator", born_pipe_max_den,
                            "Largest allowed common denominator");

  CommonOptions born_closest_common;
  StateOptions born_closest_state;
  std::string born_closest_rho, born_closest_phi;
  std::uint64_t born_closest_samples = 10000;
  CLI::App* cmd_born_closest = cmd_born->add_subcommand(
      "closest", "Closest density with a prescribed eigenstate");
  add_common(cmd_born_closest, born_closest_common);
  add_state(cmd_born_closest, born_closest_state);
  cmd_born_closest->add_option("--rho", born_closest_rho,
                               "Density matrix JSON file");
  cmd_born_closest->add_option("--phi", born_closest_phi,
                               "Event vector JSON file");
  cmd_born_closest->add_option("--samples", born_closest_samples,
                               "Randomized oracle sample count");

  CommonOptions born_cont_common;
  StateOptions born_cont_state;
  std::string born_cont_rho, born_cont_csv;
  int born_cont_nmax = 12;
  Eigen::Index born_cont_tracked = 0;
  CLI::App* cmd_born_cont = cmd_born->add_subcommand(
      "continuity", "Approximating density families with monotone residuals");
  add_common(cmd_born_cont, born_cont_common);
  add_state(cmd_born_cont, born_cont_state);
  cmd_born_cont->add_option("--rho", born_cont_rho,
                            "Density matrix JSON file");
  cmd_born_cont->add_option("--n-max", born_cont_nmax, "Number of steps");
  cmd_born_cont->add_option("--tracked", born_cont_tracked,
                            "Eigenvalue cluster whose probability is tracked");
  cmd_born_cont->add_option("--csv", born_cont_csv,
                            "Write the convergence table to this CSV path");

  CommonOptions born_iso_common;
  std::string born_iso_psi, born_iso_phi;
  Eigen::Index born_iso_dim = 4;
  std::int64_t born_iso_nmax = 1000000;
  CLI::App* cmd_born_iso = cmd_born->add_subcommand(
      "isolated", "Pure-state limit of proper mixtures with purifications");
  add_common(cmd_born_iso, born_iso_common);
  cmd_born_iso->add_option("--dim", born_iso_dim, "Hilbert-space dimension");
  cmd_born_iso->add_option("--psi", born_iso_psi, "Target vector JSON file");
  cmd_born_iso->add_option("--phi", born_iso_phi, "Event vector JSON file");
  cmd_born_iso->add_option("--n-max", born_iso_nmax,
                           "Largest mixing parameter on the decade grid");

  // --- report ----------------------------------------------------------
  CommonOptions report_common;
  std::string report_scenario;
  CLI::App* cmd_report = app.add_subcommand(
      "report", "Run a scenario document and emit its JSON report");
  add_common(cmd_report, report_common);
  cmd_report->add_option("--scenario", report_scenario,
                         "Scenario JSON document")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitInput;
  }

  try {
    if (cmd_schmidt->parsed()) {
      json doc{{"kind", "schmidt"},
               {"state", state_member(schmidt_state)},
               {"trials", schmidt_trials}};
      return run_document(std::move(doc), schmidt_common,
                          cmd_schmidt->count("--seed") > 0);
    }

    if (cmd_twin_verify->parsed()) {
      const Tolerances tol = direct_tolerances(twin_verify_common.tol_overrides);
      const auto psi = envkit::io::decode_state(
          envkit::io::load_json_file(twin_verify_state), tol);
      const auto u1 = envkit::io::decode_matrix(
          envkit::io::load_json_file(twin_verify_u1));
      const auto u2 = envkit::io::decode_matrix(
          envkit::io::load_json_file(twin_verify_u2));
      const envkit::twins::TwinCheck check =
          envkit::twins::is_twin_pair(u1, u2, psi, twin_verify_phase, tol);
      std::cout << (check.ok ? "[PASS] " : "[FAIL] ") << "twin-verify"
                << "  residual=" << check.residual
                << "  tolerance=" << tol.tol_twin;
      if (twin_verify_phase) std::cout << "  phase=" << check.phase;
      std::cout << '\n';
      maybe_write(twin_verify_common.out_path,
                  json{{"ok", check.ok},
                       {"residual", check.residual},
                       {"phase", check.phase}});
      return check.ok ? kExitPass : kExitCertification;
    }

    if (cmd_twin_of->parsed()) {
      const Tolerances tol = direct_tolerances(twin_of_common.tol_overrides);
      const envkit::hilbert::BipartiteState psi =
          envkit::scenario::state_from_document(state_member(twin_of_state),
                                                twin_of_common.seed, tol);
      const auto u1 =
          envkit::io::decode_matrix(envkit::io::load_json_file(twin_of_u1));
      const auto picture = envkit::schmidt::subsystem_picture(psi, tol);
      const envkit::twins::TwinPair pair =
          envkit::twins::twin_of(u1, picture, tol);
      std::cout << "[PASS] twin-of  residual=" << pair.residual
                << "  tolerance=" << tol.tol_twin << '\n';
      maybe_write(twin_of_common.out_path, envkit::io::encode(pair));
      return kExitPass;
    }

    if (cmd_twin_sample->parsed()) {
      json doc{{"kind", "twins"},
               {"state", state_member(twin_sample_state)},
               {"count", twin_sample_count}};
      return run_document(std::move(doc), twin_sample_common,
                          cmd_twin_sample->count("--seed") > 0);
    }

    if (cmd_group->parsed()) {
      json doc{{"kind", "group"},
               {"state", state_member(group_state)},
               {"count", group_count}};
      return run_document(std::move(doc), group_common,
                          cmd_group->count("--seed") > 0);
    }

    if (cmd_born_pipe->parsed()) {
      json doc{{"kind", "born-pipeline"},
               {"state", state_member(born_pipe_state)},
               {"max_denominator", born_pipe_max_den}};
      return run_document(std::move(doc), born_pipe_common,
                          cmd_born_pipe->count("--seed") > 0);
    }

    if (cmd_born_closest->parsed()) {
      json doc{{"kind", "closest-state"},
               {"state", state_member(born_closest_state)},
               {"samples", born_closest_samples}};
      if (!born_closest_rho.empty()) {
        doc["rho"] = json{{"file", born_closest_rho}};
      }
      if (!born_closest_phi.empty()) {
        doc["phi"] = envkit::io::load_json_file(born_closest_phi);
      }
      return run_document(std::move(doc), born_closest_common,
                          cmd_born_closest->count("--seed") > 0);
    }

    if (cmd_born_cont->parsed()) {
      json doc{{"kind", "continuity"},
               {"state", state_member(born_cont_state)},
               {"n_max", born_cont_nmax},
               {"tracked_cluster", born_cont_tracked}};
      if (!born_cont_rho.empty()) doc["rho"] = json{{"file", born_cont_rho}};
      // Re-run via the scenario layer, then optionally dump the CSV table.
      doc["seed"] = cmd_born_cont->count("--seed") > 0
                        ? born_cont_common.seed
                        : std::uint64_t{0};
      doc["tolerances"] =
          resolved_tolerances(json::object(), born_cont_common.tol_overrides);
      const auto scenario = envkit::scenario::Scenario::from_json(doc);
      const auto result = envkit::scenario::run(scenario);
      print_checks(result.report);
      std::cout << (result.passed ? "PASSED" : "FAILED") << '\n';
      maybe_write(born_cont_common.out_path, result.report);
      if (!born_cont_csv.empty() && result.report.contains("rational_family")) {
        write_continuity_csv(born_cont_csv, result.report);
        std::cout << "csv written to " << born_cont_csv << '\n';
      }
      return result.passed ? kExitPass : kExitCertification;
    }

    if (cmd_born_iso->parsed()) {
      json doc{{"kind", "isolated"},
               {"dim", born_iso_dim},
               {"n_max", born_iso_nmax}};
      if (!born_iso_psi.empty()) {
        doc["psi"] = envkit::io::load_json_file(born_iso_psi);
      }
      if (!born_iso_phi.empty()) {
        doc["phi"] = envkit::io::load_json_file(born_iso_phi);
      }
      return run_document(std::move(doc), born_iso_common,
                          cmd_born_iso->count("--seed") > 0);
    }

    if (cmd_report->parsed()) {
      json doc = envkit::io::load_json_file(report_scenario);
      return run_document(std::move(doc), report_common,
                          cmd_report->count("--seed") > 0);
    }
  } catch (const ValidationError& err) {
    std::cerr << "input error: " << err.what() << '\n';
    return kExitInput;
  } catch (const CertificationError& err) {
    std::cerr << "certification failure: " << err.what() << '\n';
    return kExitCertification;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitInput;
  }

  std::cerr << "no subcommand executed\n";
  return kExitInput;
}
