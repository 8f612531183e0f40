// Copyright (c) 2026 envkit developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

// Single-header nlohmann/json, vendored as vendor/json.hpp.
#include <json.hpp>

#include "envkit/born.hpp"

namespace envkit::io {

using nlohmann::json;

/// Wire encodings.  Complex numbers are [re, im] pairs; vectors are arrays
/// of pairs; matrices are arrays of rows.
json encode(const hilbert::Complex& z);
json encode(const hilbert::Vector& v);
json encode(const hilbert::Matrix& m);
json encode(const hilbert::RealVector& v);

hilbert::Complex decode_complex(const json& j);
hilbert::Vector decode_vector(const json& j);
hilbert::Matrix decode_matrix(const json& j);

/// {"d1": ..., "d2": ..., "amplitudes": [...]}.
json encode(const hilbert::BipartiteState& psi);
hilbert::BipartiteState decode_state(const json& j, const Tolerances& tol = {});

/// {"coefficients": [...], "basis1": [[...]], "basis2": [[...]]}.
json encode(const schmidt::SchmidtDecomposition& dec);

/// {"V": [[...]], "Q1": [[...]], "Q2": [[...]]}.
json encode(const schmidt::CorrelationOperator& op);

/// {"U1": [[...]], "U2": [[...]], "residual": ...}.
json encode(const twins::TwinPair& pair);
twins::TwinPair decode_twin_pair(const json& j);

/// {"event": ..., "value": ..., "route": ..., "residuals": {...},
///  "exact_rational": "m/M" | null, "rational": [m, M] | null,
///  "unknown_dependence": null}.
json encode(const born::ProbabilityReport& report);

json encode(const born::RationalSpectrum& spectrum);

/// SHA-256 hex digest of a string.
std::string sha256_hex(const std::string& payload);

/// SHA-256 of the canonical JSON serialization of a state; binds
/// certificates to the state they were computed on.
std::string state_hash(const hilbert::BipartiteState& psi);

/// Reads and parses a JSON file; throws ValidationError on failure.
json load_json_file(const std::string& path);

/// Writes pretty-printed JSON to a file; throws ValidationError on failure.
void save_json_file(const std::string& path, const json& payload);

}  // namespace envkit::io
