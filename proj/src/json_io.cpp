// Copyright (c) 2026 envkit developers
// SPDX-License-Identifier: Apache-2.0

#include "envkit/json_io.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <sstream>

namespace envkit::io {

json encode(const hilbert::Complex& z) {
  return json::array({z.real(), z.imag()});
}

json encode(const hilbert::Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(encode(v(i)));
  return out;
}

json encode(const hilbert::Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(encode(m(i, j)));
    out.push_back(std::move(row));
  }
  return out;
}

json encode(const hilbert::RealVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

hilbert::Complex decode_complex(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() ||
      !j[1].is_number()) {
    throw ValidationError("complex values must be [re, im] number pairs");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

hilbert::Vector decode_vector(const json& j) {
  if (!j.is_array() || j.empty()) {
    throw ValidationError("vectors must be non-empty arrays of [re, im]");
  }
  hilbert::Vector out(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = decode_complex(j[i]);
  }
  return out;
}

hilbert::Matrix decode_matrix(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty()) {
    throw ValidationError("matrices must be non-empty arrays of rows");
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  hilbert::Matrix out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!j[r].is_array() ||
        static_cast<Eigen::Index>(j[r].size()) != cols) {
      throw ValidationError("matrix rows must all have the same length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      out(r, c) = decode_complex(j[r][c]);
    }
  }
  return out;
}

json encode(const hilbert::BipartiteState& psi) {
  return json{{"d1", psi.d1()},
              {"d2", psi.d2()},
              {"amplitudes", encode(psi.amplitudes())}};
}

hilbert::BipartiteState decode_state(const json& j, const Tolerances& tol) {
  if (!j.is_object() || !j.contains("d1") || !j.contains("d2") ||
      !j.contains("amplitudes")) {
    throw ValidationError(
        "states must be objects with d1, d2 and amplitudes members");
  }
  if (!j["d1"].is_number_integer() || !j["d2"].is_number_integer()) {
    throw ValidationError("state dimensions must be integers");
  }
  return hilbert::BipartiteState(decode_vector(j["amplitudes"]),
                                 j["d1"].get<Eigen::Index>(),
                                 j["d2"].get<Eigen::Index>(), tol);
}

json encode(const schmidt::SchmidtDecomposition& dec) {
  return json{{"coefficients", encode(dec.coefficients)},
              {"basis1", encode(dec.basis1)},
              {"basis2", encode(dec.basis2)}};
}

json encode(const schmidt::CorrelationOperator& op) {
  return json{{"V", encode(op.v)}, {"Q1", encode(op.q1)}, {"Q2", encode(op.q2)}};
}

json encode(const twins::TwinPair& pair) {
  return json{{"U1", encode(pair.u1)},
              {"U2", encode(pair.u2)},
              {"residual", pair.residual}};
}

twins::TwinPair decode_twin_pair(const json& j) {
  if (!j.is_object() || !j.contains("U1") || !j.contains("U2")) {
    throw ValidationError("twin pairs must be objects with U1 and U2 members");
  }
  twins::TwinPair pair;
  pair.u1 = decode_matrix(j["U1"]);
  pair.u2 = decode_matrix(j["U2"]);
  pair.residual = j.value("residual", 0.0);
  return pair;
}

json encode(const born::ProbabilityReport& report) {
  json out{{"event", report.event},
           {"value", report.value},
           {"route", born::route_name(report.route)},
           {"residuals", json(report.residuals)}};
  if (report.has_rational) {
    std::ostringstream text;
    text << report.numerator << "/" << report.denominator;
    out["exact_rational"] = text.str();
    out["rational"] = json::array({report.numerator, report.denominator});
  } else {
    out["exact_rational"] = nullptr;
    out["rational"] = nullptr;
  }
  out["unknown_dependence"] = report.unknown_dependence.has_value()
                                  ? json(*report.unknown_dependence)
                                  : json(nullptr);
  return out;
}

json encode(const born::RationalSpectrum& spectrum) {
  json numerators = json::array();
  for (const auto m : spectrum.numerators) numerators.push_back(m);
  json mults = json::array();
  for (const auto d : spectrum.multiplicities) mults.push_back(d);
  json targets = json::array();
  for (const auto r : spectrum.targets) targets.push_back(r);
  return json{{"numerators", numerators},
              {"denominator", spectrum.denominator},
              {"multiplicities", mults},
              {"targets", targets},
              {"exact", spectrum.exact},
              {"approximation_error", spectrum.approximation_error}};
}

std::string sha256_hex(const std::string& payload) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(payload.data(), payload.size(), digest, &length,
                 EVP_sha256(), nullptr) != 1) {
    throw CertificationError("sha256: digest computation failed");
  }
  std::ostringstream out;
  out << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < length; ++i) {
    out << std::setw(2) << static_cast<int>(digest[i]);
  }
  return out.str();
}

std::string state_hash(const hilbert::BipartiteState& psi) {
  // nlohmann objects serialize with sorted keys and shortest round-trip
  // floats, so dump() is a canonical form.
  return sha256_hex(encode(psi).dump());
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open file: " + path);
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& err) {
    throw ValidationError("cannot parse " + path + ": " + err.what());
  }
}

void save_json_file(const std::string& path, const json& payload) {
  std::ofstream out(path);
  if (!out) {
    throw ValidationError("cannot open file for writing: " + path);
  }
  out << payload.dump(2) << "\n";
  if (!out) {
    throw ValidationError("failed while writing: " + path);
  }
}

}  // namespace envkit::io
