// Copyright (c) 2026 envkit developers
// SPDX-License-Identifier: Apache-2.0

#include "envkit/tolerances.hpp"

#include <array>
#include <cstdlib>
#include <sstream>

namespace envkit {

namespace {

struct Entry {
  const char* name;
  double Tolerances::*field;
};

constexpr std::array<Entry, 10> kEntries = {{
    {"tol_norm", &Tolerances::tol_norm},
    {"tol_op", &Tolerances::tol_op},
    {"tol_psd", &Tolerances::tol_psd},
    {"tol_recon", &Tolerances::tol_recon},
    {"eps_cluster", &Tolerances::eps_cluster},
    {"eps_rank", &Tolerances::eps_rank},
    {"tol_unique", &Tolerances::tol_unique},
    {"tol_twin", &Tolerances::tol_twin},
    {"tol_commute", &Tolerances::tol_commute},
    {"tol_oracle", &Tolerances::tol_oracle},
}};

}  // namespace

double Tolerances::get(const std::string& name) const {
  for (const auto& e : kEntries) {
    if (name == e.name) return this->*(e.field);
  }
  throw std::invalid_argument("unknown tolerance name: " + name);
}

void Tolerances::set(const std::string& name, double value) {
  if (!(value > 0.0)) {
    throw std::invalid_argument("tolerance " + name + " must be positive");
  }
  for (const auto& e : kEntries) {
    if (name == e.name) {
      this->*(e.field) = value;
      return;
    }
  }
  throw std::invalid_argument("unknown tolerance name: " + name);
}

void Tolerances::apply_overrides(const std::string& spec) {
  std::istringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("tolerance override must be name=value: " +
                                  item);
    }
    const std::string name = item.substr(0, eq);
    const std::string value_text = item.substr(eq + 1);
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(value_text, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad tolerance value: " + item);
    }
    if (used != value_text.size()) {
      throw std::invalid_argument("bad tolerance value: " + item);
    }
    set(name, value);
  }
}

std::map<std::string, double> Tolerances::as_map() const {
  std::map<std::string, double> out;
  for (const auto& e : kEntries) out[e.name] = this->*(e.field);
  return out;
}

}  // namespace envkit
