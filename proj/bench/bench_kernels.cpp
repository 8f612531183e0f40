// Copyright (c) 2026 envkit developers
// SPDX-License-Identifier: Apache-2.0
//
// Serial vs OpenMP-parallel comparison of the batch kernels.  Both execution
// policies produce bitwise-identical output (each item draws from its own
// seed-derived stream), so the benchmark measures pure scheduling overhead
// and speedup.

#include <benchmark/benchmark.h>

#include "envkit/batch.hpp"
#include "envkit/born.hpp"
#include "envkit/random.hpp"
#include "envkit/scenario.hpp"

using namespace envkit;
using hilbert::BipartiteState;
using hilbert::DensityOperator;
using hilbert::Vector;
using schmidt::SubsystemPicture;

namespace {

const SubsystemPicture& shared_picture() {
  static const SubsystemPicture pic = [] {
    scenario::StateSpec spec;
    spec.d1 = 4;
    spec.d2 = 5;
    spec.spectrum = {0.4, 0.3, 0.2, 0.1};
    return schmidt::subsystem_picture(scenario::random_state(spec, 2024));
  }();
  return pic;
}

const BipartiteState& shared_state() {
  static const BipartiteState psi = [] {
    scenario::StateSpec spec;
    spec.d1 = 4;
    spec.d2 = 5;
    spec.spectrum = {0.4, 0.4, 0.1, 0.1};
    return scenario::random_state(spec, 2025);
  }();
  return psi;
}

void bm_twin_samples(benchmark::State& state, Execution exec) {
  const SubsystemPicture& pic = shared_picture();
  const std::int64_t count = state.range(0);
  for (auto _ : state) {
    auto residuals = batch::twin_sample_residuals(pic, count, 1, exec);
    benchmark::DoNotOptimize(residuals);
  }
  state.SetItemsProcessed(state.iterations() * count);
}

void bm_uniqueness(benchmark::State& state, Execution exec) {
  const BipartiteState& psi = shared_state();
  const std::int64_t trials = state.range(0);
  for (auto _ : state) {
    auto deviations = batch::uniqueness_deviations(psi, trials, 2, exec);
    benchmark::DoNotOptimize(deviations);
  }
  state.SetItemsProcessed(state.iterations() * trials);
}

void bm_group_axioms(benchmark::State& state, Execution exec) {
  const SubsystemPicture& pic = shared_picture();
  const std::int64_t count = state.range(0);
  for (auto _ : state) {
    auto trials = batch::group_axiom_trials(pic, count, 3, exec);
    benchmark::DoNotOptimize(trials);
  }
  state.SetItemsProcessed(state.iterations() * count);
}

void bm_necessity(benchmark::State& state, Execution exec) {
  const SubsystemPicture& pic = shared_picture();
  const std::int64_t instances = state.range(0);
  for (auto _ : state) {
    auto outcome = batch::twin_necessity(pic, instances, 8, 4, exec);
    benchmark::DoNotOptimize(outcome);
  }
  state.SetItemsProcessed(state.iterations() * instances * 8);
}

void bm_closest_oracle(benchmark::State& state, Execution exec) {
  static const DensityOperator rho = [] {
    std::mt19937_64 rng(2026);
    return DensityOperator(rnd::random_density_matrix(4, 4, rng));
  }();
  static const Vector phi = [] {
    std::mt19937_64 rng(2027);
    return rnd::haar_vector(4, rng);
  }();
  const std::uint64_t samples = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    auto result = born::closest_oracle(rho, phi, samples, 5, exec);
    benchmark::DoNotOptimize(result);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(samples));
}

}  // namespace

BENCHMARK_CAPTURE(bm_twin_samples, serial, Execution::Serial)->Arg(64);
BENCHMARK_CAPTURE(bm_twin_samples, parallel, Execution::Parallel)->Arg(64);
BENCHMARK_CAPTURE(bm_uniqueness, serial, Execution::Serial)->Arg(32);
BENCHMARK_CAPTURE(bm_uniqueness, parallel, Execution::Parallel)->Arg(32);
BENCHMARK_CAPTURE(bm_group_axioms, serial, Execution::Serial)->Arg(32);
BENCHMARK_CAPTURE(bm_group_axioms, parallel, Execution::Parallel)->Arg(32);
BENCHMARK_CAPTURE(bm_necessity, serial, Execution::Serial)->Arg(16);
BENCHMARK_CAPTURE(bm_necessity, parallel, Execution::Parallel)->Arg(16);
BENCHMARK_CAPTURE(bm_closest_oracle, serial, Execution::Serial)->Arg(4096);
BENCHMARK_CAPTURE(bm_closest_oracle, parallel, Execution::Parallel)->Arg(4096);

BENCHMARK_MAIN();
