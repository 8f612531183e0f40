// Copyright (c) 2026 envkit developers
// SPDX-License-Identifier: Apache-2.0

#include "envkit/batch.hpp"

#include <algorithm>
#include <atomic>
#include <string>

#include "envkit/random.hpp"

namespace envkit::batch {

namespace {

// Runs fn(i) for i in [0, count), serially or OpenMP-parallel.  Items must
// be order-independent; exceptions are captured and rethrown once.
template <typename Fn>
void for_each_item(std::int64_t count, Execution exec, Fn&& fn) {
  if (count < 0) {
    throw ValidationError("batch kernel: negative item count");
  }
  std::atomic<bool> failed{false};
  std::string message;
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 8)
    for (std::int64_t i = 0; i < count; ++i) {
      if (failed.load(std::memory_order_relaxed)) continue;
      try {
        fn(i);
      } catch (const std::exception& err) {
#pragma omp critical(envkit_batch_error)
        {
          if (!failed.exchange(true)) message = err.what();
        }
      }
    }
  } else {
    for (std::int64_t i = 0; i < count && !failed; ++i) {
      try {
        fn(i);
      } catch (const std::exception& err) {
        failed = true;
        message = err.what();
      }
    }
  }
  if (failed) {
    throw CertificationError("batch kernel item failed: " + message);
  }
}

}  // namespace

std::vector<double> twin_sample_residuals(const SubsystemPicture& picture,
                                          std::int64_t count,
                                          std::uint64_t seed, Execution exec,
                                          const Tolerances& tol) {
  std::vector<double> residuals(static_cast<std::size_t>(count));
  for_each_item(count, exec, [&](std::int64_t i) {
    std::mt19937_64 rng(rnd::derive_seed(seed, static_cast<std::uint64_t>(i)));
    residuals[static_cast<std::size_t>(i)] =
        twins::sample_twin(picture, rng, tol).residual;
  });
  return residuals;
}

std::vector<double> uniqueness_deviations(const BipartiteState& psi,
                                          std::int64_t trials,
                                          std::uint64_t seed, Execution exec,
                                          const Tolerances& tol) {
  const schmidt::SchmidtDecomposition dec = schmidt::canonical_schmidt(psi, tol);
  const schmidt::CorrelationOperator reference =
      schmidt::correlation_operator(dec);
  std::vector<double> deviations(static_cast<std::size_t>(trials));
  for_each_item(trials, exec, [&](std::int64_t i) {
    std::mt19937_64 rng(rnd::derive_seed(seed, static_cast<std::uint64_t>(i)));
    deviations[static_cast<std::size_t>(i)] =
        schmidt::uniqueness_trial(dec, reference, psi, rng, tol);
  });
  return deviations;
}

std::vector<GroupTrialResiduals> group_axiom_trials(
    const SubsystemPicture& picture, std::int64_t count, std::uint64_t seed,
    Execution exec, const Tolerances& tol) {
  std::vector<GroupTrialResiduals> out(static_cast<std::size_t>(count));
  for_each_item(count, exec, [&](std::int64_t i) {
    std::mt19937_64 rng(rnd::derive_seed(seed, static_cast<std::uint64_t>(i)));
    const twins::TwinPair p = twins::sample_twin(picture, rng, tol);
    const twins::TwinPair q = twins::sample_twin(picture, rng, tol);
    const twins::TwinPair r = twins::sample_twin(picture, rng, tol);

    GroupTrialResiduals trial;
    trial.pair_residual =
        std::max({p.residual, q.residual, r.residual});

    const twins::TwinPair pq = twins::compose(p, q, picture, tol);
    const twins::TwinPair qr = twins::compose(q, r, picture, tol);
    const twins::TwinPair left = twins::compose(pq, r, picture, tol);
    const twins::TwinPair right = twins::compose(p, qr, picture, tol);
    trial.closure = std::max({pq.residual, qr.residual, left.residual,
                              right.residual});
    trial.associativity = std::max((left.u1 - right.u1).norm(),
                                   (left.u2 - right.u2).norm());

    const twins::TwinPair p_inv = twins::inverse(p, picture, tol);
    const twins::TwinPair unit = twins::compose(p, p_inv, picture, tol);
    const hilbert::Matrix id1 =
        hilbert::Matrix::Identity(picture.d1, picture.d1);
    const hilbert::Matrix id2 =
        hilbert::Matrix::Identity(picture.d2, picture.d2);
    trial.inverse_identity =
        std::max((unit.u1 - id1).norm(), (unit.u2 - id2).norm());
    out[static_cast<std::size_t>(i)] = trial;
  });
  return out;
}

NecessityOutcome twin_necessity(const SubsystemPicture& picture,
                                std::int64_t instances, std::int64_t candidates,
                                std::uint64_t seed, Execution exec,
                                const Tolerances& tol,
                                double commutator_floor) {
  const hilbert::Matrix rho1 = picture.rho1();
  const BipartiteState psi = picture.state(tol);
  std::vector<std::int64_t> accepts(static_cast<std::size_t>(instances), 0);
  std::vector<double> minima(static_cast<std::size_t>(instances), 1e300);
  for_each_item(instances, exec, [&](std::int64_t i) {
    std::mt19937_64 rng(rnd::derive_seed(seed, static_cast<std::uint64_t>(i)));
    // Draw a first member that visibly fails the commutation condition.
    hilbert::Matrix u1;
    double commutator = 0.0;
    do {
      u1 = rnd::haar_unitary(picture.d1, rng);
      commutator = (u1 * rho1 - rho1 * u1).norm();
    } while (commutator < commutator_floor);
    for (std::int64_t c = 0; c < candidates; ++c) {
      const hilbert::Matrix u2 = rnd::haar_unitary(picture.d2, rng);
      const twins::TwinCheck check =
          twins::is_twin_pair(u1, u2, psi, false, tol);
      if (check.ok) accepts[static_cast<std::size_t>(i)] += 1;
      minima[static_cast<std::size_t>(i)] =
          std::min(minima[static_cast<std::size_t>(i)], check.residual);
    }
  });
  NecessityOutcome out;
  out.min_residual = 1e300;
  for (std::size_t i = 0; i < accepts.size(); ++i) {
    out.false_accepts += accepts[i];
    out.min_residual = std::min(out.min_residual, minima[i]);
  }
  if (instances == 0 || candidates == 0) out.min_residual = 0.0;
  return out;
}

}  // namespace envkit::batch
