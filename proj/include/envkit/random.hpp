// Copyright (c) 2026 envkit developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

#include "envkit/hilbert.hpp"

namespace envkit::rnd {

using hilbert::Matrix;
using hilbert::RealVector;
using hilbert::Vector;

/// SplitMix64 bit mixer; used to derive independent per-item seeds so batch
/// kernels give identical results for any execution order.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for item `index` of a batch driven by `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Standard complex Gaussian vector (entries re + i*im, each N(0, 1)).
Vector gaussian_vector(Eigen::Index n, std::mt19937_64& rng);

/// Standard complex Gaussian matrix.
Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols,
                       std::mt19937_64& rng);

/// Haar-distributed n x n unitary: QR of a complex Gaussian matrix with the
/// R-diagonal phases folded into Q.
Matrix haar_unitary(Eigen::Index n, std::mt19937_64& rng);

/// Haar-distributed isometry: first `cols` columns of a Haar unitary,
/// computed as the phase-fixed thin QR of an n x cols Gaussian matrix.
Matrix haar_isometry(Eigen::Index rows, Eigen::Index cols,
                     std::mt19937_64& rng);

/// Haar-random unit vector.
Vector haar_vector(Eigen::Index n, std::mt19937_64& rng);

/// Random spectrum: `count` positive weights summing to one, descending.
RealVector random_spectrum(Eigen::Index count, std::mt19937_64& rng);

/// Wishart-like random density operator of the given dimension and rank:
/// G G^dagger / tr(G G^dagger) with G an n x rank complex Gaussian matrix.
Matrix random_density_matrix(Eigen::Index n, Eigen::Index rank,
                             std::mt19937_64& rng);

}  // namespace envkit::rnd
