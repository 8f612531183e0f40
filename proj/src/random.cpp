// Copyright (c) 2026 envkit developers
// SPDX-License-Identifier: Apache-2.0

#include "envkit/random.hpp"

#include <Eigen/QR>
#include <algorithm>

namespace envkit::rnd {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

Vector gaussian_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    v(i) = hilbert::Complex(re, im);
  }
  return v;
}

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols,
                       std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      m(i, j) = hilbert::Complex(re, im);
    }
  }
  return m;
}

namespace {

// Phase-fixed thin QR: makes the QR factorization unique (R diagonal real
// positive) so the resulting Q is Haar distributed.
Matrix phase_fixed_q(const Matrix& g) {
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(g.rows(), g.cols());
  const Matrix r = qr.matrixQR().topRows(g.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    const hilbert::Complex d = r(j, j);
    const double mag = std::abs(d);
    if (mag > 0.0) q.col(j) *= d / mag;
  }
  return q;
}

}  // namespace

Matrix haar_unitary(Eigen::Index n, std::mt19937_64& rng) {
  return phase_fixed_q(gaussian_matrix(n, n, rng));
}

Matrix haar_isometry(Eigen::Index rows, Eigen::Index cols,
                     std::mt19937_64& rng) {
  if (cols > rows) {
    throw hilbert::ValidationError("haar isometry: cols must be <= rows");
  }
  return phase_fixed_q(gaussian_matrix(rows, cols, rng));
}

Vector haar_vector(Eigen::Index n, std::mt19937_64& rng) {
  Vector v = gaussian_vector(n, rng);
  v /= v.norm();
  return v;
}

RealVector random_spectrum(Eigen::Index count, std::mt19937_64& rng) {
  // Exponential spacings give a uniform (flat Dirichlet) simplex sample.
  std::exponential_distribution<double> expo(1.0);
  RealVector w(count);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < count; ++i) {
    w(i) = expo(rng);
    sum += w(i);
  }
  w /= sum;
  std::sort(w.data(), w.data() + count, std::greater<double>());
  return w;
}

Matrix random_density_matrix(Eigen::Index n, Eigen::Index rank,
                             std::mt19937_64& rng) {
  const Matrix g = gaussian_matrix(n, rank, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return ((rho + rho.adjoint()) / 2.0).eval();
}

}  // namespace envkit::rnd
