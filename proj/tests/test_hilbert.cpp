// Copyright (c) 2026 envkit developers
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "envkit/hilbert.hpp"
#include "envkit/random.hpp"

using namespace envkit;
using hilbert::BipartiteState;
using hilbert::Complex;
using hilbert::DensityOperator;
using hilbert::Matrix;
using hilbert::RealVector;
using hilbert::Vector;

namespace {

Vector basis_vector(Eigen::Index n, Eigen::Index k) {
  Vector v = Vector::Zero(n);
  v(k) = 1.0;
  return v;
}

BipartiteState bell_state() {
  Vector amps(4);
  amps << 1.0, 0.0, 0.0, 1.0;
  amps /= std::sqrt(2.0);
  return BipartiteState(amps, 2, 2);
}

// sqrt(2/3)|00> + sqrt(1/3)|11>
BipartiteState lopsided_state() {
  Vector amps = Vector::Zero(4);
  amps(0) = std::sqrt(2.0 / 3.0);
  amps(3) = std::sqrt(1.0 / 3.0);
  return BipartiteState(amps, 2, 2);
}

BipartiteState random_bipartite(Eigen::Index d1, Eigen::Index d2,
                                std::mt19937_64& rng) {
  Vector amps = rnd::haar_vector(d1 * d2, rng);
  return BipartiteState(amps, d1, d2);
}

// Independent oracle: the explicit double sum over product-basis indices.
Vector brute_partial_scalar_product(const Vector& m, const BipartiteState& psi) {
  Vector out = Vector::Zero(psi.d2());
  for (Eigen::Index k = 0; k < psi.d1(); ++k) {
    for (Eigen::Index l = 0; l < psi.d2(); ++l) {
      out(l) += std::conj(m(k)) * psi.amplitudes()(psi.flat(k, l));
    }
  }
  return out;
}

// Independent oracle for the reduced densities: entrywise double loop.
Matrix brute_reduced_density(const BipartiteState& psi, int side) {
  const Eigen::Index d = side == 1 ? psi.d1() : psi.d2();
  Matrix rho = Matrix::Zero(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) {
      Complex sum = 0.0;
      const Eigen::Index other = side == 1 ? psi.d2() : psi.d1();
      for (Eigen::Index t = 0; t < other; ++t) {
        const Eigen::Index ia = side == 1 ? psi.flat(a, t) : psi.flat(t, a);
        const Eigen::Index ib = side == 1 ? psi.flat(b, t) : psi.flat(t, b);
        sum += psi.amplitudes()(ia) * std::conj(psi.amplitudes()(ib));
      }
      rho(a, b) = sum;
    }
  }
  return rho;
}

}  // namespace

TEST_CASE("tensor products follow the row-major layout") {
  const BipartiteState zero_one =
      hilbert::tensor(basis_vector(2, 0), basis_vector(2, 1));
  CHECK(zero_one.amplitudes()(1) == Complex(1.0, 0.0));
  CHECK(zero_one.amplitudes()(0) == Complex(0.0, 0.0));
  CHECK(zero_one.amplitudes()(2) == Complex(0.0, 0.0));
  CHECK(zero_one.amplitudes()(3) == Complex(0.0, 0.0));

  Vector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const BipartiteState plus_zero = hilbert::tensor(plus, basis_vector(2, 0));
  CHECK(std::abs(plus_zero.amplitudes()(0) - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(plus_zero.amplitudes()(1)) < 1e-15);
  CHECK(std::abs(plus_zero.amplitudes()(2) - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(plus_zero.amplitudes()(3)) < 1e-15);

  std::mt19937_64 rng(7);
  const Vector a = rnd::haar_vector(3, rng);
  const Vector b = rnd::haar_vector(4, rng);
  const BipartiteState ab = hilbert::tensor(a, b);
  CHECK(std::abs(ab.amplitudes().norm() - a.norm() * b.norm()) < 1e-12);
  for (Eigen::Index k = 0; k < 3; ++k) {
    for (Eigen::Index l = 0; l < 4; ++l) {
      CHECK(std::abs(ab.amplitudes()(ab.flat(k, l)) - a(k) * b(l)) < 1e-15);
    }
  }
}

TEST_CASE("bipartite state validation and layout accessors") {
  Vector amps(4);
  amps << 1.0, 0.0, 0.0, 0.0;
  CHECK_THROWS_AS(BipartiteState(amps, 3, 2), ValidationError);

  Vector off(4);
  off << 1.0, 1.0, 0.0, 0.0;  // norm sqrt(2)
  CHECK_THROWS_AS(BipartiteState(off, 2, 2), ValidationError);

  const BipartiteState psi = lopsided_state();
  CHECK(psi.flat(1, 1) == 3);
  const Matrix a = psi.amplitude_matrix();
  CHECK(std::abs(a(0, 0) - std::sqrt(2.0 / 3.0)) < 1e-15);
  CHECK(std::abs(a(1, 1) - std::sqrt(1.0 / 3.0)) < 1e-15);
  CHECK(std::abs(a(0, 1)) < 1e-15);
  CHECK(std::abs(a(1, 0)) < 1e-15);
}

TEST_CASE("partial scalar products match the brute-force double sum") {
  const BipartiteState bell = bell_state();
  const Vector left = hilbert::partial_scalar_product(basis_vector(2, 0), bell);
  CHECK(std::abs(left(0) - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(left(1)) < 1e-15);

  std::mt19937_64 rng(11);
  const Vector a = rnd::haar_vector(3, rng);
  const Vector b = rnd::haar_vector(5, rng);
  const BipartiteState product = hilbert::tensor(a, b);
  const Vector recovered = hilbert::partial_scalar_product(a, product);
  CHECK((recovered - b).norm() < 1e-12);

  for (int trial = 0; trial < 10; ++trial) {
    const BipartiteState psi = random_bipartite(3, 4, rng);
    const Vector m = rnd::gaussian_vector(3, rng);
    const Vector fast = hilbert::partial_scalar_product(m, psi);
    const Vector slow = brute_partial_scalar_product(m, psi);
    CHECK((fast - slow).norm() < 1e-12);

    const Vector m2 = rnd::gaussian_vector(4, rng);
    Vector slow2 = Vector::Zero(3);
    for (Eigen::Index k = 0; k < 3; ++k) {
      for (Eigen::Index l = 0; l < 4; ++l) {
        slow2(k) += std::conj(m2(l)) * psi.amplitudes()(psi.flat(k, l));
      }
    }
    const Vector fast2 = hilbert::partial_scalar_product_second(m2, psi);
    CHECK((fast2 - slow2).norm() < 1e-12);
  }
}

TEST_CASE("expansion over any orthonormal basis reconstructs the state") {
  std::mt19937_64 rng(13);
  const BipartiteState psi = random_bipartite(4, 3, rng);
  const Matrix u = rnd::haar_unitary(4, rng);
  Vector rebuilt = Vector::Zero(12);
  for (Eigen::Index m = 0; m < 4; ++m) {
    const Vector coeff = hilbert::partial_scalar_product(u.col(m), psi);
    for (Eigen::Index k = 0; k < 4; ++k) {
      for (Eigen::Index l = 0; l < 3; ++l) {
        rebuilt(psi.flat(k, l)) += u(k, m) * coeff(l);
      }
    }
  }
  CHECK((rebuilt - psi.amplitudes()).norm() < 1e-10);
}

TEST_CASE("reduced densities agree with the entrywise partial-trace oracle") {
  const BipartiteState bell = bell_state();
  const Matrix half = 0.5 * Matrix::Identity(2, 2);
  CHECK((hilbert::reduced_density(bell, 1).matrix() - half).norm() < 1e-12);
  CHECK((hilbert::reduced_density(bell, 2).matrix() - half).norm() < 1e-12);

  std::mt19937_64 rng(17);
  const Vector a = rnd::haar_vector(3, rng);
  const Vector b = rnd::haar_vector(4, rng);
  const BipartiteState product = hilbert::tensor(a, b);
  CHECK((hilbert::reduced_density(product, 1).matrix() - a * a.adjoint())
            .norm() < 1e-12);

  const BipartiteState lop = lopsided_state();
  const Matrix rho1 = hilbert::reduced_density(lop, 1).matrix();
  CHECK(std::abs(rho1(0, 0).real() - 2.0 / 3.0) < 1e-14);
  CHECK(std::abs(rho1(1, 1).real() - 1.0 / 3.0) < 1e-14);
  CHECK(std::abs(rho1(0, 1)) < 1e-14);

  for (int trial = 0; trial < 6; ++trial) {
    const BipartiteState psi = random_bipartite(3, 5, rng);
    for (int side = 1; side <= 2; ++side) {
      const Matrix fast = hilbert::reduced_density(psi, side).matrix();
      const Matrix slow = brute_reduced_density(psi, side);
      CHECK((fast - slow).norm() < 1e-12);

      const Matrix full =
          psi.amplitudes() * psi.amplitudes().adjoint();
      const Matrix traced = hilbert::partial_trace(full, 3, 5, side);
      CHECK((traced - slow).norm() < 1e-12);
    }
  }
}

TEST_CASE("both reduced densities share their nonzero spectrum") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 8; ++trial) {
    const BipartiteState psi = random_bipartite(3, 6, rng);
    RealVector e1 = hilbert::reduced_density(psi, 1).eigenvalues();
    RealVector e2 = hilbert::reduced_density(psi, 2).eigenvalues();
    for (Eigen::Index i = 0; i < e1.size(); ++i) {
      CHECK(std::abs(e1(i) - e2(i)) < 1e-9);  // descending on both sides
    }
    for (Eigen::Index i = e1.size(); i < e2.size(); ++i) {
      CHECK(std::abs(e2(i)) < 1e-9);
    }
  }
}

TEST_CASE("partial trace is trace preserving and linear") {
  std::mt19937_64 rng(23);
  const Matrix op = rnd::gaussian_matrix(12, 12, rng);
  for (int side = 1; side <= 2; ++side) {
    const Matrix t = hilbert::partial_trace(op, 3, 4, side);
    CHECK(std::abs(t.trace() - op.trace()) < 1e-12);
  }
  const Matrix op2 = rnd::gaussian_matrix(12, 12, rng);
  const Matrix lhs = hilbert::partial_trace(op + 2.0 * op2, 3, 4, 1);
  const Matrix rhs = hilbert::partial_trace(op, 3, 4, 1) +
                     2.0 * hilbert::partial_trace(op2, 3, 4, 1);
  CHECK((lhs - rhs).norm() < 1e-12);
}

TEST_CASE("hilbert-schmidt metric identities") {
  Matrix p = Matrix::Zero(2, 2);
  p(0, 0) = 1.0;
  Matrix q = Matrix::Zero(2, 2);
  q(1, 1) = 1.0;
  CHECK(std::abs(hilbert::hs_distance(p, q) - std::sqrt(2.0)) < 1e-15);

  std::mt19937_64 rng(29);
  const Matrix a = rnd::gaussian_matrix(4, 4, rng);
  const Complex self = hilbert::hs_inner(a, a);
  CHECK(self.real() >= 0.0);
  CHECK(std::abs(self.imag()) < 1e-12);
  CHECK(std::abs(std::sqrt(self.real()) - a.norm()) < 1e-12);

  const Matrix b = rnd::gaussian_matrix(4, 4, rng);
  const Matrix c = rnd::gaussian_matrix(4, 4, rng);
  CHECK(hilbert::hs_distance(a, c) <=
        hilbert::hs_distance(a, b) + hilbert::hs_distance(b, c) + 1e-12);
  CHECK(hilbert::hs_distance(a, a) == 0.0);
}

TEST_CASE("hs convergence dominates strong convergence on vectors") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix rho = rnd::random_density_matrix(6, 6, rng);
    const Matrix sigma = rnd::random_density_matrix(6, 6, rng);
    const Vector psi = rnd::haar_vector(6, rng);
    CHECK(((rho - sigma) * psi).norm() <=
          hilbert::hs_distance(rho, sigma) * psi.norm() + 1e-12);
  }
}

TEST_CASE("spectral clustering groups equal eigenvalues and splits the null space") {
  const DensityOperator half(0.5 * Matrix::Identity(2, 2));
  const hilbert::SpectralDecomposition full = hilbert::spectral(half);
  REQUIRE(full.clusters.size() == 1);
  CHECK(full.clusters[0].multiplicity == 2);
  CHECK(std::abs(full.clusters[0].value - 0.5) < 1e-14);
  CHECK((full.clusters[0].projector - Matrix::Identity(2, 2)).norm() < 1e-12);
  CHECK(full.rank == 2);

  Matrix two_thirds = Matrix::Zero(2, 2);
  two_thirds(0, 0) = 2.0 / 3.0;
  two_thirds(1, 1) = 1.0 / 3.0;
  const hilbert::SpectralDecomposition split =
      hilbert::spectral(DensityOperator(two_thirds));
  REQUIRE(split.clusters.size() == 2);
  CHECK(split.clusters[0].multiplicity == 1);
  CHECK(split.clusters[1].multiplicity == 1);
  CHECK(std::abs(split.clusters[0].value - 2.0 / 3.0) < 1e-14);

  // Constructed dim-5 rank-3 spectrum (0.5, 0.25, 0.25): clusters (1, 2),
  // null projector of rank 2.
  std::mt19937_64 rng(37);
  const Matrix u = rnd::haar_unitary(5, rng);
  RealVector w = RealVector::Zero(5);
  w(0) = 0.5;
  w(1) = 0.25;
  w(2) = 0.25;
  const Matrix rho =
      u * w.asDiagonal() * u.adjoint();
  const hilbert::SpectralDecomposition spec =
      hilbert::spectral(DensityOperator(rho));
  REQUIRE(spec.clusters.size() == 2);
  CHECK(spec.clusters[0].multiplicity == 1);
  CHECK(spec.clusters[1].multiplicity == 2);
  CHECK(spec.rank == 3);
  CHECK(std::abs(spec.null_projector.trace().real() - 2.0) < 1e-9);
  Matrix rebuilt = Matrix::Zero(5, 5);
  for (const auto& cluster : spec.clusters) {
    rebuilt += cluster.value * cluster.projector;
  }
  CHECK((rebuilt - rho).norm() < 1e-9);
  CHECK((spec.support_projector + spec.null_projector -
         Matrix::Identity(5, 5)).norm() < 1e-10);
}

TEST_CASE("spectral reconstruction holds for random densities up to dim 16") {
  std::mt19937_64 rng(41);
  for (Eigen::Index dim : {2, 5, 9, 16}) {
    const DensityOperator rho(rnd::random_density_matrix(dim, dim, rng));
    Matrix rebuilt = Matrix::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      rebuilt += rho.eigenvalues()(i) * rho.eigenvectors().col(i) *
                 rho.eigenvectors().col(i).adjoint();
    }
    CHECK((rebuilt - rho.matrix()).norm() < 1e-9);
    for (Eigen::Index i = 1; i < dim; ++i) {
      CHECK(rho.eigenvalues()(i) <= rho.eigenvalues()(i - 1) + 1e-15);
    }
  }
}

TEST_CASE("density operator validation rejects malformed input") {
  Matrix skew = Matrix::Zero(2, 2);
  skew(0, 0) = 0.5;
  skew(1, 1) = 0.5;
  skew(0, 1) = Complex(0.0, 0.3);
  skew(1, 0) = Complex(0.0, 0.3);  // not Hermitian: conj would flip sign
  CHECK_THROWS_AS(DensityOperator{skew}, ValidationError);

  Matrix heavy = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(DensityOperator{heavy}, ValidationError);  // trace 2

  Matrix negative = Matrix::Zero(2, 2);
  negative(0, 0) = 1.5;
  negative(1, 1) = -0.5;
  CHECK_THROWS_AS(DensityOperator{negative}, ValidationError);
}

TEST_CASE("operator predicates") {
  const Matrix id = Matrix::Identity(3, 3);
  CHECK(hilbert::is_hermitian(id, 1e-10));
  CHECK(hilbert::is_unitary(id, 1e-10));
  CHECK(hilbert::is_projector(id, 1e-10));

  std::mt19937_64 rng(43);
  const Matrix u = rnd::haar_unitary(3, rng);
  CHECK(hilbert::is_unitary(u, 1e-10));
  CHECK_FALSE(hilbert::is_unitary(2.0 * u, 1e-10));

  const Matrix p = u.leftCols(2) * u.leftCols(2).adjoint();
  CHECK(hilbert::is_projector(p, 1e-10));
  CHECK_FALSE(hilbert::is_projector(0.5 * p, 1e-10));
  CHECK(hilbert::is_hermitian(p, 1e-10));
  CHECK_FALSE(hilbert::is_hermitian(rnd::gaussian_matrix(3, 3, rng), 1e-8));
}

TEST_CASE("kron and the one-sided applications share the index convention") {
  std::mt19937_64 rng(47);
  const Vector a = rnd::haar_vector(3, rng);
  const Vector b = rnd::haar_vector(4, rng);
  const Matrix u = rnd::haar_unitary(3, rng);
  const Matrix v = rnd::haar_unitary(4, rng);

  const BipartiteState ab = hilbert::tensor(a, b);
  const Vector moved = hilbert::kron(u, v) * ab.amplitudes();
  const BipartiteState expected = hilbert::tensor(u * a, v * b);
  CHECK((moved - expected.amplitudes()).norm() < 1e-12);

  const BipartiteState first = hilbert::apply_first(u, ab);
  CHECK((first.amplitudes() -
         hilbert::kron(u, Matrix::Identity(4, 4)) * ab.amplitudes())
            .norm() < 1e-12);
  const BipartiteState second = hilbert::apply_second(v, ab);
  CHECK((second.amplitudes() -
         hilbert::kron(Matrix::Identity(3, 3), v) * ab.amplitudes())
            .norm() < 1e-12);
}
