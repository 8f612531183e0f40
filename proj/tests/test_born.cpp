// Copyright (c) 2026 envkit developers
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "envkit/born.hpp"
#include "envkit/random.hpp"
#include "envkit/scenario.hpp"
#include "envkit/schmidt.hpp"

using namespace envkit;
using hilbert::BipartiteState;
using hilbert::DensityOperator;
using hilbert::Matrix;
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

BipartiteState lopsided_state() {
  Vector amps = Vector::Zero(4);
  amps(0) = std::sqrt(2.0 / 3.0);
  amps(3) = std::sqrt(1.0 / 3.0);
  return BipartiteState(amps, 2, 2);
}

BipartiteState spectrum_state(Eigen::Index d1, Eigen::Index d2,
                              std::vector<double> spectrum,
                              std::uint64_t seed) {
  scenario::StateSpec spec;
  spec.d1 = d1;
  spec.d2 = d2;
  spec.spectrum = std::move(spectrum);
  return scenario::random_state(spec, seed);
}

DensityOperator diagonal_density(std::vector<double> values) {
  const Eigen::Index n = static_cast<Eigen::Index>(values.size());
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) = values[i];
  return DensityOperator(m);
}

}  // namespace

TEST_CASE("route names are stable") {
  CHECK(std::string(born::route_name(born::Route::Counting)) == "counting");
  CHECK(std::string(born::route_name(born::Route::Eigenvector)) ==
        "eigenvector");
  CHECK(std::string(born::route_name(born::Route::ClosestState)) ==
        "closest-state");
  CHECK(std::string(born::route_name(born::Route::Density)) == "density");
  CHECK(std::string(born::route_name(born::Route::Trace)) == "trace");
}

TEST_CASE("rational spectra of exactly rational densities") {
  const born::RationalSpectrum thirds =
      born::rational_spectrum(diagonal_density({2.0 / 3.0, 1.0 / 3.0}), 64);
  REQUIRE(thirds.cluster_count() == 2);
  CHECK(thirds.exact);
  CHECK(thirds.numerators == std::vector<std::int64_t>{2, 1});
  CHECK(thirds.denominator == 3);
  CHECK(thirds.multiplicities[0] == 1);
  CHECK(thirds.multiplicities[1] == 1);
  CHECK(thirds.approximation_error < 1e-14);

  const born::RationalSpectrum half =
      born::rational_spectrum(diagonal_density({0.5, 0.5}), 64);
  REQUIRE(half.cluster_count() == 1);
  CHECK(half.numerators == std::vector<std::int64_t>{1});
  CHECK(half.denominator == 2);
  CHECK(half.multiplicities[0] == 2);
  CHECK(half.exact);

  const born::RationalSpectrum sixths = born::rational_spectrum(
      diagonal_density({0.5, 1.0 / 3.0, 1.0 / 6.0}), 64);
  CHECK(sixths.numerators == std::vector<std::int64_t>{3, 2, 1});
  CHECK(sixths.denominator == 6);
  CHECK(sixths.exact);

  const born::RationalSpectrum fifths =
      born::rational_spectrum(diagonal_density({0.6, 0.4}), 64);
  CHECK(fifths.numerators == std::vector<std::int64_t>{3, 2});
  CHECK(fifths.denominator == 5);
  CHECK(fifths.exact);
}

TEST_CASE("rational spectra of irrational densities stay consistent") {
  const double r = 1.0 / std::sqrt(2.0);
  const born::RationalSpectrum rs =
      born::rational_spectrum(diagonal_density({r, 1.0 - r}), 64);
  CHECK_FALSE(rs.exact);
  CHECK(rs.approximation_error > 1e-13);
  CHECK(rs.approximation_error < 0.01);
  // The integer identity holds by construction even when inexact.
  std::int64_t total = 0;
  for (std::size_t j = 0; j < rs.numerators.size(); ++j) {
    CHECK(rs.numerators[j] > 0);
    total += rs.numerators[j] * rs.multiplicities[j];
  }
  CHECK(total == rs.denominator);
  CHECK(rs.denominator <= 64);

  CHECK_THROWS_AS(born::rational_spectrum(diagonal_density({0.5, 0.5}), 1),
                  ValidationError);
  CHECK_THROWS_AS(born::rational_spectrum(diagonal_density({0.5, 0.5}), 0),
                  ValidationError);
}

TEST_CASE("fine-graining lands every branch on the paired labels") {
  const BipartiteState lop = lopsided_state();
  const born::RationalSpectrum rs = born::rational_spectrum(
      DensityOperator(hilbert::reduced_density(lop, 1).matrix()), 16);
  REQUIRE(rs.exact);
  REQUIRE(rs.denominator == 3);

  const born::TripartiteState tri = born::finegrain_state(lop, rs);
  CHECK(tri.d1 == 2);
  CHECK(tri.d2 == 3);
  CHECK(tri.d3 == 3);
  REQUIRE(tri.amplitudes.size() == 18);

  // Branches: cluster 0 (eigenvector |0>, two labels 0 and 1) and cluster 1
  // (eigenvector |1>, label 2), all with amplitude 3^{-1/2} on equal labels.
  const double amp = 1.0 / std::sqrt(3.0);
  for (Eigen::Index i = 0; i < 18; ++i) {
    const bool branch = (i == 0) || (i == 4) || (i == 17);
    CHECK(std::abs(tri.amplitudes(i) - (branch ? amp : 0.0)) < 1e-12);
  }

  // The extension leaves the first reduced density untouched.
  const BipartiteState folded(tri.amplitudes, 2, 9);
  const Matrix rho1_ext = hilbert::reduced_density(folded, 1).matrix();
  const Matrix rho1_src = hilbert::reduced_density(lop, 1).matrix();
  CHECK((rho1_ext - rho1_src).norm() < 1e-12);

  // Maximally entangled source: one cluster of multiplicity two.
  const born::TripartiteState bell_tri = born::finegrain_state(
      bell_state(),
      born::rational_spectrum(
          DensityOperator(hilbert::reduced_density(bell_state(), 1).matrix()),
          16));
  REQUIRE(bell_tri.amplitudes.size() == 8);

  // Both branches carry amplitude 2^{-1/2} and sit on equal-label diagonal
  // slots; the side-1 vector of copy `label` is column `label` of the
  // canonical decomposition, whichever ordering the degenerate cluster picked.
  const double half_amp = 1.0 / std::sqrt(2.0);
  const auto bell_dec = schmidt::canonical_schmidt(bell_state());
  hilbert::Vector expected = hilbert::Vector::Zero(8);
  for (Eigen::Index label = 0; label < 2; ++label)
    for (Eigen::Index k1 = 0; k1 < 2; ++k1)
      expected(k1 * 4 + label * 2 + label) +=
          half_amp * bell_dec.basis1(k1, label);
  CHECK((bell_tri.amplitudes - expected).norm() < 1e-12);
  Eigen::Index nonzero = 0;
  for (Eigen::Index i = 0; i < 8; ++i) {
    if (std::abs(bell_tri.amplitudes(i)) < 1e-13) continue;
    ++nonzero;
    CHECK(std::abs(std::abs(bell_tri.amplitudes(i)) - half_amp) < 1e-12);
    CHECK((i % 4 == 0 || i % 4 == 3));  // equal second/third labels only
  }
  CHECK(nonzero == 2);
}

TEST_CASE("fine-graining rejects foreign or inexact spectra") {
  const double r = 1.0 / std::sqrt(2.0);
  const born::RationalSpectrum inexact =
      born::rational_spectrum(diagonal_density({r, 1.0 - r}), 64);
  const BipartiteState psi_irr = spectrum_state(2, 2, {r, 1.0 - r}, 53);
  CHECK_THROWS_AS(born::finegrain_state(psi_irr, inexact), ValidationError);

  const born::RationalSpectrum bell_rs = born::rational_spectrum(
      DensityOperator(hilbert::reduced_density(bell_state(), 1).matrix()), 16);
  CHECK_THROWS_AS(born::finegrain_state(lopsided_state(), bell_rs),
                  ValidationError);

  // Label spaces below the denominator are rejected.
  const born::RationalSpectrum rs = born::rational_spectrum(
      DensityOperator(hilbert::reduced_density(lopsided_state(), 1).matrix()),
      16);
  CHECK_THROWS_AS(born::finegrain_state(lopsided_state(), rs, 2, 3),
                  ValidationError);
}

TEST_CASE("fine-graining unitary reproduces the direct construction") {
  // Second space large enough to hold the three labels.
  const BipartiteState psi = spectrum_state(2, 3, {2.0 / 3.0, 1.0 / 3.0}, 61);
  const born::RationalSpectrum rs = born::rational_spectrum(
      DensityOperator(hilbert::reduced_density(psi, 1).matrix()), 16);
  REQUIRE(rs.exact);
  REQUIRE(rs.denominator == 3);

  const born::FinegrainUnitary fu = born::finegrain_unitary(psi, rs);
  CHECK(fu.d2 == 3);
  CHECK(fu.d3 == 3);
  CHECK(fu.u23.rows() == 9);
  CHECK(hilbert::is_unitary(fu.u23, 1e-9));
  CHECK(fu.residual < 1e-9);

  // Trivial case: a product state needs no fine-graining (denominator one).
  const BipartiteState product = spectrum_state(2, 2, {1.0}, 67);
  const born::RationalSpectrum unit_rs = born::rational_spectrum(
      DensityOperator(hilbert::reduced_density(product, 1).matrix()), 16);
  REQUIRE(unit_rs.denominator == 1);
  const born::FinegrainUnitary trivial = born::finegrain_unitary(product, unit_rs);
  CHECK(trivial.residual < 1e-10);

  // The original second space of the lopsided state cannot hold the labels.
  const born::RationalSpectrum rs_lop = born::rational_spectrum(
      DensityOperator(hilbert::reduced_density(lopsided_state(), 1).matrix()),
      16);
  CHECK_THROWS_AS(born::finegrain_unitary(lopsided_state(), rs_lop),
                  ValidationError);
}

TEST_CASE("branch counting yields the exact rational probabilities") {
  const BipartiteState lop = lopsided_state();
  const born::TripartiteState tri = born::finegrain_state(
      lop, born::rational_spectrum(
               DensityOperator(hilbert::reduced_density(lop, 1).matrix()), 16));
  const auto reports = born::counting_probabilities(tri);
  REQUIRE(reports.size() == 4);  // cluster, copy, cluster, copy

  CHECK(reports[0].value == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(reports[0].route == born::Route::Counting);
  CHECK(reports[0].has_rational);
  CHECK(reports[0].numerator == 2);
  CHECK(reports[0].denominator == 3);
  CHECK(reports[0].residuals.at("branch_uniformity") < 1e-12);
  CHECK(reports[0].residuals.at("quadratic_form_gap") < 1e-12);
  CHECK_FALSE(reports[0].unknown_dependence.has_value());

  CHECK(reports[1].numerator == 2);
  CHECK(reports[1].denominator == 3);
  CHECK(reports[2].numerator == 1);
  CHECK(reports[2].denominator == 3);
  CHECK(reports[3].value == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // Degenerate cluster: the cluster weight reduces to 1/1, each copy to 1/2.
  const born::TripartiteState bell_tri = born::finegrain_state(
      bell_state(),
      born::rational_spectrum(
          DensityOperator(hilbert::reduced_density(bell_state(), 1).matrix()),
          16));
  const auto bell_reports = born::counting_probabilities(bell_tri);
  REQUIRE(bell_reports.size() == 3);
  CHECK(bell_reports[0].numerator == 1);
  CHECK(bell_reports[0].denominator == 1);
  CHECK(bell_reports[0].value == doctest::Approx(1.0).epsilon(1e-12));
  for (int k = 1; k <= 2; ++k) {
    CHECK(bell_reports[k].numerator == 1);
    CHECK(bell_reports[k].denominator == 2);
    CHECK(bell_reports[k].event.find("copy") != std::string::npos);
  }

  // Three distinct eigenvalues with denominator six.
  const BipartiteState sixths =
      spectrum_state(3, 3, {0.5, 1.0 / 3.0, 1.0 / 6.0}, 71);
  const born::TripartiteState tri6 = born::finegrain_state(
      sixths, born::rational_spectrum(
                  DensityOperator(hilbert::reduced_density(sixths, 1).matrix()),
                  16));
  const auto r6 = born::counting_probabilities(tri6);
  REQUIRE(r6.size() == 6);
  CHECK(r6[0].numerator == 1);
  CHECK(r6[0].denominator == 2);
  CHECK(r6[2].numerator == 1);
  CHECK(r6[2].denominator == 3);
  CHECK(r6[4].numerator == 1);
  CHECK(r6[4].denominator == 6);
  double total = 0.0;
  for (std::size_t i = 0; i < r6.size(); i += 2) total += r6[i].value;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("equiprobability certificate for co-resident vectors") {
  const BipartiteState bell = bell_state();
  const schmidt::SubsystemPicture pic = schmidt::subsystem_picture(bell);

  Vector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const born::StageOneCertificate cert =
      born::stage_one_certificate(pic, basis_vector(2, 0), plus);
  CHECK(cert.certified);
  CHECK(cert.cluster == 0);
  REQUIRE(cert.pair.has_value());
  CHECK(cert.pair->residual < 1e-10);
  CHECK(cert.probability_first == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(cert.probability_second == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(cert.probability_gap < 1e-12);

  // Identity swap certifies trivially.
  const born::StageOneCertificate same =
      born::stage_one_certificate(pic, basis_vector(2, 0), basis_vector(2, 0));
  CHECK(same.certified);

  // Vectors in different eigen-subspaces are not certifiable this way.
  const BipartiteState lop = lopsided_state();
  const schmidt::SubsystemPicture pic_lop = schmidt::subsystem_picture(lop);
  const born::StageOneCertificate refused = born::stage_one_certificate(
      pic_lop, basis_vector(2, 0), basis_vector(2, 1));
  CHECK_FALSE(refused.certified);
  CHECK(refused.message.find("not certifiable") != std::string::npos);
  CHECK_FALSE(refused.pair.has_value());
}

TEST_CASE("continuity: rational family locks onto an exact spectrum") {
  const born::ContinuityResult res =
      born::continuity_sequence(diagonal_density({2.0 / 3.0, 1.0 / 3.0}), 6);
  REQUIRE(res.rational_family.size() == 6);
  CHECK(res.target == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  // Step 1 can only offer denominator two.
  CHECK(res.rational_family[0].denominator_bound == 2);
  CHECK(res.rational_family[0].probability ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK_FALSE(res.rational_family[0].exact);

  // From step 2 on, denominator three is admissible and the family is exact
  // and constant.
  for (std::size_t i = 1; i < res.rational_family.size(); ++i) {
    CHECK(res.rational_family[i].exact);
    CHECK(res.rational_family[i].probability ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(res.rational_family[i].residual < 1e-12);
    CHECK(res.rational_family[i].residual <=
          res.rational_family[i - 1].residual + 1e-12);
  }

  // Truncation family: leading cluster alone overshoots, full set is exact.
  REQUIRE(res.truncation_family.size() == 2);
  CHECK(res.truncation_family[0].probability ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(res.truncation_family[0].exact);
  CHECK(res.truncation_family[1].probability ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(res.truncation_family[1].exact);
  CHECK(res.truncation_family[1].residual < 1e-12);
}

TEST_CASE("continuity: irrational spectra are approached, never reached") {
  const double r = 1.0 / std::sqrt(2.0);
  const born::ContinuityResult res =
      born::continuity_sequence(diagonal_density({r, 1.0 - r}), 12);
  REQUIRE(res.rational_family.size() == 12);
  for (const auto& step : res.rational_family) {
    CHECK_FALSE(step.exact);
  }
  const auto& final_step = res.rational_family.back();
  CHECK(final_step.denominator_bound == 4096);
  CHECK(std::abs(final_step.probability - r) < 1e-6);
  CHECK(final_step.residual < 1e-5);

  // Residuals decay strictly through the doubling budgets (spot checks).
  CHECK(res.rational_family[0].residual > res.rational_family[5].residual);
  CHECK(res.rational_family[5].residual > final_step.residual);
}

TEST_CASE("continuity: truncation family of a random full-rank density") {
  std::mt19937_64 rng(73);
  const Matrix m = rnd::random_density_matrix(8, 8, rng);
  const DensityOperator rho(m);
  const born::ContinuityResult res = born::continuity_sequence(rho, 4, 0);
  const std::size_t clusters = res.truncation_family.size();
  REQUIRE(clusters >= 2);
  CHECK(res.truncation_family.back().exact);
  CHECK(res.truncation_family.back().residual < 1e-10);
  for (std::size_t i = 1; i < clusters; ++i) {
    // Growing the kept weight shrinks the renormalized leading eigenvalue.
    CHECK(res.truncation_family[i].probability <
          res.truncation_family[i - 1].probability + 1e-12);
  }
  CHECK(res.truncation_family.back().probability ==
        doctest::Approx(res.target).epsilon(1e-10));

  CHECK_THROWS_AS(born::continuity_sequence(rho, 0), ValidationError);
  CHECK_THROWS_AS(born::continuity_sequence(rho, 4, 99), ValidationError);
}

TEST_CASE("closest admissible density: frozen example and identities") {
  Matrix m(2, 2);
  m << 0.7, 0.2, 0.2, 0.3;
  const DensityOperator rho(m);
  const born::ClosestDensity closest =
      born::closest_eigenstate_density(rho, basis_vector(2, 0));

  CHECK(closest.r_prime == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(closest.distance ==
        doctest::Approx(0.2 * std::sqrt(2.0)).epsilon(1e-12));
  Matrix expected(2, 2);
  expected << 0.7, 0.0, 0.0, 0.3;
  CHECK((closest.rho_prime.matrix() - expected).norm() < 1e-12);

  // The event is an exact eigenvector of the result.
  const Vector image = closest.rho_prime.matrix() * basis_vector(2, 0);
  CHECK((image - closest.r_prime * basis_vector(2, 0)).norm() < 1e-12);

  // If phi is already an eigenvector, the density is its own closest point.
  const born::ClosestDensity fixed =
      born::closest_eigenstate_density(DensityOperator(expected),
                                       basis_vector(2, 0));
  CHECK(fixed.distance < 1e-12);

  // Pure density: the eigenvalue is the squared overlap.
  std::mt19937_64 rng(79);
  const Vector psi = rnd::haar_vector(4, rng);
  const Vector phi = rnd::haar_vector(4, rng);
  const DensityOperator pure(psi * psi.adjoint());
  const born::ClosestDensity from_pure =
      born::closest_eigenstate_density(pure, phi);
  CHECK(from_pure.r_prime ==
        doctest::Approx(std::norm(phi.dot(psi))).epsilon(1e-10));

  CHECK_THROWS_AS(born::closest_eigenstate_density(rho, basis_vector(3, 0)),
                  ValidationError);
}

TEST_CASE("closest-density search never beats the closed form") {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 3; ++trial) {
    const Eigen::Index dim = 2 + trial;
    const DensityOperator rho(rnd::random_density_matrix(dim, dim, rng));
    const Vector phi = rnd::haar_vector(dim, rng);
    const born::ClosestDensity closest =
        born::closest_eigenstate_density(rho, phi);
    const born::OracleResult oracle =
        born::closest_oracle(rho, phi, 4000, 91 + trial);
    CHECK(oracle.samples == 4000);
    CHECK(oracle.best_distance >= closest.distance - 1e-6);
    // The best candidate satisfies the eigenstate constraint.
    CHECK((oracle.best_candidate * phi -
           (phi.adjoint() * oracle.best_candidate * phi)(0, 0) * phi)
              .norm() < 1e-9);
  }

  const DensityOperator rho2(rnd::random_density_matrix(7, 7, rng));
  CHECK_THROWS_AS(
      born::closest_oracle(rho2, rnd::haar_vector(7, rng), 10, 1),
      ValidationError);
}

TEST_CASE("projective state change") {
  Matrix m(2, 2);
  m << 0.7, 0.2, 0.2, 0.3;
  const DensityOperator rho(m);
  const Matrix p0 = basis_vector(2, 0) * basis_vector(2, 0).adjoint();
  const Matrix p1 = basis_vector(2, 1) * basis_vector(2, 1).adjoint();

  const DensityOperator changed = born::lueders_state(rho, {p0, p1});
  Matrix expected(2, 2);
  expected << 0.7, 0.0, 0.0, 0.3;
  CHECK((changed.matrix() - expected).norm() < 1e-12);

  // A density already block-diagonal is a fixed point.
  const DensityOperator again = born::lueders_state(changed, {p0, p1});
  CHECK((again.matrix() - changed.matrix()).norm() < 1e-12);

  // Selective version: weight and normalized state.
  const born::SelectiveResult sel = born::selective_lueders(rho, p0);
  CHECK(sel.weight == doctest::Approx(0.7).epsilon(1e-12));
  CHECK((sel.state.matrix() - p0).norm() < 1e-12);

  // Trace is preserved for any complete orthogonal family.
  std::mt19937_64 rng(97);
  const DensityOperator big(rnd::random_density_matrix(6, 6, rng));
  const Matrix u = rnd::haar_unitary(6, rng);
  std::vector<Matrix> family;
  family.push_back(u.leftCols(2) * u.leftCols(2).adjoint());
  family.push_back(u.middleCols(2, 3) * u.middleCols(2, 3).adjoint());
  family.push_back(u.rightCols(1) * u.rightCols(1).adjoint());
  const DensityOperator moved = born::lueders_state(big, family);
  CHECK(std::abs(moved.matrix().trace().real() - 1.0) < 1e-11);
  // Event weights are unchanged by the non-selective change.
  for (const Matrix& p : family) {
    CHECK(std::abs((moved.matrix() * p).trace().real() -
                   (big.matrix() * p).trace().real()) < 1e-11);
  }

  // Zero-weight selection and incomplete families are rejected.
  CHECK_THROWS_AS(born::selective_lueders(DensityOperator(p1), p0),
                  ValidationError);
  CHECK_THROWS_AS(born::lueders_state(rho, {p0}), ValidationError);
  Matrix tilted(2, 2);
  tilted << 0.5, 0.5, 0.5, 0.5;
  CHECK_THROWS_AS(born::lueders_state(rho, {p0, tilted}), ValidationError);
}

TEST_CASE("isolated-system limit: exact reciprocal decay") {
  const Vector psi = basis_vector(3, 0);

  // Event equal to the state: probability 1 - 1/n, deviation exactly 1/n.
  const born::IsolatedResult same = born::isolated_state_limit(psi, psi, 1000);
  REQUIRE(same.steps.size() == 3);  // n = 10, 100, 1000
  CHECK(same.limit == doctest::Approx(1.0).epsilon(1e-12));
  for (const auto& step : same.steps) {
    const double n = static_cast<double>(step.n);
    CHECK(step.probability == doctest::Approx(1.0 - 1.0 / n).epsilon(1e-12));
    CHECK(step.deviation == doctest::Approx(1.0 / n).epsilon(1e-9));
    CHECK(step.purification_residual < 1e-10);
  }
  CHECK(same.fitted_c == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(same.fit_spread < 1e-9);

  // Orthogonal event: the complement share 1/(n (d-1)).
  const born::IsolatedResult ortho =
      born::isolated_state_limit(psi, basis_vector(3, 1), 100000);
  CHECK(ortho.limit == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ortho.fitted_c == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(ortho.steps.back().deviation ==
        doctest::Approx(1.0 / (100000.0 * 2.0)).epsilon(1e-6));

  // Generic event: deviation = |<phi| complement |phi> - limit| / n.
  Vector phi(3);
  phi << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0;
  const born::IsolatedResult tilted =
      born::isolated_state_limit(psi, phi, 10000);
  CHECK(tilted.limit == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(tilted.fitted_c == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(tilted.report.route == born::Route::Density);
  CHECK(tilted.report.residuals.count("final_deviation") == 1);
  CHECK(tilted.report.residuals.count("fit_spread") == 1);
  CHECK(tilted.steps.back().deviation < 1e-4);

  // Input validation.
  Vector tiny(1);
  tiny << 1.0;
  CHECK_THROWS_AS(born::isolated_state_limit(tiny, tiny, 100),
                  ValidationError);
  CHECK_THROWS_AS(born::isolated_state_limit(psi, basis_vector(4, 0), 100),
                  ValidationError);
  CHECK_THROWS_AS(born::isolated_state_limit(psi, psi, 5), ValidationError);
}

TEST_CASE("probability of vector and projector events") {
  const DensityOperator rho = diagonal_density({2.0 / 3.0, 1.0 / 3.0});

  const born::ProbabilityReport on_zero =
      born::born_probability(rho, basis_vector(2, 0));
  CHECK(on_zero.value == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(on_zero.route == born::Route::Density);
  CHECK(on_zero.residuals.at("imaginary_part") < 1e-15);

  const born::ProbabilityReport certain =
      born::born_probability(rho, Matrix(Matrix::Identity(2, 2)));
  CHECK(certain.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(certain.route == born::Route::Trace);
  CHECK(certain.event.find("rank 2") != std::string::npos);

  const born::ProbabilityReport never =
      born::born_probability(rho, Matrix(Matrix::Zero(2, 2)));
  CHECK(never.value == doctest::Approx(0.0).epsilon(1e-12));

  // Expectation decomposes over any spectral mixture of the density.
  std::mt19937_64 rng(101);
  const DensityOperator mixed(rnd::random_density_matrix(4, 4, rng));
  const Vector phi = rnd::haar_vector(4, rng);
  double accumulated = 0.0;
  for (Eigen::Index i = 0; i < 4; ++i) {
    accumulated += mixed.eigenvalues()(i) *
                   std::norm(phi.dot(mixed.eigenvectors().col(i)));
  }
  CHECK(born::born_probability(mixed, phi).value ==
        doctest::Approx(accumulated).epsilon(1e-11));

  // Events must be normalized or projective.
  CHECK_THROWS_AS(born::born_probability(rho, Vector(2.0 * basis_vector(2, 0))),
                  ValidationError);
  Matrix skew(2, 2);
  skew << 0.5, 0.5, 0.0, 0.5;
  CHECK_THROWS_AS(born::born_probability(rho, skew), ValidationError);
}

TEST_CASE("probability is finitely additive over orthogonal decompositions") {
  std::mt19937_64 rng(103);
  const DensityOperator rho(rnd::random_density_matrix(6, 6, rng));

  // The identity decomposed into the computational rank-one events.
  std::vector<Matrix> fine;
  for (Eigen::Index i = 0; i < 6; ++i) {
    fine.push_back(basis_vector(6, i) * basis_vector(6, i).adjoint());
  }
  const born::AdditivityResult whole =
      born::additivity_check(rho, Matrix::Identity(6, 6), fine);
  CHECK(whole.ok);
  CHECK(whole.whole == doctest::Approx(1.0).epsilon(1e-11));
  CHECK(whole.residual < 1e-11);

  // Two different orthogonal splittings of one rank-three event agree.
  const Matrix w = rnd::haar_isometry(6, 3, rng);
  const Matrix g = w * w.adjoint();
  std::vector<Matrix> split_a;
  for (Eigen::Index i = 0; i < 3; ++i) {
    split_a.push_back(w.col(i) * w.col(i).adjoint());
  }
  const Matrix rot = rnd::haar_unitary(3, rng);
  const Matrix w2 = w * rot;
  std::vector<Matrix> split_b;
  for (Eigen::Index i = 0; i < 3; ++i) {
    split_b.push_back(w2.col(i) * w2.col(i).adjoint());
  }
  const born::AdditivityResult via_a = born::additivity_check(rho, g, split_a);
  const born::AdditivityResult via_b = born::additivity_check(rho, g, split_b);
  CHECK(via_a.ok);
  CHECK(via_b.ok);
  CHECK(via_a.whole == doctest::Approx(via_b.whole).epsilon(1e-11));
  CHECK(std::abs(via_a.sum_parts - via_b.sum_parts) < 1e-11);

  // Growing chains stay additive at every length.
  const DensityOperator rho8(rnd::random_density_matrix(8, 8, rng));
  for (Eigen::Index n = 2; n <= 8; ++n) {
    Matrix whole_n = Matrix::Zero(8, 8);
    std::vector<Matrix> parts;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Matrix p = basis_vector(8, i) * basis_vector(8, i).adjoint();
      whole_n += p;
      parts.push_back(p);
    }
    CHECK(born::additivity_check(rho8, whole_n, parts).ok);
  }

  // Non-orthogonal parts are rejected.
  Vector plus(6);
  plus.setZero();
  plus(0) = 1.0 / std::sqrt(2.0);
  plus(1) = 1.0 / std::sqrt(2.0);
  std::vector<Matrix> bad = {fine[0], plus * plus.adjoint()};
  CHECK_THROWS_AS(
      born::additivity_check(rho, Matrix(fine[0] + fine[1]), bad),
      ValidationError);
}
