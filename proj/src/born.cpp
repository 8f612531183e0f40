// Copyright (c) 2026 envkit developers
// SPDX-License-Identifier: Apache-2.0

#include "envkit/born.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "envkit/random.hpp"

namespace envkit::born {

namespace {

constexpr double kExactThreshold = 1e-12;
constexpr std::int64_t kScanLimit = 2'000'000;

std::int64_t gcd64(std::int64_t a, std::int64_t b) {
  return std::gcd(a, b);
}

std::string rational_text(std::int64_t num, std::int64_t den) {
  std::ostringstream out;
  out << num << "/" << den;
  return out.str();
}

// Best rational approximation p/q of x in [0, 1] with q <= qmax, by the
// continued-fraction convergent/semiconvergent rule.
std::pair<std::int64_t, std::int64_t> best_rational(double x,
                                                    std::int64_t qmax) {
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double frac = x;
  for (int guard = 0; guard < 64; ++guard) {
    const double floor_part = std::floor(frac);
    const std::int64_t a = static_cast<std::int64_t>(floor_part);
    const std::int64_t p2 = a * p1 + p0;
    const std::int64_t q2 = a * q1 + q0;
    if (q2 > qmax) {
      // Best semiconvergent with denominator within the bound.
      const std::int64_t k = q1 > 0 ? (qmax - q0) / q1 : 0;
      const std::int64_t ps = k * p1 + p0;
      const std::int64_t qs = k * q1 + q0;
      const double err_conv =
          q1 > 0 ? std::abs(x - static_cast<double>(p1) / q1) : 1e300;
      const double err_semi =
          qs > 0 ? std::abs(x - static_cast<double>(ps) / qs) : 1e300;
      return err_semi < err_conv ? std::make_pair(ps, qs)
                                 : std::make_pair(p1, q1);
    }
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const double rem = frac - floor_part;
    if (rem < 1e-15) break;
    frac = 1.0 / rem;
  }
  return {p1, std::max<std::int64_t>(q1, 1)};
}

struct Assignment {
  std::vector<std::int64_t> numerators;
  double l2_error = 0.0;   // weighted: sum_j d_j (r_j - m_j/M)^2
  double max_error = 0.0;  // max_j |r_j - m_j/M|
  bool feasible = false;
};

// Round the spectrum onto numerators over a fixed denominator and repair the
// counting identity sum_j d_j m_j == M, keeping every numerator >= 1.
Assignment assign_numerators(const std::vector<double>& values,
                             const std::vector<Eigen::Index>& mults,
                             std::int64_t denominator) {
  const std::size_t count = values.size();
  Assignment out;
  out.numerators.resize(count);
  std::int64_t sum = 0;
  for (std::size_t j = 0; j < count; ++j) {
    std::int64_t m = std::llround(values[j] * static_cast<double>(denominator));
    if (m < 1) m = 1;
    out.numerators[j] = m;
    sum += static_cast<std::int64_t>(mults[j]) * m;
  }
  std::int64_t deficit = denominator - sum;
  for (int guard = 0; guard < 128 && deficit != 0; ++guard) {
    int pick = -1;
    if (deficit > 0) {
      // Prefer the most under-rounded cluster whose multiplicity fits.
      double best = -1e300;
      for (std::size_t j = 0; j < count; ++j) {
        if (static_cast<std::int64_t>(mults[j]) > deficit) continue;
        const double frac = values[j] * static_cast<double>(denominator) -
                            static_cast<double>(out.numerators[j]);
        if (frac > best) {
          best = frac;
          pick = static_cast<int>(j);
        }
      }
      if (pick < 0) {
        // Nothing fits exactly; overshoot by the smallest multiplicity.
        Eigen::Index smallest = std::numeric_limits<Eigen::Index>::max();
        for (std::size_t j = 0; j < count; ++j) {
          if (mults[j] < smallest) {
            smallest = mults[j];
            pick = static_cast<int>(j);
          }
        }
      }
      out.numerators[pick] += 1;
      deficit -= static_cast<std::int64_t>(mults[pick]);
    } else {
      double best = 1e300;
      for (std::size_t j = 0; j < count; ++j) {
        if (out.numerators[j] < 2) continue;
        if (static_cast<std::int64_t>(mults[j]) > -deficit) continue;
        const double frac = values[j] * static_cast<double>(denominator) -
                            static_cast<double>(out.numerators[j]);
        if (frac < best) {
          best = frac;
          pick = static_cast<int>(j);
        }
      }
      if (pick < 0) {
        Eigen::Index smallest = std::numeric_limits<Eigen::Index>::max();
        for (std::size_t j = 0; j < count; ++j) {
          if (out.numerators[j] < 2) continue;
          if (mults[j] < smallest) {
            smallest = mults[j];
            pick = static_cast<int>(j);
          }
        }
        if (pick < 0) return out;  // every numerator already at 1
      }
      out.numerators[pick] -= 1;
      deficit += static_cast<std::int64_t>(mults[pick]);
    }
  }
  if (deficit != 0) return out;
  out.feasible = true;
  for (std::size_t j = 0; j < count; ++j) {
    const double err = values[j] - static_cast<double>(out.numerators[j]) /
                                       static_cast<double>(denominator);
    out.l2_error += static_cast<double>(mults[j]) * err * err;
    out.max_error = std::max(out.max_error, std::abs(err));
  }
  return out;
}

// Column index of the fine-grained label (cluster j, copy k, branch l).
struct LabelMap {
  std::vector<std::int64_t> offsets;  // cumulative d_j * m_j
  std::int64_t total = 0;

  LabelMap(const std::vector<Eigen::Index>& mults,
           const std::vector<std::int64_t>& nums) {
    offsets.resize(mults.size());
    for (std::size_t j = 0; j < mults.size(); ++j) {
      offsets[j] = total;
      total += static_cast<std::int64_t>(mults[j]) * nums[j];
    }
  }
  std::int64_t index(std::size_t j, Eigen::Index k, std::int64_t l,
                     std::int64_t m_j) const {
    return offsets[j] + static_cast<std::int64_t>(k) * m_j + l;
  }
};

void require_unit(const Vector& v, const char* what, double tol_norm) {
  if (std::abs(v.norm() - 1.0) > tol_norm) {
    throw ValidationError(std::string(what) + ": vector must be unit norm");
  }
}

// Validates that a rational spectrum matches the clustered spectrum of the
// analyzed state and is exact.
void require_matching_spectrum(const SubsystemPicture& picture,
                               const RationalSpectrum& spectrum,
                               const char* what, const Tolerances& tol) {
  if (!spectrum.exact) {
    throw ValidationError(std::string(what) +
                          ": spectrum is not exact; approximation error " +
                          std::to_string(spectrum.approximation_error));
  }
  if (spectrum.cluster_count() != picture.cluster_count()) {
    throw ValidationError(std::string(what) +
                          ": spectrum cluster count does not match the state");
  }
  for (Eigen::Index j = 0; j < picture.cluster_count(); ++j) {
    if (spectrum.multiplicities[j] != picture.multiplicities[j]) {
      throw ValidationError(std::string(what) +
                            ": spectrum multiplicities do not match the state");
    }
    const double ratio = static_cast<double>(spectrum.numerators[j]) /
                         static_cast<double>(spectrum.denominator);
    if (std::abs(ratio - picture.distinct_eigenvalues(j)) > tol.eps_cluster) {
      throw ValidationError(
          std::string(what) +
          ": spectrum values do not match the state's eigenvalues");
    }
  }
}

// Extends orthonormal columns to a full orthonormal basis by projecting the
// computational basis vectors (deterministic modified Gram-Schmidt with
// re-orthogonalization).
Matrix complete_orthonormal_basis(const Matrix& given) {
  const Eigen::Index dim = given.rows();
  const Eigen::Index have = given.cols();
  Matrix basis(dim, dim);
  basis.leftCols(have) = given;
  Eigen::Index filled = have;
  for (Eigen::Index e = 0; e < dim && filled < dim; ++e) {
    Vector v = Vector::Zero(dim);
    v(e) = 1.0;
    v -= basis.leftCols(filled) * (basis.leftCols(filled).adjoint() * v);
    v -= basis.leftCols(filled) * (basis.leftCols(filled).adjoint() * v);
    const double n = v.norm();
    if (n < 1e-8) continue;
    basis.col(filled++) = v / n;
  }
  if (filled < dim) {
    throw CertificationError(
        "basis completion: ran out of directions (numerically defective "
        "input)");
  }
  return basis;
}

ProbabilityReport make_report(std::string event, double value, Route route) {
  ProbabilityReport report;
  report.event = std::move(event);
  report.value = value;
  report.route = route;
  return report;
}

void attach_rational(ProbabilityReport& report, std::int64_t num,
                     std::int64_t den) {
  const std::int64_t g = std::max<std::int64_t>(gcd64(num, den), 1);
  report.has_rational = true;
  report.numerator = num / g;
  report.denominator = den / g;
}

}  // namespace

const char* route_name(Route route) {
  switch (route) {
    case Route::Counting:
      return "counting";
    case Route::Eigenvector:
      return "eigenvector";
    case Route::ClosestState:
      return "closest-state";
    case Route::Density:
      return "density";
    case Route::Trace:
      return "trace";
  }
  return "unknown";
}

StageOneCertificate stage_one_certificate(const SubsystemPicture& picture,
                                          const Vector& phi,
                                          const Vector& phi_prime,
                                          const Tolerances& tol) {
  StageOneCertificate cert;
  try {
    cert.pair = twins::swap_twin(phi, phi_prime, picture, tol);
  } catch (const twins::NotCoResidentError& err) {
    cert.certified = false;
    cert.message = std::string("not certifiable by the swap construction: ") +
                   err.what();
    return cert;
  }
  for (Eigen::Index j = 0; j < picture.cluster_count(); ++j) {
    if ((picture.q1_blocks[j] * phi - phi).norm() <= tol.tol_op) {
      cert.cluster = j;
      break;
    }
  }
  const Matrix rho1 = picture.rho1();
  cert.probability_first = (phi.adjoint() * rho1 * phi)(0, 0).real();
  cert.probability_second =
      (phi_prime.adjoint() * rho1 * phi_prime)(0, 0).real();
  cert.probability_gap =
      std::abs(cert.probability_first - cert.probability_second);
  cert.certified = cert.probability_gap <= tol.tol_op;
  cert.message = cert.certified
                     ? "entangled-swap certificate holds: co-resident vectors "
                       "carry equal weight"
                     : "swap pair exists but the probability weights differ";
  return cert;
}

RationalSpectrum rational_spectrum(const DensityOperator& rho1,
                                   std::int64_t max_denominator,
                                   const Tolerances& tol) {
  if (max_denominator < 1) {
    throw ValidationError("rational spectrum: max denominator must be >= 1");
  }
  const hilbert::SpectralDecomposition spec = hilbert::spectral(rho1, tol);
  const std::size_t count = spec.clusters.size();
  if (count == 0) {
    throw ValidationError("rational spectrum: density has numerical rank 0");
  }
  std::vector<double> values(count);
  std::vector<Eigen::Index> mults(count);
  std::int64_t rank = 0;
  for (std::size_t j = 0; j < count; ++j) {
    values[j] = spec.clusters[j].value;
    mults[j] = spec.clusters[j].multiplicity;
    rank += mults[j];
  }
  if (max_denominator < rank) {
    std::ostringstream out;
    out << "rational spectrum: no denominator <= " << max_denominator
        << " can hold rank " << rank << " with positive numerators";
    throw ValidationError(out.str());
  }

  // Candidate denominators: the lcm of per-eigenvalue best approximations
  // (fast path for exactly rational spectra), refined by a scan over all
  // admissible denominators at desk scale.
  std::vector<std::int64_t> candidates;
  std::int64_t lcm = 1;
  bool lcm_ok = true;
  for (std::size_t j = 0; j < count && lcm_ok; ++j) {
    const auto [p, q] = best_rational(values[j], max_denominator);
    (void)p;
    const std::int64_t g = gcd64(lcm, q);
    if (lcm / g > max_denominator / q) {
      lcm_ok = false;  // lcm would overflow the bound
    } else {
      lcm = lcm / g * q;
    }
  }
  if (lcm_ok && lcm >= rank) candidates.push_back(lcm);
  const std::int64_t scan_top = std::min(max_denominator, kScanLimit);
  for (std::int64_t m = rank; m <= scan_top; ++m) candidates.push_back(m);

  Assignment best;
  std::int64_t best_den = 0;
  for (const std::int64_t den : candidates) {
    const Assignment a = assign_numerators(values, mults, den);
    if (!a.feasible) continue;
    const bool better =
        best_den == 0 || a.l2_error < best.l2_error ||
        (a.l2_error == best.l2_error && den < best_den);
    if (better) {
      best = a;
      best_den = den;
    }
  }
  if (best_den == 0) {
    throw ValidationError(
        "rational spectrum: no admissible denominator yields a valid "
        "assignment");
  }

  RationalSpectrum out;
  out.numerators = best.numerators;
  out.denominator = best_den;
  out.multiplicities = mults;
  out.targets = values;
  out.projectors.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    out.projectors.push_back(spec.clusters[j].projector);
  }
  out.approximation_error = best.max_error;
  out.exact = best.max_error < kExactThreshold;
  return out;
}

TripartiteState finegrain_state(const BipartiteState& psi,
                                const RationalSpectrum& spectrum,
                                Eigen::Index d2_override,
                                Eigen::Index d3_override,
                                const Tolerances& tol) {
  const SubsystemPicture picture = schmidt::subsystem_picture(psi, tol);
  require_matching_spectrum(picture, spectrum, "fine-grained state", tol);

  const std::int64_t big_m = spectrum.denominator;
  const Eigen::Index d2 = d2_override > 0 ? d2_override : big_m;
  const Eigen::Index d3 = d3_override > 0 ? d3_override : big_m;
  if (d2 < big_m || d3 < big_m) {
    std::ostringstream out;
    out << "fine-grained state: label spaces need at least " << big_m
        << " dimensions, got " << d2 << " and " << d3;
    throw ValidationError(out.str());
  }

  const LabelMap labels(spectrum.multiplicities, spectrum.numerators);
  const double amp = 1.0 / std::sqrt(static_cast<double>(big_m));
  const Eigen::Index d1 = picture.d1;
  Vector amps = Vector::Zero(d1 * d2 * d3);
  for (std::size_t j = 0; j < spectrum.numerators.size(); ++j) {
    const std::int64_t m_j = spectrum.numerators[j];
    for (Eigen::Index k = 0; k < spectrum.multiplicities[j]; ++k) {
      const Vector side1 =
          picture.decomposition.basis1.col(picture.offsets[j] + k);
      for (std::int64_t l = 0; l < m_j; ++l) {
        const std::int64_t label = labels.index(j, k, l, m_j);
        for (Eigen::Index k1 = 0; k1 < d1; ++k1) {
          amps(k1 * d2 * d3 + label * d3 + label) += amp * side1(k1);
        }
      }
    }
  }

  TripartiteState tri;
  tri.amplitudes = std::move(amps);
  tri.d1 = d1;
  tri.d2 = d2;
  tri.d3 = d3;
  tri.spectrum = spectrum;
  tri.basis1 = picture.decomposition.basis1;

  // The extension must not disturb the first subsystem.
  const BipartiteState folded(tri.amplitudes, d1, d2 * d3, tol);
  const Matrix rho1_ext = hilbert::reduced_density(folded, 1, tol).matrix();
  const Matrix rho1_src = hilbert::reduced_density(psi, 1, tol).matrix();
  const double dev = (rho1_ext - rho1_src).norm();
  if (dev > tol.tol_recon) {
    std::ostringstream out;
    out << "fine-grained state: first reduced density deviates by " << dev;
    throw CertificationError(out.str());
  }
  return tri;
}

FinegrainUnitary finegrain_unitary(const BipartiteState& psi,
                                   const RationalSpectrum& spectrum,
                                   Eigen::Index d3_override,
                                   const Tolerances& tol) {
  const SubsystemPicture picture = schmidt::subsystem_picture(psi, tol);
  require_matching_spectrum(picture, spectrum, "fine-graining unitary", tol);

  const std::int64_t big_m = spectrum.denominator;
  const Eigen::Index d2 = psi.d2();
  const Eigen::Index d3 = d3_override > 0 ? d3_override : big_m;
  if (d2 < big_m) {
    std::ostringstream out;
    out << "fine-graining unitary: dimension shortfall; the second space "
           "holds "
        << d2 << " dimensions but the labels need " << big_m;
    throw ValidationError(out.str());
  }
  if (d3 < big_m) {
    throw ValidationError(
        "fine-graining unitary: third space cannot hold the labels");
  }

  const LabelMap labels(spectrum.multiplicities, spectrum.numerators);
  const Eigen::Index rank = picture.rank();
  const Eigen::Index dim = d2 * d3;
  Matrix pre(dim, rank);
  Matrix img(dim, rank);
  Eigen::Index column = 0;
  for (std::size_t j = 0; j < spectrum.numerators.size(); ++j) {
    const std::int64_t m_j = spectrum.numerators[j];
    const double amp = 1.0 / std::sqrt(static_cast<double>(m_j));
    for (Eigen::Index k = 0; k < spectrum.multiplicities[j]; ++k) {
      const Vector side2 =
          picture.decomposition.basis2.col(picture.offsets[j] + k);
      Vector p = Vector::Zero(dim);
      for (Eigen::Index l2 = 0; l2 < d2; ++l2) {
        p(l2 * d3 + 0) = side2(l2);  // pre-image pairs with the first label
      }
      Vector q = Vector::Zero(dim);
      for (std::int64_t l = 0; l < m_j; ++l) {
        const std::int64_t label = labels.index(j, k, l, m_j);
        q(label * d3 + label) = amp;
      }
      pre.col(column) = p;
      img.col(column) = q;
      ++column;
    }
  }

  const Matrix pre_full = complete_orthonormal_basis(pre);
  const Matrix img_full = complete_orthonormal_basis(img);
  Matrix u23 = img_full * pre_full.adjoint();
  if (!hilbert::is_unitary(u23, 1e3 * tol.tol_op)) {
    throw CertificationError("fine-graining unitary: completion not unitary");
  }

  // Certify the action against the directly built fine-grained state.
  const TripartiteState direct = finegrain_state(psi, spectrum, d2, d3, tol);
  Vector embedded = Vector::Zero(psi.d1() * dim);
  for (Eigen::Index k1 = 0; k1 < psi.d1(); ++k1) {
    for (Eigen::Index l2 = 0; l2 < d2; ++l2) {
      // psi (x) |first label>_3
      embedded(k1 * dim + l2 * d3 + 0) = psi.amplitudes()(k1 * d2 + l2);
    }
  }
  const BipartiteState folded(embedded, psi.d1(), dim, tol);
  const BipartiteState moved = hilbert::apply_second(u23, folded, tol);
  const double residual = (moved.amplitudes() - direct.amplitudes).norm();
  if (residual > tol.tol_recon) {
    std::ostringstream out;
    out << "fine-graining unitary: action deviates from the direct "
           "construction by "
        << residual;
    throw CertificationError(out.str());
  }
  return FinegrainUnitary{std::move(u23), d2, d3, residual};
}

std::vector<ProbabilityReport> counting_probabilities(
    const TripartiteState& phi123, const Tolerances& tol) {
  const std::int64_t big_m = phi123.spectrum.denominator;
  if (big_m < 1 || phi123.amplitudes.size() !=
                       phi123.d1 * phi123.d2 * phi123.d3) {
    throw ValidationError("counting: malformed fine-grained state");
  }
  // Branch uniformity across the cut (system + second labels | third labels).
  const BipartiteState cut(phi123.amplitudes, phi123.d1 * phi123.d2,
                           phi123.d3, tol);
  const schmidt::SchmidtDecomposition dec = schmidt::canonical_schmidt(cut, tol);
  const double expected = 1.0 / std::sqrt(static_cast<double>(big_m));
  if (dec.coefficients.size() != big_m) {
    std::ostringstream out;
    out << "counting: expected " << big_m << " uniform branches, found "
        << dec.coefficients.size();
    throw CertificationError(out.str());
  }
  double uniformity = 0.0;
  for (Eigen::Index i = 0; i < dec.coefficients.size(); ++i) {
    uniformity = std::max(uniformity,
                          std::abs(dec.coefficients(i) - expected));
  }
  if (uniformity > tol.tol_op) {
    std::ostringstream out;
    out << "counting: branch amplitudes deviate from uniform by " << uniformity;
    throw CertificationError(out.str());
  }

  // Quadratic-form cross-check data: the first reduced density.
  const BipartiteState folded(phi123.amplitudes, phi123.d1,
                              phi123.d2 * phi123.d3, tol);
  const Matrix rho1 = hilbert::reduced_density(folded, 1, tol).matrix();

  std::vector<ProbabilityReport> reports;
  const auto& spectrum = phi123.spectrum;
  Eigen::Index offset = 0;
  for (std::size_t j = 0; j < spectrum.numerators.size(); ++j) {
    const std::int64_t m_j = spectrum.numerators[j];
    const Eigen::Index d_j = spectrum.multiplicities[j];
    const std::int64_t branch_count = static_cast<std::int64_t>(d_j) * m_j;
    const double value =
        static_cast<double>(branch_count) / static_cast<double>(big_m);

    // Independent cross-check: the projector weight under the quadratic form.
    const Matrix block = phi123.basis1.middleCols(offset, d_j);
    const Matrix projector = block * block.adjoint();
    const double quadratic = (projector * rho1).trace().real();

    std::ostringstream event;
    event << "eigen-subspace " << j << " (weight "
          << rational_text(m_j, big_m) << ", multiplicity " << d_j << ")";
    ProbabilityReport report =
        make_report(event.str(), value, Route::Counting);
    attach_rational(report, branch_count, big_m);
    report.residuals["branch_uniformity"] = uniformity;
    report.residuals["quadratic_form_gap"] = std::abs(value - quadratic);
    reports.push_back(std::move(report));

    for (Eigen::Index k = 0; k < d_j; ++k) {
      std::ostringstream label;
      label << "fine-grained vector (cluster " << j << ", copy " << k << ")";
      ProbabilityReport vector_report = make_report(
          label.str(),
          static_cast<double>(m_j) / static_cast<double>(big_m),
          Route::Counting);
      attach_rational(vector_report, m_j, big_m);
      vector_report.residuals["branch_uniformity"] = uniformity;
      reports.push_back(std::move(vector_report));
    }
    offset += d_j;
  }
  return reports;
}

ContinuityResult continuity_sequence(const DensityOperator& rho1, int n_max,
                                     Eigen::Index tracked_cluster,
                                     const Tolerances& tol) {
  if (n_max < 1) {
    throw ValidationError("continuity sequence: n_max must be >= 1");
  }
  const hilbert::SpectralDecomposition spec = hilbert::spectral(rho1, tol);
  const Eigen::Index clusters =
      static_cast<Eigen::Index>(spec.clusters.size());
  if (clusters == 0) {
    throw ValidationError("continuity sequence: density has rank 0");
  }
  if (tracked_cluster < 0 || tracked_cluster >= clusters) {
    throw ValidationError("continuity sequence: tracked cluster out of range");
  }
  std::int64_t rank = 0;
  for (const auto& c : spec.clusters) rank += c.multiplicity;

  ContinuityResult out;
  out.tracked_cluster = tracked_cluster;
  out.target = spec.clusters[tracked_cluster].value;

  // Family one: shared-denominator rational approximations under a growing
  // denominator budget.
  for (int n = 1; n <= n_max; ++n) {
    const std::int64_t budget =
        std::max<std::int64_t>(rank, std::int64_t{1} << std::min(n, 20));
    const RationalSpectrum rs = rational_spectrum(rho1, budget, tol);
    Matrix rho_n = Matrix::Zero(rho1.dim(), rho1.dim());
    for (Eigen::Index j = 0; j < rs.cluster_count(); ++j) {
      rho_n += (static_cast<double>(rs.numerators[j]) /
                static_cast<double>(rs.denominator)) *
               spec.clusters[j].projector;
    }
    ContinuityStep step;
    step.index = n;
    step.denominator_bound = budget;
    step.residual = (rho1.matrix() - rho_n).norm();
    step.probability = static_cast<double>(rs.numerators[tracked_cluster]) /
                       static_cast<double>(rs.denominator);
    step.exact = rs.exact;
    step.rho = std::move(rho_n);
    out.rational_family.push_back(std::move(step));
  }

  // Family two: renormalized truncations onto the leading clusters.
  for (Eigen::Index t = 1; t <= clusters; ++t) {
    double weight = 0.0;
    for (Eigen::Index j = 0; j < t; ++j) {
      weight += spec.clusters[j].value *
                static_cast<double>(spec.clusters[j].multiplicity);
    }
    Matrix rho_t = Matrix::Zero(rho1.dim(), rho1.dim());
    for (Eigen::Index j = 0; j < t; ++j) {
      rho_t += (spec.clusters[j].value / weight) * spec.clusters[j].projector;
    }
    ContinuityStep step;
    step.index = static_cast<int>(t);
    step.denominator_bound = 0;
    step.residual = (rho1.matrix() - rho_t).norm();
    step.probability = tracked_cluster < t
                           ? spec.clusters[tracked_cluster].value / weight
                           : 0.0;
    step.exact = t == clusters;
    step.rho = std::move(rho_t);
    out.truncation_family.push_back(std::move(step));
  }

  for (const auto* family : {&out.rational_family, &out.truncation_family}) {
    for (std::size_t i = 1; i < family->size(); ++i) {
      if ((*family)[i].residual > (*family)[i - 1].residual + 1e-12) {
        std::ostringstream msg;
        msg << "continuity sequence: residual increased from "
            << (*family)[i - 1].residual << " to " << (*family)[i].residual
            << " at step " << (*family)[i].index;
        throw CertificationError(msg.str());
      }
    }
  }
  return out;
}

ClosestDensity closest_eigenstate_density(const DensityOperator& rho,
                                          const Vector& phi,
                                          const Tolerances& tol) {
  if (phi.size() != rho.dim()) {
    throw ValidationError("closest density: vector has the wrong dimension");
  }
  require_unit(phi, "closest density", tol.tol_norm);
  const Eigen::Index dim = rho.dim();
  const Matrix p = phi * phi.adjoint();
  const Matrix p_perp = Matrix::Identity(dim, dim) - p;
  const double r_prime = (phi.adjoint() * rho.matrix() * phi)(0, 0).real();
  Matrix candidate = r_prime * p + p_perp * rho.matrix() * p_perp;
  candidate = ((candidate + candidate.adjoint()) / 2.0).eval();
  DensityOperator rho_prime(candidate, tol);
  const double distance = hilbert::hs_distance(rho.matrix(), candidate);
  return ClosestDensity{std::move(rho_prime), std::max(r_prime, 0.0),
                        distance};
}

OracleResult closest_oracle(const DensityOperator& rho, const Vector& phi,
                            std::uint64_t samples, std::uint64_t seed,
                            Execution exec, const Tolerances& tol) {
  if (rho.dim() > 6) {
    throw ValidationError(
        "closest-density oracle: dimension capped at 6 (desk scale)");
  }
  if (samples < 1 || samples > 100'000'000ULL) {
    throw ValidationError(
        "closest-density oracle: sample count out of range [1, 1e8]");
  }
  if (phi.size() != rho.dim()) {
    throw ValidationError("closest-density oracle: vector dimension mismatch");
  }
  require_unit(phi, "closest-density oracle", tol.tol_norm);

  const Eigen::Index dim = rho.dim();
  const Matrix p = phi * phi.adjoint();
  const Matrix p_perp = Matrix::Identity(dim, dim) - p;
  const Matrix target = rho.matrix();

  // Every sample draws from its own index-derived stream, so the distances
  // are identical for any execution order; the winner is resolved by
  // (distance, index).
  const auto sample_distance = [&](std::uint64_t i, Matrix* keep) {
    std::mt19937_64 rng(rnd::derive_seed(seed, i));
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double r = uniform(rng);
    Matrix tail;
    double weight = 0.0;
    do {
      const Matrix tau = rnd::random_density_matrix(dim, dim, rng);
      tail = p_perp * tau * p_perp;
      weight = tail.trace().real();
    } while (weight < 1e-12);
    Matrix candidate = r * p + (1.0 - r) * tail / weight;
    const double distance = hilbert::hs_distance(target, candidate);
    if (keep != nullptr) *keep = std::move(candidate);
    return distance;
  };

  std::vector<double> distances(samples);
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(samples); ++i) {
      distances[static_cast<std::uint64_t>(i)] =
          sample_distance(static_cast<std::uint64_t>(i), nullptr);
    }
  } else {
    for (std::uint64_t i = 0; i < samples; ++i) {
      distances[i] = sample_distance(i, nullptr);
    }
  }
  std::uint64_t winner = 0;
  for (std::uint64_t i = 1; i < samples; ++i) {
    if (distances[i] < distances[winner]) winner = i;
  }
  OracleResult out;
  out.samples = samples;
  out.best_distance = sample_distance(winner, &out.best_candidate);
  return out;
}

DensityOperator lueders_state(const DensityOperator& rho,
                              const std::vector<Matrix>& projectors,
                              const Tolerances& tol) {
  if (projectors.empty()) {
    throw ValidationError("projective state change: empty projector family");
  }
  const Eigen::Index dim = rho.dim();
  Matrix sum = Matrix::Zero(dim, dim);
  for (std::size_t a = 0; a < projectors.size(); ++a) {
    const Matrix& pa = projectors[a];
    if (pa.rows() != dim || pa.cols() != dim) {
      throw ValidationError("projective state change: projector dimension");
    }
    if (!hilbert::is_projector(pa, tol.tol_op)) {
      throw ValidationError("projective state change: member " +
                            std::to_string(a) + " is not a projector");
    }
    for (std::size_t b = a + 1; b < projectors.size(); ++b) {
      if ((pa * projectors[b]).norm() > tol.tol_op) {
        throw ValidationError(
            "projective state change: projectors are not orthogonal");
      }
    }
    sum += pa;
  }
  if ((sum - Matrix::Identity(dim, dim)).norm() > tol.tol_op) {
    throw ValidationError(
        "projective state change: projectors do not resolve the identity");
  }
  Matrix out = Matrix::Zero(dim, dim);
  for (const Matrix& pa : projectors) {
    out += pa * rho.matrix() * pa;
  }
  out = ((out + out.adjoint()) / 2.0).eval();
  return DensityOperator(std::move(out), tol);
}

SelectiveResult selective_lueders(const DensityOperator& rho, const Matrix& p,
                                  const Tolerances& tol) {
  if (p.rows() != rho.dim() || p.cols() != rho.dim()) {
    throw ValidationError("selective state change: projector dimension");
  }
  if (!hilbert::is_projector(p, tol.tol_op)) {
    throw ValidationError("selective state change: event is not a projector");
  }
  const double weight = (p * rho.matrix()).trace().real();
  if (weight < tol.eps_rank) {
    std::ostringstream out;
    out << "selective state change: zero-weight event (weight " << weight
        << ")";
    throw ValidationError(out.str());
  }
  Matrix state = p * rho.matrix() * p / weight;
  state = ((state + state.adjoint()) / 2.0).eval();
  return SelectiveResult{DensityOperator(std::move(state), tol), weight};
}

IsolatedResult isolated_state_limit(const Vector& psi, const Vector& phi,
                                    std::int64_t n_max,
                                    const Tolerances& tol) {
  const Eigen::Index dim = psi.size();
  if (dim < 2) {
    throw ValidationError("isolated-system limit: dimension must be >= 2");
  }
  if (phi.size() != dim) {
    throw ValidationError("isolated-system limit: vector dimension mismatch");
  }
  if (n_max < 10) {
    throw ValidationError("isolated-system limit: n_max must be >= 10");
  }
  require_unit(psi, "isolated-system limit", tol.tol_norm);
  require_unit(phi, "isolated-system limit", tol.tol_norm);

  const Matrix pure = psi * psi.adjoint();
  const Matrix p_perp = Matrix::Identity(dim, dim) - pure;
  const Matrix complement = p_perp / static_cast<double>(dim - 1);
  const double limit = std::norm(phi.dot(psi));

  IsolatedResult out;
  out.limit = limit;
  double fit_num = 0.0;
  double fit_den = 0.0;
  for (std::int64_t n = 10; n <= n_max; n *= 10) {
    const double lam = 1.0 / static_cast<double>(n);
    Matrix rho_n_mat = (1.0 - lam) * pure + lam * complement;
    rho_n_mat = ((rho_n_mat + rho_n_mat.adjoint()) / 2.0).eval();
    const DensityOperator rho_n(rho_n_mat, tol);

    // Explicit purification from the spectral decomposition.
    Vector amps = Vector::Zero(dim * dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double r = rho_n.eigenvalues()(i);
      if (r < tol.eps_rank) continue;
      const Vector v = rho_n.eigenvectors().col(i);
      const double c = std::sqrt(r);
      for (Eigen::Index k = 0; k < dim; ++k) {
        amps(k * dim + i) = c * v(k);
      }
    }
    const BipartiteState purification(amps, dim, dim, tol);
    const Matrix recovered =
        hilbert::reduced_density(purification, 1, tol).matrix();

    IsolatedStep step;
    step.n = n;
    step.probability = (phi.adjoint() * rho_n_mat * phi)(0, 0).real();
    step.deviation = std::abs(step.probability - limit);
    step.hs_residual = hilbert::hs_distance(rho_n_mat, pure);
    step.purification_residual = (recovered - rho_n_mat).norm();
    if (step.purification_residual > tol.tol_recon) {
      std::ostringstream msg;
      msg << "isolated-system limit: purification deviates by "
          << step.purification_residual << " at n = " << n;
      throw CertificationError(msg.str());
    }
    fit_num += step.deviation / static_cast<double>(n);
    fit_den += 1.0 / (static_cast<double>(n) * static_cast<double>(n));
    out.steps.push_back(step);
  }
  out.fitted_c = fit_den > 0.0 ? fit_num / fit_den : 0.0;
  for (const auto& step : out.steps) {
    out.fit_spread = std::max(
        out.fit_spread,
        std::abs(static_cast<double>(step.n) * step.deviation - out.fitted_c));
  }

  ProbabilityReport report = make_report(
      "unit-vector event against the isolated-system limit", limit,
      Route::Density);
  report.residuals["final_deviation"] = out.steps.back().deviation;
  report.residuals["fit_spread"] = out.fit_spread;
  out.report = std::move(report);
  return out;
}

ProbabilityReport born_probability(const DensityOperator& rho,
                                   const Vector& phi, const Tolerances& tol) {
  if (phi.size() != rho.dim()) {
    throw ValidationError("probability: vector event dimension mismatch");
  }
  require_unit(phi, "probability (vector event)", tol.tol_norm);
  const Complex raw = (phi.adjoint() * rho.matrix() * phi)(0, 0);
  ProbabilityReport report =
      make_report("unit-vector event", raw.real(), Route::Density);
  report.residuals["imaginary_part"] = std::abs(raw.imag());
  report.residuals["norm_gap"] = std::abs(phi.norm() - 1.0);
  return report;
}

ProbabilityReport born_probability(const DensityOperator& rho,
                                   const Matrix& event, const Tolerances& tol) {
  if (event.rows() != rho.dim() || event.cols() != rho.dim()) {
    throw ValidationError("probability: projector event dimension mismatch");
  }
  if (!hilbert::is_projector(event, tol.tol_op)) {
    throw ValidationError("probability: event is not a projector");
  }
  const Complex raw = (rho.matrix() * event).trace();
  const double rank = event.trace().real();
  std::ostringstream label;
  label << "projector event (rank " << std::llround(rank) << ")";
  ProbabilityReport report =
      make_report(label.str(), raw.real(), Route::Trace);
  report.residuals["imaginary_part"] = std::abs(raw.imag());
  return report;
}

AdditivityResult additivity_check(const DensityOperator& rho,
                                  const Matrix& whole,
                                  const std::vector<Matrix>& parts,
                                  const Tolerances& tol) {
  if (whole.rows() != rho.dim() || whole.cols() != rho.dim()) {
    throw ValidationError("additivity: event dimension mismatch");
  }
  if (!hilbert::is_projector(whole, tol.tol_op)) {
    throw ValidationError("additivity: whole event is not a projector");
  }
  if (parts.empty()) {
    throw ValidationError("additivity: empty decomposition");
  }
  Matrix sum = Matrix::Zero(rho.dim(), rho.dim());
  for (std::size_t a = 0; a < parts.size(); ++a) {
    if (parts[a].rows() != rho.dim() || parts[a].cols() != rho.dim()) {
      throw ValidationError("additivity: part dimension mismatch");
    }
    if (!hilbert::is_projector(parts[a], tol.tol_op)) {
      throw ValidationError("additivity: part " + std::to_string(a) +
                            " is not a projector");
    }
    for (std::size_t b = a + 1; b < parts.size(); ++b) {
      if ((parts[a] * parts[b]).norm() > tol.tol_op) {
        throw ValidationError("additivity: parts are not orthogonal");
      }
    }
    sum += parts[a];
  }
  if ((sum - whole).norm() > tol.tol_op) {
    throw ValidationError("additivity: parts do not sum to the whole event");
  }
  AdditivityResult out;
  out.whole = (rho.matrix() * whole).trace().real();
  for (const Matrix& part : parts) {
    out.sum_parts += (rho.matrix() * part).trace().real();
  }
  out.residual = std::abs(out.whole - out.sum_parts);
  out.ok = out.residual <= tol.tol_op;
  return out;
}

}  // namespace envkit::born
