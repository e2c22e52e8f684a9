#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dynsamp/core.hpp"
#include "dynsamp/operator.hpp"
#include "dynsamp/spectral.hpp"

namespace dynsamp {

// ---------------------------------------------------------------------------
// Frame analysis of iterated systems {A^n g : g in G, n >= 0}
//
// Infinite sums are always reported as a truncated value plus a rigorous
// bound on everything dropped. The tail bound uses ||A^n|| <= ||A^m||^q * M
// (n = qm + r, M = max norm of the first m powers), so it is finite exactly
// when some power of A has norm < 1 — i.e. when the spectral radius is < 1.

struct FrameReport {
  Index truncation = 0;   // N: terms n = 0..N-1 were summed
  double lower_est = 0.0; // extreme eigenvalues of the truncated frame operator
  double upper_est = 0.0;
  double tail_bound = std::numeric_limits<double>::infinity();
  bool tail_summable = false;
  bool bessel = false;       // upper frame bound certified
  bool lower_frame = false;  // lower bound survives the tail perturbation
  std::string notes;
};

namespace detail {

struct PowerTail {
  bool summable = false;
  double bound = std::numeric_limits<double>::infinity();
};

/// Rigorous upper bound on sum_{n>=N} ||A^n||^2, or "not summable" when no
/// power with norm < 1 is found among the first 512.
inline PowerTail power_tail(const EvolutionOperator& a, Index n_from) {
  const double s = a.norm();
  if (s < 1.0) {
    // ||A^n|| <= s^n: plain geometric tail.
    return {true, std::pow(s, 2.0 * static_cast<double>(n_from)) / (1.0 - s * s)};
  }
  if (a.is_diagonal() || a.is_circulant()) return {};  // ||A^n|| = s^n >= 1 exactly

  // Hunt for a power with norm < 1; then block n = qm + r and bound
  // sum_{n>=N} ||A^n||^2 <= m * M^2 * c^{2 floor(N/m)} / (1 - c^2).
  constexpr Index kMaxBlock = 512;
  const Mat ad = a.to_dense();
  Mat p = ad;
  double max_norm = 1.0;  // covers ||A^0||
  for (Index m = 1; m <= kMaxBlock; ++m) {
    const double c = operator_norm(p);
    if (c < 1.0) {
      const double q0 = std::floor(static_cast<double>(n_from) / static_cast<double>(m));
      const double bound = static_cast<double>(m) * max_norm * max_norm *
                           std::pow(c, 2.0 * q0) / (1.0 - c * c);
      return {true, bound};
    }
    max_norm = std::max(max_norm, c);
    if (m < kMaxBlock) p = p * ad;
  }
  return {};
}

}  // namespace detail

inline FrameReport frame_bounds_truncated(const EvolutionOperator& a, const std::vector<Vec>& g,
                                          Index n_trunc) {
  if (n_trunc < 1) fail(Errc::bad_spec, "frame_bounds_truncated: N must be >= 1");
  if (g.empty()) fail(Errc::bad_spec, "frame_bounds_truncated: empty generator set");
  const Index dim = a.dim();
  double gens_energy = 0.0;
  for (const Vec& v : g) {
    if (v.size() != dim) fail(Errc::dimension_mismatch, "frame_bounds_truncated: generator length");
    gens_energy += v.squaredNorm();
  }

  Mat s = Mat::Zero(dim, dim);
  for (const Vec& v : g) {
    Vec w = v;
    for (Index n = 0; n < n_trunc; ++n) {
      s += w * w.adjoint();
      if (n + 1 < n_trunc) w = a.apply(w);
    }
  }

  const HermitianEigensystem es = hermitian_eigensystem(s);
  FrameReport report;
  report.truncation = n_trunc;
  report.upper_est = es.values(0);
  report.lower_est = std::max(0.0, es.values(es.values.size() - 1));

  const detail::PowerTail tail = detail::power_tail(a, n_trunc);
  report.tail_summable = tail.summable;
  if (tail.summable) {
    report.tail_bound = gens_energy * tail.bound;
    report.bessel = true;
    report.lower_frame = report.lower_est - report.tail_bound > 0.0;
  } else {
    report.notes = "TailNotSummable: no power of A has norm < 1; "
                   "estimates are one-sided truncations";
  }
  return report;
}

/// Truncation chosen by the tail rule: grow N until the dropped tail is
/// below 1e-8 of the upper estimate (cap 10^4). When the tail never becomes
/// summable the fixed fallback N = 256 is reported instead.
inline FrameReport frame_bounds_auto(const EvolutionOperator& a, const std::vector<Vec>& g) {
  Index n_trunc = 8;
  FrameReport report = frame_bounds_truncated(a, g, n_trunc);
  if (!report.tail_summable) return frame_bounds_truncated(a, g, 256);
  while (n_trunc < 10000 &&
         report.tail_bound > 1e-8 * std::max(report.upper_est, 1e-300)) {
    n_trunc = std::min<Index>(2 * n_trunc, 10000);
    report = frame_bounds_truncated(a, g, n_trunc);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Carleson separation condition

struct CarlesonReport {
  std::vector<double> per_n_products;  // prod_{k!=n} |l_n-l_k| / |1 - conj(l_k) l_n|
  double infimum = 1.0;
  bool delta_pass(double delta) const { return infimum >= delta; }
};

inline CarlesonReport carleson_infimum(const std::vector<Scalar>& lambda) {
  if (lambda.empty()) fail(Errc::bad_spec, "carleson_infimum: empty point list");
  for (std::size_t k = 0; k < lambda.size(); ++k)
    if (std::abs(lambda[k]) >= 1.0)
      fail(Errc::not_in_open_disk,
           "carleson_infimum: |lambda[" + std::to_string(k) + "]| >= 1");
  for (std::size_t i = 0; i < lambda.size(); ++i)
    for (std::size_t j = i + 1; j < lambda.size(); ++j)
      if (lambda[i] == lambda[j])
        fail(Errc::duplicate_point, "carleson_infimum: lambda[" + std::to_string(i) + "] == lambda[" +
                                        std::to_string(j) + "], products vanish");

  CarlesonReport report;
  report.per_n_products.reserve(lambda.size());
  for (std::size_t n = 0; n < lambda.size(); ++n) {
    double prod = 1.0;  // empty product
    for (std::size_t k = 0; k < lambda.size(); ++k) {
      if (k == n) continue;
      prod *= std::abs(lambda[n] - lambda[k]) / std::abs(1.0 - std::conj(lambda[k]) * lambda[n]);
    }
    report.per_n_products.push_back(prod);
  }
  report.infimum = *std::min_element(report.per_n_products.begin(), report.per_n_products.end());
  return report;
}

// ---------------------------------------------------------------------------
// One-point frame characterization (diagonal operator, single generator)
//
// Verdicts are reported per condition rather than thrown: a failing
// condition is a finding about the system, not a malformed input. The decay
// condition |lambda_k| -> 1 is asymptotic and undecidable from a finite
// list, so it is surfaced as trend data only.

struct OnePointFrameReport {
  bool in_disk = false;                    // (i) all |lambda_k| < 1
  double max_modulus = 0.0;                // (ii) trend data
  std::vector<double> moduli_sorted;       // (ii) trend data, ascending
  std::optional<CarlesonReport> carleson;  // (iii) absent when not evaluable
  bool carleson_pass = false;              // (iii) infimum >= delta
  std::vector<double> m_abs;               // (iv) |m_k| = |b_k| / sqrt(1-|lambda_k|^2)
  bool m_bounded = false;                  // (iv) C1 <= |m_k| <= C2 for all k
  std::string notes;
};

inline OnePointFrameReport one_point_frame_check(const std::vector<Scalar>& lambda, const Vec& b,
                                                 double delta,
                                                 std::pair<double, double> c_bounds) {
  if (static_cast<Index>(lambda.size()) != b.size())
    fail(Errc::dimension_mismatch, "one_point_frame_check: len(lambda) != len(b)");
  if (lambda.empty()) fail(Errc::bad_spec, "one_point_frame_check: empty system");

  OnePointFrameReport report;
  report.in_disk = true;
  for (const Scalar& l : lambda) {
    const double m = std::abs(l);
    report.moduli_sorted.push_back(m);
    if (m >= 1.0) report.in_disk = false;
  }
  std::sort(report.moduli_sorted.begin(), report.moduli_sorted.end());
  report.max_modulus = report.moduli_sorted.back();

  if (!report.in_disk) {
    report.notes = "points outside the open disk; separation and m-boundedness not evaluated";
    return report;
  }

  try {
    report.carleson = carleson_infimum(lambda);
    report.carleson_pass = report.carleson->delta_pass(delta);
  } catch (const Error& e) {
    if (e.code() != Errc::duplicate_point) throw;
    report.carleson_pass = false;
    report.notes = e.what();
  }

  report.m_bounded = true;
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    const double mk = std::abs(b(static_cast<Index>(k))) /
                      std::sqrt(1.0 - std::norm(lambda[k]));
    report.m_abs.push_back(mk);
    // Slack of 1e-12 absorbs the roundoff of the m_k arithmetic itself.
    const double lo = c_bounds.first - 1e-12 * std::max(1.0, c_bounds.first);
    const double hi = c_bounds.second + 1e-12 * std::max(1.0, c_bounds.second);
    if (mk < lo || mk > hi) report.m_bounded = false;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Necessary conditions for iterated frames

struct DecayReport {
  bool decays = false;
  std::vector<double> profile;  // ||(A*)^n f|| for n = 0..n_max
  // For normal A: whether (A*)^n f -> 0 holds analytically (no eigenvector
  // mass on eigenvalues of modulus >= 1). Absent for non-normal A.
  std::optional<bool> analytic;
  std::string notes;
};

inline DecayReport power_decay_check(const EvolutionOperator& a, const Vec& f, Index n_max,
                                     double tol) {
  if (n_max < 1) fail(Errc::bad_spec, "power_decay_check: n_max must be >= 1");
  if (f.size() != a.dim()) fail(Errc::dimension_mismatch, "power_decay_check: signal length");
  if (tol < 0.0) fail(Errc::bad_spec, "power_decay_check: tol must be >= 0");

  DecayReport report;
  const EvolutionOperator astar = a.adjoint();
  Vec w = f;
  report.profile.push_back(w.norm());
  for (Index n = 1; n <= n_max; ++n) {
    w = astar.apply(w);
    report.profile.push_back(w.norm());
  }
  report.decays = report.profile.back() <= tol * f.norm();

  if (is_normal(a)) {
    try {
      const SpectralData sd = spectral_decomposition(a);
      double bad_mass = 0.0;
      for (std::size_t j = 0; j < sd.eigenvalues.size(); ++j)
        if (std::abs(sd.eigenvalues[j]) > 1.0 - 1e-10)
          bad_mass += (sd.projections[j] * f).squaredNorm();
      report.analytic = std::sqrt(bad_mass) <= rank_tol() * f.norm();
    } catch (const Error& e) {
      if (e.code() != Errc::cluster_ambiguity) throw;
      report.notes = std::string("analytic certificate skipped: ") + e.what();
    }
  }
  return report;
}

struct NecessaryConditionsReport {
  bool pass = false;
  std::optional<Scalar> witness;  // first eigenvalue violating the conditions
  double min_modulus = 0.0;
  double max_modulus = 0.0;
  std::string notes;
};

/// For the iterated system of a normal operator to be a frame it is
/// necessary that every eigenvalue lies strictly inside the unit disk: a
/// modulus > 1 breaks the Bessel bound, and a unit-modulus eigenvalue is an
/// atom on the circle where only an absolutely continuous part may live.
/// Extreme moduli are recorded for the lower-bound diagnostic (spectrum
/// accumulating near the circle has no finite-dimensional witness).
inline NecessaryConditionsReport spectral_necessary_conditions(const EvolutionOperator& a) {
  if (!is_normal(a)) fail(Errc::not_normal, "spectral_necessary_conditions: operator not normal");
  Vec values;
  Mat vectors;
  detail::normal_eigenpairs(a, values, vectors);

  NecessaryConditionsReport report;
  report.pass = true;
  report.min_modulus = values.cwiseAbs().minCoeff();
  report.max_modulus = values.cwiseAbs().maxCoeff();
  constexpr double kCircleBand = 1e-10;
  for (Index k = 0; k < values.size(); ++k) {
    const double m = std::abs(values(k));
    if (m > 1.0 + kCircleBand) {
      report.pass = false;
      report.witness = values(k);
      report.notes = "eigenvalue outside the closed unit disk";
      break;
    }
    if (std::abs(m - 1.0) <= kCircleBand) {
      report.pass = false;
      report.witness = values(k);
      report.notes = "unit-modulus eigenvalue (atom on the circle)";
      break;
    }
  }
  return report;
}

struct NormBoundWitness {
  double bound = 0.0;     // (sum ||g||^2) * ||A||^{2N} / (1 - ||A||^2)
  double realized = 0.0;  // frame sum evaluated at the witness
  Vec witness;            // unit f orthogonal to {A^n g : n < N}
};

/// Witness construction showing ||A|| < 1 forbids a lower frame bound: a
/// unit f orthogonal to the first N iterate layers has frame sum at most
/// the geometric tail, which -> 0 as N grows.
inline NormBoundWitness norm_lower_bound_check(const EvolutionOperator& a,
                                               const std::vector<Vec>& g, Index n_layers) {
  if (n_layers < 1) fail(Errc::bad_spec, "norm_lower_bound_check: N must be >= 1");
  if (g.empty()) fail(Errc::bad_spec, "norm_lower_bound_check: empty generator set");
  const Index dim = a.dim();
  for (const Vec& v : g)
    if (v.size() != dim) fail(Errc::dimension_mismatch, "norm_lower_bound_check: generator length");
  const double s = a.norm();
  if (s >= 1.0)
    fail(Errc::norm_not_below_one, "norm_lower_bound_check: ||A|| = " + std::to_string(s));
  const Index span_cols = n_layers * static_cast<Index>(g.size());
  if (span_cols >= dim)
    fail(Errc::no_witness, "norm_lower_bound_check: N*|G| = " + std::to_string(span_cols) +
                               " >= dim = " + std::to_string(dim));

  Mat stack(dim, span_cols);
  Index c = 0;
  for (const Vec& v : g) {
    Vec w = v;
    for (Index n = 0; n < n_layers; ++n) {
      stack.col(c++) = w;
      if (n + 1 < n_layers) w = a.apply(w);
    }
  }
  // Fewer columns than rows: the last left singular vector spans a direction
  // orthogonal to every column.
  Eigen::JacobiSVD<Mat> svd(stack, Eigen::ComputeFullU);
  Vec f = svd.matrixU().col(dim - 1);
  normalize_phase(f);

  NormBoundWitness out;
  out.witness = f;
  double energy = 0.0;
  for (const Vec& v : g) energy += v.squaredNorm();
  out.bound = energy * std::pow(s, 2.0 * static_cast<double>(n_layers)) / (1.0 - s * s);

  // Frame sum at f, summed until the geometric term bound is negligible.
  const EvolutionOperator astar = a.adjoint();
  Vec w = f;  // (A*)^n f
  for (Index n = 0; n < 100000; ++n) {
    for (const Vec& v : g) out.realized += std::norm(inner(w, v));
    const double term_bound = energy * std::pow(s, 2.0 * static_cast<double>(n + 1));
    if (term_bound < 1e-20 * std::max(out.bound, 1e-30) && n + 1 >= n_layers) break;
    w = astar.apply(w);
  }
  return out;
}

struct MinimalityDefect {
  bool complete = false;
  bool redundant = false;  // some element can be removed without losing completeness
  std::vector<Index> removable_indices;
};

/// Completeness and redundancy of the truncated system {A^n g : n < N}.
/// Flat indices follow the stacking order: generators outer, times inner.
inline MinimalityDefect minimality_defect(const EvolutionOperator& a, const std::vector<Vec>& g,
                                          Index n_layers) {
  if (n_layers < 1) fail(Errc::bad_spec, "minimality_defect: N must be >= 1");
  if (g.empty()) fail(Errc::bad_spec, "minimality_defect: empty generator set");
  const Index dim = a.dim();
  for (const Vec& v : g)
    if (v.size() != dim) fail(Errc::dimension_mismatch, "minimality_defect: generator length");

  const Index cols = n_layers * static_cast<Index>(g.size());
  Mat stack(dim, cols);
  Index c = 0;
  for (const Vec& v : g) {
    Vec w = v;
    for (Index n = 0; n < n_layers; ++n) {
      stack.col(c++) = w;
      if (n + 1 < n_layers) w = a.apply(w);
    }
  }

  MinimalityDefect out;
  out.complete = numerical_rank(singular_values(stack), rank_tol()) == dim;
  if (!out.complete || cols == 1) return out;

  for (Index drop = 0; drop < cols; ++drop) {
    Mat reduced(dim, cols - 1);
    reduced.leftCols(drop) = stack.leftCols(drop);
    reduced.rightCols(cols - 1 - drop) = stack.rightCols(cols - 1 - drop);
    if (numerical_rank(singular_values(reduced), rank_tol()) == dim)
      out.removable_indices.push_back(drop);
  }
  out.redundant = !out.removable_indices.empty();
  return out;
}

struct CompletenessResult {
  bool complete = false;
  std::optional<Index> witness;  // first eigenvalue whose eigenspace is undercovered
};

/// Completeness of the full iterated system {A^n g : g in G, n >= 0} for a
/// normal operator, decided classwise: the projections of G must span every
/// eigenspace. Equivalent to the rank of the Krylov stack at N = dim.
inline CompletenessResult iterative_completeness_check(const SpectralData& a_spectral,
                                                       const std::vector<Vec>& g) {
  const std::optional<Index> witness = projected_span_witness(a_spectral, g);
  return {!witness.has_value(), witness};
}

}  // namespace dynsamp
