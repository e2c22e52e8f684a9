#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "dynsamp/construction.hpp"
#include "dynsamp/core.hpp"
#include "dynsamp/operator.hpp"
#include "dynsamp/spectral.hpp"

namespace dynsamp {

// ---------------------------------------------------------------------------
// Space-time sampling
//
// A pattern is a list of probes (coordinate functionals or explicit vectors)
// with per-probe time budgets. Budgets are inclusive: budget L yields the
// L+1 samples <A^n f, g> for n = 0..L. A missing budget means "auto": the
// Krylov minimality index of the adjoint at the probe, the largest horizon
// at which the probe's measurement rows are still linearly independent.

struct Probe {
  std::variant<Index, Vec> value;

  static Probe coordinate(Index i) { return Probe{i}; }
  static Probe functional(Vec g) { return Probe{std::move(g)}; }

  Vec resolve(Index dim) const {
    if (std::holds_alternative<Index>(value)) {
      const Index i = std::get<Index>(value);
      if (i < 0 || i >= dim)
        fail(Errc::dimension_mismatch, "probe index " + std::to_string(i) + " outside [0, dim)");
      Vec e = Vec::Zero(dim);
      e(i) = Scalar(1);
      return e;
    }
    const Vec& g = std::get<Vec>(value);
    if (g.size() != dim) fail(Errc::dimension_mismatch, "probe vector length != operator dim");
    if (g.norm() == 0.0) fail(Errc::zero_vector, "probe vector must be nonzero");
    return g;
  }
};

struct PatternElement {
  Probe probe;
  std::optional<Index> budget;  // nullopt = auto
};

struct SamplingPattern {
  std::vector<PatternElement> elements;
};

struct SpaceTimeSamples {
  std::vector<std::vector<Scalar>> values;  // values[e] has budget_e + 1 entries
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Replaces every auto budget by minimality_index(A*, g): past that horizon
/// the rows ((A*)^n g)* contributed by the probe become linearly dependent.
inline SamplingPattern resolve_budgets(const EvolutionOperator& a, const SamplingPattern& pattern) {
  if (pattern.elements.empty()) fail(Errc::bad_spec, "sampling pattern has no elements");
  const EvolutionOperator astar = a.adjoint();
  SamplingPattern out;
  out.elements.reserve(pattern.elements.size());
  for (const PatternElement& el : pattern.elements) {
    Index budget;
    if (el.budget) {
      if (*el.budget < 0) fail(Errc::bad_spec, "budget must be >= 0");
      budget = *el.budget;
    } else {
      budget = minimality_index(astar, el.probe.resolve(a.dim()));
    }
    out.elements.push_back({el.probe, budget});
  }
  return out;
}

/// Stacked measurement operator: for each probe in order and each time
/// n = 0..budget ascending, the row ((A*)^n g)* — so that row * f = <A^n f, g>.
inline Mat build_measurement_matrix(const EvolutionOperator& a, const SamplingPattern& pattern) {
  if (pattern.elements.empty()) fail(Errc::bad_spec, "sampling pattern has no elements");
  const Index dim = a.dim();
  Index rows = 0;
  for (const PatternElement& el : pattern.elements) {
    if (!el.budget) fail(Errc::bad_spec, "build_measurement_matrix: unresolved auto budget");
    if (*el.budget < 0) fail(Errc::bad_spec, "budget must be >= 0");
    rows += *el.budget + 1;
  }
  const EvolutionOperator astar = a.adjoint();
  Mat b(rows, dim);
  Index r = 0;
  for (const PatternElement& el : pattern.elements) {
    Vec w = el.probe.resolve(dim);
    for (Index n = 0; n <= *el.budget; ++n) {
      b.row(r++) = w.adjoint();
      if (n < *el.budget) w = astar.apply(w);
    }
  }
  return b;
}

inline SpaceTimeSamples simulate_samples(const EvolutionOperator& a, const Vec& f,
                                         const SamplingPattern& pattern, double noise_sigma,
                                         std::uint64_t seed) {
  if (f.size() != a.dim()) fail(Errc::dimension_mismatch, "simulate_samples: signal length");
  if (noise_sigma < 0.0) fail(Errc::bad_spec, "simulate_samples: noise_sigma must be >= 0");
  const SamplingPattern resolved = resolve_budgets(a, pattern);

  Index max_budget = 0;
  for (const PatternElement& el : resolved.elements) max_budget = std::max(max_budget, *el.budget);
  std::vector<Vec> iterates;  // A^n f for n = 0..max_budget
  iterates.reserve(static_cast<std::size_t>(max_budget) + 1);
  iterates.push_back(f);
  for (Index n = 1; n <= max_budget; ++n) iterates.push_back(a.apply(iterates.back()));

  Rng rng(seed);
  SpaceTimeSamples out;
  out.noise_sigma = noise_sigma;
  out.seed = seed;
  for (const PatternElement& el : resolved.elements) {
    const Vec g = el.probe.resolve(a.dim());
    std::vector<Scalar> row;
    row.reserve(static_cast<std::size_t>(*el.budget) + 1);
    for (Index n = 0; n <= *el.budget; ++n) {
      Scalar y = inner(iterates[static_cast<std::size_t>(n)], g);
      if (noise_sigma > 0.0) y += noise_sigma * rng.complex_gaussian();
      row.push_back(y);
    }
    out.values.push_back(std::move(row));
  }
  return out;
}

struct RecoveryResult {
  Vec f_hat;
  double residual = 0.0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double condition = 0.0;
};

/// Least-squares recovery from the stacked samples. Throws Underdetermined
/// (carrying the numerical rank) when the measurement matrix does not
/// determine f; otherwise returns the unique residual minimizer.
inline RecoveryResult recover(const SpaceTimeSamples& samples, const EvolutionOperator& a,
                              const SamplingPattern& pattern) {
  const SamplingPattern resolved = resolve_budgets(a, pattern);
  if (samples.values.size() != resolved.elements.size())
    fail(Errc::dimension_mismatch, "recover: sample rows != pattern elements");
  for (std::size_t e = 0; e < samples.values.size(); ++e)
    if (static_cast<Index>(samples.values[e].size()) != *resolved.elements[e].budget + 1)
      fail(Errc::dimension_mismatch, "recover: sample row length != budget + 1");

  const Mat b = build_measurement_matrix(a, resolved);
  Vec y(b.rows());
  Index r = 0;
  for (const auto& row : samples.values)
    for (const Scalar& v : row) y(r++) = v;

  Eigen::JacobiSVD<Mat> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVec sv = svd.singularValues();
  const Index rank = numerical_rank(sv, rank_tol());
  if (rank < a.dim()) throw UnderdeterminedError(rank, a.dim());

  // Full column rank: the pseudoinverse solve is the unique minimizer.
  Vec coeffs = svd.matrixU().adjoint() * y;
  for (Index i = 0; i < sv.size(); ++i) coeffs(i) /= sv(i);
  RecoveryResult out;
  out.f_hat = svd.matrixV() * coeffs;
  out.residual = (b * out.f_hat - y).norm();
  out.sigma_max = sv(0);
  out.sigma_min = sv(sv.size() - 1);
  out.condition = out.sigma_max / out.sigma_min;
  return out;
}

struct RecoverabilityResult {
  bool recoverable = false;
  std::optional<Index> witness;  // first eigenvalue index whose eigenspace is undersampled
};

/// Recoverability from iterated samples, decided spectrally: f is
/// determined by {<A^n f, g_i>} iff for every eigenvalue of the diagonalized
/// adjoint the projected probes span the full eigenspace.
inline RecoverabilityResult recoverability_check(const std::vector<Vec>& b_columns,
                                                 const SpectralData& d_spectral) {
  const std::optional<Index> witness = projected_span_witness(d_spectral, b_columns);
  return {!witness.has_value(), witness};
}

struct StabilityBounds {
  double C1 = 0.0;
  double C2 = 0.0;
};

/// Optimal constants in C1*||f||^2 <= sum |<A^n f, g>|^2 <= C2*||f||^2 for
/// the truncated system: the squared extreme singular values of the
/// measurement matrix.
inline StabilityBounds stability_bounds(const EvolutionOperator& a,
                                        const SamplingPattern& pattern) {
  const Mat b = build_measurement_matrix(a, resolve_budgets(a, pattern));
  const RealVec sv = singular_values(b);
  StabilityBounds out;
  out.C2 = sv(0) * sv(0);
  out.C1 = b.rows() < b.cols() ? 0.0 : sv(sv.size() - 1) * sv(sv.size() - 1);
  return out;
}

}  // namespace dynsamp
