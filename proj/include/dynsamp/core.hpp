#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dynsamp {

using Scalar = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RealVec = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Errors

enum class Errc {
  dimension_mismatch,
  not_normal,
  cluster_ambiguity,
  not_hermitian,
  not_psd,
  bad_spec,
  underdetermined,
  not_in_open_disk,
  duplicate_point,
  no_witness,
  norm_not_below_one,
  not_contraction,
  zero_vector,
  unknown_kind,
  config_invalid,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::not_normal: return "NotNormal";
    case Errc::cluster_ambiguity: return "ClusterAmbiguity";
    case Errc::not_hermitian: return "NotHermitian";
    case Errc::not_psd: return "NotPSD";
    case Errc::bad_spec: return "BadSpec";
    case Errc::underdetermined: return "Underdetermined";
    case Errc::not_in_open_disk: return "NotInOpenDisk";
    case Errc::duplicate_point: return "DuplicatePoint";
    case Errc::no_witness: return "NoWitness";
    case Errc::norm_not_below_one: return "NormNotBelowOne";
    case Errc::not_contraction: return "NotContraction";
    case Errc::zero_vector: return "ZeroVector";
    case Errc::unknown_kind: return "UnknownKind";
    case Errc::config_invalid: return "ConfigInvalid";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

/// Thrown by recovery when the measurement matrix does not determine the
/// state; carries the numerical rank that was found.
class UnderdeterminedError : public Error {
 public:
  UnderdeterminedError(Index rank, Index needed)
      : Error(Errc::underdetermined,
              "numerical rank " + std::to_string(rank) + " < dimension " +
                  std::to_string(needed)),
        rank_(rank) {}
  Index rank() const { return rank_; }

 private:
  Index rank_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

// ---------------------------------------------------------------------------
// Global rank threshold
//
// Every rank decision in the library uses the same relative singular-value
// threshold. DYNSAMP_RANK_TOL overrides the default.

inline double rank_tol() {
  static const double value = [] {
    if (const char* s = std::getenv("DYNSAMP_RANK_TOL")) {
      char* end = nullptr;
      const double v = std::strtod(s, &end);
      if (end != s && v > 0.0 && std::isfinite(v)) return v;
    }
    return 1e-10;
  }();
  return value;
}

// ---------------------------------------------------------------------------
// Small linear-algebra helpers

/// Inner product, linear in the first slot and conjugate-linear in the second.
inline Scalar inner(const Vec& f, const Vec& g) { return g.dot(f); }

inline bool all_finite(const Mat& m) { return m.allFinite(); }

inline void require_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) fail(Errc::bad_spec, std::string(what) + " contains non-finite entries");
}

inline RealVec singular_values(const Mat& m) {
  if (m.size() == 0) return RealVec();
  return Eigen::JacobiSVD<Mat>(m).singularValues();
}

inline double operator_norm(const Mat& m) {
  const RealVec sv = singular_values(m);
  return sv.size() == 0 ? 0.0 : sv(0);
}

/// Count of singular values above tol * max(sigma_max, scale_floor).
/// scale_floor anchors the threshold when the matrix is pure noise (e.g. the
/// stack of projected vectors that are all mathematically zero).
inline Index numerical_rank(const RealVec& sv, double tol = rank_tol(), double scale_floor = 0.0) {
  if (sv.size() == 0) return 0;
  const double smax = sv(0);
  if (smax <= 0.0 && scale_floor <= 0.0) return 0;
  const double thresh = tol * std::max(smax, scale_floor);
  Index r = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > thresh) ++r;
  return r;
}

inline Index numerical_rank(const Mat& m, double tol = rank_tol(), double scale_floor = 0.0) {
  return numerical_rank(singular_values(m), tol, scale_floor);
}

/// Rotate a vector so its first coordinate of non-negligible magnitude is
/// real and positive. Gives eigenvector phases a reproducible convention.
inline void normalize_phase(Eigen::Ref<Vec> v) {
  double amax = 0.0;
  for (Index i = 0; i < v.size(); ++i) amax = std::max(amax, std::abs(v(i)));
  if (amax == 0.0) return;
  for (Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > 1e-12 * amax) {
      v *= std::conj(v(i)) / a;
      return;
    }
  }
}

struct HermitianEigensystem {
  RealVec values;  // descending
  Mat vectors;     // orthonormal columns, phase-normalized
};

/// Eigensystem of a Hermitian matrix, eigenvalues sorted descending.
/// Exactly diagonal input takes a fast path that preserves the entries
/// bit-for-bit (coordinate eigenvectors, no iterative solve).
inline HermitianEigensystem hermitian_eigensystem(const Mat& h) {
  const Index n = h.rows();
  if (h.cols() != n) fail(Errc::dimension_mismatch, "hermitian_eigensystem needs a square matrix");
  bool diagonal = true;
  for (Index j = 0; j < n && diagonal; ++j)
    for (Index i = 0; i < n; ++i)
      if (i != j && h(i, j) != Scalar(0)) {
        diagonal = false;
        break;
      }
  HermitianEigensystem out;
  if (diagonal) {
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      return h(a, a).real() > h(b, b).real();
    });
    out.values.resize(n);
    out.vectors = Mat::Zero(n, n);
    for (Index k = 0; k < n; ++k) {
      const Index i = order[static_cast<std::size_t>(k)];
      out.values(k) = h(i, i).real();
      out.vectors(i, k) = Scalar(1);
    }
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.adjoint()));
  out.values = es.eigenvalues().reverse();
  out.vectors = Mat(n, n);
  for (Index k = 0; k < n; ++k) {
    out.vectors.col(k) = es.eigenvectors().col(n - 1 - k);
    normalize_phase(out.vectors.col(k));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Seeded randomness
//
// All randomness flows through explicit seeds. Gaussian draws use Box-Muller
// on top of mt19937_64 so a given seed reproduces the same stream on every
// platform, independent of the standard library's distribution internals.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal.
  double gaussian() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  /// Complex with independent standard-normal real and imaginary parts.
  Scalar complex_gaussian() {
    const double re = gaussian();
    const double im = gaussian();
    return {re, im};
  }

  /// Independent generator for substream `stream`; stable under reordering
  /// of sibling streams.
  Rng derive(std::uint64_t stream) const {
    return Rng(splitmix64(seed_ ^ splitmix64(stream + 0x51700000ULL)));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

inline Vec random_gaussian_vector(Rng& rng, Index n) {
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.complex_gaussian();
  return v;
}

inline Mat random_gaussian_matrix(Rng& rng, Index rows, Index cols) {
  Mat m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.complex_gaussian();
  return m;
}

/// Haar-like random unitary via QR of a complex Gaussian matrix with the
/// R-diagonal phase fixed.
inline Mat random_unitary(Rng& rng, Index n) {
  const Mat g = random_gaussian_matrix(rng, n, n);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    const Scalar d = r(j, j);
    const double a = std::abs(d);
    q.col(j) *= (a > 0.0) ? d / a : Scalar(1);
  }
  return q;
}

/// Random dense matrix rescaled to the requested largest singular value.
inline Mat random_with_norm(Rng& rng, Index n, double norm) {
  Mat g = random_gaussian_matrix(rng, n, n);
  const double s = operator_norm(g);
  if (s > 0.0) g *= norm / s;
  return g;
}

}  // namespace dynsamp
