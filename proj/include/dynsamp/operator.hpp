#pragma once

#include <optional>
#include <string>
#include <variant>

#include "dynsamp/core.hpp"

namespace dynsamp {

// ---------------------------------------------------------------------------
// Evolution operators
//
// The operator that drives the system, in one of four representations:
//   Dense      arbitrary square matrix
//   Diagonal   multiplication by a fixed eigenvalue list (normal)
//   Circulant  cyclic convolution on Z_N, first matrix column = kernel (normal)
//   Shift      nilpotent coordinate shift, e_i -> e_{i+1}, e_{N-1} -> 0
//
// The shift variant keeps an orientation flag so its adjoint stays a shift
// and adjoint(adjoint(A)) == A holds structurally for every variant.

struct DenseOp {
  Mat matrix;
};

struct DiagonalOp {
  Vec lambda;
};

struct CirculantOp {
  Vec kernel;
};

struct ShiftOp {
  Index dim = 0;
  bool star = false;  // false: raise indices; true: the adjoint (lower)
};

class EvolutionOperator {
 public:
  using Payload = std::variant<DenseOp, DiagonalOp, CirculantOp, ShiftOp>;

  static EvolutionOperator dense(Mat m) {
    if (m.rows() != m.cols()) fail(Errc::bad_spec, "dense operator must be square");
    if (m.size() == 0) fail(Errc::bad_spec, "dense operator must be non-empty");
    require_finite(m, "dense operator");
    return EvolutionOperator(DenseOp{std::move(m)});
  }

  static EvolutionOperator diagonal(Vec lambda) {
    if (lambda.size() == 0) fail(Errc::bad_spec, "diagonal operator needs eigenvalues");
    require_finite(lambda, "diagonal operator");
    return EvolutionOperator(DiagonalOp{std::move(lambda)});
  }

  static EvolutionOperator circulant(Vec kernel) {
    if (kernel.size() == 0) fail(Errc::bad_spec, "circulant operator needs a kernel");
    require_finite(kernel, "circulant kernel");
    return EvolutionOperator(CirculantOp{std::move(kernel)});
  }

  static EvolutionOperator shift(Index n) {
    if (n <= 0) fail(Errc::bad_spec, "shift operator needs positive dimension");
    return EvolutionOperator(ShiftOp{n, false});
  }

  static EvolutionOperator identity(Index n) { return diagonal(Vec::Ones(n)); }

  Index dim() const {
    return std::visit(
        [](const auto& op) -> Index {
          using T = std::decay_t<decltype(op)>;
          if constexpr (std::is_same_v<T, DenseOp>) return op.matrix.rows();
          if constexpr (std::is_same_v<T, DiagonalOp>) return op.lambda.size();
          if constexpr (std::is_same_v<T, CirculantOp>) return op.kernel.size();
          if constexpr (std::is_same_v<T, ShiftOp>) return op.dim;
        },
        payload_);
  }

  Vec apply(const Vec& f) const {
    if (f.size() != dim()) fail(Errc::dimension_mismatch, "apply: vector length != operator dim");
    return std::visit(
        [&](const auto& op) -> Vec {
          using T = std::decay_t<decltype(op)>;
          if constexpr (std::is_same_v<T, DenseOp>) {
            return op.matrix * f;
          } else if constexpr (std::is_same_v<T, DiagonalOp>) {
            return op.lambda.cwiseProduct(f);
          } else if constexpr (std::is_same_v<T, CirculantOp>) {
            const Index n = op.kernel.size();
            Vec out = Vec::Zero(n);
            for (Index j = 0; j < n; ++j) {
              Scalar acc(0);
              for (Index k = 0; k < n; ++k) acc += op.kernel(((j - k) % n + n) % n) * f(k);
              out(j) = acc;
            }
            return out;
          } else {
            const Index n = op.dim;
            Vec out = Vec::Zero(n);
            if (!op.star) {
              for (Index i = 0; i + 1 < n; ++i) out(i + 1) = f(i);
            } else {
              for (Index i = 0; i + 1 < n; ++i) out(i) = f(i + 1);
            }
            return out;
          }
        },
        payload_);
  }

  EvolutionOperator adjoint() const {
    return std::visit(
        [](const auto& op) -> EvolutionOperator {
          using T = std::decay_t<decltype(op)>;
          if constexpr (std::is_same_v<T, DenseOp>) {
            return EvolutionOperator(DenseOp{op.matrix.adjoint()});
          } else if constexpr (std::is_same_v<T, DiagonalOp>) {
            return EvolutionOperator(DiagonalOp{op.lambda.conjugate()});
          } else if constexpr (std::is_same_v<T, CirculantOp>) {
            const Index n = op.kernel.size();
            Vec adj(n);
            for (Index j = 0; j < n; ++j) adj(j) = std::conj(op.kernel(((n - j) % n)));
            return EvolutionOperator(CirculantOp{std::move(adj)});
          } else {
            return EvolutionOperator(ShiftOp{op.dim, !op.star});
          }
        },
        payload_);
  }

  Vec apply_adjoint(const Vec& f) const { return adjoint().apply(f); }

  Mat to_dense() const {
    const Index n = dim();
    return std::visit(
        [&](const auto& op) -> Mat {
          using T = std::decay_t<decltype(op)>;
          if constexpr (std::is_same_v<T, DenseOp>) {
            return op.matrix;
          } else if constexpr (std::is_same_v<T, DiagonalOp>) {
            Mat m = Mat::Zero(n, n);
            m.diagonal() = op.lambda;
            return m;
          } else if constexpr (std::is_same_v<T, CirculantOp>) {
            Mat m(n, n);
            for (Index j = 0; j < n; ++j)
              for (Index k = 0; k < n; ++k) m(j, k) = op.kernel(((j - k) % n + n) % n);
            return m;
          } else {
            Mat m = Mat::Zero(n, n);
            if (!op.star)
              for (Index i = 0; i + 1 < n; ++i) m(i + 1, i) = Scalar(1);
            else
              for (Index i = 0; i + 1 < n; ++i) m(i, i + 1) = Scalar(1);
            return m;
          }
        },
        payload_);
  }

  /// Largest singular value. Structured variants answer without a solve.
  double norm() const {
    return std::visit(
        [&](const auto& op) -> double {
          using T = std::decay_t<decltype(op)>;
          if constexpr (std::is_same_v<T, DenseOp>) {
            return operator_norm(op.matrix);
          } else if constexpr (std::is_same_v<T, DiagonalOp>) {
            return op.lambda.cwiseAbs().maxCoeff();
          } else if constexpr (std::is_same_v<T, CirculantOp>) {
            return circulant_eigenvalues(op.kernel).cwiseAbs().maxCoeff();
          } else {
            return op.dim > 1 ? 1.0 : 0.0;
          }
        },
        payload_);
  }

  const Payload& payload() const { return payload_; }
  bool is_dense() const { return std::holds_alternative<DenseOp>(payload_); }
  bool is_diagonal() const { return std::holds_alternative<DiagonalOp>(payload_); }
  bool is_circulant() const { return std::holds_alternative<CirculantOp>(payload_); }
  bool is_shift() const { return std::holds_alternative<ShiftOp>(payload_); }

  /// Eigenvalues of the circulant with first column `kernel`: the discrete
  /// Fourier transform of the kernel. Eigenvector m is the Fourier mode
  /// exp(2*pi*i*m*k/N)/sqrt(N).
  static Vec circulant_eigenvalues(const Vec& kernel) {
    const Index n = kernel.size();
    Vec ev(n);
    for (Index m = 0; m < n; ++m) {
      Scalar acc(0);
      for (Index l = 0; l < n; ++l) {
        const double phase = -2.0 * kPi * static_cast<double>(m) * static_cast<double>(l) /
                             static_cast<double>(n);
        acc += kernel(l) * Scalar(std::cos(phase), std::sin(phase));
      }
      ev(m) = acc;
    }
    return ev;
  }

 private:
  explicit EvolutionOperator(Payload p) : payload_(std::move(p)) {}
  Payload payload_;
};

/// Scaled Frobenius commutator test: ||AA* - A*A||_F <= tol * ||A||_F^2.
/// Structured variants short-circuit.
inline bool is_normal(const EvolutionOperator& a, double tol = 1e-10) {
  if (tol < 0.0) fail(Errc::bad_spec, "is_normal: tol must be non-negative");
  if (a.is_diagonal() || a.is_circulant()) return true;
  if (a.is_shift()) return a.dim() == 1;  // the 1x1 shift is the zero operator
  const Mat& m = std::get<DenseOp>(a.payload()).matrix;
  const double scale = m.squaredNorm();
  const double comm = (m * m.adjoint() - m.adjoint() * m).norm();
  return comm <= tol * scale;
}

// ---------------------------------------------------------------------------
// Operator generators

struct EigenvalueSampler {
  enum class Kind { disk, circle, interval };
  Kind kind = Kind::disk;
  double radius = 1.0;  // disk
  double lo = 0.0;      // interval
  double hi = 1.0;

  Scalar draw(Rng& rng) const {
    switch (kind) {
      case Kind::disk: {
        const double r = radius * std::sqrt(rng.uniform());
        const double t = 2.0 * kPi * rng.uniform();
        return {r * std::cos(t), r * std::sin(t)};
      }
      case Kind::circle: {
        const double t = 2.0 * kPi * rng.uniform();
        return {std::cos(t), std::sin(t)};
      }
      case Kind::interval:
        return {rng.uniform(lo, hi), 0.0};
    }
    fail(Errc::bad_spec, "unhandled eigenvalue sampler kind");
  }
};

struct OperatorSpec {
  enum class Kind { diagonal, circulant_heat, random_normal, shift, dense };
  Kind kind = Kind::diagonal;
  Vec lambda;                // diagonal
  Index dim = 0;             // circulant_heat, random_normal, shift
  double tau = 0.0;          // circulant_heat diffusion rate
  EigenvalueSampler sampler; // random_normal
  std::uint64_t seed = 0;    // random_normal
  Mat matrix;                // dense
};

/// Kernel of the cyclic discrete diffusion step on Z_N: the inverse DFT of
/// the spectrum exp(-4*tau*sin^2(pi*m/N)). Real, symmetric under index
/// negation, transform-domain values in (0, 1].
inline Vec heat_kernel(Index n, double tau) {
  Vec kernel(n);
  for (Index j = 0; j < n; ++j) {
    double acc = 0.0;
    for (Index m = 0; m < n; ++m) {
      const double s = std::sin(kPi * static_cast<double>(m) / static_cast<double>(n));
      const double ev = std::exp(-4.0 * tau * s * s);
      acc += ev * std::cos(2.0 * kPi * static_cast<double>(m) * static_cast<double>(j) /
                           static_cast<double>(n));
    }
    kernel(j) = Scalar(acc / static_cast<double>(n), 0.0);
  }
  return kernel;
}

inline EvolutionOperator make_operator(const OperatorSpec& spec) {
  switch (spec.kind) {
    case OperatorSpec::Kind::diagonal:
      return EvolutionOperator::diagonal(spec.lambda);
    case OperatorSpec::Kind::circulant_heat:
      if (spec.dim <= 0) fail(Errc::bad_spec, "circulant_heat: dim must be positive");
      if (!(spec.tau >= 0.0) || !std::isfinite(spec.tau))
        fail(Errc::bad_spec, "circulant_heat: tau must be finite and non-negative");
      return EvolutionOperator::circulant(heat_kernel(spec.dim, spec.tau));
    case OperatorSpec::Kind::random_normal: {
      if (spec.dim <= 0) fail(Errc::bad_spec, "random_normal: dim must be positive");
      if (spec.sampler.kind == EigenvalueSampler::Kind::disk && !(spec.sampler.radius > 0.0))
        fail(Errc::bad_spec, "random_normal: disk radius must be positive");
      Rng rng(spec.seed);
      Vec lambda(spec.dim);
      for (Index i = 0; i < spec.dim; ++i) lambda(i) = spec.sampler.draw(rng);
      const Mat q = random_unitary(rng, spec.dim);
      return EvolutionOperator::dense(q * lambda.asDiagonal() * q.adjoint());
    }
    case OperatorSpec::Kind::shift:
      return EvolutionOperator::shift(spec.dim);
    case OperatorSpec::Kind::dense:
      return EvolutionOperator::dense(spec.matrix);
  }
  fail(Errc::bad_spec, "unhandled operator spec kind");
}

}  // namespace dynsamp
