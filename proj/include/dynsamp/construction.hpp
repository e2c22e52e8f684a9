#pragma once

#include <vector>

#include "dynsamp/core.hpp"
#include "dynsamp/operator.hpp"
#include "dynsamp/spectral.hpp"

namespace dynsamp {

// ---------------------------------------------------------------------------
// Krylov minimality index
//
// The largest l such that {b, Db, ..., D^l b} is linearly independent;
// equivalently deg(minimal annihilating polynomial of D at b) - 1. Computed
// by incremental orthogonalization: a power is dependent as soon as its
// residual against the span so far drops below the rank threshold.

inline Index minimality_index(const EvolutionOperator& d, const Vec& b) {
  if (b.size() != d.dim()) fail(Errc::dimension_mismatch, "minimality_index: vector length");
  if (b.norm() == 0.0) fail(Errc::zero_vector, "minimality_index: b must be nonzero");

  const Index n = d.dim();
  const double tol = rank_tol();
  Mat basis(n, n);  // orthonormal columns spanning the Krylov space so far
  Index rank = 0;
  Vec v = b;
  double scale = 0.0;
  for (Index k = 0; k <= n; ++k) {
    scale = std::max(scale, v.norm());
    if (v.norm() <= tol * scale) break;  // power vanished: dependent
    Vec r = v;
    // Modified Gram-Schmidt, twice for re-orthogonalization.
    for (int pass = 0; pass < 2; ++pass)
      for (Index j = 0; j < rank; ++j) r -= basis.col(j) * basis.col(j).dot(r);
    if (rank == n || r.norm() <= tol * v.norm()) break;  // in the span: dependent
    basis.col(rank++) = r / r.norm();
    v = d.apply(v);
  }
  return rank - 1;  // rank >= 1 since b != 0
}

// ---------------------------------------------------------------------------
// Tight frame from a contraction
//
// For ||A|| <= 1, set D = (I - AA*)^{1/2} and take G = {Dh} over an
// orthonormal eigenbasis of range(D). The iterated system {A^n g} then
// satisfies, for every f and m,
//
//   sum_{n=0}^{m} sum_g |<f, A^n g>|^2 = ||f||^2 - ||(A*)^{m+1} f||^2,
//
// which telescopes to Parseval whenever (A*)^n f -> 0.

struct TightFrameSystem {
  Mat defect;                   // D = (I - AA*)^{1/2}, Hermitian PSD
  std::vector<Vec> generators;  // one per defect eigendirection, g = Dh
  Index defect_rank = 0;
};

inline TightFrameSystem tight_frame_from_contraction(const EvolutionOperator& a,
                                                     double tol = 1e-10) {
  if (tol < 0.0) fail(Errc::bad_spec, "tight_frame_from_contraction: tol must be >= 0");
  const double norm = a.norm();
  if (norm > 1.0 + tol)
    fail(Errc::not_contraction,
         "tight_frame_from_contraction: operator norm " + std::to_string(norm) + " exceeds 1");

  const Index n = a.dim();
  const Mat ad = a.to_dense();
  const Mat h = Mat::Identity(n, n) - ad * ad.adjoint();
  // ||A|| <= 1 + tol allows eigenvalues of I - AA* down to -> -(2*tol + tol^2).
  const double psd_tol = std::max(1e-12, 3.0 * tol);
  TightFrameSystem out;
  out.defect = matrix_sqrt_psd(h, psd_tol);

  // Rank and basis from the eigenvalues of I - AA* itself (not their square
  // roots, whose sqrt-magnified dust would miscount the unitary case).
  const HermitianEigensystem es = hermitian_eigensystem(h);
  const double cutoff = rank_tol() * std::max(es.values(0), 1.0);
  for (Index i = 0; i < n; ++i) {
    if (es.values(i) <= cutoff) break;  // descending order
    out.generators.push_back(out.defect * es.vectors.col(i));
  }
  out.defect_rank = static_cast<Index>(out.generators.size());
  return out;
}

struct TelescopingPoint {
  double partial_sum = 0.0;  // sum_{n<=m} sum_g |<f, A^n g>|^2
  double rhs = 0.0;          // ||f||^2 - ||(A*)^{m+1} f||^2
  double gap = 0.0;
};

/// Both sides of the telescoping identity for every m = 0..m_max in one
/// sweep. Uses <f, A^n g> = <(A*)^n f, g>, so the cost is m_max adjoint
/// applications regardless of |G|.
inline std::vector<TelescopingPoint> telescoping_profile(const EvolutionOperator& a,
                                                         const std::vector<Vec>& generators,
                                                         const Vec& f, Index m_max) {
  if (f.size() != a.dim()) fail(Errc::dimension_mismatch, "telescoping_profile: signal length");
  for (const Vec& g : generators)
    if (g.size() != a.dim()) fail(Errc::dimension_mismatch, "telescoping_profile: generator length");
  if (m_max < 0) fail(Errc::bad_spec, "telescoping_profile: m_max must be >= 0");

  const EvolutionOperator astar = a.adjoint();
  const double f2 = f.squaredNorm();
  std::vector<TelescopingPoint> out;
  out.reserve(static_cast<std::size_t>(m_max) + 1);
  Vec w = f;  // (A*)^n f
  double acc = 0.0;
  for (Index m = 0; m <= m_max; ++m) {
    for (const Vec& g : generators) acc += std::norm(inner(w, g));
    w = astar.apply(w);
    TelescopingPoint p;
    p.partial_sum = acc;
    p.rhs = f2 - w.squaredNorm();
    p.gap = std::abs(p.partial_sum - p.rhs);
    out.push_back(p);
  }
  return out;
}

inline TelescopingPoint verify_tight_frame(const EvolutionOperator& a,
                                           const TightFrameSystem& system, const Vec& f,
                                           Index m) {
  return telescoping_profile(a, system.generators, f, m).back();
}

}  // namespace dynsamp
