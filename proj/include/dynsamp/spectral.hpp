#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include "dynsamp/core.hpp"
#include "dynsamp/operator.hpp"

namespace dynsamp {

// ---------------------------------------------------------------------------
// Spectral decomposition with multiplicity, for normal operators only.
//
// Eigenvalues are grouped into clusters no wider than group_tol; each cluster
// becomes one "distinct eigenvalue" with an orthogonal projection onto the
// span of its eigenvectors and a multiplicity equal to the cluster size. The
// classes map inverts multiplicity: it sends each occurring multiplicity to
// the eigenvalues carrying it (the atomic multiplicity decomposition).

struct SpectralData {
  Index dim = 0;
  std::vector<Scalar> eigenvalues;              // distinct, sorted by (re, im)
  std::vector<Mat> projections;                 // orthogonal, same order
  std::vector<Index> multiplicities;            // rank of each projection
  std::map<Index, std::vector<Scalar>> classes; // multiplicity -> eigenvalues
};

inline bool complex_less(const Scalar& a, const Scalar& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

namespace detail {

/// Raw orthonormal eigenpairs of a normal operator, unclustered.
/// vectors.col(k) is a unit eigenvector for values[k]; columns orthonormal.
inline void normal_eigenpairs(const EvolutionOperator& a, Vec& values, Mat& vectors) {
  const Index n = a.dim();
  if (a.is_diagonal()) {
    values = std::get<DiagonalOp>(a.payload()).lambda;
    vectors = Mat::Identity(n, n);
    return;
  }
  if (a.is_circulant()) {
    values = EvolutionOperator::circulant_eigenvalues(std::get<CirculantOp>(a.payload()).kernel);
    vectors.resize(n, n);
    const double root = 1.0 / std::sqrt(static_cast<double>(n));
    for (Index m = 0; m < n; ++m)
      for (Index k = 0; k < n; ++k) {
        const double phase = 2.0 * kPi * static_cast<double>(m) * static_cast<double>(k) /
                             static_cast<double>(n);
        vectors(k, m) = Scalar(root * std::cos(phase), root * std::sin(phase));
      }
    return;
  }
  if (a.is_shift()) {
    // Only the 1x1 shift (the zero operator) is normal.
    values = Vec::Zero(1);
    vectors = Mat::Identity(1, 1);
    return;
  }
  const Mat& m = std::get<DenseOp>(a.payload()).matrix;
  // For a normal matrix the Schur form is diagonal, so the Schur basis is an
  // orthonormal eigenbasis.
  Eigen::ComplexSchur<Mat> schur(m, /*computeU=*/true);
  if (schur.info() != Eigen::Success) fail(Errc::bad_spec, "Schur decomposition failed");
  values = schur.matrixT().diagonal();
  vectors = schur.matrixU();
}

struct UnionFind {
  std::vector<Index> parent;
  explicit UnionFind(Index n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), Index(0));
  }
  Index find(Index x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

}  // namespace detail

inline SpectralData spectral_decomposition(const EvolutionOperator& a, double group_tol = 1e-8) {
  if (group_tol < 0.0) fail(Errc::bad_spec, "spectral_decomposition: group_tol must be >= 0");
  if (!is_normal(a)) fail(Errc::not_normal, "spectral_decomposition requires a normal operator");

  Vec values;
  Mat vectors;
  detail::normal_eigenpairs(a, values, vectors);
  const Index n = values.size();

  // Transitive clustering: any two raw eigenvalues within group_tol share a
  // cluster. Transitivity can chain a cluster wider than group_tol; that is
  // accepted — the ambiguity check below guards the borderline cases.
  detail::UnionFind uf(n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (std::abs(values(i) - values(j)) <= group_tol) uf.unite(i, j);

  std::map<Index, std::vector<Index>> groups;  // root -> member indices
  for (Index i = 0; i < n; ++i) groups[uf.find(i)].push_back(i);

  // Distinct clusters closer than 10*group_tol signal an ill-posed grouping:
  // a slightly different tolerance would merge them.
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      if (uf.find(i) == uf.find(j)) continue;
      const double gap = std::abs(values(i) - values(j));
      if (gap < 10.0 * group_tol)
        fail(Errc::cluster_ambiguity,
             "eigenvalue gap " + std::to_string(gap) + " is between group_tol and 10*group_tol");
    }

  struct Cluster {
    Scalar rep;
    std::vector<Index> members;
  };
  std::vector<Cluster> clusters;
  clusters.reserve(groups.size());
  for (auto& [root, members] : groups) {
    Scalar mean(0);
    for (Index k : members) mean += values(k);
    mean /= static_cast<double>(members.size());
    clusters.push_back({mean, std::move(members)});
  }
  std::sort(clusters.begin(), clusters.end(),
            [](const Cluster& x, const Cluster& y) { return complex_less(x.rep, y.rep); });

  SpectralData out;
  out.dim = n;
  for (const Cluster& c : clusters) {
    Mat p = Mat::Zero(n, n);
    for (Index k : c.members) p += vectors.col(k) * vectors.col(k).adjoint();
    out.eigenvalues.push_back(c.rep);
    out.projections.push_back(std::move(p));
    out.multiplicities.push_back(static_cast<Index>(c.members.size()));
    out.classes[static_cast<Index>(c.members.size())].push_back(c.rep);
  }
  return out;
}

/// First eigenvalue index j where span{P_j v : v in vectors} falls short of
/// range(P_j), or nullopt when every eigenspace is covered. Rank decisions
/// are anchored to the unprojected vector scale so that projections that
/// annihilate every input read as rank 0 rather than as noise.
inline std::optional<Index> projected_span_witness(const SpectralData& sd,
                                                   const std::vector<Vec>& vectors) {
  for (const Vec& v : vectors)
    if (v.size() != sd.dim)
      fail(Errc::dimension_mismatch, "projected_span_witness: vector length != spectral dim");
  if (sd.dim == 0) fail(Errc::bad_spec, "projected_span_witness: empty spectral data");

  double scale = 0.0;
  for (const Vec& v : vectors) scale = std::max(scale, v.norm());

  for (std::size_t j = 0; j < sd.projections.size(); ++j) {
    if (vectors.empty()) return static_cast<Index>(j);
    Mat stack(sd.dim, static_cast<Index>(vectors.size()));
    for (std::size_t i = 0; i < vectors.size(); ++i)
      stack.col(static_cast<Index>(i)) = sd.projections[j] * vectors[i];
    const RealVec sv = singular_values(stack);
    if (numerical_rank(sv, rank_tol(), scale) < sd.multiplicities[j])
      return static_cast<Index>(j);
  }
  return std::nullopt;
}

/// Hermitian PSD square root. Negative eigenvalue dust in [-tol, 0) is
/// clamped to zero; anything below -tol is a genuine violation.
inline Mat matrix_sqrt_psd(const Mat& m, double tol = 1e-10) {
  if (m.rows() != m.cols()) fail(Errc::not_hermitian, "matrix_sqrt_psd: matrix must be square");
  if (tol < 0.0) fail(Errc::bad_spec, "matrix_sqrt_psd: tol must be >= 0");
  const double scale = std::max(m.norm(), 1.0);
  if ((m - m.adjoint()).norm() > tol * scale)
    fail(Errc::not_hermitian, "matrix_sqrt_psd: matrix is not Hermitian within tol");

  const HermitianEigensystem es = hermitian_eigensystem(m);
  RealVec clamped = es.values;
  for (Index i = 0; i < clamped.size(); ++i) {
    if (clamped(i) < -tol)
      fail(Errc::not_psd,
           "matrix_sqrt_psd: eigenvalue " + std::to_string(clamped(i)) + " below -tol");
    if (clamped(i) < 0.0) clamped(i) = 0.0;
  }
  const Mat r =
      es.vectors * clamped.cwiseSqrt().asDiagonal() * es.vectors.adjoint();
  return 0.5 * (r + r.adjoint());
}

}  // namespace dynsamp
