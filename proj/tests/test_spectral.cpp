#include <catch2/catch_amalgamated.hpp>

#include <dynsamp/spectral.hpp>

using namespace dynsamp;

namespace {

Vec block_diag_8(const Scalar& l1, const Scalar& l2, const Scalar& l3) {
  Vec d(8);
  d << l1, l1, l2, l2, l2, l3, l3, l3;
  return d;
}

void check_projection_invariants(const SpectralData& sd) {
  Mat sum = Mat::Zero(sd.dim, sd.dim);
  Index total_mult = 0;
  for (std::size_t j = 0; j < sd.projections.size(); ++j) {
    const Mat& p = sd.projections[j];
    REQUIRE((p * p - p).norm() <= 1e-10);
    REQUIRE((p - p.adjoint()).norm() <= 1e-10);
    REQUIRE(numerical_rank(p) == sd.multiplicities[j]);
    for (std::size_t i = 0; i < j; ++i)
      REQUIRE((sd.projections[i] * p).norm() <= 1e-10);
    sum += p;
    total_mult += sd.multiplicities[j];
  }
  REQUIRE((sum - Mat::Identity(sd.dim, sd.dim)).norm() <= 1e-10);
  REQUIRE(total_mult == sd.dim);
}

Mat reconstruct(const SpectralData& sd) {
  Mat a = Mat::Zero(sd.dim, sd.dim);
  for (std::size_t j = 0; j < sd.eigenvalues.size(); ++j)
    a += sd.eigenvalues[j] * sd.projections[j];
  return a;
}

}  // namespace

TEST_CASE("8x8 block-diagonal operator: multiplicity classes {2:1, 3:2}", "[spectral]") {
  const Scalar l1(0.9, 0.0), l2(0.3, 0.4), l3(-0.7, 0.1);
  const EvolutionOperator a = EvolutionOperator::diagonal(block_diag_8(l1, l2, l3));
  const SpectralData sd = spectral_decomposition(a);

  REQUIRE(sd.eigenvalues.size() == 3);
  REQUIRE(sd.classes.size() == 2);
  REQUIRE(sd.classes.at(2).size() == 1);
  REQUIRE(sd.classes.at(3).size() == 2);
  REQUIRE(sd.classes.at(2)[0] == l1);
  check_projection_invariants(sd);
  REQUIRE((reconstruct(sd) - a.to_dense()).norm() <= 1e-10);
}

TEST_CASE("identity has one eigenvalue of full multiplicity", "[spectral]") {
  const SpectralData sd = spectral_decomposition(EvolutionOperator::identity(4));
  REQUIRE(sd.eigenvalues.size() == 1);
  REQUIRE(sd.eigenvalues[0] == Scalar(1));
  REQUIRE(sd.multiplicities[0] == 4);
  REQUIRE((sd.projections[0] - Mat::Identity(4, 4)).norm() == 0.0);
}

TEST_CASE("random Hermitian reconstructs from its decomposition", "[spectral]") {
  Rng rng(71);
  const Mat g = random_gaussian_matrix(rng, 6, 6);
  const Mat h = 0.5 * (g + g.adjoint());
  const EvolutionOperator a = EvolutionOperator::dense(h);
  const SpectralData sd = spectral_decomposition(a);
  check_projection_invariants(sd);
  REQUIRE((reconstruct(sd) - h).norm() <= 1e-10 * std::max(1.0, h.norm()));
  // Hermitian spectrum is real.
  for (const Scalar& l : sd.eigenvalues) REQUIRE(std::abs(l.imag()) <= 1e-10);
}

TEST_CASE("dense normal operator via unitary conjugation", "[spectral]") {
  Rng rng(81);
  const Mat u = random_unitary(rng, 6);
  Vec d(6);
  d << Scalar(0.5), Scalar(0.5), Scalar(0.2, 0.7), Scalar(0.2, 0.7), Scalar(-0.3), Scalar(0.9);
  const Mat m = u * d.asDiagonal() * u.adjoint();
  const SpectralData sd = spectral_decomposition(EvolutionOperator::dense(m));
  REQUIRE(sd.eigenvalues.size() == 4);
  REQUIRE(sd.classes.at(2).size() == 2);
  REQUIRE(sd.classes.at(1).size() == 2);
  check_projection_invariants(sd);
  REQUIRE((reconstruct(sd) - m).norm() <= 1e-10 * m.norm());
}

TEST_CASE("circulant decomposition: Fourier eigenvectors", "[spectral]") {
  OperatorSpec spec;
  spec.kind = OperatorSpec::Kind::circulant_heat;
  spec.dim = 5;
  spec.tau = 0.2;
  const EvolutionOperator a = make_operator(spec);
  const SpectralData sd = spectral_decomposition(a);
  check_projection_invariants(sd);
  REQUIRE((reconstruct(sd) - a.to_dense()).norm() <= 1e-10);
  // Heat spectrum lies in (0, 1]; pairing m <-> N-m gives multiplicity 2.
  for (const Scalar& l : sd.eigenvalues) {
    REQUIRE(l.real() > 0.0);
    REQUIRE(l.real() <= 1.0 + 1e-12);
  }
  REQUIRE(sd.classes.at(1).size() == 1);  // the m = 0 mode
  REQUIRE(sd.classes.at(2).size() == 2);
}

TEST_CASE("eigenvalues within group_tol merge into one cluster", "[spectral]") {
  Vec d(3);
  d << Scalar(1.0), Scalar(1.0 + 1e-12), Scalar(2.0);
  const SpectralData sd = spectral_decomposition(EvolutionOperator::diagonal(d), 1e-8);
  REQUIRE(sd.eigenvalues.size() == 2);
  REQUIRE(sd.multiplicities[0] == 2);
  REQUIRE(std::abs(sd.eigenvalues[0] - Scalar(1.0 + 5e-13)) <= 1e-13);  // cluster mean
}

TEST_CASE("borderline gaps raise ClusterAmbiguity", "[spectral]") {
  Vec d(2);
  d << Scalar(1.0), Scalar(1.0 + 5e-8);  // gap in (group_tol, 10*group_tol)
  REQUIRE_THROWS_MATCHES(spectral_decomposition(EvolutionOperator::diagonal(d), 1e-8), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.code() == Errc::cluster_ambiguity;
                         }));
}

TEST_CASE("non-normal operators are rejected", "[spectral]") {
  REQUIRE_THROWS_MATCHES(spectral_decomposition(EvolutionOperator::shift(3)), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Errc::not_normal; }));
}

TEST_CASE("projected span witness identifies the starved eigenspace", "[spectral]") {
  Vec d(3);
  d << Scalar(1), Scalar(2), Scalar(3);
  const SpectralData sd = spectral_decomposition(EvolutionOperator::diagonal(d));
  Vec e0 = Vec::Zero(3);
  e0(0) = Scalar(1);
  // e0 projects to zero on the eigenspaces of 2 and 3; first failure is
  // eigenvalue 2 (sorted index 1).
  const auto witness = projected_span_witness(sd, {e0});
  REQUIRE(witness.has_value());
  REQUIRE(*witness == 1);
  REQUIRE(sd.eigenvalues[1] == Scalar(2));

  Vec e1 = Vec::Zero(3), e2 = Vec::Zero(3);
  e1(1) = Scalar(1);
  e2(2) = Scalar(1);
  REQUIRE(!projected_span_witness(sd, {e0, e1, e2}).has_value());
}

TEST_CASE("matrix_sqrt_psd basics", "[spectral]") {
  REQUIRE((matrix_sqrt_psd(Mat::Identity(3, 3)) - Mat::Identity(3, 3)).norm() == 0.0);

  Mat d49 = Mat::Zero(2, 2);
  d49(0, 0) = Scalar(4);
  d49(1, 1) = Scalar(9);
  const Mat r = matrix_sqrt_psd(d49);
  REQUIRE(r(0, 0) == Scalar(2));
  REQUIRE(r(1, 1) == Scalar(3));

  Rng rng(91);
  const Mat x = random_gaussian_matrix(rng, 5, 5);
  const Mat psd = x * x.adjoint();
  const Mat s = matrix_sqrt_psd(psd);
  REQUIRE((s - s.adjoint()).norm() <= 1e-12 * psd.norm());
  REQUIRE((s * s - psd).norm() <= 1e-10 * psd.norm());
}

TEST_CASE("matrix_sqrt_psd rejections and clamping", "[spectral]") {
  Mat nh = Mat::Zero(2, 2);
  nh(0, 1) = Scalar(1);
  REQUIRE_THROWS_MATCHES(matrix_sqrt_psd(nh), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Errc::not_hermitian; }));

  Mat neg = Mat::Identity(2, 2);
  neg(1, 1) = Scalar(-1);
  REQUIRE_THROWS_MATCHES(matrix_sqrt_psd(neg), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Errc::not_psd; }));

  // Negative dust within tol clamps to zero.
  Mat dust = Mat::Identity(2, 2);
  dust(1, 1) = Scalar(-5e-11);
  const Mat r = matrix_sqrt_psd(dust, 1e-10);
  REQUIRE(r(1, 1).real() == 0.0);
}
