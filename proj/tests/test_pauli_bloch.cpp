#include <catch2/catch_amalgamated.hpp>

#include "eprlab/pauli.hpp"
#include "eprlab/qudit.hpp"
#include "helpers.hpp"

using namespace eprlab;
using test_helpers::sorted_eigenvalues;
using test_helpers::thrown_code;

namespace {

Eigen::Vector3d random_vec3(RandomStream& rng, double scale) {
  return {scale * (2.0 * rng.uniform() - 1.0), scale * (2.0 * rng.uniform() - 1.0),
          scale * (2.0 * rng.uniform() - 1.0)};
}

Eigen::Matrix3d random_antisymmetric(RandomStream& rng, double scale) {
  Eigen::Matrix3d x = Eigen::Matrix3d::Zero();
  x(0, 1) = scale * (2.0 * rng.uniform() - 1.0);
  x(0, 2) = scale * (2.0 * rng.uniform() - 1.0);
  x(1, 2) = scale * (2.0 * rng.uniform() - 1.0);
  x(1, 0) = -x(0, 1);
  x(2, 0) = -x(0, 2);
  x(2, 1) = -x(1, 2);
  return x;
}

Eigen::Vector3d random_unit3(RandomStream& rng) {
  Eigen::Vector3d n;
  do {
    n = {rng.normal(), rng.normal(), rng.normal()};
  } while (n.norm() < 1e-6);
  return n / n.norm();
}

}  // namespace

TEST_CASE("pauli matrices satisfy their algebra", "[pauli-bloch]") {
  const auto& sigma = pauli_matrices();
  const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  const std::complex<double> im(0.0, 1.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      ComplexMatrix expect = (i == j) ? id : ComplexMatrix(ComplexMatrix::Zero(2, 2));
      // epsilon_{ijk} sigma_k
      for (int k = 0; k < 3; ++k) {
        const int eps = (i == 0 && j == 1 && k == 2) || (i == 1 && j == 2 && k == 0) ||
                                (i == 2 && j == 0 && k == 1)
                            ? 1
                        : (i == 2 && j == 1 && k == 0) || (i == 0 && j == 2 && k == 1) ||
                                (i == 1 && j == 0 && k == 2)
                            ? -1
                            : 0;
        if (eps != 0) expect += im * double(eps) * sigma[k];
      }
      REQUIRE(max_abs(sigma[i] * sigma[j] - expect) < 1e-14);
    }
}

TEST_CASE("decompose recovers the textbook triples", "[pauli-bloch]") {
  {
    const CorrelationTensorDecomposition d = decompose(singlet_projector());
    REQUIRE(d.alpha.norm() < 1e-12);
    REQUIRE(d.beta.norm() < 1e-12);
    REQUIRE((d.tensor + Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  }
  {
    ComplexVector v = ComplexVector::Zero(4);
    v(0) = 1.0;
    const CorrelationTensorDecomposition d = decompose(PureState(v, 2, true).projector());
    REQUIRE((d.alpha - Eigen::Vector3d(0, 0, 1)).norm() < 1e-12);
    REQUIRE((d.beta - Eigen::Vector3d(0, 0, 1)).norm() < 1e-12);
    Eigen::Matrix3d expect = Eigen::Matrix3d::Zero();
    expect(2, 2) = 1.0;
    REQUIRE((d.tensor - expect).cwiseAbs().maxCoeff() < 1e-12);
  }
  {
    const CorrelationTensorDecomposition d = decompose(maximally_mixed(2));
    REQUIRE(d.alpha.norm() < 1e-12);
    REQUIRE(d.beta.norm() < 1e-12);
    REQUIRE(d.tensor.cwiseAbs().maxCoeff() < 1e-12);
  }
  REQUIRE(thrown_code([&] { decompose(maximally_mixed(3)); }) ==
          errc::dimension_mismatch);
}

TEST_CASE("decompose satisfies the norm constraints", "[pauli-bloch]") {
  for (int trial = 0; trial < 200; ++trial) {
    RandomStream rng = RandomStream::substream(606, std::uint64_t(trial));
    const DensityMatrix rho =
        random_state(2, trial % 2 ? StateKind::mixed : StateKind::pure, rng);
    const CorrelationTensorDecomposition d = decompose(rho);
    REQUIRE(d.alpha.norm() <= 1.0 + 1e-9);
    REQUIRE(d.beta.norm() <= 1.0 + 1e-9);
    REQUIRE(d.tensor.cwiseAbs().maxCoeff() <= 1.0 + 1e-9);
    REQUIRE(d.alpha.squaredNorm() + d.beta.squaredNorm() + d.tensor.squaredNorm() <=
            3.0 + 1e-8);
  }
}

TEST_CASE("reconstruct is the forward sum with the advertised spectra", "[pauli-bloch]") {
  CorrelationTensorDecomposition d;
  d.alpha.setZero();
  d.beta.setZero();

  d.tensor = -Eigen::Matrix3d::Identity();
  REQUIRE(max_abs(reconstruct(d) - singlet_projector().matrix()) < 1e-14);

  d.tensor = Eigen::Matrix3d::Identity();
  const ComplexMatrix plus = reconstruct(d);
  REQUIRE(hermiticity_defect(plus) < 1e-14);
  REQUIRE(std::abs(plus.trace().real() - 1.0) < 1e-14);
  const auto ev = sorted_eigenvalues(plus);
  // Spectrum of the type-II candidate: one -1/2 and three +1/2 (it is half
  // the swap operator), so positivity fails with min eigenvalue -1/2.
  REQUIRE(std::abs(ev[0] + 0.5) < 1e-10);
  REQUIRE(std::abs(ev[1] - 0.5) < 1e-10);
  REQUIRE(std::abs(ev[2] - 0.5) < 1e-10);
  REQUIRE(std::abs(ev[3] - 0.5) < 1e-10);
  REQUIRE(thrown_code([&] { validate_density(plus, 2, true); }) ==
          errc::not_positive_semidefinite);

  d.tensor.setZero();
  REQUIRE(max_abs(reconstruct(d) - ComplexMatrix::Identity(4, 4) * 0.25) < 1e-14);
}

TEST_CASE("round trip decompose then reconstruct", "[pauli-bloch]") {
  for (int trial = 0; trial < 1000; ++trial) {
    RandomStream rng = RandomStream::substream(707, std::uint64_t(trial));
    const DensityMatrix rho =
        random_state(2, trial % 2 ? StateKind::mixed : StateKind::pure, rng);
    REQUIRE(max_abs(reconstruct(decompose(rho)) - rho.matrix()) < 1e-10);
  }
}

TEST_CASE("correlation function equals n T n^T and the direct trace", "[pauli-bloch]") {
  {
    const CorrelationTensorDecomposition d = decompose(singlet_projector());
    RandomStream rng(3);
    for (int k = 0; k < 50; ++k)
      REQUIRE(std::abs(correlation_value(d, random_unit3(rng)) + 1.0) < 1e-12);
  }
  {
    const CorrelationTensorDecomposition d = decompose(phi_plus_state().projector());
    REQUIRE(std::abs(correlation_value(d, {0, 1, 0}) + 1.0) < 1e-12);
    REQUIRE(std::abs(correlation_value(d, {1, 0, 0}) - 1.0) < 1e-12);
  }
  {
    const CorrelationTensorDecomposition d = decompose(maximally_mixed(2));
    REQUIRE(std::abs(correlation_value(d, {0, 0, 1})) < 1e-12);
  }
  REQUIRE(thrown_code([&] {
            correlation_value(decompose(maximally_mixed(2)), {0.5, 0, 0});
          }) == errc::not_unit_vector);

  for (int trial = 0; trial < 100; ++trial) {
    RandomStream rng = RandomStream::substream(808, std::uint64_t(trial));
    const DensityMatrix rho =
        random_state(2, trial % 2 ? StateKind::mixed : StateKind::pure, rng);
    const CorrelationTensorDecomposition d = decompose(rho);
    for (int k = 0; k < 10; ++k) {
      const Eigen::Vector3d n = random_unit3(rng);
      const ComplexMatrix op = kron(pauli_dot(n), pauli_dot(n));
      const double direct = (rho.matrix() * op).trace().real();
      REQUIRE(std::abs(correlation_value(d, n) - direct) < 1e-10);
    }
  }
}

TEST_CASE("antisymmetric split matches the hand computations", "[pauli-bloch]") {
  {
    const AntisymmetricSplit s = antisymmetric_split(-Eigen::Matrix3d::Identity());
    REQUIRE(s.sign == -1);
    REQUIRE(s.antisymmetric.cwiseAbs().maxCoeff() < 1e-14);
    REQUIRE(s.residual < 1e-14);
  }
  {
    Eigen::Matrix3d t = Eigen::Matrix3d::Zero();
    t.diagonal() << 1.0, -1.0, 1.0;
    const AntisymmetricSplit s = antisymmetric_split(t);
    REQUIRE(s.residual > 0.0);
    REQUIRE(std::abs(s.residual - 2.0) < 1e-12);
  }
  {
    Eigen::Matrix3d x = Eigen::Matrix3d::Zero();
    x(0, 1) = 1.0;
    x(1, 0) = -1.0;
    const Eigen::Matrix3d t = -Eigen::Matrix3d::Identity() + x;
    const AntisymmetricSplit s = antisymmetric_split(t);
    REQUIRE(s.sign == -1);
    REQUIRE((s.antisymmetric - x).cwiseAbs().maxCoeff() < 1e-14);
    REQUIRE(s.residual < 1e-14);
    REQUIRE((s.antisymmetric + s.antisymmetric.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("vieta pair-sum identity", "[pauli-bloch]") {
  {
    const VietaPairSum v = vieta_pair_sum(Eigen::Vector3d::Zero(),
                                          Eigen::Vector3d::Zero(),
                                          Eigen::Matrix3d::Zero(), -1);
    REQUIRE(std::abs(v.lhs) < 1e-12);
    REQUIRE(std::abs(v.rhs) < 1e-12);
  }
  {
    // sign +: spectrum {-1/2, 1/2, 1/2, 1/2}; the six pairwise products
    // sum to 3*(1/4) + 3*(-1/4) = 0, matching the closed form exactly.
    const VietaPairSum v = vieta_pair_sum(Eigen::Vector3d::Zero(),
                                          Eigen::Vector3d::Zero(),
                                          Eigen::Matrix3d::Zero(), +1);
    REQUIRE(std::abs(v.lhs) < 1e-12);
    REQUIRE(std::abs(v.rhs) < 1e-12);
  }
  for (int trial = 0; trial < 1000; ++trial) {
    RandomStream rng = RandomStream::substream(909, std::uint64_t(trial));
    const Eigen::Vector3d alpha = random_vec3(rng, 0.5 / std::sqrt(3.0));
    const Eigen::Vector3d beta = random_vec3(rng, 0.5 / std::sqrt(3.0));
    const Eigen::Matrix3d x = random_antisymmetric(rng, 0.5 / std::sqrt(6.0));
    const int sign = trial % 2 ? +1 : -1;
    const VietaPairSum v = vieta_pair_sum(alpha, beta, x, sign);
    REQUIRE(std::abs(v.lhs - v.rhs) <= 1e-8);
    // Independent route: 2 e2 = (tr rho)^2 - tr(rho^2).
    const ComplexMatrix op = constrained_form_operator(alpha, beta, x, sign);
    const double tr = op.trace().real();
    const double tr2 = (op * op).trace().real();
    REQUIRE(std::abs(v.lhs - 0.5 * (tr * tr - tr2)) < 1e-10);
  }
}

TEST_CASE("type-II positivity barrier", "[pauli-bloch]") {
  const ComplexMatrix op = constrained_form_operator(
      Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(), Eigen::Matrix3d::Zero(), +1);
  const auto ev = sorted_eigenvalues(op);
  REQUIRE(std::abs(ev[0] + 0.5) < 1e-10);
}

TEST_CASE("theorem-1 certificate follows the proof chain", "[pauli-bloch]") {
  REQUIRE(certify_theorem1(singlet_projector()).certified);

  {
    ComplexVector v = ComplexVector::Zero(4);
    v(0) = 1.0 / std::sqrt(2.0);
    v(3) = -1.0 / std::sqrt(2.0);
    const TheoremOneCertificate c = certify_theorem1(PureState(v, 2, true).projector());
    REQUIRE_FALSE(c.certified);
    REQUIRE(c.reason == "T - sign*I3 is not antisymmetric");
    REQUIRE(c.split_residual > 1.0);
  }
  {
    const TheoremOneCertificate c = certify_theorem1(maximally_mixed(2));
    REQUIRE_FALSE(c.certified);
    REQUIRE_FALSE(c.reason.empty());
  }
  // Perturbed singlet must not certify.
  for (int trial = 0; trial < 20; ++trial) {
    RandomStream rng = RandomStream::substream(1010, std::uint64_t(trial));
    ComplexMatrix noise(4, 4);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) noise(r, c) = rng.complex_normal();
    ComplexMatrix sym = 0.5 * (noise + noise.adjoint());
    sym -= (sym.trace() / 4.0) * ComplexMatrix::Identity(4, 4);
    ComplexMatrix noise_h = sym * (1e-6 / max_abs(sym));
    const ComplexMatrix m = singlet_projector().matrix() + noise_h;
    const DensityMatrix rho = validate_density(m, 2, true, 1e-5);
    REQUIRE_FALSE(certify_theorem1(rho).certified);
  }
}
