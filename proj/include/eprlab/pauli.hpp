#pragma once

#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "eprlab/qudit.hpp"

// Two-qubit correlation-tensor machinery. A 2 (x) 2 state decomposes as
//
//   rho = (1/4)[ I(x)I + (alpha.sigma)(x)I + I(x)(beta.sigma)
//                + sum_ij T_ij sigma_i (x) sigma_j ],
//
// with real Bloch vectors alpha, beta and a real 3x3 correlation tensor T.
// The common-direction correlation obeys <n.sigma (x) n.sigma> = n T n^T.

namespace eprlab {

inline const std::array<ComplexMatrix, 3>& pauli_matrices() {
  static const std::array<ComplexMatrix, 3> sigma = [] {
    std::array<ComplexMatrix, 3> s;
    s[0] = ComplexMatrix(2, 2);
    s[0] << 0, 1, 1, 0;
    s[1] = ComplexMatrix(2, 2);
    s[1] << std::complex<double>(0, 0), std::complex<double>(0, -1),
        std::complex<double>(0, 1), std::complex<double>(0, 0);
    s[2] = ComplexMatrix(2, 2);
    s[2] << 1, 0, 0, -1;
    return s;
  }();
  return sigma;
}

// n.sigma for a real direction vector n.
inline ComplexMatrix pauli_dot(const Eigen::Vector3d& n) {
  const auto& s = pauli_matrices();
  return n(0) * s[0] + n(1) * s[1] + n(2) * s[2];
}

struct CorrelationTensorDecomposition {
  Eigen::Vector3d alpha;
  Eigen::Vector3d beta;
  Eigen::Matrix3d tensor;
};

struct AntisymmetricSplit {
  int sign = +1;                  // +1 or -1, from sign(Tr T / 3); ties map to +1
  Eigen::Matrix3d antisymmetric;  // X = (T - T^T)/2, exactly antisymmetric
  double residual = 0.0;          // ||T - sign*I3 - X||_F
};

inline void require_two_qubit(const DensityMatrix& rho, const char* who) {
  if (!rho.bipartite() || rho.local_dim() != 2)
    throw Error(errc::dimension_mismatch,
                std::string(who) + " requires a bipartite state with local_dim 2");
}

inline CorrelationTensorDecomposition decompose(const DensityMatrix& rho) {
  require_two_qubit(rho, "decompose");
  const auto& s = pauli_matrices();
  const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  CorrelationTensorDecomposition out;
  for (int i = 0; i < 3; ++i) {
    out.alpha(i) = std::real((rho.matrix() * kron(s[i], id)).trace());
    out.beta(i) = std::real((rho.matrix() * kron(id, s[i])).trace());
    for (int j = 0; j < 3; ++j)
      out.tensor(i, j) = std::real((rho.matrix() * kron(s[i], s[j])).trace());
  }
  return out;
}

// Forward evaluation of the decomposition. Accepts arbitrary (alpha, beta,
// T); the result is Hermitian with unit trace but need not be positive.
inline ComplexMatrix reconstruct(const CorrelationTensorDecomposition& d) {
  const auto& s = pauli_matrices();
  const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  ComplexMatrix m = kron(id, id);
  for (int i = 0; i < 3; ++i) {
    m += d.alpha(i) * kron(s[i], id);
    m += d.beta(i) * kron(id, s[i]);
    for (int j = 0; j < 3; ++j) m += d.tensor(i, j) * kron(s[i], s[j]);
  }
  return 0.25 * m;
}

inline double correlation_value(const CorrelationTensorDecomposition& d,
                                const Eigen::Vector3d& n) {
  const double norm_err = std::abs(n.norm() - 1.0);
  if (norm_err > 1e-9)
    throw Error(errc::not_unit_vector, "|n| deviates from 1 by " + std::to_string(norm_err),
                norm_err);
  return n.dot(d.tensor * n);
}

inline AntisymmetricSplit antisymmetric_split(const Eigen::Matrix3d& t) {
  AntisymmetricSplit out;
  out.sign = (t.trace() / 3.0 >= 0.0) ? +1 : -1;
  out.antisymmetric = 0.5 * (t - t.transpose());
  out.residual =
      (t - double(out.sign) * Eigen::Matrix3d::Identity() - out.antisymmetric).norm();
  return out;
}

// Operator built from the constrained form: T = sign*I3 + X with X real
// antisymmetric. Not necessarily a state; positivity is the caller's
// question, not a precondition.
inline ComplexMatrix constrained_form_operator(const Eigen::Vector3d& alpha,
                                               const Eigen::Vector3d& beta,
                                               const Eigen::Matrix3d& x, int sign) {
  CorrelationTensorDecomposition d;
  d.alpha = alpha;
  d.beta = beta;
  d.tensor = double(sign) * Eigen::Matrix3d::Identity() + x;
  return reconstruct(d);
}

// Second elementary symmetric function of the eigenvalues versus the
// closed form -(1/8)(||alpha||^2 + ||beta||^2 + ||X||^2). The two agree
// for every parameter choice; |lhs - rhs| is the numerical defect.
struct VietaPairSum {
  double lhs = 0.0;  // sum_{i<j} lambda_i lambda_j from the eigenvalues
  double rhs = 0.0;  // -(1/8)(||alpha||^2 + ||beta||^2 + ||X||^2)
};

inline VietaPairSum vieta_pair_sum(const Eigen::Vector3d& alpha,
                                   const Eigen::Vector3d& beta,
                                   const Eigen::Matrix3d& x, int sign) {
  const ComplexMatrix op = constrained_form_operator(alpha, beta, x, sign);
  const RealVector ev = hermitian_eigenvalues(op);
  VietaPairSum out;
  for (int i = 0; i < ev.size(); ++i)
    for (int j = i + 1; j < ev.size(); ++j) out.lhs += ev(i) * ev(j);
  out.rhs = -0.125 * (alpha.squaredNorm() + beta.squaredNorm() + x.squaredNorm());
  return out;
}

// Certificate for the invariant-correlation structure of a two-qubit
// state. Certification demands the exact singlet; any other input reports
// the first condition broken along the structural chain:
// antisymmetric-split residual, then alpha, then beta, then T = -I3.
struct TheoremOneCertificate {
  bool certified = false;
  std::string reason;           // empty when certified
  double split_residual = 0.0;
  double alpha_norm = 0.0;
  double beta_norm = 0.0;
  double tensor_distance = 0.0;   // ||T + I3||_max
  double singlet_distance = 0.0;  // max entrywise distance from the singlet projector
};

inline DensityMatrix singlet_projector() { return singlet_state().projector(); }

inline TheoremOneCertificate certify_theorem1(const DensityMatrix& rho,
                                              double tol = 1e-9) {
  require_two_qubit(rho, "certify_theorem1");
  const CorrelationTensorDecomposition d = decompose(rho);
  const AntisymmetricSplit split = antisymmetric_split(d.tensor);

  TheoremOneCertificate cert;
  cert.split_residual = split.residual;
  cert.alpha_norm = d.alpha.norm();
  cert.beta_norm = d.beta.norm();
  cert.tensor_distance =
      (d.tensor + Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  cert.singlet_distance = max_abs(rho.matrix() - singlet_projector().matrix());

  if (cert.split_residual > tol)
    cert.reason = "T - sign*I3 is not antisymmetric";
  else if (cert.alpha_norm > tol)
    cert.reason = "alpha is nonzero";
  else if (cert.beta_norm > tol)
    cert.reason = "beta is nonzero";
  else if (cert.singlet_distance > tol)
    cert.reason = "T is not -I3 (state is not the singlet)";
  else
    cert.certified = true;
  return cert;
}

}  // namespace eprlab
