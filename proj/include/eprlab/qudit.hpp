#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <utility>

#include "eprlab/linalg.hpp"
#include "eprlab/rng.hpp"

// Foundational objects: validated density operators, orthonormal
// measurement bases, joint measurement statistics in a common basis, and
// conditional (collapsed) operators. Everything is immutable after
// construction and safe to share across threads.

namespace eprlab {

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdTolDefault = 1e-9;
inline constexpr double kOrthonormalTol = 1e-10;
inline constexpr double kUnitNormTol = 1e-10;
inline constexpr double kProbClampTol = 1e-12;
inline constexpr double kProbSumTol = 1e-9;

class DensityMatrix {
 public:
  // Validating constructor; rejections name the violated invariant and the
  // measured magnitude. Use validate_density() at API boundaries.
  DensityMatrix(ComplexMatrix m, int local_dim, bool bipartite,
                double psd_tolerance = kPsdTolDefault)
      : matrix_(std::move(m)),
        local_dim_(local_dim),
        bipartite_(bipartite),
        psd_tolerance_(psd_tolerance) {
    if (local_dim_ < 1)
      throw Error(errc::invalid_argument, "local_dim must be >= 1");
    const Eigen::Index expect = bipartite_ ? Eigen::Index(local_dim_) * local_dim_
                                           : Eigen::Index(local_dim_);
    if (matrix_.rows() != expect || matrix_.cols() != expect)
      throw Error(errc::dimension_mismatch,
                  "density matrix is " + std::to_string(matrix_.rows()) + "x" +
                      std::to_string(matrix_.cols()) + ", expected " +
                      std::to_string(expect) + "x" + std::to_string(expect));
    if (!all_finite(matrix_))
      throw Error(errc::invalid_argument, "density matrix has non-finite entries");
    const double herm = hermiticity_defect(matrix_);
    if (herm > kHermitianTol)
      throw Error(errc::not_hermitian,
                  "max |M - M^dagger| = " + std::to_string(herm), herm);
    const double tr_err = std::abs(matrix_.trace() - std::complex<double>(1.0, 0.0));
    if (tr_err > kTraceTol)
      throw Error(errc::trace_not_one, "|trace - 1| = " + std::to_string(tr_err), tr_err);
    const RealVector ev = hermitian_eigenvalues(matrix_);
    min_eigenvalue_ = ev(0);
    if (min_eigenvalue_ < -psd_tolerance_)
      throw Error(errc::not_positive_semidefinite,
                  "min eigenvalue = " + std::to_string(min_eigenvalue_),
                  min_eigenvalue_);
  }

  const ComplexMatrix& matrix() const { return matrix_; }
  int local_dim() const { return local_dim_; }
  bool bipartite() const { return bipartite_; }
  Eigen::Index dim() const { return matrix_.rows(); }
  double psd_tolerance() const { return psd_tolerance_; }
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  ComplexMatrix matrix_;
  int local_dim_;
  bool bipartite_;
  double psd_tolerance_;
  double min_eigenvalue_ = 0.0;
};

inline DensityMatrix validate_density(const ComplexMatrix& raw, int local_dim,
                                      bool bipartite,
                                      double psd_tolerance = kPsdTolDefault) {
  return DensityMatrix(raw, local_dim, bipartite, psd_tolerance);
}

class PureState {
 public:
  PureState(ComplexVector amplitudes, int local_dim, bool bipartite)
      : amplitudes_(std::move(amplitudes)), local_dim_(local_dim), bipartite_(bipartite) {
    const Eigen::Index expect = bipartite_ ? Eigen::Index(local_dim_) * local_dim_
                                           : Eigen::Index(local_dim_);
    if (amplitudes_.size() != expect)
      throw Error(errc::dimension_mismatch, "amplitude vector has wrong length");
    const double norm_err = std::abs(amplitudes_.norm() - 1.0);
    if (norm_err > kUnitNormTol)
      throw Error(errc::not_unit_vector, "|norm - 1| = " + std::to_string(norm_err),
                  norm_err);
  }

  const ComplexVector& amplitudes() const { return amplitudes_; }
  int local_dim() const { return local_dim_; }
  bool bipartite() const { return bipartite_; }

  DensityMatrix projector() const {
    return DensityMatrix(amplitudes_ * amplitudes_.adjoint(), local_dim_, bipartite_);
  }

 private:
  ComplexVector amplitudes_;
  int local_dim_;
  bool bipartite_;
};

// Ordered set of d orthonormal vectors, stored as the columns of a d x d
// matrix (column j = |e_j>). The same basis is used on both subsystems.
class OrthonormalBasis {
 public:
  explicit OrthonormalBasis(ComplexMatrix vectors) : vectors_(std::move(vectors)) {
    if (vectors_.rows() != vectors_.cols() || vectors_.rows() < 1)
      throw Error(errc::dimension_mismatch, "basis matrix must be square");
    if (!all_finite(vectors_))
      throw Error(errc::invalid_argument, "basis has non-finite entries");
    const double defect = unitarity_defect(vectors_);
    if (defect > kOrthonormalTol)
      throw Error(errc::not_unitary,
                  "max |<e_i|e_j> - delta_ij| = " + std::to_string(defect), defect);
  }

  int local_dim() const { return static_cast<int>(vectors_.cols()); }
  const ComplexMatrix& matrix() const { return vectors_; }
  ComplexVector vector(int i) const {
    if (i < 0 || i >= local_dim())
      throw Error(errc::index_out_of_range, "basis vector index " + std::to_string(i));
    return vectors_.col(i);
  }

 private:
  ComplexMatrix vectors_;
};

inline OrthonormalBasis computational_basis(int d) {
  return OrthonormalBasis(ComplexMatrix::Identity(d, d));
}

// f_k[j] = omega^{jk} / sqrt(d), omega = exp(2*pi*i/d).
inline OrthonormalBasis fourier_basis(int d) {
  ComplexMatrix f(d, d);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k)
      f(j, k) = std::polar(1.0 / std::sqrt(double(d)), 2.0 * M_PI * j * k / d);
  return OrthonormalBasis(f);
}

// Joint outcome distribution for identical projective measurements on both
// subsystems: probs(i,j) = Prob(A -> i, B -> j). Round-off negatives in
// [-1e-12, 0) are clamped and the distribution renormalized; anything more
// negative is a validation error.
class JointDistribution {
 public:
  JointDistribution(RealMatrix probs, int local_dim)
      : probs_(std::move(probs)), local_dim_(local_dim) {
    if (probs_.rows() != local_dim_ || probs_.cols() != local_dim_)
      throw Error(errc::dimension_mismatch, "probability matrix has wrong shape");
    const double min_p = probs_.minCoeff();
    if (min_p < -kProbClampTol)
      throw Error(errc::invalid_distribution,
                  "negative probability " + std::to_string(min_p), min_p);
    probs_ = probs_.cwiseMax(0.0);
    const double total = probs_.sum();
    if (std::abs(total - 1.0) > kProbSumTol)
      throw Error(errc::invalid_distribution,
                  "probabilities sum to " + std::to_string(total), total - 1.0);
    probs_ /= total;
  }

  int local_dim() const { return local_dim_; }
  const RealMatrix& probs() const { return probs_; }
  double operator()(int i, int j) const { return probs_(i, j); }

  RealVector marginal_a() const { return probs_.rowwise().sum(); }
  RealVector marginal_b() const { return probs_.colwise().sum(); }

 private:
  RealMatrix probs_;
  int local_dim_;
};

// Prob(i,j) = <e_i e_j| rho |e_i e_j>, both subsystems measured in the
// same basis.
inline JointDistribution joint_distribution(const DensityMatrix& rho,
                                            const OrthonormalBasis& basis) {
  if (!rho.bipartite() || rho.local_dim() != basis.local_dim())
    throw Error(errc::dimension_mismatch,
                "joint_distribution needs a bipartite state matching the basis");
  const int d = basis.local_dim();
  const ComplexMatrix bb = kron(basis.matrix(), basis.matrix());
  RealMatrix probs(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const ComplexVector v = bb.col(Eigen::Index(i) * d + j);
      probs(i, j) = std::real(v.dot(rho.matrix() * v));
    }
  return JointDistribution(std::move(probs), d);
}

// <e_i^A| rho |e_i^A>: subnormalized operator on B after A observes
// outcome i; its trace is the marginal probability of that outcome.
inline ComplexMatrix conditional_operator(const DensityMatrix& rho, int outcome_index,
                                          const OrthonormalBasis& basis) {
  if (!rho.bipartite() || rho.local_dim() != basis.local_dim())
    throw Error(errc::dimension_mismatch,
                "conditional_operator needs a bipartite state matching the basis");
  const int d = basis.local_dim();
  if (outcome_index < 0 || outcome_index >= d)
    throw Error(errc::index_out_of_range,
                "outcome index " + std::to_string(outcome_index) + " for d = " +
                    std::to_string(d));
  const ComplexVector e = basis.vector(outcome_index);
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  // <e|_A rho |e>_A contracts the A indices of rho viewed as (a,b),(a',b').
  for (int b = 0; b < d; ++b)
    for (int bp = 0; bp < d; ++bp) {
      std::complex<double> sum = 0.0;
      for (int a = 0; a < d; ++a)
        for (int ap = 0; ap < d; ++ap)
          sum += std::conj(e(a)) * e(ap) * rho.matrix()(Eigen::Index(a) * d + b,
                                                        Eigen::Index(ap) * d + bp);
      out(b, bp) = sum;
    }
  return out;
}

// Haar-distributed unitary: complex Ginibre fill, QR orthonormalization,
// then the diagonal phase correction that makes the distribution exactly
// Haar (plain QR alone is not).
inline ComplexMatrix haar_unitary(int d, RandomStream& rng) {
  if (d < 1) throw Error(errc::invalid_argument, "haar_unitary needs d >= 1");
  ComplexMatrix g(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) g(r, c) = rng.complex_normal();
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(d, d);
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j) {
    const std::complex<double> rjj = r(j, j);
    const double mag = std::abs(rjj);
    q.col(j) *= (mag > 0.0) ? rjj / mag : std::complex<double>(1.0, 0.0);
  }
  return q;
}

inline OrthonormalBasis haar_basis(int d, RandomStream& rng) {
  return OrthonormalBasis(haar_unitary(d, rng));
}

enum class StateKind { pure, mixed };

// Haar-random bipartite pure state (as a projector), or an induced-measure
// mixed state: a Haar-random pure state on the d^2 (x) d^2 purifying space
// with the purifier traced out.
inline DensityMatrix random_state(int d, StateKind kind, RandomStream& rng) {
  if (d < 2) throw Error(errc::invalid_argument, "random_state needs d >= 2");
  const Eigen::Index n = Eigen::Index(d) * d;
  if (kind == StateKind::pure) {
    ComplexVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.complex_normal();
    v.normalize();
    return DensityMatrix(v * v.adjoint(), d, true);
  }
  // Reshape the purified amplitudes into C (system rows, purifier cols);
  // the partial trace over the purifier is then C C^dagger.
  ComplexMatrix c(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) c(i, j) = rng.complex_normal();
  c /= c.norm();
  ComplexMatrix rho = c * c.adjoint();
  rho = 0.5 * (rho + rho.adjoint());
  return DensityMatrix(std::move(rho), d, true);
}

// |psi^-> = (|01> - |10>)/sqrt(2).
inline PureState singlet_state() {
  ComplexVector v = ComplexVector::Zero(4);
  v(1) = 1.0 / std::sqrt(2.0);
  v(2) = -1.0 / std::sqrt(2.0);
  return PureState(std::move(v), 2, true);
}

// |phi^+> = (|00> + |11>)/sqrt(2).
inline PureState phi_plus_state() {
  ComplexVector v = ComplexVector::Zero(4);
  v(0) = 1.0 / std::sqrt(2.0);
  v(3) = 1.0 / std::sqrt(2.0);
  return PureState(std::move(v), 2, true);
}

// (1/sqrt(d)) sum_i |ii>.
inline PureState max_entangled_state(int d) {
  if (d < 2) throw Error(errc::invalid_argument, "max_entangled_state needs d >= 2");
  ComplexVector v = ComplexVector::Zero(Eigen::Index(d) * d);
  for (int i = 0; i < d; ++i) v(Eigen::Index(i) * d + i) = 1.0 / std::sqrt(double(d));
  return PureState(std::move(v), d, true);
}

inline DensityMatrix maximally_mixed(int d, bool bipartite = true) {
  const Eigen::Index n = bipartite ? Eigen::Index(d) * d : Eigen::Index(d);
  return DensityMatrix(ComplexMatrix::Identity(n, n) / double(n), d, bipartite);
}

}  // namespace eprlab
