#pragma once

#include <Eigen/Dense>
#include <complex>

#include "eprlab/errors.hpp"

namespace eprlab {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline bool all_finite(const ComplexMatrix& m) {
  return m.allFinite();
}

inline ComplexMatrix dagger(const ComplexMatrix& m) { return m.adjoint(); }

// Kronecker product, row-major index convention: (A (x) B)[a*rB+b][c*cB+d].
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline double max_abs(const ComplexMatrix& m) {
  return m.cwiseAbs().maxCoeff();
}

inline double frobenius(const ComplexMatrix& m) { return m.norm(); }

inline double hermiticity_defect(const ComplexMatrix& m) {
  return max_abs(m - m.adjoint());
}

inline double unitarity_defect(const ComplexMatrix& u) {
  return max_abs(u.adjoint() * u - ComplexMatrix::Identity(u.cols(), u.cols()));
}

// Ascending eigenvalues of a Hermitian matrix. The caller is responsible
// for m being Hermitian up to round-off; the solver only reads the lower
// triangle, so tiny asymmetries cannot produce complex eigenvalues.
inline RealVector hermitian_eigenvalues(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

struct HermitianEigensystem {
  RealVector values;     // ascending
  ComplexMatrix vectors; // columns, same order
};

inline HermitianEigensystem hermitian_eigensystem(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m);
  return {solver.eigenvalues(), solver.eigenvectors()};
}

// exp(iH) for Hermitian H, via the spectral decomposition.
inline ComplexMatrix unitary_from_generator(const ComplexMatrix& h) {
  const auto es = hermitian_eigensystem(h);
  ComplexVector phases(es.values.size());
  for (Eigen::Index k = 0; k < es.values.size(); ++k)
    phases(k) = std::polar(1.0, es.values(k));
  return es.vectors * phases.asDiagonal() * es.vectors.adjoint();
}

}  // namespace eprlab
