#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "eprlab/pauli.hpp"
#include "eprlab/qudit.hpp"

namespace test_helpers {

using namespace eprlab;

inline std::vector<double> sorted_eigenvalues(const ComplexMatrix& m) {
  const RealVector ev = hermitian_eigenvalues(m);
  std::vector<double> out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end());
  return out;
}

// 1/4 (I4 + s * sum_i sigma_i (x) sigma_i)
inline ComplexMatrix pauli_sum_operator(int s) {
  ComplexMatrix m = ComplexMatrix::Identity(4, 4);
  for (const auto& sigma : pauli_matrices()) m += double(s) * kron(sigma, sigma);
  return 0.25 * m;
}

template <typename Fn>
errc thrown_code(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected an eprlab::Error");
}

template <typename Fn>
Error capture_error(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  throw std::runtime_error("expected an eprlab::Error");
}

}  // namespace test_helpers
