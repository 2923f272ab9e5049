#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eprlab/correlation_graph.hpp"
#include "eprlab/pauli.hpp"
#include "eprlab/parallel.hpp"
#include "eprlab/qudit.hpp"

// Numerical engine for invariant perfect correlations: quantifies how far
// a state is from being perfectly correlated in every measurement basis,
// constructs falsifying basis pairs, and runs the structural chain that
// pins [d]-correlated states down to the maximally entangled pure form.

namespace eprlab {

inline double basis_defect(const DensityMatrix& rho, const OrthonormalBasis& basis,
                           double tol = kPerfectionTolDefault) {
  return classify(joint_distribution(rho, basis), tol).leakage;
}

// Deterministic bases probed before any Haar samples.
inline std::vector<OrthonormalBasis> canonical_probe_bases(int d) {
  std::vector<OrthonormalBasis> out;
  out.push_back(computational_basis(d));
  out.push_back(fourier_basis(d));
  if (d == 2) {
    ComplexMatrix y(2, 2);
    const double s = 1.0 / std::sqrt(2.0);
    y << std::complex<double>(s, 0), std::complex<double>(s, 0),
        std::complex<double>(0, s), std::complex<double>(0, -s);
    out.push_back(OrthonormalBasis(std::move(y)));
  }
  return out;
}

struct ProbeOptions {
  int n_random_bases = 1000;
  bool refine = false;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct InvarianceDefect {
  double value = 0.0;  // max leakage over all probed bases
  OrthonormalBasis worst_basis{ComplexMatrix::Identity(1, 1)};
  double max_leakage = 0.0;
  bool signature_mismatch = false;
  // First mismatching pair of perfect-basis signatures, when flagged.
  std::string signature_a, signature_b;
  long probes = 0;
};

namespace detail {

// Hermitian generator from d^2 real parameters: d diagonal entries, then
// (re, im) pairs for the strict upper triangle.
inline ComplexMatrix hermitian_from_params(const std::vector<double>& theta, int d) {
  ComplexMatrix h = ComplexMatrix::Zero(d, d);
  int idx = 0;
  for (int i = 0; i < d; ++i) h(i, i) = theta[idx++];
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      const double re = theta[idx++];
      const double im = theta[idx++];
      h(i, j) = std::complex<double>(re, im);
      h(j, i) = std::complex<double>(re, -im);
    }
  return h;
}

// Gradient-free coordinate ascent with step halving. Returns the best
// parameter vector found for the given objective.
template <typename Objective>
std::pair<std::vector<double>, double> coordinate_ascent(std::vector<double> theta,
                                                         Objective&& objective,
                                                         double step_init,
                                                         double step_min,
                                                         int max_sweeps) {
  double best = objective(theta);
  double step = step_init;
  for (int sweep = 0; sweep < max_sweeps && step >= step_min; ++sweep) {
    bool improved = false;
    for (std::size_t p = 0; p < theta.size(); ++p) {
      for (const double delta : {step, -step}) {
        theta[p] += delta;
        const double val = objective(theta);
        if (val > best + 1e-15) {
          best = val;
          improved = true;
          break;
        }
        theta[p] -= delta;
      }
    }
    if (!improved) step *= 0.5;
  }
  return {std::move(theta), best};
}

}  // namespace detail

// Local leakage maximization over the basis manifold: the basis is
// parameterized as exp(iH) * B0 and the d^2 real parameters of H are
// optimized by coordinate ascent (step halving from 0.1 down to 1e-6,
// 200 sweeps cap).
inline std::pair<OrthonormalBasis, double> refine_worst_basis(
    const DensityMatrix& rho, const OrthonormalBasis& start,
    double tol = kPerfectionTolDefault) {
  const int d = start.local_dim();
  const auto objective = [&](const std::vector<double>& theta) {
    const ComplexMatrix u =
        unitary_from_generator(detail::hermitian_from_params(theta, d));
    return basis_defect(rho, OrthonormalBasis(u * start.matrix()), tol);
  };
  auto [theta, value] = detail::coordinate_ascent(
      std::vector<double>(static_cast<std::size_t>(d) * d, 0.0), objective, 0.1,
      1e-6, 200);
  const ComplexMatrix u =
      unitary_from_generator(detail::hermitian_from_params(theta, d));
  return {OrthonormalBasis(u * start.matrix()), value};
}

// Maximum leakage over canonical bases plus n_random_bases Haar samples,
// with a flag raised when two perfect probed bases disagree in cycle type.
// Basis i always comes from substream(seed, i), so the result does not
// depend on the worker count.
inline InvarianceDefect invariance_defect(const DensityMatrix& rho,
                                          const ProbeOptions& opts,
                                          double tol = kPerfectionTolDefault) {
  if (opts.n_random_bases < 1)
    throw Error(errc::invalid_argument, "need at least one random basis probe");
  const int d = rho.local_dim();
  const auto canonical = canonical_probe_bases(d);
  const std::size_t total = canonical.size() + static_cast<std::size_t>(opts.n_random_bases);

  std::vector<OrthonormalBasis> bases;
  bases.reserve(total);
  for (const auto& b : canonical) bases.push_back(b);
  for (int i = 0; i < opts.n_random_bases; ++i) {
    RandomStream stream = RandomStream::substream(opts.seed, static_cast<std::uint64_t>(i));
    bases.push_back(haar_basis(d, stream));
  }

  std::vector<PerfectCorrelationVerdict> verdicts(total);
  parallel_for_index(total, opts.workers, [&](std::size_t i) {
    verdicts[i] = classify(joint_distribution(rho, bases[i]), tol);
  });

  InvarianceDefect out;
  out.probes = static_cast<long>(total);
  std::size_t worst = 0;
  std::optional<CycleTypeSignature> first_perfect;
  for (std::size_t i = 0; i < total; ++i) {
    if (verdicts[i].leakage > verdicts[worst].leakage) worst = i;
    if (verdicts[i].perfect()) {
      if (!first_perfect) {
        first_perfect = verdicts[i].signature;
      } else if (!out.signature_mismatch && verdicts[i].signature != *first_perfect) {
        out.signature_mismatch = true;
        out.signature_a = first_perfect->to_string();
        out.signature_b = verdicts[i].signature.to_string();
      }
    }
  }
  out.value = verdicts[worst].leakage;
  out.worst_basis = bases[worst];

  if (opts.refine) {
    auto [refined_basis, refined_value] = refine_worst_basis(rho, bases[worst], tol);
    if (refined_value > out.value) {
      out.value = refined_value;
      out.worst_basis = refined_basis;
    }
  }
  out.max_leakage = out.value;
  return out;
}

// ---------------------------------------------------------------------------
// Structural chain for [d]-correlated states.

struct StructuralProbe {
  int i = 0, j = 1;
  bool imaginary = false;  // probe (e_i + e_j)/sqrt2 or (e_i + i e_j)/sqrt2
};

// rho restricted to the span of {|e_i e_i>}: coefficients alpha_{i,j} with
// rho = sum_ij alpha_{i,j} |e_i e_i><e_j e_j|, plus the spectral data
// alpha_{i,j} = sum_k lambda_k gamma_{k,i} gamma*_{k,j}.
struct DiagonalCorrelatedForm {
  ComplexMatrix coefficients;      // d x d Hermitian PSD
  RealVector eigenvalues;          // lambda_k, descending, truncated to rank
  ComplexMatrix spectral_vectors;  // column k = gamma_k
  int rank = 0;
};

struct StructuralReport {
  int stages_passed = 0;  // 0..4
  double stage1_max_offdiag = 0.0;
  DiagonalCorrelatedForm form;
  double spectral_residual = 0.0;
  double stage3_max_violation = 0.0;
  StructuralProbe worst_probe;
  double coefficient_spread = 0.0;  // max pairwise |alpha_ab - alpha_cd|
  double constant_c = 0.0;          // mean diagonal coefficient
  double stage4_pure_distance = 0.0;
  bool contradiction_with_mixedness = false;

  bool passed() const { return stages_passed == 4; }
};

// <m^A| rho |m^A> for an arbitrary vector m on A (not necessarily a basis
// vector); subnormalized operator on B.
inline ComplexMatrix conditional_with_vector(const DensityMatrix& rho,
                                             const ComplexVector& m) {
  const int d = rho.local_dim();
  if (!rho.bipartite() || m.size() != d)
    throw Error(errc::dimension_mismatch, "conditional_with_vector dimension mismatch");
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  for (int b = 0; b < d; ++b)
    for (int bp = 0; bp < d; ++bp) {
      std::complex<double> sum = 0.0;
      for (int a = 0; a < d; ++a)
        for (int ap = 0; ap < d; ++ap)
          sum += std::conj(m(a)) * m(ap) *
                 rho.matrix()(Eigen::Index(a) * d + b, Eigen::Index(ap) * d + bp);
      out(b, bp) = sum;
    }
  return out;
}

inline constexpr double kStructuralStage1Tol = 1e-9;
inline constexpr double kStructuralStage3Tol = 1e-9;
inline constexpr double kStructuralStage4Tol = 1e-8;

// Four-stage verification that a state perfectly correlated by the
// identity map in `basis` has the maximally entangled pure form:
//   1. all cross-outcome probabilities vanish;
//   2. extraction of the coefficient matrix alpha_{i,j} and its spectrum;
//   3. constancy of alpha_{i,j}, forced by pairwise superposition probes
//      (real and imaginary), each requiring the conditional operator to
//      collapse onto the partner of the probe direction;
//   4. equality with the rank-one projector built from the constant.
inline StructuralReport structural_check(const DensityMatrix& rho,
                                         const OrthonormalBasis& basis) {
  const int d = basis.local_dim();
  if (!rho.bipartite() || rho.local_dim() != d)
    throw Error(errc::dimension_mismatch, "structural_check dimension mismatch");
  StructuralReport report;

  // Stage 1: Prob(i,j) = 0 for i != j.
  const JointDistribution dist = joint_distribution(rho, basis);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (i != j)
        report.stage1_max_offdiag = std::max(report.stage1_max_offdiag, dist(i, j));
  if (report.stage1_max_offdiag > kStructuralStage1Tol) return report;
  report.stages_passed = 1;

  // Stage 2: coefficient matrix on span{|e_i e_i>} and its spectral data.
  ComplexMatrix alpha(d, d);
  {
    ComplexMatrix diag_vectors(d * d, d);
    for (int i = 0; i < d; ++i) {
      ComplexVector ei = basis.vector(i);
      ComplexVector v(Eigen::Index(d) * d);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) v(Eigen::Index(a) * d + b) = ei(a) * ei(b);
      diag_vectors.col(i) = v;
    }
    alpha = diag_vectors.adjoint() * rho.matrix() * diag_vectors;
    alpha = 0.5 * (alpha + alpha.adjoint());
  }
  report.form.coefficients = alpha;
  {
    const auto es = hermitian_eigensystem(alpha);
    const double lambda_max = std::max(es.values.maxCoeff(), 0.0);
    std::vector<int> keep;
    for (int k = d - 1; k >= 0; --k)
      if (es.values(k) > 1e-10 * std::max(lambda_max, 1e-300)) keep.push_back(k);
    report.form.rank = static_cast<int>(keep.size());
    report.form.eigenvalues.resize(report.form.rank);
    report.form.spectral_vectors.resize(d, report.form.rank);
    ComplexMatrix rebuilt = ComplexMatrix::Zero(d, d);
    for (int k = 0; k < report.form.rank; ++k) {
      report.form.eigenvalues(k) = es.values(keep[k]);
      report.form.spectral_vectors.col(k) = es.vectors.col(keep[k]);
      rebuilt += es.values(keep[k]) * es.vectors.col(keep[k]) *
                 es.vectors.col(keep[k]).adjoint();
    }
    report.spectral_residual = max_abs(alpha - rebuilt);
  }
  report.stages_passed = 2;

  // Stage 3: pairwise superposition probes force alpha_{i,j} constant.
  // When A is found along m = (e_i + phase e_j)/sqrt(2), side B of an
  // identity-correlated state collapses onto the partner vector carrying
  // the conjugated superposition coefficient, (e_i + conj(phase) e_j) /
  // sqrt(2); comparing entrywise against that target pins every
  // alpha_{i,j} to the common constant.
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      for (const bool imaginary : {false, true}) {
        const std::complex<double> phase =
            imaginary ? std::complex<double>(0, 1) : std::complex<double>(1, 0);
        const ComplexVector m =
            (basis.vector(i) + phase * basis.vector(j)) / std::sqrt(2.0);
        const ComplexVector partner =
            (basis.vector(i) + std::conj(phase) * basis.vector(j)) / std::sqrt(2.0);
        const ComplexMatrix cond = conditional_with_vector(rho, m);
        const double c_m = std::real(cond.trace());
        const double violation = max_abs(cond - c_m * (partner * partner.adjoint()));
        if (violation > report.stage3_max_violation) {
          report.stage3_max_violation = violation;
          report.worst_probe = {i, j, imaginary};
        }
      }
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e)
          report.coefficient_spread =
              std::max(report.coefficient_spread, std::abs(alpha(a, b) - alpha(c, e)));
  report.constant_c = std::real(alpha.trace()) / d;
  if (report.stage3_max_violation > kStructuralStage3Tol) return report;
  report.stages_passed = 3;

  // Stage 4: with alpha constant the state must be the rank-one projector
  // c (sum_i |e_i e_i>)(sum_j <e_j e_j|); a claimed rank above one now
  // contradicts mixedness.
  {
    ComplexVector u = ComplexVector::Zero(Eigen::Index(d) * d);
    for (int i = 0; i < d; ++i) {
      const ComplexVector ei = basis.vector(i);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) u(Eigen::Index(a) * d + b) += ei(a) * ei(b);
    }
    report.stage4_pure_distance =
        max_abs(rho.matrix() - report.constant_c * (u * u.adjoint()));
    report.contradiction_with_mixedness = report.form.rank > 1;
    if (report.stage4_pure_distance > kStructuralStage4Tol) return report;
  }
  report.stages_passed = 4;
  return report;
}

// ---------------------------------------------------------------------------
// Falsification.

enum class FalsifyStatus { certified_invariant, falsified, inconclusive };

enum class WitnessKind {
  imperfect_everywhere,  // no probed basis is perfect; basis pair is the best one twice
  perfect_vs_imperfect,  // perfect in basis_1, imperfect in basis_2
  signature_mismatch,    // perfect in both with different cycle types
  lemma1_conflict,       // basis_2 shares exactly one vector with basis_1
  structural_probe,      // basis_2 extends a stage-3 violating probe vector
};

inline const char* witness_kind_name(WitnessKind k) {
  switch (k) {
    case WitnessKind::imperfect_everywhere: return "imperfect_everywhere";
    case WitnessKind::perfect_vs_imperfect: return "perfect_vs_imperfect";
    case WitnessKind::signature_mismatch:   return "signature_mismatch";
    case WitnessKind::lemma1_conflict:      return "lemma1_conflict";
    case WitnessKind::structural_probe:     return "structural_probe";
  }
  return "unknown";
}

struct FalsificationWitness {
  WitnessKind kind = WitnessKind::imperfect_everywhere;
  OrthonormalBasis basis_1{ComplexMatrix::Identity(1, 1)};
  OrthonormalBasis basis_2{ComplexMatrix::Identity(1, 1)};
  PerfectCorrelationVerdict verdict_1;
  PerfectCorrelationVerdict verdict_2;
  std::optional<int> shared_vector_index;
};

struct FalsificationResult {
  FalsifyStatus status = FalsifyStatus::inconclusive;
  std::optional<TheoremOneCertificate> certificate;  // d = 2 only
  std::optional<FalsificationWitness> witness;
  std::optional<StructuralReport> structural;  // d >= 3, identity-map branch
  double defect = 0.0;  // max leakage across the witness verdicts
  bool signature_mismatch = false;
  long probes_used = 0;
  std::uint64_t seed = 0;
};

struct FalsifyOptions {
  std::uint64_t seed = 0;
  int haar_candidates = 20;
  double tol = kPerfectionTolDefault;
  // Strengthen an imperfection witness by locally maximizing the leakage
  // of its second basis. Signature-mismatch witnesses are left untouched:
  // they need both bases perfect.
  bool refine = false;
};

// Second basis for the two-basis conflict: keeps vector `keep` of `b` in
// place and rotates the orthogonal complement by a Haar unitary, so the
// bases share exactly one state.
inline OrthonormalBasis lemma1_companion_basis(const OrthonormalBasis& b, int keep,
                                               RandomStream& rng) {
  const int d = b.local_dim();
  if (d < 3)
    throw Error(errc::invalid_argument, "the one-shared-vector construction needs d >= 3");
  if (keep < 0 || keep >= d)
    throw Error(errc::index_out_of_range, "kept vector index " + std::to_string(keep));
  ComplexMatrix complement(d, d - 1);
  int col = 0;
  for (int j = 0; j < d; ++j)
    if (j != keep) complement.col(col++) = b.matrix().col(j);
  const ComplexMatrix rotated = complement * haar_unitary(d - 1, rng);
  ComplexMatrix out(d, d);
  col = 0;
  for (int j = 0; j < d; ++j)
    out.col(j) = (j == keep) ? ComplexMatrix(b.matrix().col(keep)) : rotated.col(col++);
  return OrthonormalBasis(std::move(out));
}

// Basis containing the stage-3 probe: vectors i and j of `b` are replaced
// by (e_i + phase e_j)/sqrt2 and (e_i - phase e_j)/sqrt2.
inline OrthonormalBasis probe_completion_basis(const OrthonormalBasis& b,
                                               const StructuralProbe& probe) {
  const std::complex<double> phase =
      probe.imaginary ? std::complex<double>(0, 1) : std::complex<double>(1, 0);
  ComplexMatrix out = b.matrix();
  const ComplexVector ei = b.matrix().col(probe.i);
  const ComplexVector ej = b.matrix().col(probe.j);
  out.col(probe.i) = (ei + phase * ej) / std::sqrt(2.0);
  out.col(probe.j) = (ei - phase * ej) / std::sqrt(2.0);
  return OrthonormalBasis(std::move(out));
}

inline OrthonormalBasis fourier_of(const OrthonormalBasis& b) {
  return OrthonormalBasis(b.matrix() * fourier_basis(b.local_dim()).matrix());
}

namespace detail {

// Simultaneous real-orthogonal diagonalization of the commuting real and
// imaginary parts of a unitary symmetric matrix; returns its principal
// square root, again unitary symmetric.
inline ComplexMatrix unitary_symmetric_sqrt(const ComplexMatrix& s) {
  const int n = static_cast<int>(s.rows());
  const RealMatrix x = s.real();
  const RealMatrix y = s.imag();
  // A generic combination separates eigenspaces shared by x and y.
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(x + 0.7390851332151607 * y);
  const RealMatrix r = es.eigenvectors();
  ComplexMatrix root = ComplexMatrix::Zero(n, n);
  RealVector phases(n);
  for (int k = 0; k < n; ++k) {
    const double xk = r.col(k).dot(x * r.col(k));
    const double yk = r.col(k).dot(y * r.col(k));
    phases(k) = std::atan2(yk, xk);
  }
  for (int k = 0; k < n; ++k)
    root += std::polar(1.0, 0.5 * phases(k)) *
            (r.col(k) * r.col(k).transpose()).cast<std::complex<double>>();
  return root;
}

// Factorization M = Q D Q^T (D >= 0 diagonal) of a complex symmetric
// matrix. Q diagonalizes the correlation structure of a state whose
// reshaped amplitudes are M, degenerate Schmidt coefficients included.
inline ComplexMatrix takagi_factor(const ComplexMatrix& m) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const ComplexMatrix u = svd.matrixU();
  const ComplexMatrix v = svd.matrixV();
  const ComplexMatrix s = v.adjoint() * u.conjugate();
  return u * unitary_symmetric_sqrt(s);
}

}  // namespace detail

// Candidate bases in which a rotated maximally entangled state would be
// perfectly correlated: the A-side Schmidt basis of the dominant eigenvector. For a
// swap-symmetric eigenvector the proper pairing of left and right Schmidt
// vectors needs the symmetric (Takagi) factorization; the plain SVD
// factor is kept as a fallback candidate.
inline std::vector<OrthonormalBasis> schmidt_candidate_bases(const DensityMatrix& rho) {
  const int d = rho.local_dim();
  const auto es = hermitian_eigensystem(rho.matrix());
  const ComplexVector psi = es.vectors.col(es.values.size() - 1);
  ComplexMatrix m(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) m(a, b) = psi(Eigen::Index(a) * d + b);

  std::vector<OrthonormalBasis> out;
  if (max_abs(m - m.transpose()) < 1e-8) {
    const ComplexMatrix q = detail::takagi_factor(m);
    if (unitarity_defect(q) < kOrthonormalTol) out.push_back(OrthonormalBasis(q));
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullU);
  out.push_back(OrthonormalBasis(svd.matrixU()));
  return out;
}

namespace detail {

inline FalsificationWitness make_witness(WitnessKind kind, const OrthonormalBasis& b1,
                                         const OrthonormalBasis& b2,
                                         PerfectCorrelationVerdict v1,
                                         PerfectCorrelationVerdict v2,
                                         std::optional<int> shared = std::nullopt) {
  FalsificationWitness w;
  w.kind = kind;
  w.basis_1 = b1;
  w.basis_2 = b2;
  w.verdict_1 = std::move(v1);
  w.verdict_2 = std::move(v2);
  w.shared_vector_index = shared;
  return w;
}

inline void finish_with_witness(FalsificationResult& result, FalsificationWitness w,
                                const DensityMatrix& rho, const FalsifyOptions& opts) {
  const bool leak_witness = w.kind == WitnessKind::perfect_vs_imperfect ||
                            w.kind == WitnessKind::lemma1_conflict ||
                            w.kind == WitnessKind::structural_probe;
  if (opts.refine && leak_witness) {
    auto [refined, leakage] = refine_worst_basis(rho, w.basis_2, opts.tol);
    if (leakage > w.verdict_2.leakage) {
      const PerfectCorrelationVerdict v =
          classify(joint_distribution(rho, refined), opts.tol);
      if (!v.perfect()) {
        // A refined basis no longer shares a vector with basis_1 and no
        // longer extends the probe; it witnesses plain imperfection.
        w.kind = WitnessKind::perfect_vs_imperfect;
        w.shared_vector_index.reset();
        w.basis_2 = refined;
        w.verdict_2 = v;
      }
    }
  }
  result.status = FalsifyStatus::falsified;
  result.defect = std::max(w.verdict_1.leakage, w.verdict_2.leakage);
  result.signature_mismatch = w.kind == WitnessKind::signature_mismatch;
  result.witness = std::move(w);
}

}  // namespace detail

// Decides invariant perfect correlation for one state. d = 2 delegates to
// the correlation-tensor certificate; only the singlet is ever certified.
// For d >= 3 a falsifying basis pair is constructed: either no candidate
// basis is perfect, or a perfect basis with a non-loop edge conflicts with
// a companion basis sharing one vector, or an identity-map basis is pushed
// through the structural chain and conflicts with its Fourier partner.
inline FalsificationResult falsify(const DensityMatrix& rho,
                                   const FalsifyOptions& opts = {}) {
  FalsificationResult result;
  result.seed = opts.seed;
  const int d = rho.local_dim();

  // Candidate bases, deterministic prefix first.
  std::vector<OrthonormalBasis> candidates;
  if (d == 2) {
    for (auto& b : canonical_probe_bases(2)) candidates.push_back(b);
  } else {
    candidates.push_back(computational_basis(d));
    for (auto& b : schmidt_candidate_bases(rho)) candidates.push_back(b);
  }
  for (int i = 0; i < opts.haar_candidates; ++i) {
    RandomStream stream = RandomStream::substream(opts.seed, 1000 + i);
    candidates.push_back(haar_basis(d, stream));
  }

  if (d == 2) {
    const TheoremOneCertificate cert = certify_theorem1(rho);
    result.certificate = cert;
    if (cert.certified) {
      result.status = FalsifyStatus::certified_invariant;
      return result;
    }
  }

  std::vector<PerfectCorrelationVerdict> verdicts(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i)
    verdicts[i] = classify(joint_distribution(rho, candidates[i]), opts.tol);
  result.probes_used = static_cast<long>(candidates.size());

  std::optional<std::size_t> first_perfect;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (verdicts[i].perfect()) {
      first_perfect = i;
      break;
    }

  if (!first_perfect) {
    // Universal imperfection: even the most nearly perfect basis leaks.
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i)
      if (verdicts[i].leakage < verdicts[best].leakage) best = i;
    detail::finish_with_witness(
        result, detail::make_witness(WitnessKind::imperfect_everywhere,
                                     candidates[best], candidates[best],
                                     verdicts[best], verdicts[best]), rho, opts);
    return result;
  }

  const std::size_t b1 = *first_perfect;
  const OutcomePermutation& map = verdicts[b1].permutation;

  if (d == 2) {
    // Any probed basis with an incompatible verdict falsifies.
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (i == b1) continue;
      if (verdicts[i].perfect() && verdicts[i].signature != verdicts[b1].signature) {
        detail::finish_with_witness(
            result, detail::make_witness(WitnessKind::signature_mismatch,
                                         candidates[b1], candidates[i],
                                         verdicts[b1], verdicts[i]), rho, opts);
        return result;
      }
      if (verdicts[i].verdict == CorrelationVerdict::imperfect) {
        detail::finish_with_witness(
            result, detail::make_witness(WitnessKind::perfect_vs_imperfect,
                                         candidates[b1], candidates[i],
                                         verdicts[b1], verdicts[i]), rho, opts);
        return result;
      }
    }
    result.status = FalsifyStatus::inconclusive;  // probe exhaustion
    return result;
  }

  // d >= 3, non-loop edge: one-shared-vector companion basis.
  int nonloop = -1;
  for (int i = 0; i < d; ++i)
    if (map(i) != i) {
      nonloop = i;
      break;
    }
  if (nonloop >= 0) {
    RandomStream stream = RandomStream::substream(opts.seed, 2000);
    const OrthonormalBasis companion =
        lemma1_companion_basis(candidates[b1], nonloop, stream);
    const PerfectCorrelationVerdict v2 =
        classify(joint_distribution(rho, companion), opts.tol);
    ++result.probes_used;
    if (!v2.perfect()) {
      detail::finish_with_witness(
          result, detail::make_witness(WitnessKind::lemma1_conflict, candidates[b1],
                                       companion, verdicts[b1], v2, nonloop), rho, opts);
      return result;
    }
    if (v2.signature != verdicts[b1].signature) {
      detail::finish_with_witness(
          result, detail::make_witness(WitnessKind::signature_mismatch,
                                       candidates[b1], companion, verdicts[b1], v2,
                                       nonloop), rho, opts);
      return result;
    }
    result.status = FalsifyStatus::inconclusive;
    return result;
  }

  // d >= 3, identity map: structural chain, then the Fourier partner of
  // the perfect basis (moving every outcome k to -k mod d, which cannot
  // reproduce the all-loops type for d >= 3).
  const StructuralReport structural = structural_check(rho, candidates[b1]);
  result.structural = structural;
  if (structural.stages_passed == 2) {
    // Constancy violated: the worst probe vector, completed to a basis,
    // cannot collapse cleanly.
    const OrthonormalBasis probe_basis =
        probe_completion_basis(candidates[b1], structural.worst_probe);
    const PerfectCorrelationVerdict v2 =
        classify(joint_distribution(rho, probe_basis), opts.tol);
    ++result.probes_used;
    if (!v2.perfect()) {
      detail::finish_with_witness(
          result, detail::make_witness(WitnessKind::structural_probe, candidates[b1],
                                       probe_basis, verdicts[b1], v2), rho, opts);
      return result;
    }
  }
  const OrthonormalBasis fourier_partner = fourier_of(candidates[b1]);
  const PerfectCorrelationVerdict v2 =
      classify(joint_distribution(rho, fourier_partner), opts.tol);
  ++result.probes_used;
  if (v2.perfect() && v2.signature != verdicts[b1].signature) {
    detail::finish_with_witness(
        result, detail::make_witness(WitnessKind::signature_mismatch, candidates[b1],
                                     fourier_partner, verdicts[b1], v2), rho, opts);
    return result;
  }
  if (!v2.perfect()) {
    detail::finish_with_witness(
        result, detail::make_witness(WitnessKind::perfect_vs_imperfect,
                                     candidates[b1], fourier_partner, verdicts[b1],
                                     v2), rho, opts);
    return result;
  }
  result.status = FalsifyStatus::inconclusive;
  return result;
}

}  // namespace eprlab
