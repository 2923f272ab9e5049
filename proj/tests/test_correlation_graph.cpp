#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>

#include "eprlab/correlation_graph.hpp"
#include "eprlab/pauli.hpp"
#include "eprlab/qudit.hpp"
#include "helpers.hpp"

using namespace eprlab;
using test_helpers::thrown_code;

namespace {

// P(i, j) = delta_{j, pi(i)} / d: a perfectly correlated table realizing pi.
JointDistribution synthesized(const OutcomePermutation& pi) {
  const int d = pi.d();
  RealMatrix p = RealMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) p(i, pi(i)) = 1.0 / d;
  return JointDistribution(std::move(p), d);
}

std::vector<OutcomePermutation> all_permutations(int d) {
  std::vector<int> m(d);
  std::iota(m.begin(), m.end(), 0);
  std::vector<OutcomePermutation> out;
  do {
    out.emplace_back(m);
  } while (std::next_permutation(m.begin(), m.end()));
  return out;
}

}  // namespace

TEST_CASE("cycle types of hand-picked permutations", "[correlation-graph]") {
  REQUIRE(cycle_type(OutcomePermutation::identity(3)).to_string() == "[3]");
  REQUIRE(cycle_type(OutcomePermutation({1, 0})).to_string() == "[0,1]");
  REQUIRE(cycle_type(OutcomePermutation({1, 2, 0})).to_string() == "[0,0,1]");
  REQUIRE(cycle_type(OutcomePermutation({0, 2, 1})).to_string() == "[1,1]");
  REQUIRE(cycle_type(OutcomePermutation({1, 0, 3, 2})).to_string() == "[0,2]");
  REQUIRE(cycle_type(OutcomePermutation({4, 3, 2, 1, 0})).to_string() == "[1,2]");

  const CycleTypeSignature s = cycle_type(OutcomePermutation({1, 2, 0, 4, 3}));
  REQUIRE(s.counts() == std::vector<int>{0, 1, 1});
  REQUIRE(s.total_outcomes() == 5);
  REQUIRE(s.largest_cycle() == 3);
}

TEST_CASE("non-bijections are rejected", "[correlation-graph]") {
  REQUIRE(thrown_code([] { OutcomePermutation({0, 0, 1}); }) == errc::not_bijection);
  REQUIRE(thrown_code([] { OutcomePermutation({0, 3, 1}); }) == errc::not_bijection);
  REQUIRE(thrown_code([] { OutcomePermutation({-1, 1, 0}); }) == errc::not_bijection);
}

TEST_CASE("signatures are invariant under outcome relabeling", "[correlation-graph]") {
  for (int d = 2; d <= 4; ++d) {
    const auto perms = all_permutations(d);
    for (const OutcomePermutation& pi : perms) {
      const CycleTypeSignature base = cycle_type(pi);
      for (const OutcomePermutation& g : perms) {
        // Conjugate pi by the relabeling g.
        std::vector<int> relabeled(static_cast<std::size_t>(d), 0);
        for (int i = 0; i < d; ++i) relabeled[std::size_t(g(i))] = g(pi(i));
        REQUIRE(cycle_type(OutcomePermutation(std::move(relabeled))) == base);
      }
    }
  }
}

TEST_CASE("classify labels the benchmark states", "[correlation-graph]") {
  {
    const auto v = classify(joint_distribution(singlet_projector(),
                                               computational_basis(2)));
    REQUIRE(v.perfect());
    REQUIRE(v.permutation == OutcomePermutation({1, 0}));
    REQUIRE(v.signature.to_string() == "[0,1]");
    REQUIRE(v.leakage < 1e-12);
  }
  {
    const DensityMatrix rho = max_entangled_state(3).projector();
    const auto comp = classify(joint_distribution(rho, computational_basis(3)));
    REQUIRE(comp.perfect());
    REQUIRE(comp.permutation == OutcomePermutation::identity(3));
    REQUIRE(comp.signature.to_string() == "[3]");

    const auto four = classify(joint_distribution(rho, fourier_basis(3)));
    REQUIRE(four.perfect());
    // k -> -k mod 3: 0 fixed, 1 and 2 swapped.
    REQUIRE(four.permutation == OutcomePermutation({0, 2, 1}));
    REQUIRE(four.signature.to_string() == "[1,1]");
  }
  {
    const auto v = classify(joint_distribution(maximally_mixed(2),
                                               computational_basis(2)));
    REQUIRE_FALSE(v.perfect());
    REQUIRE(v.verdict == CorrelationVerdict::imperfect);
    REQUIRE(std::abs(v.leakage - 0.5) < 1e-12);
  }
}

TEST_CASE("tolerance domain is validated", "[correlation-graph]") {
  const JointDistribution dist =
      joint_distribution(singlet_projector(), computational_basis(2));
  REQUIRE(thrown_code([&] { classify(dist, 0.0); }) == errc::invalid_tolerance);
  REQUIRE(thrown_code([&] { classify(dist, -1e-3); }) == errc::invalid_tolerance);
  REQUIRE(thrown_code([&] { classify(dist, 0.5); }) == errc::invalid_tolerance);
  REQUIRE_NOTHROW(classify(dist, 0.4999));
}

TEST_CASE("classify recovers synthesized permutations", "[correlation-graph]") {
  for (int d = 2; d <= 5; ++d)
    for (const OutcomePermutation& pi : all_permutations(d)) {
      const auto v = classify(synthesized(pi));
      REQUIRE(v.perfect());
      REQUIRE(v.permutation == pi);
      REQUIRE(v.signature == cycle_type(pi));
      REQUIRE(v.leakage < 1e-12);
    }
  // Above the exhaustive-search cutoff the Hungarian path must recover
  // the planted map too.
  RandomStream rng(11);
  for (int d : {9, 10})
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<int> m(static_cast<std::size_t>(d), 0);
      std::iota(m.begin(), m.end(), 0);
      for (int i = d - 1; i > 0; --i)
        std::swap(m[std::size_t(i)],
                  m[std::size_t(rng.uniform() * (i + 1))]);
      const OutcomePermutation pi(m);
      const auto v = classify(synthesized(pi));
      REQUIRE(v.perfect());
      REQUIRE(v.permutation == pi);
    }
}

TEST_CASE("assignment backends agree", "[correlation-graph]") {
  for (int trial = 0; trial < 300; ++trial) {
    RandomStream rng = RandomStream::substream(1212, std::uint64_t(trial));
    const int d = 2 + int(rng.uniform() * 7.0);  // 2..8
    RealMatrix w(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) w(i, j) = rng.uniform();
    const auto ex = detail::assignment_exhaustive(w);
    const auto hu = detail::assignment_hungarian(w);
    REQUIRE(std::abs(ex.second - hu.second) < 1e-9);
  }
}

TEST_CASE("leakage is monotone under off-map mass", "[correlation-graph]") {
  // Move probability epsilon off the perfect diagonal; the leakage must
  // track epsilon exactly until the best map changes.
  for (double eps : {0.0, 0.01, 0.05, 0.10, 0.20}) {
    RealMatrix p = RealMatrix::Zero(3, 3);
    p.diagonal().setConstant((1.0 - eps) / 3.0);
    p(0, 1) = p(1, 2) = p(2, 0) = eps / 3.0;
    const auto v = classify(JointDistribution(std::move(p), 3));
    REQUIRE(std::abs(v.leakage - eps) < 1e-12);
    REQUIRE(v.perfect() == (eps <= kPerfectionTolDefault));
  }
}

TEST_CASE("vanishing marginal yields a degenerate verdict", "[correlation-graph]") {
  RealMatrix p = RealMatrix::Zero(3, 3);
  p(0, 0) = 0.5;
  p(1, 1) = 0.5;  // outcome 2 never occurs on A
  const auto v = classify(JointDistribution(std::move(p), 3));
  REQUIRE(v.degenerate());
  REQUIRE_FALSE(v.perfect());
}

TEST_CASE("enumerate_signatures lists the integer partitions", "[correlation-graph]") {
  {
    const auto s = enumerate_signatures(1);
    REQUIRE(s.size() == 1);
    REQUIRE(s[0].to_string() == "[1]");
  }
  {
    const auto s = enumerate_signatures(2);
    REQUIRE(s.size() == 2);
    REQUIRE(s[0].to_string() == "[2]");
    REQUIRE(s[1].to_string() == "[0,1]");
  }
  {
    const auto s = enumerate_signatures(3);
    REQUIRE(s.size() == 3);
    REQUIRE(s[0].to_string() == "[3]");
    REQUIRE(s[1].to_string() == "[1,1]");
    REQUIRE(s[2].to_string() == "[0,0,1]");
  }
  const std::vector<std::size_t> partition_counts = {2, 3, 5, 7};
  for (int d = 2; d <= 5; ++d) {
    const auto s = enumerate_signatures(d);
    REQUIRE(s.size() == partition_counts[std::size_t(d - 2)]);
    for (const CycleTypeSignature& sig : s) REQUIRE(sig.total_outcomes() == d);
    // No duplicates.
    for (std::size_t a = 0; a < s.size(); ++a)
      for (std::size_t b = a + 1; b < s.size(); ++b) REQUIRE(s[a] != s[b]);
  }
  // Every realizable signature appears: check by brute force for d <= 4.
  for (int d = 2; d <= 4; ++d) {
    const auto s = enumerate_signatures(d);
    for (const OutcomePermutation& pi : all_permutations(d))
      REQUIRE(std::find(s.begin(), s.end(), cycle_type(pi)) != s.end());
  }
  REQUIRE(thrown_code([] { enumerate_signatures(0); }) == errc::invalid_argument);
  REQUIRE(thrown_code([] { enumerate_signatures(13); }) == errc::invalid_argument);
}
