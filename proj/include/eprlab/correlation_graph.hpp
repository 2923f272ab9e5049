#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "eprlab/qudit.hpp"

// Perfect-correlation detection and directed-graph classification. A
// deterministic one-to-one outcome map is a permutation; its label-free
// type is the cycle signature [n_1,...,n_w] (n_k circles of k vertices,
// loops counted by n_1).

namespace eprlab {

class OutcomePermutation {
 public:
  explicit OutcomePermutation(std::vector<int> map) : map_(std::move(map)) {
    std::vector<bool> seen(map_.size(), false);
    for (int v : map_) {
      if (v < 0 || v >= static_cast<int>(map_.size()) || seen[v])
        throw Error(errc::not_bijection,
                    "outcome map is not a bijection on {0,...," +
                        std::to_string(map_.size() - 1) + "}");
      seen[v] = true;
    }
  }

  static OutcomePermutation identity(int d) {
    std::vector<int> m(d);
    std::iota(m.begin(), m.end(), 0);
    return OutcomePermutation(std::move(m));
  }

  int d() const { return static_cast<int>(map_.size()); }
  int operator()(int i) const { return map_.at(i); }
  const std::vector<int>& map() const { return map_; }

  bool operator==(const OutcomePermutation& o) const { return map_ == o.map_; }

 private:
  std::vector<int> map_;
};

class CycleTypeSignature {
 public:
  // counts[k-1] = number of k-cycles; trailing zeros trimmed.
  explicit CycleTypeSignature(std::vector<int> counts) : counts_(std::move(counts)) {
    while (!counts_.empty() && counts_.back() == 0) counts_.pop_back();
  }

  const std::vector<int>& counts() const { return counts_; }
  int largest_cycle() const { return static_cast<int>(counts_.size()); }

  int total_outcomes() const {
    int d = 0;
    for (int k = 0; k < static_cast<int>(counts_.size()); ++k) d += (k + 1) * counts_[k];
    return d;
  }

  // Bracket form, e.g. "[0,1]" for a single 2-cycle.
  std::string to_string() const {
    std::string s = "[";
    for (std::size_t k = 0; k < counts_.size(); ++k) {
      if (k) s += ',';
      s += std::to_string(counts_[k]);
    }
    return s + "]";
  }

  bool operator==(const CycleTypeSignature& o) const { return counts_ == o.counts_; }
  bool operator!=(const CycleTypeSignature& o) const { return !(*this == o); }

 private:
  std::vector<int> counts_;
};

inline CycleTypeSignature cycle_type(const OutcomePermutation& perm) {
  const int d = perm.d();
  std::vector<int> counts(d, 0);
  std::vector<bool> visited(d, false);
  for (int start = 0; start < d; ++start) {
    if (visited[start]) continue;
    int len = 0;
    for (int i = start; !visited[i]; i = perm(i)) {
      visited[i] = true;
      ++len;
    }
    ++counts[len - 1];
  }
  return CycleTypeSignature(std::move(counts));
}

namespace detail {

// Exhaustive maximum-weight assignment; ties resolve to the
// lexicographically smallest permutation.
inline std::pair<std::vector<int>, double> assignment_exhaustive(const RealMatrix& w) {
  const int d = static_cast<int>(w.rows());
  std::vector<int> perm(d), best(d);
  std::iota(perm.begin(), perm.end(), 0);
  best = perm;
  double best_weight = -std::numeric_limits<double>::infinity();
  do {
    double weight = 0.0;
    for (int i = 0; i < d; ++i) weight += w(i, perm[i]);
    if (weight > best_weight) {
      best_weight = weight;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {best, best_weight};
}

// O(d^3) Hungarian algorithm on potentials (min-cost form); weights are
// negated to maximize.
inline std::pair<std::vector<int>, double> assignment_hungarian(const RealMatrix& w) {
  const int n = static_cast<int>(w.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -w(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> perm(n);
  double weight = 0.0;
  for (int j = 1; j <= n; ++j) {
    perm[p[j] - 1] = j - 1;
    weight += w(p[j] - 1, j - 1);
  }
  return {perm, weight};
}

inline std::pair<std::vector<int>, double> max_weight_assignment(const RealMatrix& w) {
  return w.rows() <= 8 ? assignment_exhaustive(w) : assignment_hungarian(w);
}

}  // namespace detail

enum class CorrelationVerdict { perfect, imperfect, degenerate };

// Best one-to-one outcome map of a joint distribution. `perfect` requires
// that the off-map probability mass (leakage) stays within tolerance and
// that every A-outcome actually occurs; an outcome with vanishing marginal
// puts a vacuous constraint on the map and yields `degenerate` instead.
struct PerfectCorrelationVerdict {
  CorrelationVerdict verdict = CorrelationVerdict::imperfect;
  OutcomePermutation permutation{std::vector<int>{0}};
  CycleTypeSignature signature{std::vector<int>{}};
  double leakage = 1.0;

  bool perfect() const { return verdict == CorrelationVerdict::perfect; }
  bool degenerate() const { return verdict == CorrelationVerdict::degenerate; }
};

inline constexpr double kPerfectionTolDefault = 1e-9;

inline PerfectCorrelationVerdict classify(const JointDistribution& dist,
                                          double tol = kPerfectionTolDefault) {
  const int d = dist.local_dim();
  if (!(tol > 0.0) || !(tol < 1.0 / d))
    throw Error(errc::invalid_tolerance,
                "perfection tolerance must lie in (0, 1/d)");
  auto [map, weight] = detail::max_weight_assignment(dist.probs());
  PerfectCorrelationVerdict out;
  out.permutation = OutcomePermutation(std::move(map));
  out.signature = cycle_type(out.permutation);
  out.leakage = std::max(0.0, 1.0 - weight);
  const double min_marginal = dist.marginal_a().minCoeff();
  if (min_marginal < tol)
    out.verdict = CorrelationVerdict::degenerate;
  else if (out.leakage <= tol)
    out.verdict = CorrelationVerdict::perfect;
  else
    out.verdict = CorrelationVerdict::imperfect;
  return out;
}

// All cycle-type signatures realizable on d outcomes: the integer
// partitions of d, in lexicographic order of their ascending part lists.
inline std::vector<CycleTypeSignature> enumerate_signatures(int d) {
  if (d < 1 || d > 12)
    throw Error(errc::invalid_argument, "enumerate_signatures supports 1 <= d <= 12");
  std::vector<CycleTypeSignature> out;
  std::vector<int> parts;
  auto emit = [&] {
    std::vector<int> counts(d, 0);
    for (int part : parts) ++counts[part - 1];
    out.emplace_back(std::move(counts));
  };
  // Non-decreasing part lists, generated in lexicographic order.
  auto recurse = [&](auto&& self, int remaining, int min_part) -> void {
    if (remaining == 0) {
      emit();
      return;
    }
    for (int part = min_part; part <= remaining; ++part) {
      parts.push_back(part);
      self(self, remaining - part, part);
      parts.pop_back();
    }
  };
  recurse(recurse, d, 1);
  return out;
}

}  // namespace eprlab
