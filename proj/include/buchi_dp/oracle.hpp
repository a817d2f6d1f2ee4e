#pragma once

// Independent references for the surrogate-reward value function:
// classical BSCC reachability, and a seeded Monte Carlo estimate of the
// truncated discounted return.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "buchi_dp/analysis.hpp"
#include "buchi_dp/error.hpp"
#include "buchi_dp/graph.hpp"
#include "buchi_dp/model.hpp"
#include "buchi_dp/prng.hpp"
#include "buchi_dp/surrogate_dp.hpp"

namespace buchi_dp {

struct ReachabilityResult {
  std::vector<double> probabilities;
  StateSet target;  // union of accepting BSCCs
};

struct McEstimate {
  std::vector<double> means;
  std::vector<double> variances;  // unbiased sample variance per start state
  std::size_t episodes = 0;
  std::size_t horizon = 0;
  std::uint64_t seed = 0;
};

struct OracleComparison {
  ValueVector value;               // V from the surrogate DP, all states
  std::vector<double> satisfaction;
  std::vector<double> gaps;        // |V(s) − P_sat(s)|
  double max_gap = 0.0;
  StateIndex worst_state = 0;
  double tolerance = 0.0;
  bool pass = false;
};

namespace detail {

inline std::vector<std::vector<StateIndex>> predecessors(const McModel& mc) {
  std::vector<std::vector<StateIndex>> pred(mc.num_states());
  for (StateIndex s = 0; s < mc.num_states(); ++s)
    for (const auto& t : mc.rows[s])
      if (t.probability > 0.0) pred[t.target].push_back(s);
  return pred;
}

// States that reach `seeds` through states where `may_pass` holds.
template <typename Pass>
std::vector<bool> backward_reach(const std::vector<std::vector<StateIndex>>& pred,
                                 const std::vector<bool>& seeds, Pass may_pass) {
  std::vector<bool> seen = seeds;
  std::deque<StateIndex> queue;
  for (StateIndex s = 0; s < seeds.size(); ++s)
    if (seeds[s]) queue.push_back(s);
  while (!queue.empty()) {
    const auto s = queue.front();
    queue.pop_front();
    for (auto p : pred[s])
      if (!seen[p] && may_pass(p)) {
        seen[p] = true;
        queue.push_back(p);
      }
  }
  return seen;
}

}  // namespace detail

/// Probability of eventually entering an accepting BSCC. States that cannot
/// reach one get 0, states that cannot avoid one get 1, and the rest come
/// from a direct linear solve.
inline ReachabilityResult satisfaction_probability(const McModel& mc, const BsccReport& report) {
  const std::size_t n = mc.num_states();
  ReachabilityResult out;
  std::vector<bool> target(n, false);
  for (const auto& b : report.bsccs)
    if (b.accepting)
      for (auto s : b.states) target[s] = true;
  for (StateIndex s = 0; s < n; ++s)
    if (target[s]) out.target.push_back(s);

  const auto pred = detail::predecessors(mc);
  const auto reaches_target = detail::backward_reach(pred, target, [](StateIndex) { return true; });
  std::vector<bool> prob0(n);
  for (StateIndex s = 0; s < n; ++s) prob0[s] = !reaches_target[s];
  const auto reaches_prob0 =
      detail::backward_reach(pred, prob0, [&](StateIndex s) { return !target[s]; });

  out.probabilities.assign(n, 0.0);
  std::vector<std::size_t> unknown_index(n, StatePartition::kDropped);
  std::vector<StateIndex> unknown;
  for (StateIndex s = 0; s < n; ++s) {
    if (prob0[s]) continue;
    if (!reaches_prob0[s]) {
      out.probabilities[s] = 1.0;
      continue;
    }
    unknown_index[s] = unknown.size();
    unknown.push_back(s);
  }
  if (unknown.empty()) return out;

  const auto u = static_cast<Eigen::Index>(unknown.size());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(u);
  std::vector<Eigen::Triplet<double>> entries;
  for (Eigen::Index i = 0; i < u; ++i) {
    entries.emplace_back(i, i, 1.0);
    for (const auto& t : mc.rows[unknown[static_cast<std::size_t>(i)]]) {
      if (!(t.probability > 0.0)) continue;
      const auto j = unknown_index[t.target];
      if (j != StatePartition::kDropped)
        entries.emplace_back(i, static_cast<Eigen::Index>(j), -t.probability);
      else if (out.probabilities[t.target] == 1.0)
        rhs[i] += t.probability;
    }
  }
  Eigen::SparseMatrix<double> a(u, u);
  a.setFromTriplets(entries.begin(), entries.end());

  Eigen::VectorXd x;
  if (unknown.size() <= kDenseLimit) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu{Eigen::MatrixXd(a)};
    for (Eigen::Index i = 0; i < u; ++i)
      if (lu.matrixLU()(i, i) == 0.0) throw SingularSystem("reachability system is singular");
    x = lu.solve(rhs);
  } else {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw SingularSystem("reachability system is singular");
    x = lu.solve(rhs);
  }
  for (Eigen::Index i = 0; i < u; ++i) {
    if (!std::isfinite(x[i])) throw SingularSystem("reachability solve produced a non-finite value");
    out.probabilities[unknown[static_cast<std::size_t>(i)]] = std::clamp(x[i], 0.0, 1.0);
  }
  return out;
}

/// Mean K-step return G_{0:K} from every start state, K = horizon. Scores a
/// path by the reward it collects; never consults the BSCC structure.
inline McEstimate estimate_satisfaction(const McModel& mc, const SurrogateParams& params,
                                        std::size_t episodes, std::size_t horizon,
                                        std::uint64_t seed) {
  params.validate();
  if (episodes == 0) throw InvalidParameter("episodes must be at least 1");
  if (horizon == 0) throw InvalidParameter("horizon must be at least 1");
  const std::size_t n = mc.num_states();
  McEstimate est;
  est.episodes = episodes;
  est.horizon = horizon;
  est.seed = seed;
  est.means.assign(n, 0.0);
  est.variances.assign(n, 0.0);

  for (StateIndex start = 0; start < n; ++start) {
    double mean = 0.0, m2 = 0.0;
    for (std::size_t e = 0; e < episodes; ++e) {
      Xorshift64Star rng(episode_seed(seed, start, e));
      StateIndex s = start;
      double discount = 1.0;
      double ret = 0.0;
      for (std::size_t i = 0; i <= horizon; ++i) {
        const bool acc = mc.accepting[s];
        if (acc) ret += params.reward() * discount;
        discount *= acc ? params.gamma_b : params.gamma;
        if (i == horizon || discount == 0.0) break;
        const auto& row = mc.rows[s];
        const double r = rng.uniform();
        double cum = 0.0;
        StateIndex next = s;
        for (const auto& t : row)
          if (t.probability > 0.0) next = t.target;  // rounding fallback: last positive entry
        for (const auto& t : row) {
          cum += t.probability;
          if (r < cum && t.probability > 0.0) {
            next = t.target;
            break;
          }
        }
        s = next;
      }
      const double delta = ret - mean;
      mean += delta / static_cast<double>(e + 1);
      m2 += delta * (ret - mean);
    }
    est.means[start] = mean;
    est.variances[start] = episodes > 1 ? m2 / static_cast<double>(episodes - 1) : 0.0;
  }
  return est;
}

/// ‖V − P_sat‖∞ for γ = 1, V from the surrogate DP's linear solve.
inline OracleComparison dp_vs_oracle_report(const McModel& mc, const SurrogateParams& params,
                                            double tol) {
  params.validate();
  if (!params.undiscounted())
    throw InvalidParameter("oracle comparison is defined for gamma = 1");
  const auto analysis = analyze_chain(mc, params);
  const auto reach = satisfaction_probability(mc, analysis.report);

  OracleComparison cmp;
  cmp.value = analysis.value;
  cmp.satisfaction = reach.probabilities;
  cmp.tolerance = tol;
  cmp.gaps.resize(mc.num_states());
  for (StateIndex s = 0; s < mc.num_states(); ++s) {
    cmp.gaps[s] = std::abs(cmp.value[static_cast<Eigen::Index>(s)] - cmp.satisfaction[s]);
    if (cmp.gaps[s] > cmp.max_gap) {
      cmp.max_gap = cmp.gaps[s];
      cmp.worst_state = s;
    }
  }
  cmp.pass = cmp.max_gap <= tol;
  return cmp;
}

}  // namespace buchi_dp
