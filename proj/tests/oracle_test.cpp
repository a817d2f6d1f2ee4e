#include <gtest/gtest.h>

#include "buchi_dp/oracle.hpp"
#include "support/instances.hpp"
#include "support/oracles.hpp"

namespace buchi_dp {
namespace {

using testing::branch_gadget;
using testing::three_state_chain;

McModel rejecting_cycle() {
  McModel mc;
  mc.state_names = {"r0", "r1"};
  mc.rows = {{{1, 1.0}}, {{0, 0.5}, {1, 0.5}}};
  mc.accepting = {false, false};
  return mc;
}

std::vector<double> reach(const McModel& mc) {
  return satisfaction_probability(mc, classify_bsccs(mc)).probabilities;
}

TEST(SatisfactionProbability, ThreeStateChain) {
  EXPECT_EQ(reach(three_state_chain()), (std::vector<double>{1.0, 1.0, 1.0}));
}

TEST(SatisfactionProbability, RejectingSink) {
  EXPECT_EQ(reach(rejecting_cycle()), (std::vector<double>{0.0, 0.0}));
}

TEST(SatisfactionProbability, BranchGadget) {
  const auto p = reach(branch_gadget());
  EXPECT_NEAR(p[0], 0.5, 1e-15);
  EXPECT_EQ(p[1], 1.0);
  EXPECT_EQ(p[2], 0.0);
}

TEST(SatisfactionProbability, UndeterminedStatesSolveLinearSystem) {
  // x0 = 0.3 x1 + 0.2 acc + 0.5 rej, x1 = 0.6 x0 + 0.4 acc
  // => x0 = (0.3·0.4 + 0.2) / (1 − 0.18) = 0.32 / 0.82
  McModel mc;
  mc.state_names = {"x0", "x1", "acc", "rej"};
  mc.rows = {{{1, 0.3}, {2, 0.2}, {3, 0.5}}, {{0, 0.6}, {2, 0.4}}, {{2, 1.0}}, {{3, 1.0}}};
  mc.accepting = {false, false, true, false};
  const auto p = reach(mc);
  EXPECT_NEAR(p[0], 0.32 / 0.82, 1e-14);
  EXPECT_NEAR(p[1], 0.6 * 0.32 / 0.82 + 0.4, 1e-14);
}

// Independent check: the mass sitting in accepting BSCCs after many steps of
// P converges to the reachability probability.
TEST(SatisfactionProbability, MatchesLongRunOccupancy) {
  for (const auto& spec : testing::chain_specs(100, 41, 10)) {
    const auto mc = random_chain(spec);
    const auto report = classify_bsccs(mc);
    const auto result = satisfaction_probability(mc, report);
    const auto p = testing::dense_matrix(mc);
    const auto n = mc.num_states();
    std::vector<double> in_target(n, 0.0);
    for (auto s : result.target) in_target[s] = 1.0;
    // x ← P x, starting from the target indicator.
    std::vector<double> x = in_target;
    for (int k = 0; k < 20000; ++k) {
      std::vector<double> next(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) next[i] += p[i][j] * x[j];
      x = std::move(next);
    }
    for (std::size_t s = 0; s < n; ++s) EXPECT_NEAR(result.probabilities[s], x[s], 1e-8) << "seed " << spec.seed;

    for (const auto& b : report.bsccs)
      for (auto s : b.states) EXPECT_EQ(result.probabilities[s], b.accepting ? 1.0 : 0.0);

    // p = P·p holds everywhere, not only on undetermined states.
    for (std::size_t s = 0; s < n; ++s) {
      double rhs = 0.0;
      for (const auto& t : mc.rows[s]) rhs += t.probability * result.probabilities[t.target];
      EXPECT_NEAR(result.probabilities[s], rhs, 1e-9);
    }
  }
}

TEST(EstimateSatisfaction, DeterministicChainClosedForm) {
  const auto est = estimate_satisfaction(three_state_chain(), {0.99, 1.0}, 1, 2000, 7);
  double expected = 0.0;
  for (int i = 0; i <= 2000; i += 2) expected += 0.01 * std::pow(0.99, i / 2);
  EXPECT_NEAR(est.means[0], expected, 1e-12);
  EXPECT_NEAR(est.means[0], 1.0 - std::pow(0.99, 1001), 1e-12);
  EXPECT_NEAR(est.means[0], 1.0, 1e-4);
}

TEST(EstimateSatisfaction, RejectingChainScoresZero) {
  for (std::uint64_t seed : {1ULL, 99ULL, 123456789ULL}) {
    const auto est = estimate_satisfaction(rejecting_cycle(), {0.9, 1.0}, 50, 30, seed);
    for (double m : est.means) EXPECT_EQ(m, 0.0);
  }
}

TEST(EstimateSatisfaction, Reproducible) {
  const auto mc = random_chain({9, 0.4, 0.3, 0.1, 77});
  const auto a = estimate_satisfaction(mc, {0.9, 1.0}, 500, 90, 2024);
  const auto b = estimate_satisfaction(mc, {0.9, 1.0}, 500, 90, 2024);
  EXPECT_EQ(a.means, b.means);
  EXPECT_EQ(a.variances, b.variances);
  const auto c = estimate_satisfaction(mc, {0.9, 1.0}, 500, 90, 2025);
  EXPECT_NE(a.means, c.means);
  EXPECT_THROW(estimate_satisfaction(mc, {0.9, 1.0}, 0, 90, 1), InvalidParameter);
}

// Statistical agreement with reachability. The truncation bias is the exact
// gap between E[G_{0:K}] (K+1 steps of the full update) and P_sat.
TEST(EstimateSatisfaction, AgreesWithReachabilityStatistically) {
  const SurrogateParams params{0.95, 1.0};
  const std::size_t episodes = 2000;
  int passed = 0, total = 0;
  for (const auto& spec : testing::chain_specs(60, 42, 8)) {
    const auto mc = random_chain(spec);
    const auto horizon = 100 * mc.num_states();
    const auto est = estimate_satisfaction(mc, params, episodes, horizon, spec.seed);
    const auto sat = reach(mc);
    const auto expected_return = testing::full_system_dp(mc, params.gamma_b, params.gamma, horizon + 1).back();
    bool ok = true;
    for (StateIndex s = 0; s < mc.num_states(); ++s) {
      const double bias = std::abs(expected_return[s] - sat[s]);
      const double half_width = 1.96 * std::sqrt(est.variances[s] / static_cast<double>(episodes));
      if (std::abs(est.means[s] - sat[s]) > 3.0 * (bias + half_width) + 1e-12) ok = false;
    }
    passed += ok;
    ++total;
  }
  EXPECT_GE(passed, static_cast<int>(std::ceil(0.95 * total)));
}

TEST(DpVsOracle, ThreeStateChain) {
  const auto cmp = dp_vs_oracle_report(three_state_chain(), {0.99, 1.0}, 1e-9);
  EXPECT_LE(cmp.max_gap, 1e-9);
  EXPECT_TRUE(cmp.pass);
}

TEST(DpVsOracle, AllRejecting) {
  const auto cmp = dp_vs_oracle_report(rejecting_cycle(), {0.99, 1.0}, 0.0);
  EXPECT_EQ(cmp.max_gap, 0.0);
  EXPECT_TRUE(cmp.pass);
}

TEST(DpVsOracle, RequiresUndiscountedRegime) {
  EXPECT_THROW(dp_vs_oracle_report(three_state_chain(), {0.9, 0.95}, 1e-6), InvalidParameter);
}

TEST(DpVsOracle, GapShrinksAsGammaBGrows) {
  for (const auto& spec : testing::chain_specs(100, 43)) {
    const auto mc = random_chain(spec);
    const auto coarse = dp_vs_oracle_report(mc, {0.9, 1.0}, 1.0);
    const auto fine = dp_vs_oracle_report(mc, {0.999, 1.0}, 1.0);
    EXPECT_LE(fine.max_gap, coarse.max_gap + 1e-12) << "seed " << spec.seed;
    // V dominates P_sat: non-satisfying paths only add reward.
    for (StateIndex s = 0; s < mc.num_states(); ++s)
      EXPECT_GE(fine.value[static_cast<Eigen::Index>(s)], fine.satisfaction[s] - 1e-9);
  }
}

}  // namespace
}  // namespace buchi_dp
