#pragma once

// Seeded generators for random chains, MDPs and policies. They drive the
// property and acceptance tests and the `generate` subcommand.
//
// Chain recipe, one xorshift64* stream seeded with splitmix64(seed):
//   for each state s in 0..size-1:
//     u < sink_fraction          -> s is absorbing (self-loop, probability 1)
//     otherwise each t in 0..size-1 becomes a successor when u < edge_density;
//       if none was picked, one successor floor(u·size) is forced;
//       weights 0.1 + 0.9·u are normalized to sum to one
//   then for each state s: u < accepting_fraction -> s ∈ B
// The initial state is s0 and states are named s0, s1, ...

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "buchi_dp/error.hpp"
#include "buchi_dp/model.hpp"
#include "buchi_dp/prng.hpp"

namespace buchi_dp {

struct RandomChainSpec {
  std::size_t size = 8;
  double edge_density = 0.3;
  double accepting_fraction = 0.3;
  double sink_fraction = 0.15;
  std::uint64_t seed = 1;
};

namespace detail {

inline std::vector<Transition> random_row(Xorshift64Star& rng, std::size_t n, double density) {
  std::vector<Transition> row;
  for (StateIndex t = 0; t < n; ++t)
    if (rng.uniform() < density) row.push_back({t, 0.0});
  if (row.empty()) {
    const auto t = std::min(n - 1, static_cast<StateIndex>(rng.uniform() * static_cast<double>(n)));
    row.push_back({t, 0.0});
  }
  double total = 0.0;
  for (auto& tr : row) {
    tr.probability = 0.1 + 0.9 * rng.uniform();
    total += tr.probability;
  }
  for (auto& tr : row) tr.probability /= total;
  return row;
}

inline std::vector<std::string> numbered_names(const char* prefix, std::size_t n) {
  std::vector<std::string> names;
  names.reserve(n);
  for (std::size_t i = 0; i < n; ++i) names.push_back(prefix + std::to_string(i));
  return names;
}

}  // namespace detail

inline McModel random_chain(const RandomChainSpec& spec) {
  if (spec.size == 0) throw InvalidParameter("chain size must be positive");
  if (!(spec.edge_density > 0.0 && spec.edge_density <= 1.0))
    throw InvalidParameter("edge density must lie in (0, 1]");
  Xorshift64Star rng(splitmix64(spec.seed));
  McModel mc;
  mc.state_names = detail::numbered_names("s", spec.size);
  mc.rows.resize(spec.size);
  for (StateIndex s = 0; s < spec.size; ++s) {
    if (rng.uniform() < spec.sink_fraction)
      mc.rows[s] = {{s, 1.0}};
    else
      mc.rows[s] = detail::random_row(rng, spec.size, spec.edge_density);
  }
  mc.accepting.resize(spec.size);
  for (StateIndex s = 0; s < spec.size; ++s) mc.accepting[s] = rng.uniform() < spec.accepting_fraction;
  mc.initial = 0;
  return mc;
}

struct RandomMdpSpec {
  std::size_t size = 6;
  std::size_t max_actions = 3;
  double edge_density = 0.4;
  double accepting_fraction = 0.3;
  std::uint64_t seed = 1;
};

inline MdpModel random_mdp(const RandomMdpSpec& spec) {
  if (spec.size == 0 || spec.max_actions == 0) throw InvalidParameter("empty MDP requested");
  Xorshift64Star rng(splitmix64(spec.seed ^ 0xA5A5A5A5A5A5A5A5ULL));
  MdpModel m;
  m.state_names = detail::numbered_names("s", spec.size);
  m.action_names = detail::numbered_names("a", spec.max_actions);
  m.choices.resize(spec.size);
  for (StateIndex s = 0; s < spec.size; ++s) {
    for (ActionIndex a = 0; a < spec.max_actions; ++a)
      if (a == 0 || rng.uniform() < 0.6)
        m.choices[s].push_back({a, detail::random_row(rng, spec.size, spec.edge_density)});
  }
  m.accepting.resize(spec.size);
  for (StateIndex s = 0; s < spec.size; ++s) m.accepting[s] = rng.uniform() < spec.accepting_fraction;
  return m;
}

inline Policy random_policy(const MdpModel& model, std::uint64_t seed) {
  Xorshift64Star rng(splitmix64(seed));
  Policy p;
  for (const auto& rows : model.choices) {
    const auto i = std::min(rows.size() - 1,
                            static_cast<std::size_t>(rng.uniform() * static_cast<double>(rows.size())));
    p.choice.push_back(rows[i].action);
  }
  return p;
}

}  // namespace buchi_dp
