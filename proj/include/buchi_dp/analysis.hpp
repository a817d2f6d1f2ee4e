#pragma once

#include <optional>

#include "buchi_dp/graph.hpp"
#include "buchi_dp/surrogate_dp.hpp"

namespace buchi_dp {

// Everything derived from one (chain, discount pair): structure, reduced
// system and the exact value function over all states.
struct ChainAnalysis {
  BsccReport report;
  StatePartition partition;
  ContractionParams contraction;
  std::optional<ReducedSystem> system;  // empty when every state is in ¬B_R
  ValueVector reduced_value;            // V on the reduced ordering
  ValueVector value;                    // V on all states, 0 on ¬B_R
};

inline ChainAnalysis analyze_chain(const McModel& mc, const SurrogateParams& params) {
  params.validate();
  ChainAnalysis a;
  a.report = classify_bsccs(mc);
  a.partition = partition_states(mc, a.report);
  a.contraction = contraction_params(mc, a.partition);
  if (a.partition.reduced_size() == 0) {
    a.value = ValueVector::Zero(static_cast<Eigen::Index>(mc.num_states()));
    return a;
  }
  a.system = build_reduced_system(mc, a.partition, params);
  a.reduced_value = solve_value(*a.system);
  a.value = expand_value(*a.system, a.reduced_value);
  return a;
}

}  // namespace buchi_dp
