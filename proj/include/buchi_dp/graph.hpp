#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "buchi_dp/error.hpp"
#include "buchi_dp/model.hpp"

namespace buchi_dp {

using StateSet = std::vector<StateIndex>;  // always sorted ascending

struct Bscc {
  StateSet states;
  bool accepting = false;  // contains at least one state of B
};

struct BsccReport {
  std::vector<StateSet> sccs;  // reverse-topological: sinks come first
  std::vector<Bscc> bsccs;

  std::vector<StateSet> accepting_bsccs() const { return filter(true); }
  std::vector<StateSet> rejecting_bsccs() const { return filter(false); }

 private:
  std::vector<StateSet> filter(bool accepting) const {
    std::vector<StateSet> out;
    for (const auto& b : bsccs)
      if (b.accepting == accepting) out.push_back(b.states);
    return out;
  }
};

/// Three-way split {B, ¬B_R, ¬B_{T,A}}. `ordering` is the canonical index
/// order of every reduced matrix: B block first, then ¬B_{T,A}, each
/// ascending.
struct StatePartition {
  StateSet b_states;
  StateSet rejecting_bscc_states;
  StateSet remaining;
  std::vector<StateIndex> ordering;
  // Original state -> position in `ordering`, or kDropped for ¬B_R.
  std::vector<std::size_t> reduced_index;

  static constexpr std::size_t kDropped = std::numeric_limits<std::size_t>::max();

  std::size_t m() const noexcept { return b_states.size(); }
  std::size_t n_prime() const noexcept { return remaining.size(); }
  std::size_t reduced_size() const noexcept { return ordering.size(); }
};

struct ContractionParams {
  double epsilon = 1.0;  // smallest positive entry of P_π
  std::size_t n_prime = 0;
};

/// Strongly connected components over edges with P_π(s,s') > 0, using an
/// iterative Tarjan traversal. Components come out in reverse-topological
/// order and each is sorted.
inline std::vector<StateSet> scc_decompose(const McModel& mc) {
  constexpr std::size_t kUnvisited = std::numeric_limits<std::size_t>::max();
  const std::size_t n = mc.num_states();
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<StateIndex> stack;
  std::vector<StateSet> out;
  std::size_t counter = 0;

  struct Frame {
    StateIndex state;
    std::size_t next_edge;
  };
  std::vector<Frame> call;

  for (StateIndex root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;

    while (!call.empty()) {
      auto& frame = call.back();
      const auto v = frame.state;
      const auto& row = mc.rows[v];
      bool descended = false;
      while (frame.next_edge < row.size()) {
        const auto& t = row[frame.next_edge++];
        if (!(t.probability > 0.0)) continue;
        const auto w = t.target;
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
          descended = true;
          break;
        }
        if (on_stack[w]) low[v] = std::min(low[v], index[w]);
      }
      if (descended) continue;

      if (low[v] == index[v]) {
        StateSet comp;
        StateIndex w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
      call.pop_back();
      if (!call.empty()) {
        const auto parent = call.back().state;
        low[parent] = std::min(low[parent], low[v]);
      }
    }
  }
  return out;
}

inline BsccReport classify_bsccs(const McModel& mc) {
  BsccReport report;
  report.sccs = scc_decompose(mc);
  std::vector<std::size_t> comp_of(mc.num_states());
  for (std::size_t c = 0; c < report.sccs.size(); ++c)
    for (auto s : report.sccs[c]) comp_of[s] = c;

  for (std::size_t c = 0; c < report.sccs.size(); ++c) {
    const auto& comp = report.sccs[c];
    bool bottom = true;
    bool accepting = false;
    for (auto s : comp) {
      accepting = accepting || mc.accepting[s];
      for (const auto& t : mc.rows[s])
        if (t.probability > 0.0 && comp_of[t.target] != c) bottom = false;
    }
    if (bottom) report.bsccs.push_back({comp, accepting});
  }
  return report;
}

inline StatePartition partition_states(const McModel& mc, const BsccReport& report) {
  const std::size_t n = mc.num_states();
  std::vector<bool> in_rejecting(n, false);
  for (const auto& b : report.bsccs)
    if (!b.accepting)
      for (auto s : b.states) in_rejecting[s] = true;

  StatePartition p;
  for (StateIndex s = 0; s < n; ++s) {
    if (mc.accepting[s])
      p.b_states.push_back(s);
    else if (in_rejecting[s])
      p.rejecting_bscc_states.push_back(s);
    else
      p.remaining.push_back(s);
  }
  p.ordering = p.b_states;
  p.ordering.insert(p.ordering.end(), p.remaining.begin(), p.remaining.end());
  p.reduced_index.assign(n, StatePartition::kDropped);
  for (std::size_t i = 0; i < p.ordering.size(); ++i) p.reduced_index[p.ordering[i]] = i;
  return p;
}

inline ContractionParams contraction_params(const McModel& mc, const StatePartition& partition) {
  double eps = std::numeric_limits<double>::infinity();
  for (const auto& row : mc.rows)
    for (const auto& t : row)
      if (t.probability > 0.0) eps = std::min(eps, t.probability);
  if (eps == std::numeric_limits<double>::infinity())
    throw NoTransitions("chain has no positive transition probability");
  return {eps, partition.n_prime()};
}

}  // namespace buchi_dp
