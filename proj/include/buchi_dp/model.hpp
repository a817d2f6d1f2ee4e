#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "buchi_dp/error.hpp"

namespace buchi_dp {

using StateIndex = std::size_t;
using ActionIndex = std::size_t;

// Row-sum tolerance for stochastic rows.
inline constexpr double kStochasticTolerance = 1e-9;

struct Transition {
  StateIndex target;
  double probability;

  friend bool operator==(const Transition&, const Transition&) = default;
};

// One enabled action of a state and its successor distribution.
struct ActionRow {
  ActionIndex action;
  std::vector<Transition> successors;

  friend bool operator==(const ActionRow&, const ActionRow&) = default;
};

/// Finite MDP with a Büchi acceptance set.
///
/// States and actions are dense indices; the name tables exist only for
/// diagnostics and serialization. `choices[s]` lists the enabled actions
/// A(s), each with its own successor row. Actions absent from `choices[s]`
/// have no transition entries by construction.
struct MdpModel {
  std::vector<std::string> state_names;
  std::vector<std::string> action_names;
  std::vector<std::vector<ActionRow>> choices;
  StateIndex initial = 0;
  std::vector<bool> accepting;

  std::size_t num_states() const noexcept { return choices.size(); }
  bool is_accepting(StateIndex s) const { return accepting.at(s); }

  const ActionRow* find_action(StateIndex s, ActionIndex a) const {
    for (const auto& row : choices.at(s))
      if (row.action == a) return &row;
    return nullptr;
  }

  friend bool operator==(const MdpModel&, const MdpModel&) = default;
};

// Memoryless deterministic policy: one action per state.
struct Policy {
  std::vector<ActionIndex> choice;

  friend bool operator==(const Policy&, const Policy&) = default;
};

/// Markov chain induced by a policy. `rows[s]` is sorted by target and holds
/// only the entries present in the source model.
struct McModel {
  std::vector<std::string> state_names;
  std::vector<std::vector<Transition>> rows;
  StateIndex initial = 0;
  std::vector<bool> accepting;

  std::size_t num_states() const noexcept { return rows.size(); }
  bool is_accepting(StateIndex s) const { return accepting.at(s); }

  friend bool operator==(const McModel&, const McModel&) = default;
};

enum class ViolationKind {
  RowSum,
  NegativeProbability,
  NonFiniteProbability,
  TargetOutOfRange,
  DuplicateTarget,
  DuplicateAction,
  ActionOutOfRange,
  Deadlock,
  InitialOutOfRange,
  AcceptingSize,
};

struct Violation {
  ViolationKind kind;
  std::optional<StateIndex> state;
  std::optional<ActionIndex> action;
  std::string message;
};

namespace detail {

inline std::string state_label(const std::vector<std::string>& names, StateIndex s) {
  return s < names.size() ? names[s] : "#" + std::to_string(s);
}

inline void check_row(const std::vector<Transition>& row, std::size_t n,
                      std::optional<StateIndex> s, std::optional<ActionIndex> a,
                      const std::string& where, std::vector<Violation>& out) {
  double sum = 0.0;
  std::vector<StateIndex> seen;
  seen.reserve(row.size());
  for (const auto& t : row) {
    if (t.target >= n) {
      out.push_back({ViolationKind::TargetOutOfRange, s, a,
                     where + ": target index " + std::to_string(t.target) + " out of range"});
      continue;
    }
    if (!std::isfinite(t.probability)) {
      out.push_back({ViolationKind::NonFiniteProbability, s, a, where + ": non-finite probability"});
      continue;
    }
    if (t.probability < 0.0)
      out.push_back({ViolationKind::NegativeProbability, s, a, where + ": negative probability"});
    seen.push_back(t.target);
    sum += t.probability;
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
    out.push_back({ViolationKind::DuplicateTarget, s, a, where + ": duplicate successor"});
  if (std::abs(sum - 1.0) > kStochasticTolerance)
    out.push_back({ViolationKind::RowSum, s, a,
                   where + ": probabilities sum to " + std::to_string(sum)});
}

}  // namespace detail

/// Every well-formedness violation of `model`; empty iff valid.
inline std::vector<Violation> validate_mdp(const MdpModel& model) {
  std::vector<Violation> out;
  const std::size_t n = model.num_states();
  if (model.accepting.size() != n)
    out.push_back({ViolationKind::AcceptingSize, std::nullopt, std::nullopt,
                   "accepting mask has " + std::to_string(model.accepting.size()) +
                       " entries for " + std::to_string(n) + " states"});
  if (n == 0 || model.initial >= n)
    out.push_back({ViolationKind::InitialOutOfRange, std::nullopt, std::nullopt,
                   "initial state is not a state of the model"});

  for (StateIndex s = 0; s < n; ++s) {
    const auto sname = detail::state_label(model.state_names, s);
    const auto& rows = model.choices[s];
    if (rows.empty()) {
      out.push_back({ViolationKind::Deadlock, s, std::nullopt,
                     "state " + sname + " has no enabled action"});
      continue;
    }
    std::vector<ActionIndex> actions;
    for (const auto& row : rows) {
      const auto aname = row.action < model.action_names.size()
                             ? model.action_names[row.action]
                             : "#" + std::to_string(row.action);
      if (row.action >= model.action_names.size())
        out.push_back({ViolationKind::ActionOutOfRange, s, row.action,
                       "state " + sname + ": action index out of range"});
      actions.push_back(row.action);
      detail::check_row(row.successors, n, s, row.action,
                        "(" + sname + ", " + aname + ")", out);
    }
    std::sort(actions.begin(), actions.end());
    if (std::adjacent_find(actions.begin(), actions.end()) != actions.end())
      out.push_back({ViolationKind::DuplicateAction, s, std::nullopt,
                     "state " + sname + " lists an action twice"});
  }
  return out;
}

inline std::vector<Violation> validate_mc(const McModel& mc) {
  std::vector<Violation> out;
  const std::size_t n = mc.num_states();
  if (mc.accepting.size() != n)
    out.push_back({ViolationKind::AcceptingSize, std::nullopt, std::nullopt,
                   "accepting mask size mismatch"});
  if (n == 0 || mc.initial >= n)
    out.push_back({ViolationKind::InitialOutOfRange, std::nullopt, std::nullopt,
                   "initial state is not a state of the chain"});
  for (StateIndex s = 0; s < n; ++s) {
    if (mc.rows[s].empty()) {
      out.push_back({ViolationKind::Deadlock, s, std::nullopt,
                     "state " + detail::state_label(mc.state_names, s) + " has no successor"});
      continue;
    }
    detail::check_row(mc.rows[s], n, s, std::nullopt,
                      "state " + detail::state_label(mc.state_names, s), out);
  }
  return out;
}

/// P_π(s,s') = P(s, policy(s), s'). Throws PolicyInvalid when the policy is
/// not total or picks a disabled action.
inline McModel apply_policy(const MdpModel& model, const Policy& policy) {
  const std::size_t n = model.num_states();
  if (policy.choice.size() != n)
    throw PolicyInvalid("policy covers " + std::to_string(policy.choice.size()) +
                        " states, model has " + std::to_string(n));
  McModel mc;
  mc.state_names = model.state_names;
  mc.initial = model.initial;
  mc.accepting = model.accepting;
  mc.rows.resize(n);
  for (StateIndex s = 0; s < n; ++s) {
    const ActionRow* row = model.find_action(s, policy.choice[s]);
    if (row == nullptr) {
      const auto a = policy.choice[s];
      throw PolicyInvalid("action " +
                          (a < model.action_names.size() ? model.action_names[a]
                                                         : "#" + std::to_string(a)) +
                          " is not enabled in state " +
                          detail::state_label(model.state_names, s));
    }
    mc.rows[s] = row->successors;
    std::sort(mc.rows[s].begin(), mc.rows[s].end(),
              [](const Transition& x, const Transition& y) { return x.target < y.target; });
  }
  return mc;
}

// True when every state has exactly one enabled action.
inline bool is_chain(const MdpModel& model) {
  return std::all_of(model.choices.begin(), model.choices.end(),
                     [](const auto& rows) { return rows.size() == 1; });
}

// The unique policy of a chain-shaped MDP.
inline Policy trivial_policy(const MdpModel& model) {
  if (!is_chain(model))
    throw PolicyInvalid("model has states with more than one enabled action");
  Policy p;
  p.choice.reserve(model.num_states());
  for (const auto& rows : model.choices) p.choice.push_back(rows.front().action);
  return p;
}

// A chain viewed as a 1-action MDP (action 0, named `action_name`).
inline MdpModel as_mdp(const McModel& mc, const std::string& action_name = "step") {
  MdpModel m;
  m.state_names = mc.state_names;
  m.action_names = {action_name};
  m.initial = mc.initial;
  m.accepting = mc.accepting;
  m.choices.resize(mc.num_states());
  for (StateIndex s = 0; s < mc.num_states(); ++s)
    m.choices[s].push_back(ActionRow{0, mc.rows[s]});
  return m;
}

}  // namespace buchi_dp
