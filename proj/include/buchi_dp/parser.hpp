#pragma once

// Line-oriented text formats for models (.mdp), policies (.pol) and DP
// traces (CSV).
//
// Model grammar, one directive per line, `#` starts a comment:
//
//   mdp | mc                      first directive, exactly once
//   states: <name> ...            optional, fixes declaration order
//   initial: <name>               exactly once
//   accepting: [<name> ...]       optional, at most once, may be empty
//   t <s> <a> <s'> <p>            mdp transition
//   t <s> <s'> <p>                mc transition
//
// States and actions are declared implicitly on first use. Rows whose sum
// is within 1e-9 of one are renormalized; anything further off is rejected.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "buchi_dp/error.hpp"
#include "buchi_dp/model.hpp"
#include "buchi_dp/surrogate_dp.hpp"

namespace buchi_dp {

enum class ModelKind { Mdp, Mc };

// Name of the single action given to every state of an `mc` document.
inline constexpr std::string_view kChainActionName = "step";

struct ModelDocument {
  ModelKind kind = ModelKind::Mdp;
  MdpModel model;
};

namespace detail {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

inline std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; };
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    if (i >= line.size() || line[i] == '#') break;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i]) && line[i] != '#') ++i;
    out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 1;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    fn(line_no, text.substr(pos, end - pos));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
    ++line_no;
  }
}

inline double parse_probability(const Token& tok, std::size_t line) {
  double value = 0.0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  if (!tok.text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value, std::chars_format::general);
  if (ec != std::errc() || ptr != last || first == last)
    throw SyntaxError(line, tok.column, "expected a decimal probability, got '" +
                                            std::string(tok.text) + "'");
  if (!std::isfinite(value) || value < 0.0 || value > 1.0)
    throw SyntaxError(line, tok.column,
                      "probability " + std::string(tok.text) + " is outside [0, 1]");
  return value;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class SymbolTable {
 public:
  std::size_t intern(std::string_view name, std::size_t line) {
    auto it = index_.find(std::string(name));
    if (it != index_.end()) return it->second;
    index_.emplace(std::string(name), names_.size());
    names_.emplace_back(name);
    first_line_.push_back(line);
    return names_.size() - 1;
  }
  std::optional<std::size_t> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t first_line(std::size_t i) const { return first_line_[i]; }
  std::size_t size() const { return names_.size(); }

 private:
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> names_;
  std::vector<std::size_t> first_line_;
};

}  // namespace detail

inline ModelDocument parse_document(std::string_view text) {
  using detail::Token;
  std::optional<ModelKind> kind;
  std::optional<std::pair<std::size_t, std::size_t>> initial;  // (state, line)
  bool saw_accepting = false;
  bool saw_states = false;
  std::vector<std::size_t> accepting;
  detail::SymbolTable states;
  detail::SymbolTable actions;

  struct RowBuild {
    std::vector<Transition> successors;
    std::size_t last_line = 0;
  };
  // Per state: action -> row, in first-appearance order.
  std::vector<std::vector<std::pair<std::size_t, RowBuild>>> rows;
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::size_t> seen;

  auto state_id = [&](const Token& tok, std::size_t line) {
    const auto id = states.intern(tok.text, line);
    if (rows.size() < states.size()) rows.resize(states.size());
    return id;
  };

  detail::for_each_line(text, [&](std::size_t line, std::string_view raw) {
    const auto toks = detail::tokenize(raw);
    if (toks.empty()) return;
    const auto head = toks[0].text;
    if (!kind) {
      if (head == "mdp" || head == "mc") {
        if (toks.size() != 1) throw SyntaxError(line, toks[1].column, "unexpected token after model kind");
        kind = head == "mdp" ? ModelKind::Mdp : ModelKind::Mc;
        return;
      }
      throw SyntaxError(line, toks[0].column, "first directive must be 'mdp' or 'mc'");
    }
    if (head == "mdp" || head == "mc")
      throw SyntaxError(line, toks[0].column, "model kind declared twice");
    if (head == "states:") {
      if (saw_states) throw SemanticError(line, toks[0].column, "duplicate 'states:' directive");
      saw_states = true;
      for (std::size_t i = 1; i < toks.size(); ++i) {
        if (states.find(toks[i].text))
          throw SemanticError(line, toks[i].column,
                              "state '" + std::string(toks[i].text) + "' declared twice");
        state_id(toks[i], line);
      }
    } else if (head == "initial:") {
      if (toks.size() != 2)
        throw SyntaxError(line, toks.size() < 2 ? 0 : toks[2].column,
                          "'initial:' takes exactly one state name");
      if (initial) throw SemanticError(line, toks[0].column, "duplicate 'initial:' directive");
      initial = std::pair{state_id(toks[1], line), line};
    } else if (head == "accepting:") {
      if (saw_accepting) throw SemanticError(line, toks[0].column, "duplicate 'accepting:' directive");
      saw_accepting = true;
      for (std::size_t i = 1; i < toks.size(); ++i) {
        const auto s = state_id(toks[i], line);
        if (std::find(accepting.begin(), accepting.end(), s) != accepting.end())
          throw SemanticError(line, toks[i].column,
                              "state '" + std::string(toks[i].text) + "' listed twice");
        accepting.push_back(s);
      }
    } else if (head == "t") {
      const std::size_t arity = *kind == ModelKind::Mdp ? 5 : 4;
      if (toks.size() != arity)
        throw SyntaxError(line, toks.size() > arity ? toks[arity].column : 0,
                          std::string("transition needs ") +
                              (*kind == ModelKind::Mdp ? "'t <s> <a> <s'> <p>'" : "'t <s> <s'> <p>'"));
      const double p = detail::parse_probability(toks[arity - 1], line);
      const auto src = state_id(toks[1], line);
      const std::size_t act =
          *kind == ModelKind::Mdp ? actions.intern(toks[2].text, line)
                                  : actions.intern(kChainActionName, line);
      const auto dst = state_id(toks[arity - 2], line);
      auto [it, inserted] = seen.emplace(std::tuple{src, act, dst}, line);
      if (!inserted)
        throw SemanticError(line, toks[0].column,
                            "duplicate transition (" + states.names()[src] + ", " +
                                actions.names()[act] + ", " + states.names()[dst] +
                                "), first given on line " + std::to_string(it->second));
      auto& per_state = rows[src];
      auto row = std::find_if(per_state.begin(), per_state.end(),
                              [&](const auto& r) { return r.first == act; });
      if (row == per_state.end()) {
        per_state.push_back({act, RowBuild{}});
        row = std::prev(per_state.end());
      }
      row->second.successors.push_back({dst, p});
      row->second.last_line = line;
    } else {
      throw SyntaxError(line, toks[0].column, "unknown directive '" + std::string(head) + "'");
    }
  });

  if (!kind) throw SyntaxError(0, 0, "empty model: expected 'mdp' or 'mc'");
  if (!initial) throw SemanticError(0, 0, "missing 'initial:' directive");

  ModelDocument doc;
  doc.kind = *kind;
  auto& m = doc.model;
  m.state_names = states.names();
  m.action_names = actions.names();
  if (*kind == ModelKind::Mc && m.action_names.empty())
    m.action_names.emplace_back(kChainActionName);
  m.initial = initial->first;
  m.accepting.assign(states.size(), false);
  for (auto s : accepting) m.accepting[s] = true;
  m.choices.resize(states.size());

  for (std::size_t s = 0; s < states.size(); ++s) {
    if (rows[s].empty())
      throw SemanticError(states.first_line(s), 0,
                          "state '" + states.names()[s] + "' has no outgoing transition");
    for (auto& [act, build] : rows[s]) {
      double sum = 0.0;
      for (const auto& t : build.successors) sum += t.probability;
      if (std::abs(sum - 1.0) > kStochasticTolerance)
        throw SemanticError(build.last_line, 0,
                            "probabilities of (" + states.names()[s] + ", " +
                                m.action_names[act] + ") sum to " + detail::format_double(sum));
      if (sum != 1.0)
        for (auto& t : build.successors) t.probability /= sum;
      m.choices[s].push_back(ActionRow{act, std::move(build.successors)});
    }
  }
  return doc;
}

inline MdpModel parse_model(std::string_view text) { return parse_document(text).model; }

inline MdpModel parse_model(std::istream& in) {
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_model(text);
}

/// Writes `doc` back in the model grammar. Probabilities use 17 significant
/// digits so parsing the result reproduces every double.
inline std::string serialize_model(const ModelDocument& doc) {
  const auto& m = doc.model;
  const bool chain = doc.kind == ModelKind::Mc;
  if (chain && !is_chain(m))
    throw InvalidParameter("an 'mc' document needs exactly one action per state");
  std::string out = chain ? "mc\n" : "mdp\n";
  out += "states:";
  for (const auto& name : m.state_names) out += " " + name;
  out += "\ninitial: " + m.state_names.at(m.initial) + "\naccepting:";
  for (StateIndex s = 0; s < m.num_states(); ++s)
    if (m.accepting[s]) out += " " + m.state_names[s];
  out += "\n";
  for (StateIndex s = 0; s < m.num_states(); ++s)
    for (const auto& row : m.choices[s])
      for (const auto& t : row.successors) {
        out += "t " + m.state_names[s] + " ";
        if (!chain) out += m.action_names.at(row.action) + " ";
        out += m.state_names.at(t.target) + " " + detail::format_double(t.probability) + "\n";
      }
  return out;
}

/// Policy file: one `<state> <action>` pair per line; must be total.
inline Policy parse_policy(std::string_view text, const MdpModel& model) {
  std::unordered_map<std::string_view, StateIndex> state_ix;
  std::unordered_map<std::string_view, ActionIndex> action_ix;
  for (StateIndex s = 0; s < model.state_names.size(); ++s) state_ix.emplace(model.state_names[s], s);
  for (ActionIndex a = 0; a < model.action_names.size(); ++a) action_ix.emplace(model.action_names[a], a);

  std::vector<std::optional<ActionIndex>> choice(model.num_states());
  std::vector<std::size_t> defined_on(model.num_states(), 0);
  detail::for_each_line(text, [&](std::size_t line, std::string_view raw) {
    const auto toks = detail::tokenize(raw);
    if (toks.empty()) return;
    if (toks.size() != 2)
      throw SyntaxError(line, toks.size() > 2 ? toks[2].column : 0, "expected '<state> <action>'");
    auto s = state_ix.find(toks[0].text);
    if (s == state_ix.end())
      throw SemanticError(line, toks[0].column, "unknown state '" + std::string(toks[0].text) + "'");
    auto a = action_ix.find(toks[1].text);
    if (a == action_ix.end())
      throw SemanticError(line, toks[1].column, "unknown action '" + std::string(toks[1].text) + "'");
    if (choice[s->second])
      throw SemanticError(line, toks[0].column,
                          "state '" + std::string(toks[0].text) + "' already assigned on line " +
                              std::to_string(defined_on[s->second]));
    if (model.find_action(s->second, a->second) == nullptr)
      throw SemanticError(line, toks[1].column,
                          "action not enabled: (" + std::string(toks[0].text) + ", " +
                              std::string(toks[1].text) + ")");
    choice[s->second] = a->second;
    defined_on[s->second] = line;
  });

  Policy p;
  p.choice.reserve(choice.size());
  for (StateIndex s = 0; s < choice.size(); ++s) {
    if (!choice[s])
      throw SemanticError(0, 0, "policy not total: no action for state '" + model.state_names[s] + "'");
    p.choice.push_back(*choice[s]);
  }
  return p;
}

inline std::string serialize_policy(const Policy& policy, const MdpModel& model) {
  std::string out;
  for (StateIndex s = 0; s < policy.choice.size(); ++s)
    out += model.state_names.at(s) + " " + model.action_names.at(policy.choice[s]) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Trace CSV

inline constexpr std::string_view kTraceHeader = "k,sup_error,bound";

struct TraceRow {
  std::size_t k;
  double sup_error;
  double bound;
};

/// `k,sup_error,bound` with one row per iterate. The trace must carry its
/// error column (run_dp with a reference).
inline std::string emit_trace_csv(const DpTrace& trace, const std::vector<double>& bound) {
  if (trace.sup_errors.empty()) throw LengthMismatch("trace is empty or has no error column");
  if (bound.size() != trace.sup_errors.size())
    throw LengthMismatch("trace has " + std::to_string(trace.sup_errors.size()) +
                         " rows but bound has " + std::to_string(bound.size()));
  std::string out(kTraceHeader);
  out += "\n";
  for (std::size_t k = 0; k < bound.size(); ++k)
    out += std::to_string(k) + "," + detail::format_double(trace.sup_errors[k]) + "," +
           detail::format_double(bound[k]) + "\n";
  return out;
}

inline std::vector<TraceRow> read_trace_csv(std::string_view text) {
  std::vector<TraceRow> rows;
  bool header = false;
  detail::for_each_line(text, [&](std::size_t line, std::string_view raw) {
    if (raw.empty()) return;
    if (!header) {
      if (raw != kTraceHeader) throw SyntaxError(line, 1, "expected header '" + std::string(kTraceHeader) + "'");
      header = true;
      return;
    }
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    for (;;) {
      const auto comma = raw.find(',', pos);
      fields.push_back(raw.substr(pos, comma == std::string_view::npos ? raw.npos : comma - pos));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (fields.size() != 3) throw SyntaxError(line, 0, "expected 3 fields");
    TraceRow r{};
    auto parse = [&](std::string_view f, auto& dst, std::size_t col) {
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), dst);
      if (ec != std::errc() || p != f.data() + f.size() || f.empty())
        throw SyntaxError(line, col, "malformed field '" + std::string(f) + "'");
    };
    parse(fields[0], r.k, 1);
    parse(fields[1], r.sup_error, 2);
    parse(fields[2], r.bound, 3);
    rows.push_back(r);
  });
  if (!header) throw SyntaxError(0, 0, "missing trace header");
  return rows;
}

}  // namespace buchi_dp
