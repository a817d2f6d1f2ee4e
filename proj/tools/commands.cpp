#include "commands.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "buchi_dp/buchi_dp.hpp"

namespace buchi_dp::cli {
namespace {

// Failure with a chosen exit status.
struct CommandFailure {
  int code;
  std::string message;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CommandFailure{kExitParse, "cannot read '" + path + "'"};
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_output(const std::optional<std::string>& path, const std::string& bytes, std::ostream& out) {
  if (!path) {
    out << bytes;
    return;
  }
  std::ofstream file(*path, std::ios::binary | std::ios::trunc);
  if (!file) throw CommandFailure{kExitOutput, "cannot open '" + *path + "' for writing"};
  file << bytes;
  file.flush();
  if (!file) throw CommandFailure{kExitOutput, "failed writing '" + *path + "'"};
}

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const CommandFailure& f) {
    err << "error: " << f.message << "\n";
    return f.code;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const PolicyInvalid& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const InvalidParameter& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const Error& e) {
    err << "invariant violation: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUnexpected;
  }
}

std::string num(double v) { return fmt::format("{:.12g}", v); }

std::string names_of(const McModel& mc, const StateSet& states) {
  if (states.empty()) return "-";
  std::string out;
  for (auto s : states) out += (out.empty() ? "" : " ") + mc.state_names[s];
  return out;
}

void print_partition(const McModel& mc, const StatePartition& p, std::ostream& out) {
  out << fmt::format("partition: |B|={} |rejecting BSCC states|={} |remaining|={}\n", p.m(),
                     p.rejecting_bscc_states.size(), p.n_prime());
  out << "  B:               " << names_of(mc, p.b_states) << "\n";
  out << "  rejecting BSCCs: " << names_of(mc, p.rejecting_bscc_states) << "\n";
  out << "  remaining:       " << names_of(mc, p.remaining) << "\n";
}

void print_certificate(const ContractionCertificate& cert, std::ostream& out) {
  out << fmt::format("certificate: epsilon={} n'={} N={} c={}\n", num(cert.epsilon), cert.n_prime,
                     cert.step_n, num(cert.c_theoretical));
  out << "  ||H^k||inf, k=1..N:";
  for (double v : cert.empirical_norms) out << " " << num(v);
  out << "\n  first contractive step: "
      << (cert.first_contractive_step ? std::to_string(*cert.first_contractive_step) : "none") << "\n";
}

std::size_t resolve_k_max(const RunConfig& config, const ChainAnalysis& a, std::size_t fallback_k,
                          double fallback_tol, bool use_tol_default) {
  if (config.k_max && config.tol) throw InvalidParameter("give either --k-max or --tol, not both");
  if (config.k_max) return *config.k_max;
  if (config.tol || use_tol_default)
    return iterations_for_tolerance(config.params(), a.contraction, config.tol.value_or(fallback_tol));
  return fallback_k;
}

double value_norm(const ValueVector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

McModel load_chain(const RunConfig& config) {
  const auto doc = parse_document(read_file(config.model_path));
  Policy policy;
  if (config.policy_path)
    policy = parse_policy(read_file(*config.policy_path), doc.model);
  else if (is_chain(doc.model))
    policy = trivial_policy(doc.model);
  else
    throw CommandFailure{kExitParse, "model has states with several actions; pass --policy"};
  auto mc = apply_policy(doc.model, policy);
  if (const auto violations = validate_mc(mc); !violations.empty())
    throw CommandFailure{kExitParse, "induced chain is malformed: " + violations.front().message};
  return mc;
}

int cmd_check(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto params = config.params();
    params.validate();
    const auto mc = load_chain(config);
    const auto a = analyze_chain(mc, params);
    const auto reach = satisfaction_probability(mc, a.report);

    out << fmt::format("model: {} ({} states, initial {})\n", config.model_path, mc.num_states(),
                       mc.state_names[mc.initial]);
    out << fmt::format("discounts: gamma_b={} gamma={}\n", num(params.gamma_b), num(params.gamma));
    print_partition(mc, a.partition, out);

    out << fmt::format("{:<16} {:>16} {:>16} {:>16}\n", "state", "V", "P_sat", "gap");
    double max_gap = 0.0;
    for (StateIndex s = 0; s < mc.num_states(); ++s) {
      const double v = a.value[static_cast<Eigen::Index>(s)];
      const double gap = std::abs(v - reach.probabilities[s]);
      max_gap = std::max(max_gap, gap);
      out << fmt::format("{:<16} {:>16} {:>16} {:>16}\n", mc.state_names[s], num(v),
                         num(reach.probabilities[s]), num(gap));
    }
    out << "max gap: " << num(max_gap) << "\n";

    bool ok = true;
    for (auto s : a.partition.rejecting_bscc_states)
      if (a.value[static_cast<Eigen::Index>(s)] != 0.0) {
        err << "value is nonzero on rejecting BSCC state " << mc.state_names[s] << "\n";
        ok = false;
      }

    if (!a.system) {
      out << "reduced system: empty (every state is in a rejecting BSCC)\n";
      out << "status: " << (ok ? "ok" : "FAILED") << "\n";
      return ok ? kExitOk : kExitInvariant;
    }

    const auto cert = certify(*a.system, params, a.contraction);
    print_certificate(cert, out);

    std::size_t k_max = resolve_k_max(config, a, 0, 1e-9, true);
    if (k_max > kCheckIterationCap) {
      err << "note: a priori iteration count " << k_max << " capped at " << kCheckIterationCap << "\n";
      k_max = kCheckIterationCap;
    }
    const auto trace = run_dp(*a.system, k_max, a.reduced_value);
    const auto bound = bound_sequence(cert, k_max, value_norm(a.reduced_value));
    for (std::size_t k = 0; k <= k_max; ++k) {
      if (trace.sup_errors[k] > bound[k] + 1e-10) {
        err << fmt::format("error {} exceeds bound {} at k={}\n", num(trace.sup_errors[k]), num(bound[k]), k);
        ok = false;
        break;
      }
      if (k > 0 && trace.sup_errors[k] > trace.sup_errors[k - 1] + 1e-12) {
        err << "error grew at k=" << k << "\n";
        ok = false;
        break;
      }
      if (k > 0 && ((trace.iterates[k] - trace.iterates[k - 1]).array() < -1e-12).any()) {
        err << "iterates decreased at k=" << k << "\n";
        ok = false;
        break;
      }
    }
    if (config.tol && trace.sup_errors.back() > *config.tol && k_max < kCheckIterationCap) {
      err << "final error " << num(trace.sup_errors.back()) << " above tolerance\n";
      ok = false;
    }
    out << fmt::format("dp: k={} final sup error={} bound={}\n", k_max, num(trace.sup_errors.back()),
                       num(bound.back()));
    out << "status: " << (ok ? "ok" : "FAILED") << "\n";
    return ok ? kExitOk : kExitInvariant;
  });
}

std::string trace_csv(const RunConfig& config) {
  const auto params = config.params();
  params.validate();
  const auto mc = load_chain(config);
  const auto a = analyze_chain(mc, params);
  if (!a.system) return std::string(kTraceHeader) + "\n";
  const auto cert = certify(*a.system, params, a.contraction);
  const auto k_max = resolve_k_max(config, a, 30, 0.0, false);
  const auto trace = run_dp(*a.system, k_max, a.reduced_value);
  return emit_trace_csv(trace, bound_sequence(cert, k_max, value_norm(a.reduced_value)));
}

int cmd_trace(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    write_output(config.out_path, trace_csv(config), out);
    return kExitOk;
  });
}

int cmd_bound(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto params = config.params();
    params.validate();
    const auto mc = load_chain(config);
    const auto a = analyze_chain(mc, params);
    if (!a.system) {
      out << "reduced system: empty (every state is in a rejecting BSCC); no certificate needed\n";
      return kExitOk;
    }
    const auto cert = certify(*a.system, params, a.contraction);
    print_certificate(cert, out);
    if (config.out_path) {
      const auto k_max = resolve_k_max(config, a, 30, 0.0, false);
      std::string csv = "k,bound\n";
      const auto b = bound_sequence(cert, k_max, value_norm(a.reduced_value));
      for (std::size_t k = 0; k < b.size(); ++k) csv += fmt::format("{},{:.17g}\n", k, b[k]);
      write_output(config.out_path, csv, out);
    }
    return kExitOk;
  });
}

int cmd_bsccs(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto mc = load_chain(config);
    const auto report = classify_bsccs(mc);
    const auto partition = partition_states(mc, report);
    if (config.json) {
      for (std::size_t i = 0; i < report.bsccs.size(); ++i) {
        nlohmann::json line;
        line["bscc"] = i;
        line["accepting"] = report.bsccs[i].accepting;
        line["states"] = nlohmann::json::array();
        for (auto s : report.bsccs[i].states) line["states"].push_back(mc.state_names[s]);
        out << line.dump() << "\n";
      }
      return kExitOk;
    }
    out << "SCCs (reverse topological):\n";
    for (const auto& c : report.sccs) out << "  {" << names_of(mc, c) << "}\n";
    out << "BSCCs:\n";
    for (const auto& b : report.bsccs)
      out << "  {" << names_of(mc, b.states) << "} " << (b.accepting ? "accepting" : "rejecting") << "\n";
    print_partition(mc, partition, out);
    return kExitOk;
  });
}

int cmd_oracle(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto params = config.params();
    params.validate();
    const auto mc = load_chain(config);
    const double tol = config.tol.value_or(1e-6);
    const auto report = classify_bsccs(mc);
    const auto reach = satisfaction_probability(mc, report);
    std::optional<OracleComparison> cmp;
    if (params.undiscounted()) cmp = dp_vs_oracle_report(mc, params, tol);

    if (config.json) {
      nlohmann::json j;
      j["gamma_b"] = params.gamma_b;
      j["gamma"] = params.gamma;
      for (StateIndex s = 0; s < mc.num_states(); ++s) {
        nlohmann::json row{{"state", mc.state_names[s]}, {"p_sat", reach.probabilities[s]}};
        if (cmp) {
          row["v_dp"] = cmp->value[static_cast<Eigen::Index>(s)];
          row["gap"] = cmp->gaps[s];
        }
        j["states"].push_back(row);
      }
      if (cmp) {
        j["max_gap"] = cmp->max_gap;
        j["worst_state"] = mc.state_names[cmp->worst_state];
        j["tolerance"] = tol;
        j["pass"] = cmp->pass;
      }
      out << j.dump() << "\n";
      return kExitOk;
    }
    out << fmt::format("{:<16} {:>16}", "state", "P_sat");
    if (cmp) out << fmt::format(" {:>16} {:>16}", "V_dp", "gap");
    out << "\n";
    for (StateIndex s = 0; s < mc.num_states(); ++s) {
      out << fmt::format("{:<16} {:>16}", mc.state_names[s], num(reach.probabilities[s]));
      if (cmp)
        out << fmt::format(" {:>16} {:>16}", num(cmp->value[static_cast<Eigen::Index>(s)]), num(cmp->gaps[s]));
      out << "\n";
    }
    if (cmp)
      out << fmt::format("max gap: {} at {} (tolerance {}): {}\n", num(cmp->max_gap),
                         mc.state_names[cmp->worst_state], num(tol), cmp->pass ? "pass" : "fail");
    return kExitOk;
  });
}

int cmd_mc(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto params = config.params();
    params.validate();
    const auto mc = load_chain(config);
    const auto horizon = config.horizon.value_or(100 * mc.num_states());
    const auto est = estimate_satisfaction(mc, params, config.episodes, horizon, config.seed);
    if (config.json) {
      nlohmann::json j{{"episodes", est.episodes}, {"horizon", est.horizon}, {"seed", est.seed}};
      for (StateIndex s = 0; s < mc.num_states(); ++s)
        j["states"].push_back({{"state", mc.state_names[s]},
                               {"mean", est.means[s]},
                               {"variance", est.variances[s]}});
      out << j.dump() << "\n";
      return kExitOk;
    }
    out << fmt::format("episodes={} horizon={} seed={}\n", est.episodes, est.horizon, est.seed);
    out << fmt::format("{:<16} {:>16} {:>16}\n", "state", "mean return", "std error");
    for (StateIndex s = 0; s < mc.num_states(); ++s)
      out << fmt::format("{:<16} {:>16} {:>16}\n", mc.state_names[s], num(est.means[s]),
                         num(std::sqrt(est.variances[s] / static_cast<double>(est.episodes))));
    return kExitOk;
  });
}

std::string sweep_csv(const RunConfig& config) {
  if (config.gamma_b_list.empty()) throw InvalidParameter("--gamma-b-list is empty");
  const auto mc = load_chain(config);
  const auto report = classify_bsccs(mc);
  const auto reach = satisfaction_probability(mc, report);
  std::string csv = "gamma_b,gap\n";
  for (double gb : config.gamma_b_list) {
    const auto a = analyze_chain(mc, SurrogateParams{gb, config.gamma});
    double gap = 0.0;
    for (StateIndex s = 0; s < mc.num_states(); ++s)
      gap = std::max(gap, std::abs(a.value[static_cast<Eigen::Index>(s)] - reach.probabilities[s]));
    csv += fmt::format("{:.17g},{:.17g}\n", gb, gap);
  }
  return csv;
}

int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    write_output(config.out_path, sweep_csv(config), out);
    return kExitOk;
  });
}

int cmd_generate(const RandomChainSpec& spec, const std::optional<std::string>& out_path,
                 std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto mc = random_chain(spec);
    write_output(out_path, serialize_model({ModelKind::Mc, as_mdp(mc, std::string(kChainActionName))}), out);
    return kExitOk;
  });
}

}  // namespace buchi_dp::cli
