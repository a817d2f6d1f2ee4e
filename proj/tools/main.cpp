#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace buchi_dp::cli;

  CLI::App app{"Büchi satisfaction probability via the two-discount surrogate reward"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  RunConfig config;
  buchi_dp::RandomChainSpec gen_spec;
  std::optional<std::string> gen_out;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("model", config.model_path, "Model file (.mdp)")->required();
    sub->add_option("--policy", config.policy_path, "Policy file (.pol); optional for chains");
    sub->add_option("--gamma-b", config.gamma_b, "Discount on accepting states")->capture_default_str();
    sub->add_option("--gamma", config.gamma, "Discount on other states")->capture_default_str();
  };
  auto add_horizon = [&](CLI::App* sub) {
    auto* k = sub->add_option("--k-max", config.k_max, "Number of DP iterations");
    auto* t = sub->add_option("--tol", config.tol, "Target sup error; iterations from the a priori bound");
    k->excludes(t);
  };

  auto* check = app.add_subcommand("check", "Full pipeline with invariant checks");
  add_common(check);
  add_horizon(check);

  auto* trace = app.add_subcommand("trace", "Write the k,sup_error,bound CSV");
  add_common(trace);
  add_horizon(trace);
  trace->add_option("--out", config.out_path, "Output CSV (default stdout)");

  auto* bound = app.add_subcommand("bound", "Print the contraction certificate");
  add_common(bound);
  add_horizon(bound);
  bound->add_option("--out", config.out_path, "Write the k,bound CSV here");

  auto* bsccs = app.add_subcommand("bsccs", "Print SCCs, BSCCs and the state partition");
  add_common(bsccs);
  bsccs->add_flag("--jsonl", config.json, "One JSON object per BSCC");

  auto* oracle = app.add_subcommand("oracle", "Reachability ground truth and DP comparison");
  add_common(oracle);
  oracle->add_option("--tol", config.tol, "Pass threshold for the gap (default 1e-6)");
  oracle->add_flag("--json", config.json, "JSON output");

  auto* mc = app.add_subcommand("mc", "Monte Carlo estimate of the truncated return");
  add_common(mc);
  mc->add_option("--episodes", config.episodes, "Episodes per start state")->capture_default_str();
  mc->add_option("--horizon", config.horizon, "Steps per episode (default 100*|S|)");
  mc->add_option("--seed", config.seed, "Run seed")->capture_default_str();
  mc->add_flag("--json", config.json, "JSON output");

  auto* sweep = app.add_subcommand("sweep", "Gap to P_sat for several gamma_b values");
  add_common(sweep);
  sweep->add_option("--gamma-b-list", config.gamma_b_list, "Comma-separated gamma_b values")
      ->delimiter(',')
      ->required();
  sweep->add_option("--out", config.out_path, "Output CSV (default stdout)");

  auto* gen = app.add_subcommand("generate", "Write a seeded random chain");
  gen->add_option("--size", gen_spec.size)->capture_default_str();
  gen->add_option("--density", gen_spec.edge_density)->capture_default_str();
  gen->add_option("--accepting-fraction", gen_spec.accepting_fraction)->capture_default_str();
  gen->add_option("--sink-fraction", gen_spec.sink_fraction)->capture_default_str();
  gen->add_option("--seed", gen_spec.seed)->capture_default_str();
  gen->add_option("--out", gen_out, "Output model file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitParse;
  }

  auto& out = std::cout;
  auto& err = std::cerr;
  if (*check) return cmd_check(config, out, err);
  if (*trace) return cmd_trace(config, out, err);
  if (*bound) return cmd_bound(config, out, err);
  if (*bsccs) return cmd_bsccs(config, out, err);
  if (*oracle) return cmd_oracle(config, out, err);
  if (*mc) return cmd_mc(config, out, err);
  if (*sweep) return cmd_sweep(config, out, err);
  if (*gen) return cmd_generate(gen_spec, gen_out, out, err);
  return kExitUnexpected;
}
