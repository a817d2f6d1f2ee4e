#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "buchi_dp/model.hpp"
#include "buchi_dp/random_chain.hpp"
#include "buchi_dp/surrogate_dp.hpp"

namespace buchi_dp::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUnexpected = 1,
  kExitParse = 2,
  kExitInvariant = 3,
  kExitOutput = 4,
};

struct RunConfig {
  std::string model_path;
  std::optional<std::string> policy_path;
  double gamma_b = 0.99;
  double gamma = 1.0;
  std::optional<std::size_t> k_max;
  std::optional<double> tol;
  std::uint64_t seed = 1;
  std::optional<std::string> out_path;

  // oracle / mc
  bool json = false;
  std::size_t episodes = 10000;
  std::optional<std::size_t> horizon;  // default 100·|S|

  // sweep
  std::vector<double> gamma_b_list;

  SurrogateParams params() const { return {gamma_b, gamma}; }
};

// Iteration cap for tolerance-driven runs inside `check`.
inline constexpr std::size_t kCheckIterationCap = 1'000'000;

// Loads the model (and policy) named by the config as the induced chain.
// Chain-shaped models need no policy.
McModel load_chain(const RunConfig& config);

int cmd_check(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_trace(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_bound(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_bsccs(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_oracle(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_mc(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_generate(const RandomChainSpec& spec, const std::optional<std::string>& out_path,
                 std::ostream& out, std::ostream& err);

// Bytes written by `trace` for this config.
std::string trace_csv(const RunConfig& config);
std::string sweep_csv(const RunConfig& config);

}  // namespace buchi_dp::cli
