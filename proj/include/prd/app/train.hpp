#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "prd/app/config.hpp"

namespace prd::app {

inline constexpr const char* kMetricsHeader =
    "update,episodes,mean_return,policy_loss,value_loss,q_loss,entropy,mean_ratio,epsilon_t,grad_norm";

struct TrainResult {
  std::filesystem::path run_dir;
  long long updates = 0;
  long long episodes = 0;
  // Mean team return over the last min(100, episodes) episodes.
  double final_mean_return = 0.0;
};

// Directory name of a run inside the output root: <env>_<variant>_seed<seed>.
std::string run_name(const HyperConfig& config, std::uint64_t seed);

// Checkpoint file name for an update index.
std::string checkpoint_name(long long update);

// Runs the training loop {collect, credit weights, advantages, update} and
// writes config.json, metrics.csv, returns.csv, checkpoints/ and summary.json
// under output_root / run_name. Deterministic given (config, seed).
// Non-finite losses or gradients dump nan_state.json and rethrow NumericalError.
TrainResult run_train(const HyperConfig& config, std::uint64_t seed, const std::filesystem::path& output_root,
                      std::ostream* log = nullptr);

}  // namespace prd::app
