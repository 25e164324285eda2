#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "prd/analysis/analysis.hpp"
#include "prd/app/config.hpp"

namespace prd::app {

struct LoadedCheckpoint {
  nets::Model model;
  HyperConfig config;
  long long update = 0;
  long long episodes = 0;
};

// Throws ConfigError when the file is missing or malformed.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

// Credit settings for a variance mode: "mappo" (all agents relevant) or "prd"
// (the checkpoint's own strategy, soft weighting for a MAPPO checkpoint).
// Advantages stay unnormalized so the two modes share a scale.
optimize::AlgoConfig variance_algo(const HyperConfig& config, const std::string& mode);

struct VarianceStudy {
  std::vector<analysis::VarianceReport> mappo;
  std::vector<analysis::VarianceReport> prd;
};

// For every checkpoint, K batches from its policy are collected once and both
// estimators are evaluated on them. batch_size <= 0 uses the config's
// episodes per update.
VarianceStudy variance_study(const std::vector<std::filesystem::path>& checkpoints, int num_batches,
                             int batch_size, std::uint64_t seed);

analysis::AttentionSummary attention_study(const std::filesystem::path& checkpoint, int num_episodes, bool greedy,
                                           std::uint64_t seed);

// Each input is a run directory (its returns.csv is read) or a returns CSV file.
analysis::RewardCurve reward_study(const std::vector<std::filesystem::path>& runs);

}  // namespace prd::app
