#include "prd/app/analyze.hpp"

#include "prd/common/errors.hpp"
#include "prd/common/random.hpp"
#include "prd/nets/checkpoint.hpp"

namespace prd::app {

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  const nlohmann::json doc = nets::read_checkpoint(path);
  try {
    const nlohmann::json& meta = doc.at("metadata");
    LoadedCheckpoint out{nets::model_from_checkpoint(doc), parse_config(meta.at("config")),
                         meta.at("update").get<long long>(), meta.at("episodes").get<long long>()};
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("checkpoint " + path.string() + " lacks metadata: " + e.what());
  }
}

optimize::AlgoConfig variance_algo(const HyperConfig& config, const std::string& mode) {
  optimize::AlgoConfig algo = config.algo;
  algo.normalize_advantages = false;
  if (mode == "mappo") {
    algo.credit.strategy = credit::Strategy::kNone;
  } else if (mode == "prd") {
    if (algo.credit.strategy == credit::Strategy::kNone) algo.credit.strategy = credit::Strategy::kSoft;
  } else {
    throw ConfigError("variance mode must be 'mappo' or 'prd'");
  }
  return algo;
}

VarianceStudy variance_study(const std::vector<std::filesystem::path>& checkpoints, int num_batches,
                             int batch_size, std::uint64_t seed) {
  if (num_batches < 2) throw ConfigError("variance needs at least two batches");
  VarianceStudy study;
  for (const auto& path : checkpoints) {
    LoadedCheckpoint ckpt = load_checkpoint(path);
    const env::EnvFactory factory = env::make_env_factory(ckpt.config.env);
    const int episodes = batch_size > 0 ? batch_size : ckpt.config.num_episodes;
    const std::uint64_t batch_seed = derive_seed(seed, static_cast<std::uint64_t>(ckpt.update));
    const auto batches = analysis::collect_batches(factory, ckpt.model, num_batches, episodes, batch_seed);
    const int chunk = ckpt.config.optim.chunk_length;
    for (const char* mode : {"mappo", "prd"}) {
      analysis::VarianceReport report = analysis::gradient_variance(
          ckpt.model, batches, variance_algo(ckpt.config, mode), chunk, ckpt.update, derive_seed(batch_seed, mode));
      report.checkpoint = path.filename().string();
      (std::string(mode) == "mappo" ? study.mappo : study.prd).push_back(report);
    }
  }
  return study;
}

analysis::AttentionSummary attention_study(const std::filesystem::path& checkpoint, int num_episodes, bool greedy,
                                           std::uint64_t seed) {
  LoadedCheckpoint ckpt = load_checkpoint(checkpoint);
  const env::EnvFactory factory = env::make_env_factory(ckpt.config.env);
  return analysis::attention_summary(factory, ckpt.model, num_episodes, 50, greedy, seed);
}

analysis::RewardCurve reward_study(const std::vector<std::filesystem::path>& runs) {
  std::vector<std::vector<double>> curves;
  for (const auto& run : runs) {
    const auto file = std::filesystem::is_directory(run) ? run / "returns.csv" : run;
    curves.push_back(analysis::read_returns(file.string()));
  }
  return analysis::reward_stats(curves);
}

}  // namespace prd::app
