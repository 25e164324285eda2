#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prd/analysis/analysis.hpp"
#include "prd/app/analyze.hpp"
#include "prd/app/config.hpp"
#include "prd/app/train.hpp"
#include "prd/common/errors.hpp"
#include "prd/common/io.hpp"

namespace fs = std::filesystem;
using namespace prd;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

// Checkpoints of a run directory in update order.
std::vector<fs::path> run_checkpoints(const fs::path& run_dir) {
  const fs::path dir = run_dir / "checkpoints";
  if (!fs::is_directory(dir)) throw ConfigError("no checkpoints directory in " + run_dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw ConfigError("no checkpoints in " + dir.string());
  return out;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  atomic_write_file(p, content);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent PPO with relevant-set credit assignment"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string output_dir;
  long long updates = 0;
  bool quiet = false;
  auto* train = app.add_subcommand("train", "Train a policy from a JSON config");
  train->add_option("--config", config_path, "Config file")->required();
  auto* seed_opt = train->add_option("--seed", seed, "Run seed (default: run.seed from the config)");
  train->add_option("--output", output_dir, "Output root (PRD_MARL_OUT takes precedence)");
  train->add_option("--updates", updates, "Override run.total_updates");
  train->add_flag("--quiet", quiet, "No per-update log");

  auto* analyze = app.add_subcommand("analyze", "Post-hoc analysis of runs and checkpoints");
  analyze->require_subcommand(1);

  std::vector<std::string> var_checkpoints;
  std::string var_run;
  int var_batches = 30;
  int var_batch_size = 0;
  std::uint64_t var_seed = 0;
  std::string var_out = ".";
  auto* variance = analyze->add_subcommand("variance", "Policy-gradient variance, MAPPO vs PRD filtering");
  variance->add_option("--checkpoints", var_checkpoints, "Checkpoint files");
  variance->add_option("--run", var_run, "Use every checkpoint of a run directory");
  variance->add_option("--batches", var_batches, "Batches K per checkpoint")->check(CLI::Range(2, 1000000));
  variance->add_option("--batch-size", var_batch_size, "Episodes per batch (default: config)");
  variance->add_option("--seed", var_seed, "Collection seed");
  variance->add_option("--out-dir", var_out, "Directory for variance_mappo.csv and variance_prd.csv");

  std::string att_checkpoint;
  int att_episodes = 100;
  bool att_greedy = false;
  std::uint64_t att_seed = 0;
  std::string att_out;
  auto* attention = analyze->add_subcommand("attention", "Average Q-critic attention matrix");
  attention->add_option("--checkpoint", att_checkpoint, "Checkpoint file")->required();
  attention->add_option("--episodes", att_episodes, "Episodes to average")->check(CLI::PositiveNumber);
  attention->add_flag("--greedy", att_greedy, "Act greedily instead of sampling");
  attention->add_option("--seed", att_seed, "Collection seed");
  attention->add_option("--out", att_out, "CSV path (default: stdout)");

  std::vector<std::string> rew_runs;
  std::string rew_out;
  auto* rewards = analyze->add_subcommand("rewards", "Mean return curve with 95% interval across runs");
  rewards->add_option("--runs", rew_runs, "Run directories or returns.csv files")->required();
  rewards->add_option("--out", rew_out, "CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  seed_given = seed_opt->count() > 0;

  try {
    if (*train) {
      app::HyperConfig config = app::load_config(config_path);
      if (updates > 0) config.run.total_updates = updates;
      if (!seed_given) seed = config.run.seed;
      fs::path root = output_dir.empty() ? fs::path(config.run.output_dir) : fs::path(output_dir);
      if (const char* env_out = std::getenv("PRD_MARL_OUT"); env_out != nullptr && *env_out != '\0') {
        root = env_out;
      }
      app::TrainResult result = app::run_train(config, seed, root, quiet ? nullptr : &std::cerr);
      std::cout << result.run_dir.string() << "\n"
                << "updates " << result.updates << " episodes " << result.episodes
                << " final_mean_return " << format_double(result.final_mean_return) << "\n";
    } else if (*variance) {
      std::vector<fs::path> checkpoints(var_checkpoints.begin(), var_checkpoints.end());
      if (!var_run.empty()) {
        for (const auto& p : run_checkpoints(var_run)) checkpoints.push_back(p);
      }
      if (checkpoints.empty()) throw ConfigError("analyze variance needs --checkpoints or --run");
      app::VarianceStudy study = app::variance_study(checkpoints, var_batches, var_batch_size, var_seed);
      const fs::path dir(var_out);
      fs::create_directories(dir);
      atomic_write_file(dir / "variance_mappo.csv", analysis::variance_csv(study.mappo));
      atomic_write_file(dir / "variance_prd.csv", analysis::variance_csv(study.prd));
      for (std::size_t i = 0; i < study.prd.size(); ++i) {
        std::cout << study.prd[i].checkpoint << " mappo " << format_double(study.mappo[i].variance) << " prd "
                  << format_double(study.prd[i].variance) << "\n";
      }
    } else if (*attention) {
      app::LoadedCheckpoint ckpt = app::load_checkpoint(att_checkpoint);
      analysis::AttentionSummary summary = app::attention_study(att_checkpoint, att_episodes, att_greedy, att_seed);
      write_output(att_out, analysis::attention_csv(summary));
      const auto teams = env::make_env(ckpt.config.env)->team_ids();
      const analysis::TeamContrast contrast = analysis::team_contrast(summary.mean, teams);
      std::cerr << "intra " << format_double(contrast.intra) << " cross " << format_double(contrast.cross) << "\n";
    } else if (*rewards) {
      std::vector<fs::path> runs(rew_runs.begin(), rew_runs.end());
      analysis::RewardCurve curve = app::reward_study(runs);
      if (curve.truncated) std::cerr << "runs differ in length; truncated to the shortest\n";
      write_output(rew_out, analysis::reward_csv(curve));
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return 0;
}
