#include "prd/app/train.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <ostream>

#include "prd/common/errors.hpp"
#include "prd/common/io.hpp"
#include "prd/common/random.hpp"
#include "prd/nets/checkpoint.hpp"
#include "prd/rollout/rollout.hpp"

namespace prd::app {

std::string run_name(const HyperConfig& config, std::uint64_t seed) {
  return config.env.name + "_" + config.variant + "_seed" + std::to_string(seed);
}

std::string checkpoint_name(long long update) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "update_%06lld.json", update);
  return buf;
}

namespace {

nlohmann::json checkpoint_metadata(const HyperConfig& config, std::uint64_t seed, long long update,
                                   long long episodes) {
  return {{"update", update}, {"episodes", episodes}, {"seed", seed}, {"config", to_json(config)}};
}

}  // namespace

TrainResult run_train(const HyperConfig& input, std::uint64_t seed, const std::filesystem::path& output_root,
                      std::ostream* log) {
  HyperConfig config = input;
  config.run.seed = seed;
  validate(config);
  const env::EnvFactory factory = env::make_env_factory(config.env);
  nets::Model model = nets::make_model(model_config(config), derive_seed(seed, "model"));
  optimize::Trainer trainer(model, config.optim);
  const credit::Strategy strategy = config.algo.credit.strategy;
  const bool train_q = strategy != credit::Strategy::kNone;
  const bool shared_q = strategy == credit::Strategy::kShared;

  TrainResult result;
  result.run_dir = output_root / run_name(config, seed);
  const auto ckpt_dir = result.run_dir / "checkpoints";
  std::filesystem::create_directories(ckpt_dir);
  atomic_write_file(result.run_dir / "config.json", to_json(config).dump(2) + "\n");
  nets::save_checkpoint(ckpt_dir / checkpoint_name(0), model, checkpoint_metadata(config, seed, 0, 0));

  CsvTable metrics;
  metrics.header = {"update",   "episodes",   "mean_return", "policy_loss", "value_loss",
                    "q_loss",   "entropy",    "mean_ratio",  "epsilon_t",   "grad_norm"};
  CsvTable returns;
  returns.header = {"episode", "return"};
  std::deque<double> recent;
  const std::uint64_t rollout_seed = derive_seed(seed, "rollout");

  for (long long u = 0; u < config.run.total_updates; ++u) {
    rollout::CollectOptions options;
    options.batch_size = config.num_episodes;
    options.evaluate_q = train_q;
    options.first_episode = static_cast<std::uint64_t>(u) * static_cast<std::uint64_t>(config.num_episodes);
    const auto trajectories = rollout::collect(factory, model, options, rollout_seed);
    if (config.run.dump_trajectories) {
      char name[48];
      std::snprintf(name, sizeof(name), "trajectories_%06lld.jsonl", u);
      rollout::dump_jsonl(result.run_dir / name, trajectories);
    }

    double total_return = 0.0;
    for (const auto& traj : trajectories) {
      const double r = traj.team_return();
      total_return += r;
      returns.rows.push_back({std::to_string(result.episodes), format_double(r)});
      recent.push_back(r);
      if (recent.size() > 100) recent.pop_front();
      ++result.episodes;
    }

    optimize::UpdateMetrics m;
    try {
      const optimize::PreparedBatch prepared = optimize::prepare_batch(trajectories, config.algo, u);
      m = trainer.update(trajectories, prepared, train_q, shared_q, derive_seed(seed, static_cast<std::uint64_t>(u)));
    } catch (const NumericalError&) {
      nets::save_checkpoint(result.run_dir / "nan_state.json", model,
                            checkpoint_metadata(config, seed, u, result.episodes));
      throw;
    }
    const optimize::EpochMetrics& first = m.epochs.front();
    metrics.rows.push_back({std::to_string(u + 1), std::to_string(result.episodes),
                            format_double(total_return / static_cast<double>(trajectories.size())),
                            format_double(first.policy_loss), format_double(first.value_loss),
                            format_double(first.q_loss), format_double(first.entropy),
                            format_double(m.epochs.back().mean_ratio), format_double(m.epsilon),
                            format_double(first.grad_norm)});
    result.updates = u + 1;

    const bool last = u + 1 == config.run.total_updates;
    if ((u + 1) % config.run.checkpoint_interval == 0 || last) {
      nets::save_checkpoint(ckpt_dir / checkpoint_name(u + 1), model,
                            checkpoint_metadata(config, seed, u + 1, result.episodes));
    }
    if ((u + 1) % 10 == 0 || last) {
      atomic_write_file(result.run_dir / "metrics.csv", to_csv(metrics));
      atomic_write_file(result.run_dir / "returns.csv", to_csv(returns));
    }
    if (log != nullptr && ((u + 1) % 10 == 0 || last)) {
      *log << "update " << (u + 1) << " episodes " << result.episodes << " mean_return "
           << format_double(total_return / static_cast<double>(trajectories.size())) << "\n";
    }
  }

  double recent_sum = 0.0;
  for (double r : recent) recent_sum += r;
  result.final_mean_return = recent.empty() ? 0.0 : recent_sum / static_cast<double>(recent.size());
  nlohmann::json summary = {{"updates", result.updates},
                            {"episodes", result.episodes},
                            {"final_mean_return", result.final_mean_return},
                            {"seed", seed},
                            {"variant", config.variant},
                            {"env", config.env.name}};
  atomic_write_file(result.run_dir / "summary.json", summary.dump(2) + "\n");
  return result;
}

}  // namespace prd::app
