#include "prd/rollout/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include <json.hpp>

#include "prd/common/errors.hpp"
#include "prd/common/io.hpp"
#include "prd/common/random.hpp"

namespace prd::rollout {

double Trajectory::team_return() const {
  double total = 0.0;
  for (const auto& s : steps) total += s.rewards.sum();
  return total;
}

namespace {

struct Episode {
  std::unique_ptr<env::Environment> env;
  Rng rng;
  Matrix observation;
  Matrix state;
  Matrix actor_hidden;
  Matrix q_hidden;
  Matrix v_hidden;
  Trajectory trajectory;
  bool live = true;
};

int choose(const Eigen::Ref<const Eigen::RowVectorXd>& log_probs, bool greedy, Rng& rng) {
  if (greedy) {
    Eigen::Index best = 0;
    log_probs.maxCoeff(&best);
    return static_cast<int>(best);
  }
  std::vector<double> probs(static_cast<std::size_t>(log_probs.size()));
  for (Eigen::Index a = 0; a < log_probs.size(); ++a) probs[static_cast<std::size_t>(a)] = std::exp(log_probs(a));
  return sample_categorical(probs, rng);
}

// Stacks the per-episode matrices of `members` into one block of rows.
Matrix stack(const std::vector<Episode*>& members, Matrix Episode::*field) {
  const Eigen::Index block = (members.front()->*field).rows();
  Matrix out(block * static_cast<Eigen::Index>(members.size()), (members.front()->*field).cols());
  for (std::size_t e = 0; e < members.size(); ++e) {
    out.middleRows(static_cast<Eigen::Index>(e) * block, block) = members[e]->*field;
  }
  return out;
}

}  // namespace

std::vector<Trajectory> collect(const env::EnvFactory& factory, nets::Model& model,
                                const CollectOptions& options, std::uint64_t seed) {
  if (options.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  const int m = model.config.num_agents;
  const int hidden = model.config.hidden;

  std::vector<Episode> episodes(static_cast<std::size_t>(options.batch_size));
  for (int e = 0; e < options.batch_size; ++e) {
    Episode& ep = episodes[static_cast<std::size_t>(e)];
    const std::uint64_t episode_seed = derive_seed(seed, options.first_episode + static_cast<std::uint64_t>(e));
    ep.env = factory();
    if (ep.env->num_agents() != m) throw ContractError("environment agent count differs from the model");
    env::ResetResult reset = ep.env->reset(derive_seed(episode_seed, "env"));
    ep.rng.seed(derive_seed(episode_seed, "actions"));
    ep.observation = std::move(reset.observation);
    ep.state = std::move(reset.state.agent_states);
    ep.actor_hidden = Matrix::Zero(m, hidden);
    ep.q_hidden = Matrix::Zero(m, hidden);
    ep.v_hidden = Matrix::Zero(m, hidden);
    ep.trajectory.seed = episode_seed;
  }

  std::vector<Episode*> live;
  std::vector<Episode*> truncated;
  for (;;) {
    live.clear();
    for (auto& ep : episodes) {
      if (ep.live) live.push_back(&ep);
    }
    if (live.empty()) break;
    const auto n = static_cast<Eigen::Index>(live.size());

    ad::Tape tape(false);
    auto policy = model.policy.bind(tape);
    nets::Policy::Output pi =
        model.policy.step(policy, stack(live, &Episode::observation), tape.constant(stack(live, &Episode::actor_hidden)));
    std::vector<int> actions(static_cast<std::size_t>(n * m));
    for (Eigen::Index r = 0; r < n * m; ++r) {
      actions[static_cast<std::size_t>(r)] = choose(pi.log_probs.value().row(r), options.greedy, live[static_cast<std::size_t>(r / m)]->rng);
    }
    const Matrix states = stack(live, &Episode::state);
    nets::Critic::Output q_out;
    nets::Critic::Output v_out;
    Matrix q_values;
    Matrix v_values;
    if (options.evaluate_q) {
      auto qb = model.q.bind(tape);
      q_out = model.q.step(qb, states, actions, tape.constant(stack(live, &Episode::q_hidden)));
      q_values = model.q.popart().denormalize(q_out.values.value());
    }
    if (options.evaluate_v) {
      auto vb = model.v.bind(tape);
      v_out = model.v.step(vb, states, actions, tape.constant(stack(live, &Episode::v_hidden)));
      v_values = model.v.popart().denormalize(v_out.values.value());
    }

    truncated.clear();
    for (Eigen::Index e = 0; e < n; ++e) {
      Episode& ep = *live[static_cast<std::size_t>(e)];
      const Eigen::Index base = e * m;
      Transition tr;
      tr.t = static_cast<int>(ep.trajectory.steps.size());
      tr.observation = ep.observation;
      tr.state = ep.state;
      tr.actions.assign(actions.begin() + base, actions.begin() + base + m);
      tr.log_probs.resize(m);
      for (int i = 0; i < m; ++i) tr.log_probs(i) = pi.log_probs.value()(base + i, tr.actions[static_cast<std::size_t>(i)]);
      if (options.evaluate_q) {
        tr.q_values = q_values.middleRows(base, m).col(0);
        tr.attention = q_out.attention.middleRows(base, m);
      }
      if (options.evaluate_v) tr.v_values = v_values.middleRows(base, m).col(0);
      tr.actor_hidden = ep.actor_hidden;
      tr.q_hidden = ep.q_hidden;
      tr.v_hidden = ep.v_hidden;

      env::StepResult result;
      try {
        result = ep.env->step(tr.actions);
      } catch (const std::exception& err) {
        throw std::runtime_error("episode " + std::to_string(options.first_episode + static_cast<std::uint64_t>(&ep - episodes.data())) +
                                 ": " + err.what());
      }
      tr.rewards = result.reward.individual;
      tr.shared_reward = result.reward.shared;
      tr.done = result.done;
      ep.trajectory.steps.push_back(std::move(tr));

      ep.observation = std::move(result.observation);
      ep.state = std::move(result.state.agent_states);
      ep.actor_hidden = pi.hidden.value().middleRows(base, m);
      if (options.evaluate_q) ep.q_hidden = q_out.hidden.value().middleRows(base, m);
      if (options.evaluate_v) ep.v_hidden = v_out.hidden.value().middleRows(base, m);
      if (result.done) {
        ep.live = false;
        ep.trajectory.terminated = result.terminated;
        ep.trajectory.bootstrap_v = Vector::Zero(m);
        if (options.evaluate_q) ep.trajectory.bootstrap_q = Vector::Zero(m);
        if (!result.terminated && (options.evaluate_v || options.evaluate_q)) truncated.push_back(&ep);
      }
    }

    if (!truncated.empty()) {
      // The bootstrap values need the agents' next actions, so sample them.
      const auto nt = static_cast<Eigen::Index>(truncated.size());
      ad::Tape boot(false);
      auto pb = model.policy.bind(boot);
      nets::Policy::Output next = model.policy.step(pb, stack(truncated, &Episode::observation),
                                                    boot.constant(stack(truncated, &Episode::actor_hidden)));
      std::vector<int> next_actions(static_cast<std::size_t>(nt * m));
      for (Eigen::Index r = 0; r < nt * m; ++r) {
        next_actions[static_cast<std::size_t>(r)] =
            choose(next.log_probs.value().row(r), options.greedy, truncated[static_cast<std::size_t>(r / m)]->rng);
      }
      const Matrix next_states = stack(truncated, &Episode::state);
      if (options.evaluate_v) {
        auto vb = model.v.bind(boot);
        nets::Critic::Output v_next =
            model.v.step(vb, next_states, next_actions, boot.constant(stack(truncated, &Episode::v_hidden)));
        const Matrix values = model.v.popart().denormalize(v_next.values.value());
        for (Eigen::Index e = 0; e < nt; ++e) {
          truncated[static_cast<std::size_t>(e)]->trajectory.bootstrap_v = values.middleRows(e * m, m).col(0);
        }
      }
      if (options.evaluate_q) {
        auto qb = model.q.bind(boot);
        nets::Critic::Output q_next =
            model.q.step(qb, next_states, next_actions, boot.constant(stack(truncated, &Episode::q_hidden)));
        const Matrix values = model.q.popart().denormalize(q_next.values.value());
        for (Eigen::Index e = 0; e < nt; ++e) {
          truncated[static_cast<std::size_t>(e)]->trajectory.bootstrap_q = values.middleRows(e * m, m).col(0);
        }
      }
    }
  }

  std::vector<Trajectory> out;
  out.reserve(episodes.size());
  for (auto& ep : episodes) out.push_back(std::move(ep.trajectory));
  return out;
}

std::vector<std::pair<int, int>> chunk(int length, int chunk_length) {
  if (chunk_length < 1) throw ContractError("chunk length must be >= 1");
  std::vector<std::pair<int, int>> out;
  for (int start = 0; start < length; start += chunk_length) {
    out.emplace_back(start, std::min(chunk_length, length - start));
  }
  return out;
}

std::string to_jsonl(const Trajectory& trajectory) {
  std::string out;
  for (const auto& s : trajectory.steps) {
    nlohmann::json line;
    line["t"] = s.t;
    std::vector<double> state;
    for (Eigen::Index r = 0; r < s.state.rows(); ++r) {
      for (Eigen::Index c = 0; c < s.state.cols(); ++c) state.push_back(s.state(r, c));
    }
    line["state"] = state;
    line["actions"] = s.actions;
    line["rewards"] = std::vector<double>(s.rewards.data(), s.rewards.data() + s.rewards.size());
    line["done"] = s.done;
    out += line.dump();
    out += '\n';
  }
  return out;
}

void dump_jsonl(const std::filesystem::path& path, const std::vector<Trajectory>& trajectories) {
  std::string text;
  for (const auto& t : trajectories) text += to_jsonl(t);
  atomic_write_file(path, text);
}

}  // namespace prd::rollout
