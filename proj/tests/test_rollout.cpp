#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "fixtures.hpp"
#include "prd/rollout/rollout.hpp"

using namespace prd;
using namespace prd::rollout;

namespace {

env::EnvConfig tiny_lbf() {
  env::EnvConfig config;
  config.name = "lbf";
  config.lbf.grid_size = 3;
  config.lbf.num_agents = 2;
  config.lbf.num_food = 1;
  config.lbf.agent_levels = {1, 1};
  config.lbf.food_levels = {1};
  config.lbf.max_timesteps = 25;
  return config;
}

}  // namespace

TEST_CASE("chunking covers an episode in order") {
  auto c = chunk(23, 10);
  REQUIRE(c.size() == 3);
  CHECK(c[0] == std::pair<int, int>{0, 10});
  CHECK(c[2] == std::pair<int, int>{20, 3});
  CHECK(chunk(10, 10).size() == 1);
  CHECK(chunk(0, 10).empty());
}

TEST_CASE("collection is deterministic and batch-independent") {
  const auto env_cfg = test::small_ca(9);
  auto factory = env::make_env_factory(env_cfg);
  nets::Model model = nets::make_model(test::small_model_config(env_cfg), 2);
  CollectOptions opts;
  opts.batch_size = 3;
  const auto a = collect(factory, model, opts, 11);
  const auto b = collect(factory, model, opts, 11);
  const auto other = collect(factory, model, opts, 12);
  REQUIRE(a.size() == 3);
  bool differs = false;
  for (std::size_t e = 0; e < 3; ++e) {
    REQUIRE(a[e].length() == b[e].length());
    for (int t = 0; t < a[e].length(); ++t) {
      const auto& x = a[e].steps[static_cast<std::size_t>(t)];
      const auto& y = b[e].steps[static_cast<std::size_t>(t)];
      CHECK(x.actions == y.actions);
      CHECK(x.state == y.state);
      CHECK(x.v_values == y.v_values);
      CHECK(x.attention == y.attention);
      if (x.actions != other[e].steps[static_cast<std::size_t>(std::min(t, other[e].length() - 1))].actions) differs = true;
    }
  }
  CHECK(differs);

  // Episode 2 of the batch replays alone as first_episode = 2.
  CollectOptions single;
  single.first_episode = 2;
  const auto solo = collect(factory, model, single, 11);
  REQUIRE(solo[0].length() == a[2].length());
  for (int t = 0; t < solo[0].length(); ++t) {
    const auto& x = solo[0].steps[static_cast<std::size_t>(t)];
    const auto& y = a[2].steps[static_cast<std::size_t>(t)];
    CHECK(x.actions == y.actions);
    CHECK(x.rewards == y.rewards);
    CHECK((x.q_values - y.q_values).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("recorded transitions are consistent") {
  const auto env_cfg = test::small_ca(6);
  auto factory = env::make_env_factory(env_cfg);
  auto mc = test::small_model_config(env_cfg);
  nets::Model model = nets::make_model(mc, 3);
  CollectOptions opts;
  opts.batch_size = 2;
  model.q.reset_evaluations();
  model.v.reset_evaluations();
  const auto trajs = collect(factory, model, opts, 5);
  for (const auto& tr : trajs) {
    CHECK(tr.length() == 6);
    CHECK_FALSE(tr.terminated);
    CHECK(tr.bootstrap_v.size() == 4);
    CHECK(tr.bootstrap_q.size() == 4);
    CHECK(tr.steps.front().actor_hidden == Matrix::Zero(4, mc.hidden));
    CHECK(tr.steps.back().done);
    double total = 0.0;
    for (const auto& s : tr.steps) {
      CHECK(s.log_probs.maxCoeff() <= 0.0);
      CHECK(s.attention.diagonal() == Eigen::VectorXd::Ones(4));
      total += s.rewards.sum();
    }
    CHECK(tr.team_return() == doctest::Approx(total));
  }
  // M rows per step plus one bootstrap group per truncated episode.
  CHECK(model.v.evaluations() == 2u * (6u + 1u) * 4u);
  CHECK(model.q.evaluations() == 2u * (6u + 1u) * 4u);

  CollectOptions no_critics;
  no_critics.evaluate_q = false;
  no_critics.evaluate_v = false;
  model.q.reset_evaluations();
  const auto bare = collect(factory, model, no_critics, 5);
  CHECK(model.q.evaluations() == 0u);
  CHECK(bare[0].steps[0].q_values.size() == 0);
  CHECK(bare[0].bootstrap_q.size() == 0);
}

TEST_CASE("terminated episodes bootstrap from zero") {
  const auto env_cfg = tiny_lbf();
  auto factory = env::make_env_factory(env_cfg);
  nets::Model model = nets::make_model(test::small_model_config(env_cfg), 4);
  CollectOptions opts;
  opts.batch_size = 8;
  const auto trajs = collect(factory, model, opts, 1);
  int terminated = 0;
  for (const auto& tr : trajs) {
    if (!tr.terminated) continue;
    ++terminated;
    CHECK(tr.length() < 25);
    CHECK(tr.bootstrap_v == Vector::Zero(2));
    CHECK(tr.bootstrap_q == Vector::Zero(2));
    CHECK(tr.team_return() == doctest::Approx(1.0));
  }
  CHECK(terminated > 0);
}

TEST_CASE("trajectory JSON lines") {
  const auto env_cfg = test::small_ca(3);
  auto factory = env::make_env_factory(env_cfg);
  nets::Model model = nets::make_model(test::small_model_config(env_cfg), 1);
  const auto trajs = collect(factory, model, CollectOptions{}, 9);
  std::istringstream in(to_jsonl(trajs[0]));
  std::string line;
  int count = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("t") == count);
    CHECK(j.at("actions").size() == 4);
    CHECK(j.at("rewards").size() == 4);
    CHECK(j.at("state").size() == static_cast<std::size_t>(trajs[0].steps[0].state.size()));
    ++count;
  }
  CHECK(count == 3);
}
