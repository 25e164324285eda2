#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "fixtures.hpp"
#include "prd/common/errors.hpp"
#include "prd/common/random.hpp"
#include "prd/nets/checkpoint.hpp"
#include "prd/nets/init.hpp"
#include "prd/nets/popart.hpp"

using namespace prd;
using ad::Matrix;

TEST_CASE("orthogonal init has orthonormal columns or rows times the gain") {
  Rng rng(1);
  const Matrix tall = nets::orthogonal(12, 5, 2.0, rng);
  CHECK((tall.transpose() * tall - 4.0 * Matrix::Identity(5, 5)).norm() < 1e-12);
  const Matrix wide = nets::orthogonal(4, 9, 1.0, rng);
  CHECK((wide * wide.transpose() - Matrix::Identity(4, 4)).norm() < 1e-12);
  Rng a(7), b(7);
  CHECK(nets::orthogonal(6, 6, 1.0, a) == nets::orthogonal(6, 6, 1.0, b));
}

TEST_CASE("standard_normal has unit moments") {
  Rng rng(2);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = nets::standard_normal(rng);
    s += x;
    s2 += x * x;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
}

TEST_CASE("param_set flattening round-trips in insertion order") {
  nets::ParamSet ps;
  ps.add("a", 2, 3).value << 1, 2, 3, 4, 5, 6;
  ps.add("b", 1, 2).value << 7, 8;
  CHECK(ps.num_scalars() == 8);
  Eigen::VectorXd flat = ps.flat_values();
  // Column-major within a tensor.
  CHECK(flat(1) == 4.0);
  CHECK(flat(6) == 7.0);
  flat(7) = -1.0;
  ps.set_flat_values(flat);
  CHECK(ps.at("b").value(0, 1) == -1.0);
  CHECK_THROWS(ps.add("a", 1, 1));
  CHECK_FALSE(ps.contains("c"));
}

TEST_CASE("popart statistics follow the debiased exponential recursion") {
  const double beta = 0.1;
  nets::PopArt popart(beta);
  ad::Parameter w{"w", Matrix::Constant(3, 1, 0.5), Matrix()};
  ad::Parameter b{"b", Matrix::Constant(1, 1, 0.2), Matrix()};
  Rng rng(3);
  std::vector<double> means, squares;
  for (int k = 0; k < 25; ++k) {
    Matrix targets(4, 1);
    for (int r = 0; r < 4; ++r) targets(r) = 10.0 + 5.0 * (uniform01(rng) - 0.5);
    means.push_back(targets.mean());
    squares.push_back(targets.array().square().mean());
    popart.update(targets, w, b);
  }
  // Closed form: weights beta (1 - beta)^(n - 1 - k) over all batches, normalized.
  const auto n = static_cast<int>(means.size());
  double m = 0.0, s = 0.0, z = 0.0;
  for (int k = 0; k < n; ++k) {
    const double weight = beta * std::pow(1.0 - beta, n - 1 - k);
    m += weight * means[static_cast<std::size_t>(k)];
    s += weight * squares[static_cast<std::size_t>(k)];
    z += weight;
  }
  m /= z;
  s /= z;
  CHECK(popart.mean() == doctest::Approx(m).epsilon(1e-12));
  CHECK(popart.stddev() == doctest::Approx(std::sqrt(s - m * m)).epsilon(1e-10));
}

TEST_CASE("popart rescaling preserves the denormalized output") {
  nets::PopArt popart(0.3);
  Rng rng(4);
  ad::Parameter w{"w", nets::orthogonal(5, 1, 1.0, rng), Matrix()};
  ad::Parameter b{"b", Matrix::Constant(1, 1, -0.4), Matrix()};
  Matrix features(7, 5);
  for (Eigen::Index i = 0; i < features.size(); ++i) features(i) = uniform01(rng) - 0.5;
  for (int k = 0; k < 10; ++k) {
    auto output = [&] {
      Matrix z = features * w.value;
      z.array() += b.value(0, 0);
      return popart.denormalize(z);
    };
    const Matrix before = output();
    Matrix targets(3, 1);
    targets << 100.0 * k, -50.0, 3.0 * k * k;
    popart.update(targets, w, b);
    CHECK((output() - before).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("popart clamps sigma for constant targets and round-trips") {
  nets::PopArt popart(0.01);
  ad::Parameter w{"w", Matrix::Ones(2, 1), Matrix()};
  ad::Parameter b{"b", Matrix::Zero(1, 1), Matrix()};
  for (int k = 0; k < 500; ++k) popart.update(Matrix::Constant(5, 1, 3.25), w, b);
  CHECK(popart.stddev() == doctest::Approx(1e-4));
  CHECK(std::isfinite(popart.normalize(3.25)));
  CHECK(popart.normalize(3.25) == doctest::Approx(0.0).epsilon(1e-6));
  for (double y : {-7.0, 0.0, 3.25, 1e3}) {
    CHECK(std::abs(popart.denormalize(popart.normalize(y)) - y) <= 1e-12 * std::max(1.0, std::abs(y)));
  }
  CHECK_THROWS_AS(nets::PopArt(0.0), ConfigError);
}

TEST_CASE("policy outputs normalized log-probabilities") {
  auto cfg = test::small_model_config(test::small_ca());
  nets::Model model = nets::make_model(cfg, 1);
  ad::Tape tape(false);
  auto bound = model.policy.bind(tape);
  Rng rng(1);
  Matrix obs(4, cfg.obs_dim);
  for (Eigen::Index i = 0; i < obs.size(); ++i) obs(i) = uniform01(rng);
  auto out = model.policy.step(bound, obs, tape.constant(Matrix::Zero(4, cfg.hidden)));
  for (int r = 0; r < 4; ++r) CHECK(out.log_probs.value().row(r).array().exp().sum() == doctest::Approx(1.0));
  // Head gain 0.01 keeps the initial policy close to uniform.
  CHECK(out.log_probs.value().maxCoeff() < std::log(0.2) + 0.05);
}

namespace {

struct CriticProbe {
  nets::Model model;
  Matrix states;
  Matrix hidden;
  std::vector<int> actions;

  CriticProbe() : model(nets::make_model(test::small_model_config(test::small_ca()), 9)) {
    Rng rng(10);
    const int rows = 8;
    states.resize(rows, model.config.state_dim);
    for (Eigen::Index i = 0; i < states.size(); ++i) states(i) = uniform01(rng) - 0.5;
    hidden.resize(rows, model.config.hidden);
    for (Eigen::Index i = 0; i < hidden.size(); ++i) hidden(i) = 0.5 * (uniform01(rng) - 0.5);
    actions.resize(rows);
    for (auto& a : actions) a = static_cast<int>(uniform01(rng) * 5);
  }

  Matrix eval(nets::Critic& critic, const std::vector<int>& acts, const Matrix* blocked = nullptr) {
    ad::Tape tape(false);
    auto bound = critic.bind(tape);
    return critic.step(bound, states, acts, tape.constant(hidden), blocked).values.value();
  }
};

}  // namespace

TEST_CASE("V_i does not depend on agent i's own action") {
  CriticProbe p;
  const Matrix base = p.eval(p.model.v, p.actions);
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int i = static_cast<int>(uniform01(rng) * 8);
    auto acts = p.actions;
    acts[static_cast<std::size_t>(i)] = (acts[static_cast<std::size_t>(i)] + 1 + trial % 4) % 5;
    const Matrix out = p.eval(p.model.v, acts);
    CHECK(out(i) == base(i));
  }
}

TEST_CASE("Q_i ignores a_j exactly when w_ij is forced to zero") {
  CriticProbe p;
  Matrix blocked = Matrix::Zero(8, 4);
  blocked(1, 3) = 1;
  blocked(6, 0) = 1;
  const Matrix base = p.eval(p.model.q, p.actions, &blocked);
  for (int a = 0; a < 5; ++a) {
    auto acts = p.actions;
    acts[3] = a;
    acts[4] = (a + 2) % 5;
    const Matrix out = p.eval(p.model.q, acts, &blocked);
    CHECK(out(1) == base(1));
    CHECK(out(6) == base(6));
  }
  auto acts = p.actions;
  acts[3] = (acts[3] + 1) % 5;
  // Without the mask the same perturbation reaches Q_1.
  CHECK(p.eval(p.model.q, acts)(1) != p.eval(p.model.q, p.actions)(1));
}

TEST_CASE("critic attention rows are softmax weights with unit diagonal") {
  CriticProbe p;
  ad::Tape tape(false);
  auto bound = p.model.q.bind(tape);
  auto out = p.model.q.step(bound, p.states, p.actions, tape.constant(p.hidden));
  for (int r = 0; r < 8; ++r) {
    const int self = r % 4;
    CHECK(out.attention(r, self) == 1.0);
    CHECK(out.attention.row(r).sum() - 1.0 == doctest::Approx(1.0));
    CHECK(out.attention.row(r).minCoeff() > 0.0);
  }
}

TEST_CASE("critic counts one evaluation per observer row") {
  CriticProbe p;
  p.model.v.reset_evaluations();
  p.eval(p.model.v, p.actions);
  CHECK(p.model.v.evaluations() == 8);
  std::vector<int> bad(3, 0);
  CHECK_THROWS_AS(p.eval(p.model.v, bad), ContractError);
}

TEST_CASE("checkpoints round-trip parameters and normalizer statistics") {
  auto cfg = test::small_model_config(test::small_ca());
  nets::Model model = nets::make_model(cfg, 5);
  ad::Parameter& w = model.v.params().at("head.w");
  ad::Parameter& b = model.v.params().at("head.b");
  model.v.popart().update(Matrix::Constant(3, 1, -4.0), w, b);
  const auto path = std::filesystem::temp_directory_path() / "prd_ckpt_test.json";
  nets::save_checkpoint(path, model, {{"update", 7}});
  const auto doc = nets::read_checkpoint(path);
  CHECK(doc.at("metadata").at("update") == 7);
  nets::Model copy = nets::model_from_checkpoint(doc);
  CHECK(copy.policy.params().flat_values() == model.policy.params().flat_values());
  CHECK(copy.q.params().flat_values() == model.q.params().flat_values());
  CHECK(copy.v.params().flat_values() == model.v.params().flat_values());
  CHECK(copy.v.popart().mean() == model.v.popart().mean());
  CHECK(copy.v.popart().stddev() == model.v.popart().stddev());
  std::filesystem::remove(path);
  CHECK_THROWS_AS(nets::read_checkpoint(path), ConfigError);
}

TEST_CASE("model init is deterministic per seed") {
  auto cfg = test::small_model_config(test::small_ca());
  CHECK(nets::make_model(cfg, 3).policy.params().flat_values() ==
        nets::make_model(cfg, 3).policy.params().flat_values());
  CHECK(nets::make_model(cfg, 3).q.params().flat_values() !=
        nets::make_model(cfg, 4).q.params().flat_values());
}
