#include <doctest.h>

#include <cmath>
#include <vector>

#include "prd/advantage/advantage.hpp"
#include "prd/common/errors.hpp"
#include "prd/common/random.hpp"

using namespace prd;
using namespace prd::advantage;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = scale * (uniform01(rng) - 0.5);
  return m;
}

// Brute-force sum_{l} (gamma lambda)^l delta_{t+l}.
std::vector<double> gae_oracle(const std::vector<double>& d, double gamma, double lambda) {
  std::vector<double> out(d.size(), 0.0);
  for (std::size_t t = 0; t < d.size(); ++t) {
    for (std::size_t l = 0; t + l < d.size(); ++l) out[t] += std::pow(gamma * lambda, double(l)) * d[t + l];
  }
  return out;
}

}  // namespace

TEST_CASE("gae examples and brute-force agreement") {
  const std::vector<double> ones{1.0, 1.0, 1.0};
  const Vector a = gae(ones, 1.0, 1.0);
  CHECK(a(0) == 3.0);
  CHECK(a(1) == 2.0);
  CHECK(a(2) == 1.0);
  const std::vector<double> d{0.3, -1.2, 4.0};
  const Vector td = gae(d, 0.9, 0.0);
  for (int t = 0; t < 3; ++t) CHECK(td(t) == d[static_cast<std::size_t>(t)]);

  Rng rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> deltas(1 + trial % 10);
    for (auto& x : deltas) x = 4.0 * (uniform01(rng) - 0.5);
    const Vector got = gae(deltas, 0.9, 0.95);
    const auto want = gae_oracle(deltas, 0.9, 0.95);
    for (std::size_t t = 0; t < deltas.size(); ++t) CHECK(got(static_cast<Eigen::Index>(t)) == doctest::Approx(want[t]).epsilon(1e-12));
  }
}

TEST_CASE("td residual examples") {
  Vector r(2);
  r << 1.0, 2.0;
  CHECK(delta_group(r, 1.0, 0.5, 0.99) == doctest::Approx(2.495));
  CHECK(delta_group(Vector::Zero(3), 2.0, 2.0, 1.0) == 0.0);
  CHECK(delta_group(r, 1.0, 0.0, 0.99) == doctest::Approx(2.0));

  Vector r2(2);
  r2 << 1.0, 5.0;
  CHECK(delta_prd(r2, Eigen::RowVector2d(1, 0), 0.0, 0.0, 0.99) == 1.0);
  Vector r3(2);
  r3 << 1.0, 4.0;
  CHECK(delta_prd(r3, Eigen::RowVector2d(1, 0.5), 0.0, 0.0, 0.99) == 3.0);

  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector rr = random_matrix(5, 1, rng, 10.0);
    const double v = uniform01(rng), vn = uniform01(rng);
    CHECK(delta_prd(rr, Eigen::RowVectorXd::Ones(5), v, vn, 0.99) == delta_group(rr, v, vn, 0.99));
  }
}

TEST_CASE("discounted and relevant returns") {
  Matrix r = Matrix::Ones(2, 3);
  const Matrix g1 = discounted_returns(r, 1.0);
  CHECK(g1(0, 1) == 2.0);
  CHECK(g1(1, 1) == 1.0);

  Rng rng(3);
  const Matrix rewards = random_matrix(8, 3, rng, 2.0);
  const Matrix g = discounted_returns(rewards, 0.99);
  for (int t = 0; t < 8; ++t) {
    for (int i = 0; i < 3; ++i) {
      double want = 0.0;
      for (int l = 0; t + l < 8; ++l) want += std::pow(0.99, l) * rewards(t + l, i);
      CHECK(g(t, i) == doctest::Approx(want).epsilon(1e-12));
    }
  }
  std::vector<Matrix> identity(8, Matrix::Identity(3, 3));
  CHECK(relevant_returns(g, identity) == g);
  std::vector<Matrix> omegas;
  for (int t = 0; t < 8; ++t) omegas.push_back(random_matrix(3, 3, rng).cwiseAbs());
  const Matrix gbar = relevant_returns(g, omegas);
  for (int t = 0; t < 8; ++t) {
    const Eigen::VectorXd want = omegas[static_cast<std::size_t>(t)] * g.row(t).transpose();
    CHECK((gbar.row(t).transpose() - want).norm() < 1e-12);
  }
}

TEST_CASE("lambda returns match advantage plus value") {
  Rng rng(4);
  const int T = 6;
  const Matrix rewards = random_matrix(T, 2, rng, 3.0);
  const Matrix values = random_matrix(T, 2, rng, 3.0);
  Vector boot(2);
  boot << 0.7, -1.1;
  const double gamma = 0.97, lambda = 0.9;
  const Matrix got = lambda_returns(rewards, values, boot, gamma, lambda);
  for (int k = 0; k < 2; ++k) {
    std::vector<double> d(T);
    for (int t = 0; t < T; ++t) {
      const double vn = t + 1 < T ? values(t + 1, k) : boot(k);
      d[static_cast<std::size_t>(t)] = rewards(t, k) + gamma * vn - values(t, k);
    }
    const auto adv = gae_oracle(d, gamma, lambda);
    for (int t = 0; t < T; ++t) CHECK(got(t, k) == doctest::Approx(adv[static_cast<std::size_t>(t)] + values(t, k)).epsilon(1e-12));
  }
  // lambda = 1 with zero bootstrap is the Monte Carlo return.
  const Matrix mc = lambda_returns(rewards, values, Vector::Zero(2), gamma, 1.0);
  CHECK((mc - discounted_returns(rewards, gamma)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(lambda_returns(rewards, values.topRows(3), boot, gamma, lambda), ContractError);
}

TEST_CASE("all-ones relevance reproduces the group pipeline exactly") {
  Rng rng(5);
  const int T = 9, M = 4;
  const Matrix rewards = random_matrix(T, M, rng, 2.0);
  const Matrix values = random_matrix(T, M, rng, 5.0);
  const Vector boot = random_matrix(M, 1, rng);
  std::vector<Matrix> ones(T, Matrix::Ones(M, M));
  const auto prd_t = episode_targets(rewards, ones, values, boot, 0.99, 0.95);
  const auto grp = episode_targets_group(rewards, values, boot, 0.99, 0.95);
  CHECK(prd_t.advantages == grp.advantages);
  CHECK(prd_t.value_targets == grp.value_targets);
  CHECK((prd_t.value_targets - prd_t.advantages - values).cwiseAbs().maxCoeff() < 1e-12);
  // Identity relevance: each agent's advantage uses only its own rewards.
  std::vector<Matrix> self(T, Matrix::Identity(M, M));
  const auto own = episode_targets(rewards, self, values, boot, 0.99, 0.95);
  const Matrix expect = lambda_returns(rewards, values, boot, 0.99, 0.95) - values;
  CHECK((own.advantages - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(own.relevant_returns == own.returns);
}

TEST_CASE("advantage normalization") {
  Vector c = Vector::Constant(5, 3.3);
  CHECK(normalize(c) == Vector::Zero(5));
  Rng rng(6);
  const Vector x = random_matrix(50, 1, rng, 7.0);
  const Vector n = normalize(x);
  CHECK(std::abs(n.mean()) < 1e-9);
  const Vector shifted = (x.array() * 2.0 + 11.0).matrix();
  CHECK((normalize(shifted) - n).cwiseAbs().maxCoeff() < 1e-9);

  std::vector<EpisodeTargets> batch(2);
  for (auto& e : batch) e.advantages = random_matrix(10, 3, rng, 4.0);
  normalize_per_agent(batch);
  for (int i = 0; i < 3; ++i) {
    double s = 0.0, s2 = 0.0;
    for (const auto& e : batch) {
      s += e.advantages.col(i).sum();
      s2 += e.advantages.col(i).squaredNorm();
    }
    CHECK(std::abs(s / 20.0) < 1e-9);
    CHECK(s2 / 20.0 == doctest::Approx(1.0).epsilon(0.06));
  }
}
