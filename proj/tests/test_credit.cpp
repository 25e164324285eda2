#include <doctest.h>

#include "prd/common/errors.hpp"
#include "prd/common/random.hpp"
#include "prd/credit/credit.hpp"

using namespace prd;
using namespace prd::credit;

namespace {

Matrix random_attention(int m, Rng& rng) {
  Matrix w(m, m);
  for (int i = 0; i < m; ++i) {
    double total = 0.0;
    for (int j = 0; j < m; ++j) {
      w(i, j) = i == j ? 0.0 : uniform01(rng) + 1e-3;
      total += w(i, j);
    }
    w.row(i) /= total;
    w(i, i) = 1.0;
  }
  return w;
}

}  // namespace

TEST_CASE("hard mask reads relevant sets off columns of W") {
  Matrix w = Matrix::Identity(3, 3);
  w(1, 0) = 0.001;
  w(2, 0) = 0.2;
  w(0, 1) = 0.9;
  const Matrix omega = relevant_mask(w, 0.05);
  CHECK(omega.row(0) == Eigen::RowVector3d(1, 0, 1));
  // w(0, 1) = 0.9: agent 1 influences agent 0, so agent 0 is in R_1.
  CHECK(omega(1, 0) == 1.0);
  CHECK(omega(0, 1) == 0.0);
  CHECK(relevant_mask(w, 0.0) == Matrix::Ones(3, 3));
  CHECK(relevant_mask(w, 1.5) == Matrix::Identity(3, 3));
}

TEST_CASE("raising epsilon never adds agents") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix w = random_attention(5, rng);
    Matrix prev = relevant_mask(w, 0.0);
    for (double eps = 0.02; eps < 1.2; eps += 0.02) {
      const Matrix cur = relevant_mask(w, eps);
      CHECK((cur.array() <= prev.array()).all());
      CHECK(cur.diagonal() == Eigen::VectorXd::Ones(5));
      prev = cur;
    }
  }
}

TEST_CASE("soft weights are the transpose with unit diagonal") {
  Rng rng(6);
  const Matrix w = random_attention(4, rng);
  const Matrix omega = soft_weights(w);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) CHECK(omega(i, j) == (i == j ? 1.0 : w(j, i)));
  }
  Matrix c = Matrix::Constant(3, 3, 0.25);
  c.diagonal().setOnes();
  CHECK(soft_weights(c).rowwise().sum().isApprox(Eigen::Vector3d::Constant(1.5)));
  CHECK(soft_weights(Matrix::Identity(3, 3)) == Matrix::Identity(3, 3));
}

TEST_CASE("top-k picks the largest column entries with lower-index ties") {
  Matrix w = Matrix::Identity(4, 4);
  w(1, 0) = 0.5;
  w(2, 0) = 0.3;
  w(3, 0) = 0.1;
  Matrix omega = top_k_mask(w, 1);
  CHECK(omega.row(0) == Eigen::RowVector4d(1, 1, 0, 0));
  CHECK(top_k_mask(w, 3) == Matrix::Ones(4, 4));

  Matrix tie = Matrix::Identity(3, 3);
  tie(1, 0) = 0.5;
  tie(2, 0) = 0.5;
  CHECK(top_k_mask(tie, 1).row(0) == Eigen::RowVector3d(1, 1, 0));
  CHECK_THROWS_AS(top_k_mask(tie, 0), ConfigError);
  CHECK_THROWS_AS(top_k_mask(tie, 3), ConfigError);
}

TEST_CASE("shared decomposition splits proportionally and conserves the reward") {
  Matrix w(2, 2);
  w << 1.0, 0.0, 0.5, 0.5;
  // Column means (0.75, 0.25).
  const Vector parts = shared_decompose(w, 8.0);
  CHECK(parts(0) == doctest::Approx(6.0));
  CHECK(parts(1) == doctest::Approx(2.0));
  const Vector equal = shared_decompose(Matrix::Ones(4, 4), 3.0);
  for (int j = 0; j < 4; ++j) CHECK(equal(j) == doctest::Approx(0.75));

  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix wr = random_attention(6, rng);
    const double r = 100.0 * (uniform01(rng) - 0.5);
    CHECK(std::abs(shared_decompose(wr, r).sum() - r) <= 1e-12);
  }
}

TEST_CASE("threshold schedules") {
  ThresholdSchedule ascend{ScheduleKind::kAscend, 0.0, 0.2, 100};
  CHECK(schedule_epsilon(ascend, 0) == 0.0);
  CHECK(schedule_epsilon(ascend, 25) == doctest::Approx(0.05));
  CHECK(schedule_epsilon(ascend, 100) == doctest::Approx(0.2));
  CHECK(schedule_epsilon(ascend, 5000) == doctest::Approx(0.2));
  ThresholdSchedule decay{ScheduleKind::kDecay, 0.0, 0.2, 100};
  CHECK(schedule_epsilon(decay, 50) == doctest::Approx(0.1));
  CHECK(schedule_epsilon(decay, 0) == doctest::Approx(0.2));
  CHECK(schedule_epsilon(decay, 300) == 0.0);
  CHECK(schedule_epsilon({ScheduleKind::kConstant, 0.07, 0.0, 1}, 999) == 0.07);
  CHECK_THROWS_AS(schedule_epsilon(ascend, -1), ContractError);
}

TEST_CASE("every strategy keeps agents self-relevant") {
  Rng rng(9);
  const Matrix w = random_attention(4, rng);
  for (Strategy s : {Strategy::kNone, Strategy::kHard, Strategy::kSoft, Strategy::kTopK, Strategy::kAscend,
                     Strategy::kDecay, Strategy::kShared}) {
    CreditConfig cfg;
    cfg.strategy = s;
    cfg.epsilon = 0.9;
    cfg.theta = 0.9;
    cfg.ramp = 10;
    const Matrix omega = relevance(cfg, w, 7);
    CHECK(omega.diagonal() == Eigen::VectorXd::Ones(4));
    CHECK(strategy_from_string(to_string(s)) == s);
  }
  CreditConfig none;
  none.strategy = Strategy::kNone;
  CHECK(relevance(none, w, 0) == Matrix::Ones(4, 4));
  CHECK(epsilon_at(none, 3) == 0.0);
}

TEST_CASE("credit config validation") {
  CreditConfig cfg;
  cfg.strategy = Strategy::kTopK;
  cfg.k = 3;
  CHECK_THROWS_AS(validate(cfg, 3), ConfigError);
  cfg.k = 2;
  CHECK_NOTHROW(validate(cfg, 3));
  cfg.strategy = Strategy::kHard;
  cfg.epsilon = -0.1;
  CHECK_THROWS_AS(validate(cfg, 3), ConfigError);
  CHECK_THROWS_AS(strategy_from_string("greedy"), ConfigError);
}
