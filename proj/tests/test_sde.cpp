#include "pirrt/sde.hpp"
#include "pirrt/world.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace pirrt;

namespace {

DynamicsModel car(double alpha) { return car_dynamics({2.0, 1.0, alpha}); }

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST(Dynamics, RhoFromAlpha) {
  EXPECT_DOUBLE_EQ(car(0.25).rho_magnitude(), 16.0);
  EXPECT_DOUBLE_EQ(car(1.0).rho_magnitude(), 1.0);
  EXPECT_TRUE(std::isinf(car(0.0).rho_magnitude()));
  EXPECT_DOUBLE_EQ(car(0.25).with_noise_scale(0.5).rho_magnitude(), 4.0);
}

TEST(Dynamics, RejectsBadConstruction) {
  auto f = [](const ConstVectorRef&, VectorRef out) { out.setZero(); };
  auto b = [](const ConstVectorRef&, MatrixRef out) { out.setOnes(); };
  EXPECT_THROW(DynamicsModel(1, 2, f, b, 0.1), ContractError);  // m > n
  EXPECT_THROW(DynamicsModel(0, 0, f, b, 0.1), ContractError);
  EXPECT_THROW(DynamicsModel(1, 1, f, b, -0.1), ContractError);
  EXPECT_THROW(DynamicsModel(1, 1, f, b, std::numeric_limits<double>::infinity()), ContractError);
  EXPECT_THROW(car_dynamics({0.0, 1.0, 0.1}), ContractError);
  EXPECT_THROW(car_dynamics({2.0, -1.0, 0.1}), ContractError);
}

TEST(StepOnce, HandEvaluatedCarStep) {
  // x + f dt + B u dt with f = (2, 0, 0), B = (0, 0, 1).
  const Vector x = step_once(car(0.25), Vector::Zero(3), vec({1.0}), vec({0.0}), 0.1);
  EXPECT_NEAR(x(0), 0.2, 1e-15);
  EXPECT_NEAR(x(1), 0.0, 1e-15);
  EXPECT_NEAR(x(2), 0.1, 1e-15);
}

TEST(StepOnce, ZeroControlMovesAlongHeading) {
  const Vector a = step_once(car(0.25), vec({-9.0, 0.0, 0.0}), vec({0.0}), vec({0.0}), 0.1);
  EXPECT_NEAR(a(0), -8.8, 1e-15);
  EXPECT_EQ(a(1), 0.0);
  const Vector b = step_once(car(0.25), vec({0.0, 0.0, std::numbers::pi / 2}), vec({0.0}), vec({0.0}), 0.1);
  EXPECT_NEAR(b(0), 0.0, 1e-15);
  EXPECT_NEAR(b(1), 0.2, 1e-15);
  EXPECT_EQ(b(2), std::numbers::pi / 2);
}

TEST(StepOnce, NoiseEntersThroughAlpha) {
  const Vector x = step_once(car(0.5), Vector::Zero(3), vec({0.0}), vec({0.2}), 0.1);
  EXPECT_NEAR(x(2), 0.5 * 0.2, 1e-15);
  // alpha = 0: the increment is ignored.
  const Vector y = step_once(car(0.0), Vector::Zero(3), vec({0.0}), vec({0.2}), 0.1);
  EXPECT_EQ(y(2), 0.0);
}

TEST(StepOnce, ContractChecks) {
  const auto m = car(0.25);
  EXPECT_THROW(step_once(m, Vector::Zero(2), vec({0.0}), vec({0.0}), 0.1), ContractError);
  EXPECT_THROW(step_once(m, Vector::Zero(3), vec({0.0, 1.0}), vec({0.0}), 0.1), ContractError);
  EXPECT_THROW(step_once(m, Vector::Zero(3), vec({0.0}), vec({0.0}), 0.0), ContractError);
  Vector bad = Vector::Zero(3);
  bad(1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(step_once(m, bad, vec({0.0}), vec({0.0}), 0.1), NonFiniteError);
}

TEST(StepOnce, NonFiniteDriftFailsFast) {
  DynamicsModel blowup(
      1, 1, [](const ConstVectorRef& x, VectorRef out) { out(0) = std::exp(1000.0 * x(0)); },
      [](const ConstVectorRef&, MatrixRef out) { out.setOnes(); }, 0.0);
  EXPECT_THROW(step_once(blowup, vec({1.0}), vec({0.0}), vec({0.0}), 0.1), NonFiniteError);
}

TEST(Rollout, StraightLineEndpoint) {
  const auto m = car(0.25);
  const Vector x0 = vec({-9.0, 0.0, 0.0});
  const auto t = rollout(m, x0, 0.0, ControlSchedule::zeros(1, 100, 0.1), NoiseProfile::zeros(1, 100, 0.1));
  EXPECT_EQ(t.size(), 101);
  EXPECT_NEAR(t.states(0, 100), 11.0, 1e-9);
  EXPECT_NEAR(t.states(1, 100), 0.0, 1e-12);
  EXPECT_NEAR(t.times(100), 10.0, 1e-12);
  EXPECT_EQ(t.states.col(0), x0);
}

TEST(Rollout, ArcMatchesClosedFormToFirstOrder) {
  const double w = 0.5, v = 2.0, r = 1.0, tf = 10.0, dt = 0.1;
  const Index k = 100;
  const auto t = rollout(car(0.0), Vector::Zero(3), 0.0, {Matrix::Constant(1, k, w), dt}, NoiseProfile::zeros(1, k, dt));
  const double radius = v * r / w;
  const double th = w * tf / r;
  EXPECT_NEAR(t.states(2, k), th, 1e-12);  // heading integrates exactly
  const double ex = radius * std::sin(th), ey = radius * (1.0 - std::cos(th));
  EXPECT_LT(std::hypot(t.states(0, k) - ex, t.states(1, k) - ey), v * dt * 2.0);
}

TEST(Rollout, ReplayIsBitIdentical) {
  RngStream rng(99);
  const auto noise = sample_noise(rng, 60, 1, 0.1);
  const ControlSchedule u{Matrix::Constant(1, 60, -0.3), 0.1};
  const auto a = rollout(car(0.5), vec({-9.0, 0.0, 0.0}), 0.0, u, noise);
  const auto b = rollout(car(0.5), vec({-9.0, 0.0, 0.0}), 0.0, u, noise);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.times, b.times);
}

TEST(Rollout, MismatchedLengthsRejected) {
  const auto m = car(0.25);
  EXPECT_THROW(rollout(m, Vector::Zero(3), 0.0, ControlSchedule::zeros(1, 5, 0.1), NoiseProfile::zeros(1, 4, 0.1)),
               ContractError);
  EXPECT_THROW(rollout(m, Vector::Zero(3), 0.0, ControlSchedule::zeros(1, 5, 0.1), NoiseProfile::zeros(1, 5, 0.2)),
               ContractError);
}

TEST(Noise, SeededStreamsReplay) {
  RngStream a(StreamKey{7, 1, 2}, StreamRole::Bundle, 3);
  RngStream b(StreamKey{7, 1, 2}, StreamRole::Bundle, 3);
  RngStream c(StreamKey{7, 1, 2}, StreamRole::Bundle, 4);
  const auto na = sample_noise(a, 50, 1, 0.1);
  const auto nb = sample_noise(b, 50, 1, 0.1);
  const auto nc = sample_noise(c, 50, 1, 0.1);
  EXPECT_EQ(na.increments, nb.increments);
  EXPECT_EQ(na.seed_tag, nb.seed_tag);
  EXPECT_NE(na.increments, nc.increments);
}

TEST(Noise, IncrementMoments) {
  RngStream rng(12345);
  const double dt = 0.1;
  const Index n = 1000000;
  const auto noise = sample_noise(rng, n, 1, dt);
  const double mean = noise.increments.mean();
  const double var = (noise.increments.array() - mean).square().sum() / (n - 1);
  EXPECT_NEAR(mean, 0.0, 5.0 * std::sqrt(dt / n));
  EXPECT_NEAR(var / dt, 1.0, 0.01);
}

TEST(Noise, RejectsEmpty) {
  RngStream rng(1);
  EXPECT_THROW(sample_noise(rng, 0, 1, 0.1), ContractError);
  EXPECT_THROW(sample_noise(rng, 5, 1, -0.1), ContractError);
}

TEST(Seeds, DeriveSeedSeparatesPaths) {
  EXPECT_NE(derive_seed(1, {0, 0}), derive_seed(1, {0, 1}));
  EXPECT_NE(derive_seed(1, {0, 1}), derive_seed(1, {1, 0}));
  EXPECT_NE(derive_seed(1, {5}), derive_seed(2, {5}));
  EXPECT_EQ(hash_double(0.0), hash_double(-0.0));
  EXPECT_EQ(steps_between(0.0, 1.0, 0.1), 10);
  EXPECT_EQ(steps_between(0.0, 0.95, 0.1), 10);
  EXPECT_EQ(steps_between(1.0, 1.0, 0.1), 0);
}
