#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace pirrt {

using Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;
using VectorRef = Eigen::Ref<Vector>;
using MatrixRef = Eigen::Ref<Matrix>;
using ConstVectorRef = Eigen::Ref<const Vector>;
using ConstMatrixRef = Eigen::Ref<const Matrix>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Thrown when a caller breaks a documented precondition (dimensions,
/// lengths, signs).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a simulation step would produce or consume non-finite values.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when every sample in a weighted batch has infinite cost.
class NoViableSample : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point z = (x, t) of the state-time planning space.
struct StateTimePoint {
  Vector state;
  double time = 0.0;
};

/// Piecewise-constant control on a uniform grid. Column i holds u_i, applied
/// on [t0 + i*dt, t0 + (i+1)*dt).
struct ControlSchedule {
  Matrix values;  // m x K
  double dt = 0.1;

  Index steps() const { return values.cols(); }
  Index channels() const { return values.rows(); }

  static ControlSchedule zeros(Index channels, Index steps, double dt) {
    return {Matrix::Zero(channels, steps), dt};
  }
};

/// Wiener increments for a rollout. Column i holds dw_i ~ N(0, dt I).
struct NoiseProfile {
  Matrix increments;  // m x K
  double dt = 0.1;
  std::uint64_t seed_tag = 0;

  Index steps() const { return increments.cols(); }
  Index channels() const { return increments.rows(); }

  static NoiseProfile zeros(Index channels, Index steps, double dt) {
    return {Matrix::Zero(channels, steps), dt, 0};
  }
};

/// Rollout result. states has K+1 columns, controls and noise have K.
struct Trajectory {
  Matrix states;  // n x (K+1)
  Vector times;   // K+1
  ControlSchedule controls;
  NoiseProfile noise;

  Index steps() const { return controls.steps(); }
  Index size() const { return states.cols(); }
  double dt() const { return controls.dt; }

  StateTimePoint point(Index i) const { return {states.col(i), times(i)}; }
  StateTimePoint front() const { return point(0); }
  StateTimePoint back() const { return point(size() - 1); }
};

/// Axis-aligned box of admissible controls.
struct ControlBounds {
  Vector lower;
  Vector upper;

  static ControlBounds symmetric(Index channels, double limit) {
    return {Vector::Constant(channels, -limit), Vector::Constant(channels, limit)};
  }
  static ControlBounds unbounded(Index channels) { return symmetric(channels, kInfinity); }
};

/// Number of dt steps covering [t_begin, t_end], rounded to the grid.
inline Index steps_between(double t_begin, double t_end, double dt) {
  const double raw = (t_end - t_begin) / dt;
  if (!(raw > 1e-9)) return 0;
  return static_cast<Index>(std::ceil(raw - 1e-9));
}

}  // namespace pirrt
