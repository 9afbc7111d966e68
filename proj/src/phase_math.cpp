#include "hdtsim/phase_math.hpp"

#include <cmath>
#include <stdexcept>

namespace hdt {

double wrap_angle(double theta) {
  double w = std::fmod(theta, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w;
}

PhaseAccumulator phase_advance(PhaseAccumulator acc, double f_hz, double dt) {
  if (!std::isfinite(f_hz) || !std::isfinite(dt) || f_hz <= 0.0 || dt <= 0.0) {
    throw std::invalid_argument("phase_advance: f and dt must be finite and positive");
  }
  acc.theta = wrap_angle(acc.theta + kTwoPi * f_hz * dt);
  acc.last_f = f_hz;
  return acc;
}

namespace {
constexpr double kThird = kTwoPi / 3.0;  // 2*pi/3 phase displacement
}

Dq0 park(double theta, const ThreePhase& x) {
  const double ta = theta, tb = theta - kThird, tc = theta + kThird;
  const double k = 2.0 / 3.0;
  return {
      k * (std::sin(ta) * x.a + std::sin(tb) * x.b + std::sin(tc) * x.c),
      k * (std::cos(ta) * x.a + std::cos(tb) * x.b + std::cos(tc) * x.c),
      (x.a + x.b + x.c) / 3.0,
  };
}

ThreePhase inv_park(double theta, const Dq0& x) {
  const double ta = theta, tb = theta - kThird, tc = theta + kThird;
  return {
      x.d * std::sin(ta) + x.q * std::cos(ta) + x.z,
      x.d * std::sin(tb) + x.q * std::cos(tb) + x.z,
      x.d * std::sin(tc) + x.q * std::cos(tc) + x.z,
  };
}

RollingWindow::RollingWindow(std::size_t capacity) : buf_(capacity, 0.0) {
  if (capacity == 0) throw std::invalid_argument("RollingWindow: capacity must be positive");
}

double RollingWindow::push(double sample) {
  if (!std::isfinite(sample)) throw std::invalid_argument("RollingWindow: non-finite sample");
  if (count_ == buf_.size()) {
    sum_sq_ -= buf_[head_] * buf_[head_];
  } else {
    ++count_;
  }
  buf_[head_] = sample;
  sum_sq_ += sample * sample;
  head_ = (head_ + 1) % buf_.size();
  return rms();
}

double RollingWindow::rms() const {
  if (count_ == 0) return 0.0;
  // sum_sq_ can go slightly negative from cancellation; clamp before the root.
  return std::sqrt(std::max(sum_sq_, 0.0) / static_cast<double>(count_));
}

}  // namespace hdt
