#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace hdt {

/// Per-phase triple in the stationary abc frame (currents in A, voltages in V,
/// or dimensionless duty cycles).
struct ThreePhase {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  ThreePhase& operator+=(const ThreePhase& o) { a += o.a; b += o.b; c += o.c; return *this; }
  ThreePhase& operator-=(const ThreePhase& o) { a -= o.a; b -= o.b; c -= o.c; return *this; }
  ThreePhase& operator*=(double s) { a *= s; b *= s; c *= s; return *this; }

  Eigen::Vector3d vec() const { return {a, b, c}; }
  static ThreePhase from(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }
};

inline ThreePhase operator+(ThreePhase x, const ThreePhase& y) { return x += y; }
inline ThreePhase operator-(ThreePhase x, const ThreePhase& y) { return x -= y; }
inline ThreePhase operator*(double s, ThreePhase x) { return x *= s; }
inline ThreePhase operator-(const ThreePhase& x) { return {-x.a, -x.b, -x.c}; }

/// Triple in the synchronously rotating frame. `z` is the zero-sequence
/// component.
struct Dq0 {
  double d = 0.0;
  double q = 0.0;
  double z = 0.0;
};

inline Dq0 operator+(const Dq0& x, const Dq0& y) { return {x.d + y.d, x.q + y.q, x.z + y.z}; }
inline Dq0 operator-(const Dq0& x, const Dq0& y) { return {x.d - y.d, x.q - y.q, x.z - y.z}; }

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Wraps an angle to [0, 2*pi).
double wrap_angle(double theta);

/// Grid angle integrator: theta accumulates 2*pi*f*dt so that slow frequency
/// drift never produces phase jumps.
struct PhaseAccumulator {
  double theta = 0.0;   // rad, always in [0, 2*pi)
  double last_f = 0.0;  // Hz, frequency of the most recent advance
};

/// Advances the accumulator by one time step. Throws std::invalid_argument on
/// non-finite or non-positive f/dt.
PhaseAccumulator phase_advance(PhaseAccumulator acc, double f_hz, double dt);

/// Amplitude-invariant abc -> dq0 rotation (2/3-scaled, sin row first): the
/// d component of a balanced positive-sequence sinusoid equals its peak.
Dq0 park(double theta, const ThreePhase& x);

/// Closed-form inverse of park(): rows [sin(theta_k), cos(theta_k), 1] for
/// theta_k in {theta, theta - 2*pi/3, theta + 2*pi/3}.
ThreePhase inv_park(double theta, const Dq0& x);

/// Bounded FIFO of scalar samples with a running root-mean-square estimate.
/// Capacity is fixed at construction (one fundamental cycle of samples for
/// the balancing reference). RMS of an empty window is 0.
class RollingWindow {
 public:
  explicit RollingWindow(std::size_t capacity);

  /// Pushes a sample (evicting the oldest when full) and returns the RMS over
  /// the stored samples. During warm-up the mean is over what is available.
  double push(double sample);

  double rms() const;
  std::size_t size() const { return count_; }
  std::size_t capacity() const { return buf_.size(); }

 private:
  std::vector<double> buf_;
  std::size_t head_ = 0;   // next write position
  std::size_t count_ = 0;
  double sum_sq_ = 0.0;
};

}  // namespace hdt
