#pragma once

#include <array>
#include <optional>

#include "hdtsim/phase_math.hpp"
#include "hdtsim/plant.hpp"

namespace hdt {

/// One proportional-integral channel. When out_limits is set the emitted
/// output is clamped and the integral is committed only while unsaturated or
/// while the error drives the output away from its active limit (conditional
/// integration).
struct PiState {
  double kp = 0.0;
  double ki = 0.0;
  double integral = 0.0;  // accumulated error * seconds
  std::optional<std::pair<double, double>> out_limits;
};

/// raw = kp*e + ki*(integral + e*dt); returns the (possibly clamped) output
/// and commits the integral per the anti-windup rule above.
double pi_step(PiState& st, double error, double dt);

/// Per-loop gain pairs (indices follow the loop numbering: 1 = load voltage,
/// 2 = shunt current, 3 = DC link, 4 = power factor, 5 = frequency/voltage,
/// 6 = phase balancing) plus the d-axis balancing weight gamma.
struct ControlGains {
  double kp1 = 0.0, ki1 = 1633.0;
  double kp2 = 10.0, ki2 = 8.0;
  double kp3 = 0.14, ki3 = 0.01;
  double kp4 = 0.001, ki4 = 0.005;
  double kp5 = 0.01, ki5 = 20.0;
  double kp6 = 50.0, ki6 = 1.0;
  double gamma = 10.0;
};

/// Setpoints shared by the loops.
struct References {
  double v_star = 380.0;    // load voltage d-axis, V
  double vc_star = 2000.0;  // DC link, V
  double i2q_star = 0.0;    // shunt q current when PF correction is off, A
  double i20_star = 0.0;    // shunt zero-sequence current, A
  double qbar_star = 0.0;   // grid-interface reactive power setpoint, var
};

/// Piecewise-linear droop curve parameters.
struct DroopParams {
  double f0 = 50.0;        // Hz
  double df_max = 0.2;     // Hz
  double p0 = 29160.0;     // W
  double pmin = 24719.0;   // W
  double pmax = 34458.6;   // W
  double v0 = 380.0;       // V
};

/// Ancillary services with their activation times; disengaged when unset.
struct ServiceFlags {
  std::optional<double> voltage_regulation;
  std::optional<double> pf_correction;
  std::optional<double> frequency_regulation;
  std::optional<double> phase_balancing;

  static bool active(const std::optional<double>& t_on, double t) {
    return t_on.has_value() && t >= *t_on;
  }
};

struct PowerPQ {
  double p = 0.0;
  double q = 0.0;
};

/// P = (3/2)(vd id + vq iq), Q = (3/2)(vq id - vd iq) for peak-scaled dq
/// quantities; an inductive (lagging) load yields Q > 0.
PowerPQ active_reactive_power(const Dq0& v, const Dq0& i);

/// Desired active power from the frequency deviation, clamped to
/// [pmin, pmax]. The slope differs above and below nominal frequency.
double droop_power_ref(double f, const DroopParams& dp);

/// Shunt d-axis current reference regulating the DC link; error convention is
/// (measured - reference).
double dc_link_ref(double vc, double vc_star, PiState& st, double dt);

/// Shunt q-axis current reference: measured load-inductor q current as
/// feedforward plus PI feedback on (qbar_star - qbar).
double pf_correction_ref(double i3q, double qbar, double qbar_star, PiState& st, double dt);

/// Load-voltage setpoint from active-power tracking: v0 + PI(p_star - p).
double freq_voltage_ref(double p_star, double p, const DroopParams& dp, PiState& st, double dt);

/// Balancing current reference: PI per axis on (park(i_beta) - [rms_d, 0, 0])
/// plus gamma-weighted DC-link correction on the d axis. Pushes the measured
/// d sample into the rolling window.
Dq0 balancing_ref(double theta, const ThreePhase& i_beta, RollingWindow& win, double i2d_star_dc,
                  double gamma, std::array<PiState, 3>& st, double dt);

/// Inner loop of VSC1: per-axis PI on (park(v) - [v_star, 0, 0]) mapped back
/// to abc and limited to [-1, 1].
ThreePhase vsc1_duty(double theta, const ThreePhase& v_abc, double v_star,
                     std::array<PiState, 3>& st, double dt);

/// Inner loop of VSC2: per-axis PI on (i2_ref - park(i2)) mapped back to abc
/// and limited to [-1, 1].
ThreePhase vsc2_duty(double theta, const ThreePhase& i2_abc, const Dq0& i2_ref,
                     std::array<PiState, 3>& st, double dt);

/// Everything the controller reads from the plant at one sampling instant.
struct Measurements {
  double theta = 0.0;
  double f = 50.0;
  double vc = 0.0;
  ThreePhase v_load;   // load terminal voltage
  ThreePhase i2;       // shunt converter current
  ThreePhase i3;       // load inductor current
  ThreePhase i_beta;   // grid-side injected current
};

struct ControllerOutputs {
  DutyPair duties;
  Dq0 v_dq0;           // load voltage in the rotating frame
  Dq0 i_beta_dq0;      // grid current in the rotating frame
  double p_load = 0.0;   // active power at the load terminals, W
  double q_bar = 0.0;    // grid-interface reactive power, var
  double p_grid = 0.0;   // grid-interface active power, W
  double p_star = 0.0;   // droop power command, W
  double v_star = 0.0;   // commanded load-voltage d reference, V
  double i2d_star = 0.0; // DC-link loop output, A
  Dq0 i2_ref;            // shunt current reference handed to VSC2
};

/// Cascaded controller: four outer service loops feeding the two inner duty
/// loops, sampled once per simulation step.
class Controller {
 public:
  Controller(ControlGains gains, References refs, DroopParams droop, ServiceFlags services,
             std::size_t window_capacity);

  ControllerOutputs step(const Measurements& m, double t, double dt);

  const ServiceFlags& services() const { return services_; }
  ServiceFlags& services() { return services_; }
  const References& references() const { return refs_; }

  /// Largest |integral| across all PI channels (boundedness diagnostics).
  double max_abs_integral() const;

 private:
  ControlGains gains_;
  References refs_;
  DroopParams droop_;
  ServiceFlags services_;
  std::array<PiState, 3> pi_v_;    // VSC1 voltage loop, per dq0 axis
  std::array<PiState, 3> pi_i_;    // VSC2 current loop, per dq0 axis
  PiState pi_dc_;
  PiState pi_pf_;
  PiState pi_freq_;
  std::array<PiState, 3> pi_bal_;
  RollingWindow win_;
};

}  // namespace hdt
