#include "hdtsim/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hdt {

double pi_step(PiState& st, double error, double dt) {
  if (!std::isfinite(error)) throw std::invalid_argument("pi_step: non-finite error");
  if (!(dt > 0.0)) throw std::invalid_argument("pi_step: dt must be positive");

  const double raw = st.kp * error + st.ki * (st.integral + error * dt);
  double out = raw;
  bool commit = true;
  if (st.out_limits) {
    const auto [lo, hi] = *st.out_limits;
    if (raw > hi) {
      out = hi;
      commit = error < 0.0;
    } else if (raw < lo) {
      out = lo;
      commit = error > 0.0;
    }
  }
  if (commit) st.integral += error * dt;
  return out;
}

PowerPQ active_reactive_power(const Dq0& v, const Dq0& i) {
  return {1.5 * (v.d * i.d + v.q * i.q), 1.5 * (v.q * i.d - v.d * i.q)};
}

double droop_power_ref(double f, const DroopParams& dp) {
  const double df = f - dp.f0;
  const double kf = (df >= 0.0) ? (dp.pmax - dp.p0) / dp.df_max : (dp.p0 - dp.pmin) / dp.df_max;
  return std::clamp(dp.p0 + kf * df, dp.pmin, dp.pmax);
}

double dc_link_ref(double vc, double vc_star, PiState& st, double dt) {
  return pi_step(st, vc - vc_star, dt);
}

double pf_correction_ref(double i3q, double qbar, double qbar_star, PiState& st, double dt) {
  return i3q + pi_step(st, qbar_star - qbar, dt);
}

double freq_voltage_ref(double p_star, double p, const DroopParams& dp, PiState& st, double dt) {
  return dp.v0 + pi_step(st, p_star - p, dt);
}

Dq0 balancing_ref(double theta, const ThreePhase& i_beta, RollingWindow& win, double i2d_star_dc,
                  double gamma, std::array<PiState, 3>& st, double dt) {
  const Dq0 ib = park(theta, i_beta);
  const double ibd_star = win.push(ib.d);
  const Dq0 err{ib.d - ibd_star, ib.q, ib.z};
  Dq0 ref{pi_step(st[0], err.d, dt), pi_step(st[1], err.q, dt), pi_step(st[2], err.z, dt)};
  ref.d += gamma * i2d_star_dc;
  return ref;
}

namespace {

// Shared tail of the two duty loops. Runs the per-axis PI law, maps to abc
// and limits the waveform to [-1, 1]. Saturation rescales the whole waveform
// to unit peak (keeps relative axis content; componentwise clipping distorts
// the mix badly enough to stall phase balancing) and commits an axis integral
// only when its error moves the raw output toward what the duty achieved.
ThreePhase duty_from_pi(double theta, const Dq0& err, std::array<PiState, 3>& st, double dt) {
  const double ea[3] = {err.d, err.q, err.z};
  double raw[3];
  for (int k = 0; k < 3; ++k) {
    raw[k] = st[k].kp * ea[k] + st[k].ki * (st[k].integral + ea[k] * dt);
    if (!std::isfinite(raw[k])) throw std::invalid_argument("duty loop: non-finite output");
  }
  const Dq0 u{raw[0], raw[1], raw[2]};
  ThreePhase d = inv_park(theta, u);
  const double peak = std::max({std::abs(d.a), std::abs(d.b), std::abs(d.c)});
  if (peak > 1.0) {
    d *= 1.0 / peak;
    const Dq0 achieved = park(theta, d);
    const double ach[3] = {achieved.d, achieved.q, achieved.z};
    for (int k = 0; k < 3; ++k) {
      if ((raw[k] - ach[k]) * ea[k] < 0.0) st[k].integral += ea[k] * dt;
    }
  } else {
    for (int k = 0; k < 3; ++k) st[k].integral += ea[k] * dt;
  }
  d.a = std::clamp(d.a, -1.0, 1.0);
  d.b = std::clamp(d.b, -1.0, 1.0);
  d.c = std::clamp(d.c, -1.0, 1.0);
  return d;
}

}  // namespace

ThreePhase vsc1_duty(double theta, const ThreePhase& v_abc, double v_star,
                     std::array<PiState, 3>& st, double dt) {
  const Dq0 v = park(theta, v_abc);
  return duty_from_pi(theta, {v.d - v_star, v.q, v.z}, st, dt);
}

ThreePhase vsc2_duty(double theta, const ThreePhase& i2_abc, const Dq0& i2_ref,
                     std::array<PiState, 3>& st, double dt) {
  const Dq0 i2 = park(theta, i2_abc);
  return duty_from_pi(theta, {i2_ref.d - i2.d, i2_ref.q - i2.q, i2_ref.z - i2.z}, st, dt);
}

Controller::Controller(ControlGains gains, References refs, DroopParams droop,
                       ServiceFlags services, std::size_t window_capacity)
    : gains_(gains),
      refs_(refs),
      droop_(droop),
      services_(services),
      win_(window_capacity) {
  for (auto& s : pi_v_) s = PiState{gains_.kp1, gains_.ki1};
  for (auto& s : pi_i_) s = PiState{gains_.kp2, gains_.ki2};
  pi_dc_ = PiState{gains_.kp3, gains_.ki3};
  pi_pf_ = PiState{gains_.kp4, gains_.ki4};
  pi_freq_ = PiState{gains_.kp5, gains_.ki5};
  for (auto& s : pi_bal_) s = PiState{gains_.kp6, gains_.ki6};
}

ControllerOutputs Controller::step(const Measurements& m, double t, double dt) {
  ControllerOutputs out;
  out.v_dq0 = park(m.theta, m.v_load);
  out.i_beta_dq0 = park(m.theta, m.i_beta);
  const Dq0 i3_dq0 = park(m.theta, m.i3);
  const Dq0 itot_dq0 = park(m.theta, m.i_beta + m.i2);  // total current into the load bus

  out.p_load = active_reactive_power(out.v_dq0, itot_dq0).p;
  const PowerPQ grid = active_reactive_power(out.v_dq0, out.i_beta_dq0);
  out.p_grid = grid.p;
  out.q_bar = grid.q;
  out.p_star = droop_power_ref(m.f, droop_);

  // Outer loops.
  if (ServiceFlags::active(services_.frequency_regulation, t)) {
    out.v_star = freq_voltage_ref(out.p_star, out.p_load, droop_, pi_freq_, dt);
  } else {
    out.v_star = refs_.v_star;
  }
  out.i2d_star = dc_link_ref(m.vc, refs_.vc_star, pi_dc_, dt);
  double i2q_star = refs_.i2q_star;
  if (ServiceFlags::active(services_.pf_correction, t)) {
    i2q_star = pf_correction_ref(i3_dq0.q, out.q_bar, refs_.qbar_star, pi_pf_, dt);
  }
  if (ServiceFlags::active(services_.phase_balancing, t)) {
    out.i2_ref = balancing_ref(m.theta, m.i_beta, win_, out.i2d_star, gains_.gamma, pi_bal_, dt);
  } else {
    // Keep the balancing reference warm: the rolling RMS is a measurement
    // history and must not restart cold at activation.
    win_.push(out.i_beta_dq0.d);
    out.i2_ref = {out.i2d_star, i2q_star, refs_.i20_star};
  }

  // Inner loops.
  if (ServiceFlags::active(services_.voltage_regulation, t)) {
    out.duties.d1 = vsc1_duty(m.theta, m.v_load, out.v_star, pi_v_, dt);
  } else {
    out.duties.d1 = ThreePhase{};
  }
  out.duties.d2 = vsc2_duty(m.theta, m.i2, out.i2_ref, pi_i_, dt);
  return out;
}

double Controller::max_abs_integral() const {
  double mx = 0.0;
  auto upd = [&mx](const PiState& s) { mx = std::max(mx, std::abs(s.integral)); };
  for (const auto& s : pi_v_) upd(s);
  for (const auto& s : pi_i_) upd(s);
  upd(pi_dc_);
  upd(pi_pf_);
  upd(pi_freq_);
  for (const auto& s : pi_bal_) upd(s);
  return mx;
}

}  // namespace hdt
