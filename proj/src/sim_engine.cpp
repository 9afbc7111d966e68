#include "hdtsim/sim_engine.hpp"

#include <algorithm>
#include <cmath>

namespace hdt {

FrequencyProfile FrequencyProfile::constant(double f) {
  FrequencyProfile p;
  p.kind = Kind::constant;
  p.f = f;
  return p;
}

FrequencyProfile FrequencyProfile::ramp(double f_start, double f_end, double t_start,
                                        double t_end) {
  FrequencyProfile p;
  p.kind = Kind::ramp;
  p.f_start = f_start;
  p.f_end = f_end;
  p.t_start = t_start;
  p.t_end = t_end;
  return p;
}

FrequencyProfile FrequencyProfile::sampled(std::vector<std::pair<double, double>> pts) {
  if (pts.empty()) throw std::invalid_argument("frequency profile: no samples");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].second < 45.0 || pts[i].second > 55.0) {
      throw std::invalid_argument("frequency profile: f outside [45, 55] Hz");
    }
    if (i > 0 && pts[i].first <= pts[i - 1].first) {
      throw std::invalid_argument("frequency profile: times must be strictly increasing");
    }
  }
  FrequencyProfile p;
  p.kind = Kind::sampled;
  p.points = std::move(pts);
  return p;
}

double profile_eval(const FrequencyProfile& p, double t) {
  switch (p.kind) {
    case FrequencyProfile::Kind::constant:
      return p.f;
    case FrequencyProfile::Kind::ramp: {
      if (t <= p.t_start) return p.f_start;
      if (t >= p.t_end) return p.f_end;
      const double s = (t - p.t_start) / (p.t_end - p.t_start);
      return p.f_start + s * (p.f_end - p.f_start);
    }
    case FrequencyProfile::Kind::sampled: {
      if (p.points.empty()) throw std::invalid_argument("frequency profile: no samples");
      if (t <= p.points.front().first) return p.points.front().second;
      if (t >= p.points.back().first) return p.points.back().second;
      auto it = std::upper_bound(p.points.begin(), p.points.end(), t,
                                 [](double x, const auto& pt) { return x < pt.first; });
      const auto& [t1, f1] = *it;
      const auto& [t0, f0] = *(it - 1);
      return f0 + (f1 - f0) * (t - t0) / (t1 - t0);
    }
  }
  return p.f;
}

namespace {

PlantState axpy(const PlantState& s, double h, const PlantState& d) {
  return {s.i1 + h * d.i1, s.i2 + h * d.i2, s.i3 + h * d.i3, s.vc + h * d.vc};
}

bool finite(const PlantState& s) {
  const double vals[] = {s.i1.a, s.i1.b, s.i1.c, s.i2.a, s.i2.b, s.i2.c,
                         s.i3.a, s.i3.b, s.i3.c, s.vc};
  for (double v : vals) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::size_t window_capacity(const ScenarioSpec& spec) {
  const double n = 1.0 / (spec.droop.f0 * spec.dt);
  return static_cast<std::size_t>(std::max(1.0, std::round(n)));
}

}  // namespace

Simulation::Simulation(ScenarioSpec spec)
    : spec_(std::move(spec)),
      state_(spec_.initial),
      controller_(spec_.gains, spec_.refs, spec_.droop, spec_.services, window_capacity(spec_)),
      phase_{} {
  if (!(spec_.duration > 0.0) || !(spec_.dt > 0.0)) {
    throw std::invalid_argument("scenario: duration and dt must be positive");
  }
  if (spec_.record_decimation < 1) {
    throw std::invalid_argument("scenario: record_decimation must be >= 1");
  }
  if (!spec_.plant.composites_ready) spec_.plant = derive_composites(spec_.plant);
  if (!std::is_sorted(spec_.events.begin(), spec_.events.end(),
                      [](const Event& a, const Event& b) { return a.time < b.time; })) {
    throw std::invalid_argument("scenario: events must be sorted by time");
  }
  total_steps_ = static_cast<std::int64_t>(std::ceil(spec_.duration / spec_.dt));
  records_.reserve(static_cast<std::size_t>(total_steps_ / spec_.record_decimation) + 1);
}

void Simulation::apply_due_events(double t) {
  while (next_event_ < spec_.events.size() && spec_.events[next_event_].time <= t) {
    const Event& ev = spec_.events[next_event_++];
    switch (ev.kind) {
      case Event::Kind::scale_vin:
        vin_scale_ *= ev.factor;
        break;
      case Event::Kind::set_load_matrices: {
        PlantParams p = spec_.plant;
        p.r_load = ev.r;
        p.l_load = ev.l;
        spec_.plant = derive_composites(p);
        break;
      }
      case Event::Kind::enable_service: {
        ServiceFlags& sf = controller_.services();
        auto enable = [&](std::optional<double>& slot) {
          if (!slot || *slot > ev.time) slot = ev.time;
        };
        if (ev.service == "voltage_regulation") enable(sf.voltage_regulation);
        else if (ev.service == "pf_correction") enable(sf.pf_correction);
        else if (ev.service == "frequency_regulation") enable(sf.frequency_regulation);
        else if (ev.service == "phase_balancing") enable(sf.phase_balancing);
        else throw std::invalid_argument("unknown service: " + ev.service);
        break;
      }
    }
  }
}

void Simulation::step() {
  const double t = time();
  const double dt = spec_.dt;

  ExogenousInputs u;
  u.f = profile_eval(spec_.freq, t);
  source_waveforms(phase_.theta, spec_.vin_peak * vin_scale_, spec_.iload_peak, u.vin, u.iload);

  apply_due_events(t);

  Measurements m;
  m.theta = phase_.theta;
  m.f = u.f;
  m.vc = state_.vc;
  m.v_load = load_voltage(state_, u, spec_.plant);
  m.i2 = state_.i2;
  m.i3 = state_.i3;
  m.i_beta = grid_current(state_, spec_.plant);

  const ControllerOutputs c = controller_.step(m, t, dt);

  if (step_index_ % spec_.record_decimation == 0) {
    SampleRecord r;
    r.t = t;
    r.vin = u.vin;
    r.i1 = state_.i1;
    r.i2 = state_.i2;
    r.i3 = state_.i3;
    r.v = m.v_load;
    r.v_dq0 = c.v_dq0;
    r.ibeta_dq0 = c.i_beta_dq0;
    r.vc = state_.vc;
    r.d1 = c.duties.d1;
    r.d2 = c.duties.d2;
    r.p = c.p_load;
    r.q = c.q_bar;
    const double s = std::hypot(c.p_grid, c.q_bar);
    r.pf = s > 0.0 ? c.p_grid / s : 0.0;
    r.f = u.f;
    r.p_star = c.p_star;
    r.v_star = c.v_star;
    records_.push_back(r);
  }

  // Advance the plant with duties and sources held over the step.
  const PlantState k1 = derivative(state_, u, c.duties, spec_.plant);
  if (spec_.integrator == ScenarioSpec::Integrator::euler) {
    state_ = axpy(state_, dt, k1);
  } else {
    const PlantState k2 = derivative(axpy(state_, dt / 2, k1), u, c.duties, spec_.plant);
    const PlantState k3 = derivative(axpy(state_, dt / 2, k2), u, c.duties, spec_.plant);
    const PlantState k4 = derivative(axpy(state_, dt, k3), u, c.duties, spec_.plant);
    PlantState acc = axpy(state_, dt / 6, k1);
    acc = axpy(acc, dt / 3, k2);
    acc = axpy(acc, dt / 3, k3);
    state_ = axpy(acc, dt / 6, k4);
  }

  if (!finite(state_) || std::abs(state_.vc) > 2.0 * spec_.refs.vc_star) {
    throw SimulationDivergence(
        "simulation diverged (vc = " + std::to_string(state_.vc) + ") at t = " + std::to_string(t),
        step_index_, t);
  }

  phase_ = phase_advance(phase_, u.f, dt);
  ++step_index_;
}

std::vector<SampleRecord> run(const ScenarioSpec& spec) {
  Simulation sim(spec);
  while (!sim.done()) sim.step();
  return sim.take_records();
}

}  // namespace hdt
