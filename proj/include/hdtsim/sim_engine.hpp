#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdtsim/control.hpp"
#include "hdtsim/plant.hpp"

namespace hdt {

/// Grid frequency over time: constant, linear ramp (clamped outside its
/// window), or piecewise-linear samples (end-clamped).
struct FrequencyProfile {
  enum class Kind { constant, ramp, sampled };
  Kind kind = Kind::constant;
  double f = 50.0;                                  // constant
  double f_start = 50.0, f_end = 50.0;              // ramp
  double t_start = 0.0, t_end = 0.0;                // ramp
  std::vector<std::pair<double, double>> points;    // sampled (t, f)

  static FrequencyProfile constant(double f);
  static FrequencyProfile ramp(double f_start, double f_end, double t_start, double t_end);
  static FrequencyProfile sampled(std::vector<std::pair<double, double>> pts);
};

double profile_eval(const FrequencyProfile& p, double t);

/// One scripted disturbance. Each event fires exactly once, at the first step
/// whose time reaches it.
struct Event {
  enum class Kind { scale_vin, set_load_matrices, enable_service };
  double time = 0.0;
  Kind kind = Kind::scale_vin;
  double factor = 1.0;                              // scale_vin
  Eigen::Matrix3d r = Eigen::Matrix3d::Zero();      // set_load_matrices
  Eigen::Matrix3d l = Eigen::Matrix3d::Zero();
  std::string service;                              // enable_service
};

/// Complete description of one simulation run.
struct ScenarioSpec {
  std::string name = "custom";
  double duration = 0.2;   // s
  double dt = 2e-5;        // s
  int record_decimation = 10;
  enum class Integrator { euler, rk4 };
  Integrator integrator = Integrator::euler;

  PlantState initial{ThreePhase{}, ThreePhase{}, ThreePhase{}, 1900.0};
  PlantParams plant;
  double vin_peak = 25000.0;
  double iload_peak = 13.15;

  ControlGains gains;
  References refs;
  DroopParams droop;
  ServiceFlags services;
  FrequencyProfile freq;
  std::vector<Event> events;
};

/// One decimated sample of the closed loop; columns mirror emit_csv.
struct SampleRecord {
  double t = 0.0;
  ThreePhase vin, i1, i2, i3, v;
  Dq0 v_dq0, ibeta_dq0;
  double vc = 0.0;
  ThreePhase d1, d2;
  double p = 0.0;       // load active power
  double q = 0.0;       // grid-interface reactive power
  double pf = 0.0;      // signed grid-interface power factor
  double f = 0.0;
  double p_star = 0.0;
  double v_star = 0.0;
};

class SimulationDivergence : public std::runtime_error {
 public:
  SimulationDivergence(const std::string& what, std::int64_t step, double time)
      : std::runtime_error(what), step_(step), time_(time) {}
  std::int64_t step() const { return step_; }
  double time() const { return time_; }

 private:
  std::int64_t step_;
  double time_;
};

/// Fixed-step closed-loop simulation. One instance is strictly sequential;
/// distinct instances share nothing.
class Simulation {
 public:
  explicit Simulation(ScenarioSpec spec);

  /// Advances one step: sources, due events, controller, plant integration,
  /// phase advance, optional record.
  void step();

  bool done() const { return step_index_ >= total_steps_; }
  std::int64_t step_index() const { return step_index_; }
  std::int64_t total_steps() const { return total_steps_; }
  double time() const { return static_cast<double>(step_index_) * spec_.dt; }

  const std::vector<SampleRecord>& records() const { return records_; }
  std::vector<SampleRecord> take_records() { return std::move(records_); }
  const PlantState& state() const { return state_; }
  const ScenarioSpec& spec() const { return spec_; }
  const Controller& controller() const { return controller_; }

 private:
  void apply_due_events(double t);

  ScenarioSpec spec_;
  PlantState state_;
  Controller controller_;
  PhaseAccumulator phase_;
  double vin_scale_ = 1.0;
  std::size_t next_event_ = 0;
  std::int64_t step_index_ = 0;
  std::int64_t total_steps_ = 0;
  std::vector<SampleRecord> records_;
};

/// Runs a scenario to completion and returns the records. Deterministic:
/// identical specs produce identical records.
std::vector<SampleRecord> run(const ScenarioSpec& spec);

}  // namespace hdt
