#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hdtsim/sim_engine.hpp"

namespace hdt {

/// Signed power factor p / sqrt(p^2 + q^2). Undefined at (0, 0).
std::optional<double> power_factor(double p, double q);

/// Smallest t' >= from_t such that |v - ref| <= band_frac*|ref| for every
/// sample from t' to the end; nullopt when the series never settles.
std::optional<double> settling_time(std::span<const double> t, std::span<const double> v,
                                    double ref, double band_frac, double from_t);

struct PhaseRms {
  ThreePhase rms;
  bool truncated = false;  // window was longer than the available series
};

/// Per-phase RMS over the trailing `window` seconds of a uniformly sampled
/// series (sample spacing `sample_dt`).
PhaseRms per_phase_rms(std::span<const ThreePhase> series, double sample_dt, double window);

/// max_k |rms_k - mean| / mean. Rejects an all-zero triple.
double imbalance_index(const ThreePhase& rms);

struct CriterionEntry {
  std::string name;
  double measured = 0.0;  // NaN when not evaluable
  double threshold = 0.0;
  bool pass = false;
};

struct ScenarioReport {
  std::string scenario;
  std::vector<CriterionEntry> entries;
  bool overall = false;
};

/// Evaluates the criterion set registered for the spec's preset name over the
/// records of a finished run. Unknown scenario names are rejected.
ScenarioReport scenario_report(const std::vector<SampleRecord>& records, const ScenarioSpec& spec);

std::string report_to_json(const ScenarioReport& report);
ScenarioReport report_from_json(const std::string& text);

}  // namespace hdt
