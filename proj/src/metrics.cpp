#include "hdtsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace hdt {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
}

std::optional<double> power_factor(double p, double q) {
  const double s = std::hypot(p, q);
  if (s == 0.0) return std::nullopt;
  return p / s;
}

std::optional<double> settling_time(std::span<const double> t, std::span<const double> v,
                                    double ref, double band_frac, double from_t) {
  if (t.size() != v.size() || t.empty()) throw std::invalid_argument("settling_time: bad series");
  if (!(band_frac > 0.0)) throw std::invalid_argument("settling_time: band must be positive");
  const double band = band_frac * std::abs(ref);
  // Scan backwards for the last out-of-band sample at or after from_t.
  std::optional<double> last_bad;
  for (std::size_t i = t.size(); i-- > 0 && t[i] >= from_t;) {
    if (std::abs(v[i] - ref) > band) {
      last_bad = t[i];
      break;
    }
  }
  if (!last_bad) return from_t;
  // Settled at the first sample after the last excursion, if any.
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] > *last_bad) return t[i];
  }
  return std::nullopt;
}

PhaseRms per_phase_rms(std::span<const ThreePhase> series, double sample_dt, double window) {
  if (series.empty()) throw std::invalid_argument("per_phase_rms: empty series");
  if (!(sample_dt > 0.0) || !(window > 0.0)) {
    throw std::invalid_argument("per_phase_rms: bad window");
  }
  std::size_t n = static_cast<std::size_t>(std::llround(window / sample_dt));
  n = std::max<std::size_t>(n, 1);
  PhaseRms out;
  if (n > series.size()) {
    n = series.size();
    out.truncated = true;
  }
  double sa = 0, sb = 0, sc = 0;
  for (std::size_t i = series.size() - n; i < series.size(); ++i) {
    sa += series[i].a * series[i].a;
    sb += series[i].b * series[i].b;
    sc += series[i].c * series[i].c;
  }
  const double inv = 1.0 / static_cast<double>(n);
  out.rms = {std::sqrt(sa * inv), std::sqrt(sb * inv), std::sqrt(sc * inv)};
  return out;
}

double imbalance_index(const ThreePhase& rms) {
  const double mean = (rms.a + rms.b + rms.c) / 3.0;
  if (!(mean > 0.0)) throw std::invalid_argument("imbalance_index: mean rms must be positive");
  const double dev = std::max({std::abs(rms.a - mean), std::abs(rms.b - mean),
                               std::abs(rms.c - mean)});
  return dev / mean;
}

namespace {

// Uniformly sampled record columns with rolling trailing-cycle means.
class RecordSeries {
 public:
  RecordSeries(const std::vector<SampleRecord>& r, double cycle) : rec_(r) {
    dt_ = r.size() > 1 ? r[1].t - r[0].t : cycle;
    win_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cycle / dt_)));
  }

  std::size_t size() const { return rec_.size(); }
  double t(std::size_t i) const { return rec_[i].t; }
  std::size_t window() const { return win_; }

  // Trailing mean of f over the window ending at sample i (inclusive).
  template <typename F>
  double cycle_mean(std::size_t i, F&& f) const {
    const std::size_t lo = i + 1 >= win_ ? i + 1 - win_ : 0;
    double s = 0.0;
    for (std::size_t k = lo; k <= i; ++k) s += f(rec_[k]);
    return s / static_cast<double>(i - lo + 1);
  }

  std::size_t index_at(double t_query) const {
    auto it = std::lower_bound(rec_.begin(), rec_.end(), t_query,
                               [](const SampleRecord& r, double x) { return r.t < x; });
    if (it == rec_.end()) return rec_.size() - 1;
    return static_cast<std::size_t>(it - rec_.begin());
  }

  const std::vector<SampleRecord>& rec() const { return rec_; }

 private:
  const std::vector<SampleRecord>& rec_;
  double dt_ = 0.0;
  std::size_t win_ = 1;
};

double grid_p(const SampleRecord& r) {
  return 1.5 * (r.v_dq0.d * r.ibeta_dq0.d + r.v_dq0.q * r.ibeta_dq0.q);
}

double cycle_pf(const RecordSeries& s, std::size_t i) {
  const double p = s.cycle_mean(i, grid_p);
  const double q = s.cycle_mean(i, [](const SampleRecord& r) { return r.q; });
  return power_factor(p, q).value_or(0.0);
}

double min_cycle_pf(const RecordSeries& s, double t_from) {
  double worst = 1.0;
  for (std::size_t i = s.index_at(t_from); i < s.size(); ++i) {
    worst = std::min(worst, cycle_pf(s, i));
  }
  return worst;
}

// Largest trailing-cycle-mean |p - p_star| over [t_from, t_to].
double max_power_tracking_error(const RecordSeries& s, double t_from, double t_to) {
  double worst = 0.0;
  for (std::size_t i = s.index_at(t_from); i < s.size() && s.t(i) <= t_to; ++i) {
    const double e = s.cycle_mean(i, [](const SampleRecord& r) { return r.p - r.p_star; });
    worst = std::max(worst, std::abs(e));
  }
  return worst;
}

double end_imbalance(const std::vector<SampleRecord>& rec, double beta, double sample_dt,
                     double window) {
  std::vector<ThreePhase> ibeta(rec.size());
  for (std::size_t i = 0; i < rec.size(); ++i) ibeta[i] = -beta * rec[i].i1;
  return imbalance_index(per_phase_rms(ibeta, sample_dt, window).rms);
}

struct ReportBuilder {
  ScenarioReport rep;

  void add(const std::string& name, double measured, double threshold, bool pass) {
    rep.entries.push_back({name, measured, threshold, pass});
  }
  void le(const std::string& name, double measured, double threshold) {
    add(name, measured, threshold, measured <= threshold);
  }
  void ge(const std::string& name, double measured, double threshold) {
    add(name, measured, threshold, measured >= threshold);
  }

  ScenarioReport finish() {
    rep.overall = !rep.entries.empty() &&
                  std::all_of(rep.entries.begin(), rep.entries.end(),
                              [](const CriterionEntry& e) { return e.pass; });
    return rep;
  }
};

}  // namespace

ScenarioReport scenario_report(const std::vector<SampleRecord>& records,
                               const ScenarioSpec& spec) {
  if (records.empty()) throw std::invalid_argument("scenario_report: no records");

  static const char* known[] = {"voltage_regulation", "pf_correction", "phase_balancing",
                                "frequency_regulation", "simultaneous"};
  if (std::find_if(std::begin(known), std::end(known),
                   [&](const char* k) { return spec.name == k; }) == std::end(known)) {
    throw std::invalid_argument("scenario_report: unknown scenario '" + spec.name + "'");
  }

  ReportBuilder b;
  b.rep.scenario = spec.name;

  const std::int64_t total_steps = static_cast<std::int64_t>(std::ceil(spec.duration / spec.dt));
  const std::size_t expected =
      static_cast<std::size_t>((total_steps - 1) / spec.record_decimation) + 1;
  if (records.size() < expected) {
    // Aborted run: criteria are not evaluable.
    b.add("records_complete", static_cast<double>(records.size()),
          static_cast<double>(expected), false);
    b.add(spec.name + "_not_evaluable", kNan, 0.0, false);
    return b.finish();
  }

  const double cycle = 1.0 / spec.droop.f0;
  const RecordSeries s(records, cycle);
  const double sample_dt = records.size() > 1 ? records[1].t - records[0].t : spec.dt;
  const double t_end = records.back().t;

  if (spec.name == "voltage_regulation") {
    auto ev = std::find_if(spec.events.begin(), spec.events.end(), [](const Event& e) {
      return e.kind == Event::Kind::scale_vin;
    });
    if (ev == spec.events.end()) {
      b.add("vin_step_present", kNan, 0.0, false);
      return b.finish();
    }
    const double t_step = ev->time;
    const double pre = s.cycle_mean(s.index_at(t_step), [](const SampleRecord& r) {
      return r.v_dq0.d;
    });
    b.le("pre_step_error_frac", std::abs(pre - spec.refs.v_star) / spec.refs.v_star, 0.01);

    std::vector<double> ts(records.size()), vd(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      ts[i] = records[i].t;
      vd[i] = records[i].v_dq0.d;
    }
    const auto settled = settling_time(ts, vd, spec.refs.v_star, 0.01, t_step);
    b.le("settle_after_step_s", settled ? *settled - t_step : kNan, 0.015);
  } else if (spec.name == "pf_correction") {
    if (!spec.services.pf_correction) {
      b.add("pf_service_scheduled", kNan, 0.0, false);
      return b.finish();
    }
    const double act = *spec.services.pf_correction;
    const double before = cycle_pf(s, s.index_at(act));
    b.ge("pf_before_low", std::abs(before), 0.94);
    b.le("pf_before_high", std::abs(before), 0.97);
    b.ge("pf_after_min", std::abs(min_cycle_pf(s, act + 0.02)), 0.99);
  } else if (spec.name == "phase_balancing") {
    const std::size_t last = records.size() - 1;
    const double md = s.cycle_mean(last, [](const SampleRecord& r) { return r.ibeta_dq0.d; });
    const double mq = s.cycle_mean(last, [](const SampleRecord& r) { return r.ibeta_dq0.q; });
    const double mz = s.cycle_mean(last, [](const SampleRecord& r) { return r.ibeta_dq0.z; });
    if (!(md > 0.0)) {
      b.add("grid_current_d_positive", md, 0.0, false);
      return b.finish();
    }
    b.le("q_over_d", std::abs(mq) / md, 0.05);
    b.le("zero_over_d", std::abs(mz) / md, 0.05);
    b.le("grid_rms_imbalance", end_imbalance(records, spec.plant.beta, sample_dt, cycle), 0.05);
    double vdev = 0.0;
    for (const auto& r : records) {
      vdev = std::max(vdev, std::abs(r.vc - spec.refs.vc_star) / spec.refs.vc_star);
    }
    b.le("vc_deviation_frac", vdev, 0.06);
  } else if (spec.name == "frequency_regulation") {
    b.le("p_tracking_frac",
         max_power_tracking_error(s, 1.0, t_end) / spec.droop.p0, 0.02);
    // Commanded power at the 49.9 Hz crossing, exact droop arithmetic.
    std::size_t at = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < records.size(); ++i) {
      const double d = std::abs(records[i].f - 49.9);
      if (d < best) {
        best = d;
        at = i;
      }
    }
    b.le("p_star_at_49_9_err_w", std::abs(records[at].p_star - 26939.5), 1e-6);
    const double p_meas = s.cycle_mean(at, [](const SampleRecord& r) { return r.p; });
    b.le("p_at_49_9_frac", std::abs(p_meas - 26939.5) / 26939.5, 0.02);
  } else {  // simultaneous
    if (!spec.services.pf_correction || !spec.services.phase_balancing) {
      b.add("services_scheduled", kNan, 0.0, false);
      return b.finish();
    }
    const double act = std::max(*spec.services.pf_correction, *spec.services.phase_balancing);
    b.ge("pf_after_min", std::abs(min_cycle_pf(s, act + 0.02)), 0.98);
    b.le("grid_rms_imbalance", end_imbalance(records, spec.plant.beta, sample_dt, cycle), 0.08);
    b.le("p_tracking_frac",
         max_power_tracking_error(s, 1.0, t_end) / spec.droop.p0, 0.03);
  }
  return b.finish();
}

std::string report_to_json(const ScenarioReport& report) {
  nlohmann::ordered_json j;
  j["scenario"] = report.scenario;
  j["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : report.entries) {
    nlohmann::ordered_json je;
    je["name"] = e.name;
    if (std::isnan(e.measured)) {
      je["measured"] = nullptr;
    } else {
      je["measured"] = e.measured;
    }
    je["threshold"] = e.threshold;
    je["pass"] = e.pass;
    j["entries"].push_back(je);
  }
  j["overall"] = report.overall;
  return j.dump(2) + "\n";
}

ScenarioReport report_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ScenarioReport r;
  r.scenario = j.at("scenario").get<std::string>();
  for (const auto& je : j.at("entries")) {
    CriterionEntry e;
    e.name = je.at("name").get<std::string>();
    e.measured = je.at("measured").is_null() ? kNan : je.at("measured").get<double>();
    e.threshold = je.at("threshold").get<double>();
    e.pass = je.at("pass").get<bool>();
    r.entries.push_back(e);
  }
  r.overall = j.at("overall").get<bool>();
  return r;
}

}  // namespace hdt
