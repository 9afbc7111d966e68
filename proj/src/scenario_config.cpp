#include "hdtsim/scenario_config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "hdtsim/csv_io.hpp"

namespace hdt {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config error at " + path + ": " + what);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end()) {
      fail(path + "." + key, "unknown key");
    }
  }
}

double num(const json& obj, const std::string& path, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) fail(path + "." + key, "expected a number");
  return obj[key].get<double>();
}

Eigen::Matrix3d matrix3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) fail(path, "expected a 3x3 matrix");
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || row.size() != 3) fail(path, "expected a 3x3 matrix");
    for (int c = 0; c < 3; ++c) {
      if (!row[c].is_number()) fail(path, "matrix entries must be numbers");
      m(r, c) = row[c].get<double>();
    }
  }
  return m;
}

ordered matrix3_json(const Eigen::Matrix3d& m) {
  ordered rows = ordered::array();
  for (int r = 0; r < 3; ++r) {
    rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
  }
  return rows;
}

ThreePhase triple(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) fail(path, "expected [a, b, c]");
  for (int k = 0; k < 3; ++k) {
    if (!j[k].is_number()) fail(path, "entries must be numbers");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

FrequencyProfile parse_profile(const json& j, const std::string& path,
                               const std::string& base_dir) {
  if (!j.is_object()) fail(path, "expected an object");
  const std::string kind = j.value("kind", "constant");
  if (kind == "constant") {
    check_keys(j, path, {"kind", "f"});
    const double f = num(j, path, "f", 50.0);
    if (f < 45.0 || f > 55.0) fail(path + ".f", "frequency outside [45, 55] Hz");
    return FrequencyProfile::constant(f);
  }
  if (kind == "ramp") {
    check_keys(j, path, {"kind", "f_start", "f_end", "t_start", "t_end"});
    const double fs = num(j, path, "f_start", 50.0);
    const double fe = num(j, path, "f_end", 50.0);
    for (double f : {fs, fe}) {
      if (f < 45.0 || f > 55.0) fail(path, "frequency outside [45, 55] Hz");
    }
    const double ts = num(j, path, "t_start", 0.0);
    const double te = num(j, path, "t_end", 0.0);
    if (!(te > ts)) fail(path, "ramp needs t_end > t_start");
    return FrequencyProfile::ramp(fs, fe, ts, te);
  }
  if (kind == "sampled") {
    check_keys(j, path, {"kind", "points"});
    if (!j.contains("points") || !j["points"].is_array()) fail(path + ".points", "expected [[t, f], ...]");
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : j["points"]) {
      if (!p.is_array() || p.size() != 2) fail(path + ".points", "expected [t, f] pairs");
      pts.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    try {
      return FrequencyProfile::sampled(std::move(pts));
    } catch (const std::exception& e) {
      fail(path + ".points", e.what());
    }
  }
  if (kind == "csv") {
    check_keys(j, path, {"kind", "path"});
    if (!j.contains("path") || !j["path"].is_string()) fail(path + ".path", "expected a file path");
    std::filesystem::path p = j["path"].get<std::string>();
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    try {
      return read_frequency_csv(p.string());
    } catch (const std::exception& e) {
      fail(path + ".path", e.what());
    }
  }
  fail(path + ".kind", "expected constant | ramp | sampled | csv");
}

void parse_service(const json& j, const std::string& path, const char* key,
                   std::optional<double>& slot) {
  if (!j.contains(key)) return;
  const auto& v = j[key];
  if (v.is_null()) return;
  if (!v.is_number()) fail(path + "." + key, "expected an activation time in seconds (or null)");
  slot = v.get<double>();
}

Event parse_event(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  Event ev;
  if (!j.contains("time") || !j["time"].is_number()) fail(path + ".time", "expected a number");
  ev.time = j["time"].get<double>();
  const std::string kind = j.value("kind", "");
  if (kind == "scale_vin") {
    check_keys(j, path, {"time", "kind", "factor"});
    ev.kind = Event::Kind::scale_vin;
    ev.factor = num(j, path, "factor", 1.0);
    if (!(ev.factor > 0.0)) fail(path + ".factor", "factor must be positive");
  } else if (kind == "set_load_matrices") {
    check_keys(j, path, {"time", "kind", "r_load", "l_load"});
    if (!j.contains("r_load") || !j.contains("l_load")) fail(path, "needs r_load and l_load");
    ev.kind = Event::Kind::set_load_matrices;
    ev.r = matrix3(j["r_load"], path + ".r_load");
    ev.l = matrix3(j["l_load"], path + ".l_load");
    PlantParams probe;  // reject invalid matrices at parse time
    probe.r_load = ev.r;
    probe.l_load = ev.l;
    try {
      derive_composites(probe);
    } catch (const std::exception& e) {
      fail(path, e.what());
    }
  } else if (kind == "enable_service") {
    check_keys(j, path, {"time", "kind", "service"});
    ev.kind = Event::Kind::enable_service;
    if (!j.contains("service") || !j["service"].is_string()) fail(path + ".service", "expected a service name");
    ev.service = j["service"].get<std::string>();
    static const char* names[] = {"voltage_regulation", "pf_correction",
                                  "frequency_regulation", "phase_balancing"};
    if (std::find_if(std::begin(names), std::end(names), [&](const char* n) {
          return ev.service == n;
        }) == std::end(names)) {
      fail(path + ".service", "unknown service '" + ev.service + "'");
    }
  } else {
    fail(path + ".kind", "expected scale_vin | set_load_matrices | enable_service");
  }
  return ev;
}

}  // namespace

ScenarioSpec spec_from_json_text(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config error: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config error: top level must be an object");
  check_keys(j, "$",
             {"name", "duration", "dt", "record_decimation", "integrator", "initial", "plant",
              "sources", "gains", "references", "droop", "services", "frequency", "events"});

  ScenarioSpec s;
  if (j.contains("name")) {
    if (!j["name"].is_string()) fail("$.name", "expected a string");
    s.name = j["name"].get<std::string>();
  }
  s.duration = num(j, "$", "duration", s.duration);
  if (!(s.duration > 0.0)) fail("$.duration", "must be positive");
  s.dt = num(j, "$", "dt", s.dt);
  if (!(s.dt > 0.0)) fail("$.dt", "must be positive");
  if (j.contains("record_decimation")) {
    if (!j["record_decimation"].is_number_integer() || j["record_decimation"].get<int>() < 1) {
      fail("$.record_decimation", "expected an integer >= 1");
    }
    s.record_decimation = j["record_decimation"].get<int>();
  }
  if (j.contains("integrator")) {
    const std::string v = j["integrator"].get<std::string>();
    if (v == "euler") s.integrator = ScenarioSpec::Integrator::euler;
    else if (v == "rk4") s.integrator = ScenarioSpec::Integrator::rk4;
    else fail("$.integrator", "expected euler | rk4");
  }

  if (j.contains("initial")) {
    const auto& ji = j["initial"];
    check_keys(ji, "$.initial", {"i1", "i2", "i3", "vc"});
    if (ji.contains("i1")) s.initial.i1 = triple(ji["i1"], "$.initial.i1");
    if (ji.contains("i2")) s.initial.i2 = triple(ji["i2"], "$.initial.i2");
    if (ji.contains("i3")) s.initial.i3 = triple(ji["i3"], "$.initial.i3");
    s.initial.vc = num(ji, "$.initial", "vc", s.initial.vc);
  }

  if (j.contains("plant")) {
    const auto& jp = j["plant"];
    check_keys(jp, "$.plant",
               {"l1", "l2", "lp", "ls", "r1", "r2", "rp", "rs", "c", "alpha", "beta", "r_load",
                "l_load"});
    PlantParams& p = s.plant;
    p.l1 = num(jp, "$.plant", "l1", p.l1);
    p.l2 = num(jp, "$.plant", "l2", p.l2);
    p.lp = num(jp, "$.plant", "lp", p.lp);
    p.ls = num(jp, "$.plant", "ls", p.ls);
    p.r1 = num(jp, "$.plant", "r1", p.r1);
    p.r2 = num(jp, "$.plant", "r2", p.r2);
    p.rp = num(jp, "$.plant", "rp", p.rp);
    p.rs = num(jp, "$.plant", "rs", p.rs);
    p.c = num(jp, "$.plant", "c", p.c);
    p.alpha = num(jp, "$.plant", "alpha", p.alpha);
    p.beta = num(jp, "$.plant", "beta", p.beta);
    if (jp.contains("r_load")) p.r_load = matrix3(jp["r_load"], "$.plant.r_load");
    if (jp.contains("l_load")) p.l_load = matrix3(jp["l_load"], "$.plant.l_load");
  }
  try {
    s.plant = derive_composites(s.plant);
  } catch (const std::exception& e) {
    fail("$.plant", e.what());
  }

  if (j.contains("sources")) {
    const auto& js = j["sources"];
    check_keys(js, "$.sources", {"vin_peak", "iload_peak"});
    s.vin_peak = num(js, "$.sources", "vin_peak", s.vin_peak);
    s.iload_peak = num(js, "$.sources", "iload_peak", s.iload_peak);
  }

  if (j.contains("gains")) {
    const auto& jg = j["gains"];
    check_keys(jg, "$.gains",
               {"kp1", "ki1", "kp2", "ki2", "kp3", "ki3", "kp4", "ki4", "kp5", "ki5", "kp6",
                "ki6", "gamma"});
    ControlGains& g = s.gains;
    g.kp1 = num(jg, "$.gains", "kp1", g.kp1);
    g.ki1 = num(jg, "$.gains", "ki1", g.ki1);
    g.kp2 = num(jg, "$.gains", "kp2", g.kp2);
    g.ki2 = num(jg, "$.gains", "ki2", g.ki2);
    g.kp3 = num(jg, "$.gains", "kp3", g.kp3);
    g.ki3 = num(jg, "$.gains", "ki3", g.ki3);
    g.kp4 = num(jg, "$.gains", "kp4", g.kp4);
    g.ki4 = num(jg, "$.gains", "ki4", g.ki4);
    g.kp5 = num(jg, "$.gains", "kp5", g.kp5);
    g.ki5 = num(jg, "$.gains", "ki5", g.ki5);
    g.kp6 = num(jg, "$.gains", "kp6", g.kp6);
    g.ki6 = num(jg, "$.gains", "ki6", g.ki6);
    g.gamma = num(jg, "$.gains", "gamma", g.gamma);
  }

  if (j.contains("references")) {
    const auto& jr = j["references"];
    check_keys(jr, "$.references", {"v_star", "vc_star", "i2q_star", "i20_star", "qbar_star"});
    References& r = s.refs;
    r.v_star = num(jr, "$.references", "v_star", r.v_star);
    r.vc_star = num(jr, "$.references", "vc_star", r.vc_star);
    r.i2q_star = num(jr, "$.references", "i2q_star", r.i2q_star);
    r.i20_star = num(jr, "$.references", "i20_star", r.i20_star);
    r.qbar_star = num(jr, "$.references", "qbar_star", r.qbar_star);
  }

  if (j.contains("droop")) {
    const auto& jd = j["droop"];
    check_keys(jd, "$.droop", {"f0", "df_max", "p0", "pmin", "pmax", "v0"});
    DroopParams& d = s.droop;
    d.f0 = num(jd, "$.droop", "f0", d.f0);
    d.df_max = num(jd, "$.droop", "df_max", d.df_max);
    d.p0 = num(jd, "$.droop", "p0", d.p0);
    d.pmin = num(jd, "$.droop", "pmin", d.pmin);
    d.pmax = num(jd, "$.droop", "pmax", d.pmax);
    d.v0 = num(jd, "$.droop", "v0", d.v0);
    if (!(d.pmin < d.p0 && d.p0 < d.pmax)) fail("$.droop", "needs pmin < p0 < pmax");
    if (!(d.df_max > 0.0)) fail("$.droop.df_max", "must be positive");
  }

  if (j.contains("services")) {
    const auto& js = j["services"];
    check_keys(js, "$.services",
               {"voltage_regulation", "pf_correction", "frequency_regulation", "phase_balancing"});
    parse_service(js, "$.services", "voltage_regulation", s.services.voltage_regulation);
    parse_service(js, "$.services", "pf_correction", s.services.pf_correction);
    parse_service(js, "$.services", "frequency_regulation", s.services.frequency_regulation);
    parse_service(js, "$.services", "phase_balancing", s.services.phase_balancing);
    for (const auto* slot : {&s.services.voltage_regulation, &s.services.pf_correction,
                             &s.services.frequency_regulation, &s.services.phase_balancing}) {
      if (*slot && (**slot < 0.0 || **slot > s.duration)) {
        fail("$.services", "activation times must lie in [0, duration]");
      }
    }
  }

  if (j.contains("frequency")) {
    s.freq = parse_profile(j["frequency"], "$.frequency", base_dir);
  }

  if (j.contains("events")) {
    if (!j["events"].is_array()) fail("$.events", "expected an array");
    int idx = 0;
    for (const auto& je : j["events"]) {
      Event ev = parse_event(je, "$.events[" + std::to_string(idx) + "]");
      if (ev.time < 0.0 || ev.time > s.duration) {
        fail("$.events[" + std::to_string(idx) + "].time", "must lie in [0, duration]");
      }
      s.events.push_back(ev);
      ++idx;
    }
    std::stable_sort(s.events.begin(), s.events.end(),
                     [](const Event& a, const Event& b) { return a.time < b.time; });
  }
  return s;
}

std::string spec_to_json_text(const ScenarioSpec& s) {
  ordered j;
  j["name"] = s.name;
  j["duration"] = s.duration;
  j["dt"] = s.dt;
  j["record_decimation"] = s.record_decimation;
  j["integrator"] = s.integrator == ScenarioSpec::Integrator::euler ? "euler" : "rk4";
  j["initial"] = {{"i1", {s.initial.i1.a, s.initial.i1.b, s.initial.i1.c}},
                  {"i2", {s.initial.i2.a, s.initial.i2.b, s.initial.i2.c}},
                  {"i3", {s.initial.i3.a, s.initial.i3.b, s.initial.i3.c}},
                  {"vc", s.initial.vc}};
  j["plant"] = {{"l1", s.plant.l1},   {"l2", s.plant.l2}, {"lp", s.plant.lp},
                {"ls", s.plant.ls},   {"r1", s.plant.r1}, {"r2", s.plant.r2},
                {"rp", s.plant.rp},   {"rs", s.plant.rs}, {"c", s.plant.c},
                {"alpha", s.plant.alpha}, {"beta", s.plant.beta},
                {"r_load", matrix3_json(s.plant.r_load)},
                {"l_load", matrix3_json(s.plant.l_load)}};
  j["sources"] = {{"vin_peak", s.vin_peak}, {"iload_peak", s.iload_peak}};
  j["gains"] = {{"kp1", s.gains.kp1}, {"ki1", s.gains.ki1}, {"kp2", s.gains.kp2},
                {"ki2", s.gains.ki2}, {"kp3", s.gains.kp3}, {"ki3", s.gains.ki3},
                {"kp4", s.gains.kp4}, {"ki4", s.gains.ki4}, {"kp5", s.gains.kp5},
                {"ki5", s.gains.ki5}, {"kp6", s.gains.kp6}, {"ki6", s.gains.ki6},
                {"gamma", s.gains.gamma}};
  j["references"] = {{"v_star", s.refs.v_star},
                     {"vc_star", s.refs.vc_star},
                     {"i2q_star", s.refs.i2q_star},
                     {"i20_star", s.refs.i20_star},
                     {"qbar_star", s.refs.qbar_star}};
  j["droop"] = {{"f0", s.droop.f0},     {"df_max", s.droop.df_max}, {"p0", s.droop.p0},
                {"pmin", s.droop.pmin}, {"pmax", s.droop.pmax},     {"v0", s.droop.v0}};
  ordered services = ordered::object();
  auto put_service = [&services](const char* key, const std::optional<double>& v) {
    if (v) services[key] = *v;
  };
  put_service("voltage_regulation", s.services.voltage_regulation);
  put_service("pf_correction", s.services.pf_correction);
  put_service("frequency_regulation", s.services.frequency_regulation);
  put_service("phase_balancing", s.services.phase_balancing);
  j["services"] = services;
  ordered freq;
  switch (s.freq.kind) {
    case FrequencyProfile::Kind::constant:
      freq = {{"kind", "constant"}, {"f", s.freq.f}};
      break;
    case FrequencyProfile::Kind::ramp:
      freq = {{"kind", "ramp"},
              {"f_start", s.freq.f_start},
              {"f_end", s.freq.f_end},
              {"t_start", s.freq.t_start},
              {"t_end", s.freq.t_end}};
      break;
    case FrequencyProfile::Kind::sampled: {
      ordered pts = ordered::array();
      for (const auto& [t, f] : s.freq.points) pts.push_back({t, f});
      freq = {{"kind", "sampled"}, {"points", pts}};
      break;
    }
  }
  j["frequency"] = freq;
  ordered events = ordered::array();
  for (const Event& ev : s.events) {
    ordered je;
    je["time"] = ev.time;
    switch (ev.kind) {
      case Event::Kind::scale_vin:
        je["kind"] = "scale_vin";
        je["factor"] = ev.factor;
        break;
      case Event::Kind::set_load_matrices:
        je["kind"] = "set_load_matrices";
        je["r_load"] = matrix3_json(ev.r);
        je["l_load"] = matrix3_json(ev.l);
        break;
      case Event::Kind::enable_service:
        je["kind"] = "enable_service";
        je["service"] = ev.service;
        break;
    }
    events.push_back(je);
  }
  j["events"] = events;
  return j.dump(2) + "\n";
}

namespace {

Eigen::Matrix3d unbalanced_r() {
  Eigen::Matrix3d r;
  r << 10.0, 0.1, 0.2,
       0.1, 10.0, 0.15,
       0.2, 0.15, 5.0;
  return r;
}

Eigen::Matrix3d unbalanced_l() {
  Eigen::Matrix3d l;
  l << 8.3e-2, 1.6e-4, 2.5e-4,
       1.6e-4, 8.3e-2, 8.3e-5,
       2.5e-4, 8.3e-5, 8.3e-2;
  return l;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "voltage_regulation", "pf_correction", "phase_balancing", "frequency_regulation",
      "simultaneous"};
  return names;
}

ScenarioSpec preset(const std::string& name) {
  ScenarioSpec s;
  s.name = name;
  s.services.voltage_regulation = 0.0;
  if (name == "voltage_regulation") {
    s.duration = 0.2;
    s.initial.vc = 1900.0;
    Event ev;
    ev.kind = Event::Kind::scale_vin;
    ev.time = 0.1;
    ev.factor = 1.1;
    s.events.push_back(ev);
  } else if (name == "pf_correction") {
    s.duration = 0.2;
    s.initial.vc = 2000.0;
    s.services.pf_correction = 0.1;
  } else if (name == "phase_balancing") {
    s.duration = 0.2;
    s.initial.vc = 1900.0;
    s.services.phase_balancing = 0.1;
    s.plant.r_load = unbalanced_r();
    s.plant.l_load = unbalanced_l();
  } else if (name == "frequency_regulation") {
    s.duration = 15.0;
    s.initial.vc = 2000.0;
    s.services.frequency_regulation = 0.0;
    s.freq = FrequencyProfile::ramp(50.1, 49.7, 0.0, 15.0);
  } else if (name == "simultaneous") {
    s.duration = 15.0;
    s.initial.vc = 2000.0;
    s.services.frequency_regulation = 0.0;
    s.services.pf_correction = 7.5;
    s.services.phase_balancing = 7.5;
    s.plant.r_load = unbalanced_r();
    s.plant.l_load = unbalanced_l();
    s.freq = FrequencyProfile::ramp(49.9, 50.1, 0.0, 15.0);
  } else {
    throw ConfigError("unknown scenario preset '" + name + "'");
  }
  s.plant = derive_composites(s.plant);
  return s;
}

ScenarioSpec load_scenario(const std::string& preset_or_path) {
  const auto& names = preset_names();
  if (std::find(names.begin(), names.end(), preset_or_path) != names.end()) {
    return preset(preset_or_path);
  }
  std::ifstream in(preset_or_path);
  if (!in) throw ConfigError("cannot open config file '" + preset_or_path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string dir = std::filesystem::path(preset_or_path).parent_path().string();
  return spec_from_json_text(text, dir.empty() ? "." : dir);
}

}  // namespace hdt
