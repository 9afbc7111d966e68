#include "hdtsim/csv_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hdt {

std::string csv_header() {
  return "t,vin_a,vin_b,vin_c,i1_a,i1_b,i1_c,i2_a,i2_b,i2_c,i3_a,i3_b,i3_c,"
         "v_a,v_b,v_c,v_d,v_q,v_0,ibeta_d,ibeta_q,ibeta_0,vc,"
         "d1_a,d1_b,d1_c,d2_a,d2_b,d2_c,p,q,pf,f,p_star,v_star";
}

namespace {

void put(std::string& out, double v, bool last = false) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  out += buf;
  out += last ? '\n' : ',';
}

}  // namespace

void emit_csv(const std::vector<SampleRecord>& records, const std::string& path) {
  if (records.empty()) throw std::runtime_error("emit_csv: no records");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("emit_csv: cannot write '" + path + "'");
  std::string out;
  out.reserve(records.size() * 440 + 512);
  out += csv_header();
  out += '\n';
  for (const auto& r : records) {
    put(out, r.t);
    put(out, r.vin.a); put(out, r.vin.b); put(out, r.vin.c);
    put(out, r.i1.a); put(out, r.i1.b); put(out, r.i1.c);
    put(out, r.i2.a); put(out, r.i2.b); put(out, r.i2.c);
    put(out, r.i3.a); put(out, r.i3.b); put(out, r.i3.c);
    put(out, r.v.a); put(out, r.v.b); put(out, r.v.c);
    put(out, r.v_dq0.d); put(out, r.v_dq0.q); put(out, r.v_dq0.z);
    put(out, r.ibeta_dq0.d); put(out, r.ibeta_dq0.q); put(out, r.ibeta_dq0.z);
    put(out, r.vc);
    put(out, r.d1.a); put(out, r.d1.b); put(out, r.d1.c);
    put(out, r.d2.a); put(out, r.d2.b); put(out, r.d2.c);
    put(out, r.p); put(out, r.q); put(out, r.pf); put(out, r.f);
    put(out, r.p_star); put(out, r.v_star, true);
  }
  f << out;
  if (!f) throw std::runtime_error("emit_csv: write failed for '" + path + "'");
}

FrequencyProfile read_frequency_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open frequency profile '" + path + "'");
  std::vector<std::pair<double, double>> pts;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (line.empty() || line == "\r") continue;
    std::istringstream ss(line);
    double t, val;
    char comma;
    if (!(ss >> t >> comma >> val) || comma != ',') {
      if (first) {  // tolerate one header line
        first = false;
        continue;
      }
      throw std::runtime_error("frequency profile '" + path + "': bad line: " + line);
    }
    first = false;
    pts.emplace_back(t, val);
  }
  return FrequencyProfile::sampled(std::move(pts));
}

}  // namespace hdt
