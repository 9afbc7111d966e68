#include "hdtsim/svg_plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <stdexcept>

namespace hdt {

namespace {

constexpr int kW = 900, kH = 380;
constexpr int kMargL = 70, kMargR = 20, kMargT = 30, kMargB = 45;
const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Trace {
  std::string label;
  std::vector<double> y;
};

void write_panel(const std::string& path, const std::string& title,
                 const std::vector<double>& t, const std::vector<Trace>& traces) {
  double ymin = 1e300, ymax = -1e300;
  for (const auto& tr : traces) {
    for (double v : tr.y) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  if (!(ymax > ymin)) {
    ymax = ymin + 1.0;
    ymin -= 1.0;
  }
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  const double t0 = t.front(), t1 = t.back();
  const double sx = (kW - kMargL - kMargR) / (t1 > t0 ? t1 - t0 : 1.0);
  const double sy = (kH - kMargT - kMargB) / (ymax - ymin);
  auto px = [&](double x) { return kMargL + (x - t0) * sx; };
  auto py = [&](double y) { return kH - kMargB - (y - ymin) * sy; };

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("emit_plots: cannot write '" + path + "'");
  f << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kW / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << title
    << "</text>\n";
  // Axes box and reference ticks.
  f << "<rect x=\"" << kMargL << "\" y=\"" << kMargT << "\" width=\"" << kW - kMargL - kMargR
    << "\" height=\"" << kH - kMargT - kMargB << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double yv = ymin + (ymax - ymin) * k / 4.0;
    const double xv = t0 + (t1 - t0) * k / 4.0;
    f << "<text x=\"" << kMargL - 6 << "\" y=\"" << py(yv) + 4
      << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(yv) << "</text>\n";
    f << "<text x=\"" << px(xv) << "\" y=\"" << kH - kMargB + 16
      << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(xv) << "</text>\n";
  }
  f << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 8
    << "\" text-anchor=\"middle\" font-size=\"12\">t [s]</text>\n";

  int ci = 0;
  for (const auto& tr : traces) {
    f << "<polyline fill=\"none\" stroke=\"" << kColors[ci % 3] << "\" stroke-width=\"1\" points=\"";
    for (std::size_t i = 0; i < t.size(); ++i) {
      f << fmt(px(t[i])) << ',' << fmt(py(tr.y[i])) << ' ';
    }
    f << "\"/>\n";
    f << "<text x=\"" << kW - kMargR - 8 << "\" y=\"" << kMargT + 16 + 16 * ci
      << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << kColors[ci % 3] << "\">" << tr.label
      << "</text>\n";
    ++ci;
  }
  f << "</svg>\n";
}

}  // namespace

std::vector<std::string> emit_plots(const std::vector<SampleRecord>& records,
                                    const std::string& prefix) {
  if (records.empty()) throw std::runtime_error("emit_plots: no records");

  // Downsample deterministically to keep files small.
  const std::size_t stride = std::max<std::size_t>(1, records.size() / 2000);
  std::vector<double> t;
  for (std::size_t i = 0; i < records.size(); i += stride) t.push_back(records[i].t);
  auto col = [&](const std::function<double(const SampleRecord&)>& get) {
    std::vector<double> v;
    v.reserve(t.size());
    for (std::size_t i = 0; i < records.size(); i += stride) v.push_back(get(records[i]));
    return v;
  };

  std::vector<std::string> written;
  auto emit = [&](const std::string& panel, const std::string& title, std::vector<Trace> traces) {
    const std::string path = prefix + panel + ".svg";
    write_panel(path, title, t, traces);
    written.push_back(path);
  };

  emit("v_dq", "Load voltage d axis [V]",
       {{"v_d", col([](const SampleRecord& r) { return r.v_dq0.d; })},
        {"v*", col([](const SampleRecord& r) { return r.v_star; })}});
  emit("pf", "Grid-interface power factor",
       {{"pf", col([](const SampleRecord& r) { return r.pf; })}});
  emit("ibeta_dq0", "Grid current dq0 [A]",
       {{"d", col([](const SampleRecord& r) { return r.ibeta_dq0.d; })},
        {"q", col([](const SampleRecord& r) { return r.ibeta_dq0.q; })},
        {"0", col([](const SampleRecord& r) { return r.ibeta_dq0.z; })}});
  emit("vc", "DC-link voltage [V]", {{"v_c", col([](const SampleRecord& r) { return r.vc; })}});
  emit("power", "Load active power [W]",
       {{"P", col([](const SampleRecord& r) { return r.p; })},
        {"P*", col([](const SampleRecord& r) { return r.p_star; })}});
  emit("freq", "Grid frequency [Hz]", {{"f", col([](const SampleRecord& r) { return r.f; })}});
  return written;
}

}  // namespace hdt
