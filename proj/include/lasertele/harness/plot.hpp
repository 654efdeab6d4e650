#pragma once

// Static SVG plots of a recording: laser estimate and tcp position per axis
// over time, plus a controller-mode band with dwell progress.

#include "lasertele/harness/recording.hpp"

#include <array>
#include <cstdio>

namespace lasertele {

namespace detail {

struct SvgPanel {
  double x0, y0, w, h;
  double t0, t1, v0, v1;
  double px(double t) const { return x0 + (t - t0) / (t1 - t0) * w; }
  double py(double v) const { return y0 + h - (v - v0) / (v1 - v0) * h; }
};

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string svg_polyline(const std::vector<std::pair<double, double>>& pts, const SvgPanel& p,
                                const std::string& color, bool dashed) {
  if (pts.empty()) return {};
  std::string s = "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"" +
                  (dashed ? " stroke-dasharray=\"4 3\"" : "") + " points=\"";
  for (const auto& [t, v] : pts) s += svg_num(p.px(t)) + "," + svg_num(p.py(v)) + " ";
  return s + "\"/>\n";
}

inline std::string svg_text(double x, double y, const std::string& text, const char* anchor = "start") {
  return "<text x=\"" + svg_num(x) + "\" y=\"" + svg_num(y) + "\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"" +
         anchor + "\">" + text + "</text>\n";
}

inline std::string mode_color(Mode m) {
  switch (m) {
    case Mode::Idle: return "#e8e8e8";
    case Mode::DwellEnv: return "#f5d76e";
    case Mode::DwellButton: return "#f0a35e";
    case Mode::ButtonHeld: return "#7fb3d5";
    case Mode::ExecutingTrajectory: return "#82c99a";
    case Mode::GripperActing: return "#c39bd3";
  }
  return "#ffffff";
}

}  // namespace detail

/// One SVG with three position panels (x, y, z) and a mode band. Solid
/// lines are the laser estimate (gaps where invalid), dashed lines the tcp.
inline std::string plot_svg(const Recording& rec) {
  using detail::SvgPanel;
  const double width = 900, panel_h = 150, gap = 30, left = 60, right = 20, top = 30;
  const double inner_w = width - left - right;
  double t0 = rec.rows.empty() ? 0.0 : rec.rows.front().t;
  double t1 = rec.rows.empty() ? 1.0 : std::max(rec.rows.back().t, t0 + 1e-6);
  double height = top + 3 * (panel_h + gap) + 60 + 40;

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::svg_num(width) + "\" height=\"" +
                  detail::svg_num(height) + "\" viewBox=\"0 0 " + detail::svg_num(width) + " " + detail::svg_num(height) +
                  "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::string title = rec.header.contains("scenario") ? rec.header["scenario"].value("name", "recording") : "recording";
  s += detail::svg_text(left, 18, title + ": laser estimate (solid) and tcp (dashed) in base_link [m]");

  const std::array<const char*, 3> axis = {"x", "y", "z"};
  for (int a = 0; a < 3; ++a) {
    double lo = 1e300, hi = -1e300;
    for (const auto& r : rec.rows) {
      lo = std::min(lo, r.tcp.position[a]), hi = std::max(hi, r.tcp.position[a]);
      if (r.estimate.valid) lo = std::min(lo, r.estimate.point_base[a]), hi = std::max(hi, r.estimate.point_base[a]);
    }
    if (lo > hi) lo = 0.0, hi = 1.0;
    double pad = std::max(0.01, 0.05 * (hi - lo));
    SvgPanel p{left, top + a * (panel_h + gap), inner_w, panel_h, t0, t1, lo - pad, hi + pad};
    s += "<rect x=\"" + detail::svg_num(p.x0) + "\" y=\"" + detail::svg_num(p.y0) + "\" width=\"" + detail::svg_num(p.w) +
         "\" height=\"" + detail::svg_num(p.h) + "\" fill=\"none\" stroke=\"#888\"/>\n";
    s += detail::svg_text(p.x0 - 8, p.y0 + 12, detail::svg_num(p.v1), "end");
    s += detail::svg_text(p.x0 - 8, p.y0 + p.h, detail::svg_num(p.v0), "end");
    s += detail::svg_text(p.x0 - 40, p.y0 + p.h / 2, axis[a]);

    std::vector<std::pair<double, double>> seg, tcp;
    for (const auto& r : rec.rows) {
      tcp.push_back({r.t, r.tcp.position[a]});
      if (r.estimate.valid) {
        seg.push_back({r.t, r.estimate.point_base[a]});
      } else if (!seg.empty()) {
        s += detail::svg_polyline(seg, p, "#c0392b", false);
        seg.clear();
      }
    }
    s += detail::svg_polyline(seg, p, "#c0392b", false);
    s += detail::svg_polyline(tcp, p, "#2c3e50", true);
  }

  // Mode band with dwell progress drawn over it.
  double band_y = top + 3 * (panel_h + gap);
  SvgPanel band{left, band_y, inner_w, 40, t0, t1, 0.0, 1.0};
  for (std::size_t k = 0; k < rec.rows.size(); ++k) {
    double ta = rec.rows[k].t;
    double tb = k + 1 < rec.rows.size() ? rec.rows[k + 1].t : t1;
    s += "<rect x=\"" + detail::svg_num(band.px(ta)) + "\" y=\"" + detail::svg_num(band_y) + "\" width=\"" +
         detail::svg_num(std::max(0.5, band.px(tb) - band.px(ta))) + "\" height=\"40\" fill=\"" +
         detail::mode_color(rec.rows[k].mode) + "\"/>\n";
  }
  std::vector<std::pair<double, double>> dwell;
  for (const auto& r : rec.rows) dwell.push_back({r.t, r.dwell_progress});
  s += detail::svg_polyline(dwell, band, "#000", false);
  s += detail::svg_text(left - 8, band_y + 24, "mode", "end");
  s += detail::svg_text(left, band_y + 58, detail::svg_num(t0) + " s");
  s += detail::svg_text(left + inner_w, band_y + 58, detail::svg_num(t1) + " s", "end");

  double lx = left;
  for (Mode m : {Mode::Idle, Mode::DwellEnv, Mode::DwellButton, Mode::ButtonHeld, Mode::ExecutingTrajectory,
                 Mode::GripperActing}) {
    s += "<rect x=\"" + detail::svg_num(lx) + "\" y=\"" + detail::svg_num(band_y + 72) +
         "\" width=\"12\" height=\"12\" fill=\"" + detail::mode_color(m) + "\"/>\n";
    s += detail::svg_text(lx + 16, band_y + 82, to_string(m));
    lx += 140;
  }
  return s + "</svg>\n";
}

}  // namespace lasertele
