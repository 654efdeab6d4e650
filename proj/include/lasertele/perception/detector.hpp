#pragma once

#include "lasertele/scene/render.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lasertele {

struct PixelDetection {
  double u = 0.0;
  double v = 0.0;
  double confidence = 0.0;
  double stamp = 0.0;
};

/// Laser spot detector contract: best candidate in the frame, or none.
class SpotDetector {
 public:
  virtual ~SpotDetector() = default;
  virtual std::optional<PixelDetection> detect(const CameraFrame& frame) = 0;
};

/// Chroma matched filter: s = R - max(G, B) thresholded at `threshold`,
/// 8-connected components, weighted centroid of the best component.
/// Best = highest peak, then largest area, then smallest (v, u) of its first
/// raster pixel.
class ChromaDetector final : public SpotDetector {
 public:
  explicit ChromaDetector(int threshold = 80) : threshold_(threshold) {}

  int threshold() const { return threshold_; }

  std::optional<PixelDetection> detect(const CameraFrame& frame) override {
    const int w = frame.width, h = frame.height;
    const std::size_t n = std::size_t(w) * h;
    score_.assign(n, 0);
    label_.assign(n, -1);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint8_t* p = &frame.rgb[3 * i];
      int s = int(p[0]) - std::max<int>(p[1], p[2]);
      if (s > threshold_) {
        score_[i] = s;
        any = true;
      }
    }
    if (!any) return std::nullopt;

    struct Component {
      int peak = 0;
      int area = 0;
      int first_v = 0, first_u = 0;
      double sw = 0, su = 0, sv = 0;
    };
    std::optional<Component> best;
    stack_.clear();
    for (int v0 = 0; v0 < h; ++v0) {
      for (int u0 = 0; u0 < w; ++u0) {
        std::size_t i0 = std::size_t(v0) * w + u0;
        if (score_[i0] == 0 || label_[i0] >= 0) continue;
        Component c;
        c.first_v = v0;
        c.first_u = u0;
        label_[i0] = 1;
        stack_.push_back(int(i0));
        while (!stack_.empty()) {
          int i = stack_.back();
          stack_.pop_back();
          int u = i % w, v = i / w;
          double wgt = score_[i] - threshold_;
          c.peak = std::max(c.peak, score_[i]);
          c.area += 1;
          c.sw += wgt;
          c.su += wgt * u;
          c.sv += wgt * v;
          for (int dv = -1; dv <= 1; ++dv) {
            for (int du = -1; du <= 1; ++du) {
              int uu = u + du, vv = v + dv;
              if (uu < 0 || vv < 0 || uu >= w || vv >= h) continue;
              std::size_t j = std::size_t(vv) * w + uu;
              if (score_[j] == 0 || label_[j] >= 0) continue;
              label_[j] = 1;
              stack_.push_back(int(j));
            }
          }
        }
        // Components are discovered in raster order, so on a full tie the
        // earlier one (smaller (v, u)) is kept.
        if (!best || c.peak > best->peak || (c.peak == best->peak && c.area > best->area)) best = c;
      }
    }
    PixelDetection d;
    d.u = best->su / best->sw;
    d.v = best->sv / best->sw;
    d.confidence = std::clamp(best->peak / 255.0, 0.0, 1.0);
    d.stamp = frame.stamp;
    return d;
  }

 private:
  int threshold_;
  std::vector<int> score_;
  std::vector<int> label_;
  std::vector<int> stack_;
};

/// Replays detections from a CSV sidecar (stamp,u,v,confidence; optional
/// header line). A frame matches the row whose stamp is within half a tick.
class ExternalDetector final : public SpotDetector {
 public:
  explicit ExternalDetector(std::vector<PixelDetection> rows, double tolerance = 1.0 / 60.0)
      : rows_(std::move(rows)), tolerance_(tolerance) {
    std::stable_sort(rows_.begin(), rows_.end(), [](const auto& a, const auto& b) { return a.stamp < b.stamp; });
  }

  static ExternalDetector from_csv(const std::string& path, double tolerance = 1.0 / 60.0) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open detections file " + path);
    return ExternalDetector(parse_csv(in, path), tolerance);
  }

  static std::vector<PixelDetection> parse_csv(std::istream& in, const std::string& name = "detections") {
    std::vector<PixelDetection> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      if (lineno == 1 && line.find_first_of("abcdefghijklmnopqrstuvwxyz") != std::string::npos) continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream ls(line);
      PixelDetection d;
      if (!(ls >> d.stamp >> d.u >> d.v >> d.confidence))
        throw std::runtime_error(name + ":" + std::to_string(lineno) + ": expected stamp,u,v,confidence");
      if (d.confidence < 0.0 || d.confidence > 1.0)
        throw std::runtime_error(name + ":" + std::to_string(lineno) + ": confidence outside [0, 1]");
      rows.push_back(d);
    }
    return rows;
  }

  std::optional<PixelDetection> detect(const CameraFrame& frame) override {
    auto it = std::lower_bound(rows_.begin(), rows_.end(), frame.stamp - tolerance_,
                               [](const PixelDetection& d, double t) { return d.stamp < t; });
    if (it == rows_.end() || it->stamp > frame.stamp + tolerance_) return std::nullopt;
    if (it->u < 0 || it->v < 0 || it->u >= frame.width || it->v >= frame.height) return std::nullopt;
    PixelDetection d = *it;
    d.stamp = frame.stamp;
    return d;
  }

 private:
  std::vector<PixelDetection> rows_;
  double tolerance_;
};

}  // namespace lasertele
