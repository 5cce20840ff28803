#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "infogaze/common.hpp"

namespace infogaze {

using Grid = Eigen::ArrayXXd;  // (height, width); element (y, x)

struct ImageFrame {
  std::string image_id;
  int width = 0;
  int height = 0;

  long pixel_count() const { return static_cast<long>(width) * height; }
};

struct Fixation {
  double x = 0.0;  // pixels, 0 <= x < width
  double y = 0.0;  // pixels, 0 <= y < height
  double t = 0.0;  // seconds
};

struct FixationTrain {
  std::string image_id;
  std::string subject_id;
  std::vector<Fixation> fixations;
};

struct SaliencyMap {
  std::string image_id;
  std::string model_id;
  Grid values;  // (height, width)
};

// Snap a real coordinate to the nearest pixel index, half-up, clamped.
inline int snap_pixel(double coord, int extent) {
  int p = static_cast<int>(std::floor(coord + 0.5));
  return std::clamp(p, 0, extent - 1);
}

struct Dataset {
  std::vector<ImageFrame> frames;
  std::vector<FixationTrain> trains;
  // keyed by (model_id, image_id); ordered so iteration is deterministic
  std::map<std::pair<std::string, std::string>, SaliencyMap> maps;

  const ImageFrame* find_frame(const std::string& image_id) const {
    for (const auto& f : frames)
      if (f.image_id == image_id) return &f;
    return nullptr;
  }

  const ImageFrame& frame(const std::string& image_id) const {
    const ImageFrame* f = find_frame(image_id);
    if (!f) throw Error(Errc::missing_artifact, "no frame for image '" + image_id + "'");
    return *f;
  }

  std::vector<const FixationTrain*> trains_for_image(const std::string& image_id) const {
    std::vector<const FixationTrain*> out;
    for (const auto& t : trains)
      if (t.image_id == image_id) out.push_back(&t);
    return out;
  }

  std::vector<std::string> subject_ids() const {
    std::vector<std::string> ids;
    for (const auto& t : trains) ids.push_back(t.subject_id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
  }
};

struct Violation {
  std::string entity;
  std::string rule;
};

// Pure check of the invariants on frames, trains and maps. Violations are
// returned as data; nothing throws.
std::vector<Violation> validate_dataset(const Dataset& d);

}  // namespace infogaze
