#include "infogaze/types.hpp"

#include <set>

namespace infogaze {

std::vector<Violation> validate_dataset(const Dataset& d) {
  std::vector<Violation> out;

  std::set<std::string> frame_ids;
  for (const auto& f : d.frames) {
    const std::string ent = "frame " + f.image_id;
    if (!frame_ids.insert(f.image_id).second)
      out.push_back({ent, "duplicate image_id"});
    if (f.width < 1 || f.height < 1)
      out.push_back({ent, "width and height must be >= 1"});
    else if (f.pixel_count() < 4)
      out.push_back({ent, "width*height must be >= 4"});
  }

  std::set<std::pair<std::string, std::string>> train_keys;
  std::set<std::string> subjects;
  std::set<std::string> fixated_images;
  for (const auto& t : d.trains) {
    const std::string ent = "train (" + t.image_id + ", " + t.subject_id + ")";
    subjects.insert(t.subject_id);
    fixated_images.insert(t.image_id);
    if (!train_keys.insert({t.image_id, t.subject_id}).second)
      out.push_back({ent, "duplicate (subject, image) train"});
    const ImageFrame* f = d.find_frame(t.image_id);
    if (!f) {
      out.push_back({ent, "image_id references no frame"});
      continue;
    }
    if (t.fixations.empty()) {
      out.push_back({ent, "train is empty"});
      continue;
    }
    for (std::size_t i = 0; i < t.fixations.size(); ++i) {
      const Fixation& fx = t.fixations[i];
      if (!(fx.x >= 0.0 && fx.x < f->width && fx.y >= 0.0 && fx.y < f->height))
        out.push_back({ent, "fixation " + std::to_string(i) + " outside frame"});
      if (!(fx.t >= 0.0))
        out.push_back({ent, "fixation " + std::to_string(i) + " has t < 0"});
      if (i > 0 && !(t.fixations[i].t > t.fixations[i - 1].t)) {
        out.push_back({ent, "t not strictly increasing"});
        break;
      }
    }
  }

  for (const auto& [key, m] : d.maps) {
    const std::string ent = "map (" + key.first + ", " + key.second + ")";
    if (m.model_id != key.first || m.image_id != key.second)
      out.push_back({ent, "map ids inconsistent with key"});
    const ImageFrame* f = d.find_frame(m.image_id);
    if (!f) {
      out.push_back({ent, "image_id references no frame"});
      continue;
    }
    if (m.values.rows() != f->height || m.values.cols() != f->width)
      out.push_back({ent, "dimension mismatch"});
    if (!m.values.isFinite().all())
      out.push_back({ent, "non-finite saliency value"});
  }

  if (subjects.size() < 2)
    out.push_back({"dataset", "fewer than 2 subjects"});
  if (fixated_images.size() < 2)
    out.push_back({"dataset", "fewer than 2 images with fixations"});

  return out;
}

}  // namespace infogaze
