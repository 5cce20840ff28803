#pragma once

#include <string>
#include <vector>

#include "infogaze/density.hpp"

namespace infogaze {

// Signed per-pixel bits/fixation contributions; the grid sums to the
// corresponding scalar quantity.
struct InfoGainMap {
  std::string image_id;
  Grid grid;
};

// Pointwise model / prior; values > 1 mean more fixations than the prior
// expects at that pixel.
Grid ratio_map(const DensityGrid& model, const DensityGrid& prior);

// gold * log2(model / prior); sums to the gold-weighted ELLR of model vs prior.
InfoGainMap info_gain_map(const DensityGrid& gold, const DensityGrid& model,
                          const DensityGrid& prior);

// gold * log2(model / gold); sums to -kl_image_based(model, gold).
InfoGainMap info_gain_diff_map(const DensityGrid& gold, const DensityGrid& model);

struct ScatterPoint {
  std::string image_id;
  double possible_gain_bits = 0.0;  // per-image gold LL - baseline LL
  double explained_percent = 0.0;   // NaN when flagged
  bool degenerate = false;          // possible gain <= 0; not divided
};

struct PerImageLl {
  std::string image_id;
  double gold_ll = 0.0;
  double baseline_ll = 0.0;
  double model_ll = 0.0;
};

std::vector<ScatterPoint> scatter_data(const std::vector<PerImageLl>& per_image);

}  // namespace infogaze
