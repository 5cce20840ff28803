#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "infogaze/density.hpp"
#include "infogaze/types.hpp"

namespace infogaze {

// Cross-image 2D histogram of fixation positions in normalized coordinates,
// mixed with the uniform pmf: (1 - lambda) * hist + lambda * uniform.
// Image-independent by construction; instantiated per frame size by
// spreading each bin's mass equally over its pixels.
struct HistogramBaseline {
  int bins_x = 1;
  int bins_y = 1;
  double lambda = 0.0;
  Grid bin_mass;                   // (bins_y, bins_x), sums to 1; all-image fit
  double heldout_bits_per_fix = 0.0;  // leave-one-image-out estimate

  DensityGrid density_for(const ImageFrame& frame) const;
};

struct HistogramGrids {
  std::vector<int> bin_grid = {4, 8, 16, 32};
  std::vector<double> lambda_grid = {1e-4, 1e-3, 1e-2, 1e-1};
};

// Grid search over (bins, lambda) by leave-one-image-out predictive
// log-likelihood; the winner is refit on all images.
HistogramBaseline fit_histogram_baseline(const Dataset& d, const std::vector<int>& bin_grid,
                                         const std::vector<double>& lambda_grid);

// The leave-one-image-out density the held-out evaluation used for one
// image (histogram from all fixations on other images).
DensityGrid histogram_loio_density(const Dataset& d, const HistogramBaseline& b,
                                   const std::string& image_id);

// Leave-one-subject-out Gaussian KDE per image, kernel width selected by
// k-fold cross-validation between subjects.
struct GoldStandard {
  double kernel_sigma = 0.0;
  double heldout_bits_per_fix = 0.0;  // CV estimate at the selected sigma
  // (image_id, held-out subject_id) -> KDE of all other subjects' fixations
  std::map<std::pair<std::string, std::string>, DensityGrid> loso;
  // image_id -> KDE pooling every subject (used as the per-image reference)
  std::map<std::string, DensityGrid> pooled;
};

struct GoldGrids {
  std::vector<double> sigma_grid;  // default: 21 log-spaced points in [1, 128]
  int folds = 10;
  std::uint64_t seed = 0;
  GoldGrids();
};

GoldStandard fit_gold_standard(const Dataset& d, const std::vector<double>& sigma_grid,
                               int folds, std::uint64_t seed);

// Subject-balanced LOSO estimate: mean over subjects j of the mean log2
// density of subject j's fixations under the KDE excluding subject j, plus
// the per-image uniform reference.
double gold_standard_ll(const GoldStandard& g, const Dataset& d);

// Same estimator restricted to one image (used for per-image scatter data).
double gold_standard_ll_image(const GoldStandard& g, const Dataset& d,
                              const std::string& image_id);

// Deterministic fold assignment: subjects sorted lexicographically, shuffled
// with the seed, dealt round-robin. Exposed for tests.
std::vector<std::vector<std::string>> subject_folds(std::vector<std::string> subjects,
                                                    int folds, std::uint64_t seed);

}  // namespace infogaze
