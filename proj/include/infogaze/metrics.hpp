#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "infogaze/density.hpp"
#include "infogaze/types.hpp"

namespace infogaze {

enum class NonfixKind { uniform_pixels, shuffled_fixations };

struct NonfixationSpec {
  NonfixKind kind = NonfixKind::uniform_pixels;
  bool exhaustive = true;           // uniform-pixels: every pixel of the image
  int sample_size = 10000;          // used when exhaustive is false
  std::uint64_t seed = 0;
};

struct KlSpec {
  int bins = 10;
  double epsilon = 1e-9;
};

// Mann-Whitney AUC with ties counted 1/2.
double auc(const std::vector<double>& scores_at_fixations,
           const std::vector<double>& scores_at_nonfixations);

// Per-image score lists for a model: values at fixated pixels vs the
// nonfixation set from the spec.
struct ScoreSets {
  std::vector<double> fixations;
  std::vector<double> nonfixations;
};
ScoreSets gather_scores(const Grid& score_grid, const ImageFrame& frame,
                        const std::vector<const FixationTrain*>& trains_on_image,
                        const std::vector<const FixationTrain*>& trains_elsewhere,
                        const std::vector<ImageFrame>& frames,
                        const NonfixationSpec& spec);

// Fixation-count-weighted mean of per-image AUCs.
double auc_for_model(const std::map<std::string, Grid>& score_grids,
                     const std::vector<const FixationTrain*>& trains,
                     const std::vector<ImageFrame>& frames, const NonfixationSpec& spec);

// KL divergence (bits) between histograms of saliency values at fixations
// and nonfixations; equal-width bins over the joint score range, epsilon
// added to every bin.
double kl_fixation_based(const std::vector<double>& fix_scores,
                         const std::vector<double>& nonfix_scores, const KlSpec& spec);

double kl_fixation_based_for_model(const std::map<std::string, Grid>& score_grids,
                                   const std::vector<const FixationTrain*>& trains,
                                   const std::vector<ImageFrame>& frames,
                                   const NonfixationSpec& nonfix, const KlSpec& spec);

// sum reference * log2(reference / model) over pixels, 0 log 0 = 0.
double kl_image_based(const DensityGrid& model, const DensityGrid& reference);

// lhs = sum p log2(q1/q2); rhs = KL(p||q2) - KL(p||q1). Equal analytically.
std::pair<double, double> ellr_identity_check(const DensityGrid& p, const DensityGrid& q1,
                                              const DensityGrid& q2);

// (m - baseline) / (gold - baseline).
double rescale_metric(double value, double baseline_value, double gold_value);

double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y);
double spearman_correlation(const std::vector<double>& x, const std::vector<double>& y);

// Both coefficients for one metric across >= 3 models.
std::pair<double, double> metric_correlation(const std::vector<double>& metric_values,
                                             const std::vector<double>& info_gain_explained);

}  // namespace infogaze
