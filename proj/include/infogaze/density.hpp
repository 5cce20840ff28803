#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "infogaze/types.hpp"

namespace infogaze {

// Per-pixel probability mass function over an image raster. Entries are
// nonnegative, finite and sum to 1 within 1e-9.
struct DensityGrid {
  std::string image_id;
  Grid pmf;  // (height, width)

  int width() const { return static_cast<int>(pmf.cols()); }
  int height() const { return static_cast<int>(pmf.rows()); }
};

struct KdeSpec {
  double kernel_sigma = 1.0;  // pixels, > 0; boundary is truncate-renormalize
};

// Discrete Gaussian taps at integer offsets -radius..radius, truncated at
// +-4*sigma and renormalized to sum 1. radius = floor(4*sigma).
struct GaussianTaps {
  int radius = 0;
  Eigen::VectorXd weights;  // size 2*radius+1, sums to 1
};
GaussianTaps gaussian_taps(double sigma);

// Rescale a nonnegative grid so it sums to 1.
DensityGrid normalize_to_pmf(const std::string& image_id, const Grid& values);

// Separable Gaussian convolution with reflect-at-boundary padding (edge
// sample repeated, so total mass is conserved). sigma = 0 is the identity.
Grid gaussian_blur(const Grid& g, double sigma);

// d gaussian_blur / d sigma at fixed truncation radius.
Grid gaussian_blur_dsigma(const Grid& g, double sigma);

// Kernel density estimate of the fixated pixels: each point contributes a
// truncated Gaussian renormalized over its in-frame support, so every point
// carries equal mass regardless of its distance to the boundary.
DensityGrid kde_density(const ImageFrame& frame, const std::vector<Fixation>& points,
                        const KdeSpec& spec);

// Average log2 model mass at the fixated pixels, relative to the uniform
// (maximum-entropy) model: (1/N) sum log2 pmf(px) + log2(W*H).
double log_likelihood_bits(const DensityGrid& model,
                           const std::vector<const FixationTrain*>& trains);
double log_likelihood_bits(const DensityGrid& model, const FixationTrain& train);

// Sample-mean expected log-likelihood ratio between two models of the same
// image, in bits/fixation. Equals log_likelihood_bits(a) - log_likelihood_bits(b).
double ellr(const DensityGrid& model_a, const DensityGrid& model_b,
            const std::vector<const FixationTrain*>& trains);

// 100 * (model - baseline) / (gold - baseline).
double percent_explained(double model_ll, double baseline_ll, double gold_ll);

}  // namespace infogaze
