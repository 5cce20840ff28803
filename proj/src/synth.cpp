#include "infogaze/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

namespace infogaze {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t train_seed(std::uint64_t master, int index) {
  return splitmix64(master + static_cast<std::uint64_t>(index) + 1);
}

// Row-major cumulative mass; draws skip zero-mass pixels by construction.
struct PixelSampler {
  std::vector<double> cdf;
  int width = 0;

  explicit PixelSampler(const Grid& pmf) : width(static_cast<int>(pmf.cols())) {
    cdf.reserve(pmf.size());
    double acc = 0.0;
    for (Eigen::Index y = 0; y < pmf.rows(); ++y)
      for (Eigen::Index x = 0; x < pmf.cols(); ++x) {
        acc += pmf(y, x);
        cdf.push_back(acc);
      }
  }

  std::pair<int, int> draw(double u) const {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u * cdf.back());
    const int idx = static_cast<int>(std::min<std::ptrdiff_t>(
        it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
    return {idx % width, idx / width};
  }
};

std::string subject_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "s%03d", index);
  return buf;
}

Fixation jittered(int px, int py, double t, std::mt19937_64& rng,
                  std::uniform_real_distribution<double>& unit) {
  const double jx = unit(rng) - 0.5;
  const double jy = unit(rng) - 0.5;
  Fixation f;
  f.x = std::max(0.0, px + jx);
  f.y = std::max(0.0, py + jy);
  f.t = t;
  return f;
}

}  // namespace

std::vector<FixationTrain> sample_spatial(const ImageFrame& frame, const DensityGrid& pmf,
                                          int n_subjects, int fixations_per_subject,
                                          std::uint64_t seed) {
  if (n_subjects < 1 || fixations_per_subject < 1)
    throw Error(Errc::bad_config, "sample counts must be >= 1");
  if (pmf.width() != frame.width || pmf.height() != frame.height)
    throw Error(Errc::image_mismatch, "pmf dimensions do not match frame");
  const PixelSampler sampler(pmf.pmf);
  std::vector<FixationTrain> out;
  out.reserve(n_subjects);
  for (int s = 0; s < n_subjects; ++s) {
    std::mt19937_64 rng(train_seed(seed, s));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    FixationTrain train;
    train.image_id = frame.image_id;
    train.subject_id = subject_name(s);
    train.fixations.reserve(fixations_per_subject);
    for (int i = 0; i < fixations_per_subject; ++i) {
      const auto [px, py] = sampler.draw(unit(rng));
      train.fixations.push_back(jittered(px, py, 0.25 * i, rng, unit));
    }
    out.push_back(std::move(train));
  }
  return out;
}

FixationTrain sample_temporal(const ImageFrame& frame, const DensityGrid& base,
                              const TemporalParams& p, int train_length,
                              std::uint64_t seed) {
  if (train_length < 1) throw Error(Errc::bad_config, "train_length must be >= 1");
  if (!temporal_params_valid(p))
    throw Error(Errc::out_of_support, "temporal parameters out of range");
  if (base.width() != frame.width || base.height() != frame.height)
    throw Error(Errc::image_mismatch, "pmf dimensions do not match frame");

  std::mt19937_64 rng(train_seed(seed, 0));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  FixationTrain train;
  train.image_id = frame.image_id;
  train.subject_id = subject_name(0);
  train.fixations.reserve(train_length);
  for (int i = 0; i < train_length; ++i) {
    const DensityGrid step =
        (i == 0) ? base : conditional_density(base, train.fixations.back(), p);
    const PixelSampler sampler(step.pmf);
    const auto [px, py] = sampler.draw(unit(rng));
    train.fixations.push_back(jittered(px, py, 0.25 * i, rng, unit));
  }
  return train;
}

}  // namespace infogaze
