#include "infogaze/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace infogaze {

namespace {

// Bin index of a snapped pixel in normalized coordinates.
inline int bin_of(int pixel, int extent, int bins) {
  const int b = static_cast<int>((static_cast<double>(pixel) * bins) / extent);
  return std::min(b, bins - 1);
}

// Number of pixels covered by bin b: boundaries at floor(k * extent / bins).
inline int bin_extent(int b, int extent, int bins) {
  const auto edge = [&](int k) { return (static_cast<long>(k) * extent) / bins; };
  return static_cast<int>(edge(b + 1) - edge(b));
}

struct BinCounts {
  Grid counts;  // (bins_y, bins_x)
  long total = 0;
};

BinCounts count_bins(const Dataset& d, const std::string& skip_image, int bins) {
  BinCounts bc;
  bc.counts = Grid::Zero(bins, bins);
  for (const auto& t : d.trains) {
    if (t.image_id == skip_image) continue;
    const ImageFrame& f = d.frame(t.image_id);
    for (const Fixation& fx : t.fixations) {
      const int px = snap_pixel(fx.x, f.width), py = snap_pixel(fx.y, f.height);
      bc.counts(bin_of(py, f.height, bins), bin_of(px, f.width, bins)) += 1.0;
      ++bc.total;
    }
  }
  return bc;
}

// log2 pmf at one pixel for the (bins, lambda) model with the given bin
// distribution, without materializing the full grid.
double log2_pmf_at(const Grid& bin_pmf, double lambda, const ImageFrame& f, int px, int py) {
  const int bins_y = static_cast<int>(bin_pmf.rows());
  const int bins_x = static_cast<int>(bin_pmf.cols());
  const int bx = bin_of(px, f.width, bins_x), by = bin_of(py, f.height, bins_y);
  const long npix = static_cast<long>(bin_extent(bx, f.width, bins_x)) *
                    bin_extent(by, f.height, bins_y);
  const double v = (1.0 - lambda) * bin_pmf(by, bx) / static_cast<double>(npix) +
                   lambda / static_cast<double>(f.pixel_count());
  return std::log2(v);
}

Grid upsample_bins(const Grid& bin_pmf, double lambda, const ImageFrame& f) {
  const int bins_y = static_cast<int>(bin_pmf.rows());
  const int bins_x = static_cast<int>(bin_pmf.cols());
  Grid out(f.height, f.width);
  for (int y = 0; y < f.height; ++y) {
    const int by = bin_of(y, f.height, bins_y);
    for (int x = 0; x < f.width; ++x) {
      const int bx = bin_of(x, f.width, bins_x);
      const long npix = static_cast<long>(bin_extent(bx, f.width, bins_x)) *
                        bin_extent(by, f.height, bins_y);
      out(y, x) = (1.0 - lambda) * bin_pmf(by, bx) / static_cast<double>(npix) +
                  lambda / static_cast<double>(f.pixel_count());
    }
  }
  return out;
}

}  // namespace

DensityGrid HistogramBaseline::density_for(const ImageFrame& frame) const {
  return normalize_to_pmf(frame.image_id, upsample_bins(bin_mass, lambda, frame));
}

HistogramBaseline fit_histogram_baseline(const Dataset& d, const std::vector<int>& bin_grid,
                                         const std::vector<double>& lambda_grid) {
  if (bin_grid.empty() || lambda_grid.empty())
    throw Error(Errc::empty_grids, "bin_grid and lambda_grid must be non-empty");
  std::set<std::string> images;
  for (const auto& t : d.trains) images.insert(t.image_id);
  if (images.size() < 2)
    throw Error(Errc::single_image, "cross-image baseline needs fixations on >= 2 images");

  double best_ll = -std::numeric_limits<double>::infinity();
  int best_bins = bin_grid.front();
  double best_lambda = lambda_grid.front();
  long total_fix = 0;

  for (int bins : bin_grid) {
    std::map<std::string, Grid> heldout_pmf;  // trained on all other images
    for (const std::string& image : images) {
      const BinCounts held = count_bins(d, image, bins);
      if (held.total > 0)
        heldout_pmf.emplace(image, held.counts / static_cast<double>(held.total));
    }
    for (double lambda : lambda_grid) {
      double ll = 0.0;
      long n = 0;
      for (const auto& [image, bin_pmf] : heldout_pmf) {
        const ImageFrame& f = d.frame(image);
        for (const auto& t : d.trains) {
          if (t.image_id != image) continue;
          for (const Fixation& fx : t.fixations) {
            const int px = snap_pixel(fx.x, f.width), py = snap_pixel(fx.y, f.height);
            ll += log2_pmf_at(bin_pmf, lambda, f, px, py) +
                  std::log2(static_cast<double>(f.pixel_count()));
            ++n;
          }
        }
      }
      if (ll > best_ll) {
        best_ll = ll;
        best_bins = bins;
        best_lambda = lambda;
        total_fix = n;
      }
    }
  }

  HistogramBaseline b;
  b.bins_x = b.bins_y = best_bins;
  b.lambda = best_lambda;
  const BinCounts all = count_bins(d, "", best_bins);
  b.bin_mass = all.total > 0 ? Grid(all.counts / static_cast<double>(all.total))
                             : Grid(Grid::Zero(best_bins, best_bins));
  b.heldout_bits_per_fix = total_fix > 0 ? best_ll / static_cast<double>(total_fix) : 0.0;
  return b;
}

DensityGrid histogram_loio_density(const Dataset& d, const HistogramBaseline& b,
                                   const std::string& image_id) {
  const ImageFrame& f = d.frame(image_id);
  const BinCounts held = count_bins(d, image_id, b.bins_x);
  if (held.total == 0)
    throw Error(Errc::single_image, "no fixations outside image '" + image_id + "'");
  const Grid bin_pmf = held.counts / static_cast<double>(held.total);
  return normalize_to_pmf(image_id, upsample_bins(bin_pmf, b.lambda, f));
}

GoldGrids::GoldGrids() {
  const int n = 21;
  sigma_grid.resize(n);
  const double lo = std::log(1.0), hi = std::log(128.0);
  for (int i = 0; i < n; ++i)
    sigma_grid[i] = std::exp(lo + (hi - lo) * i / (n - 1));
}

std::vector<std::vector<std::string>> subject_folds(std::vector<std::string> subjects,
                                                    int folds, std::uint64_t seed) {
  std::sort(subjects.begin(), subjects.end());
  std::mt19937_64 rng(seed);
  std::shuffle(subjects.begin(), subjects.end(), rng);
  std::vector<std::vector<std::string>> out(folds);
  for (std::size_t i = 0; i < subjects.size(); ++i)
    out[i % folds].push_back(subjects[i]);
  return out;
}

namespace {

// Fixations on one image from a subject set (included or excluded).
std::vector<Fixation> fixations_on_image(const Dataset& d, const std::string& image,
                                         const std::set<std::string>& subjects,
                                         bool include) {
  std::vector<Fixation> out;
  for (const auto& t : d.trains) {
    if (t.image_id != image) continue;
    const bool in = subjects.count(t.subject_id) > 0;
    if (in == include)
      out.insert(out.end(), t.fixations.begin(), t.fixations.end());
  }
  return out;
}

}  // namespace

GoldStandard fit_gold_standard(const Dataset& d, const std::vector<double>& sigma_grid,
                               int folds, std::uint64_t seed) {
  const std::vector<std::string> subjects = d.subject_ids();
  if (subjects.size() < 2)
    throw Error(Errc::too_few_subjects, "gold standard needs >= 2 subjects");
  if (sigma_grid.empty()) throw Error(Errc::empty_grids, "sigma_grid must be non-empty");
  if (folds < 2 || folds > static_cast<int>(subjects.size()))
    throw Error(Errc::too_few_subjects, "folds must lie in [2, #subjects]");

  std::set<std::string> images;
  for (const auto& t : d.trains) images.insert(t.image_id);
  const auto fold_sets = subject_folds(subjects, folds, seed);

  double best_ll = -std::numeric_limits<double>::infinity();
  double best_sigma = sigma_grid.front();
  long best_n = 0;
  for (double sigma : sigma_grid) {
    double ll = 0.0;
    long n = 0;
    for (const auto& fold : fold_sets) {
      const std::set<std::string> held(fold.begin(), fold.end());
      for (const std::string& image : images) {
        const ImageFrame& f = d.frame(image);
        const std::vector<Fixation> train_fix = fixations_on_image(d, image, held, false);
        const std::vector<Fixation> test_fix = fixations_on_image(d, image, held, true);
        if (train_fix.empty() || test_fix.empty()) continue;
        const DensityGrid kde = kde_density(f, train_fix, {sigma});
        for (const Fixation& fx : test_fix) {
          const double p = kde.pmf(snap_pixel(fx.y, f.height), snap_pixel(fx.x, f.width));
          ll += std::log2(std::max(p, 1e-300)) + std::log2(static_cast<double>(f.pixel_count()));
          ++n;
        }
      }
    }
    if (ll > best_ll) {
      best_ll = ll;
      best_sigma = sigma;
      best_n = n;
    }
  }

  GoldStandard g;
  g.kernel_sigma = best_sigma;
  g.heldout_bits_per_fix = best_n > 0 ? best_ll / static_cast<double>(best_n) : 0.0;

  for (const std::string& image : images) {
    const ImageFrame& f = d.frame(image);
    std::set<std::string> subjects_here;
    for (const auto& t : d.trains)
      if (t.image_id == image) subjects_here.insert(t.subject_id);
    for (const std::string& subj : subjects_here) {
      const std::vector<Fixation> others =
          fixations_on_image(d, image, std::set<std::string>{subj}, false);
      if (others.empty()) continue;  // lone subject: no LOSO grid possible
      g.loso.emplace(std::make_pair(image, subj),
                     kde_density(f, others, {best_sigma}));
    }
    const std::vector<Fixation> all = fixations_on_image(d, image, {}, false);
    if (!all.empty()) g.pooled.emplace(image, kde_density(f, all, {best_sigma}));
  }
  return g;
}

namespace {

struct SubjectAccumulator {
  double sum_bits = 0.0;
  long n = 0;
};

double loso_balanced_ll(const GoldStandard& g, const Dataset& d,
                        const std::string& only_image) {
  std::map<std::string, SubjectAccumulator> per_subject;
  for (const auto& t : d.trains) {
    if (!only_image.empty() && t.image_id != only_image) continue;
    const ImageFrame& f = d.frame(t.image_id);
    auto it = g.loso.find({t.image_id, t.subject_id});
    if (it == g.loso.end())
      throw Error(Errc::missing_grid, "no LOSO grid for (" + t.image_id + ", " +
                                          t.subject_id + ")");
    const DensityGrid& kde = it->second;
    SubjectAccumulator& acc = per_subject[t.subject_id];
    for (const Fixation& fx : t.fixations) {
      const double p = kde.pmf(snap_pixel(fx.y, f.height), snap_pixel(fx.x, f.width));
      if (!(p > 0.0))
        throw Error(Errc::zero_density_at_fixation,
                    "zero gold density at fixation on image '" + t.image_id + "'");
      acc.sum_bits += std::log2(p) + std::log2(static_cast<double>(f.pixel_count()));
      ++acc.n;
    }
  }
  if (per_subject.empty())
    throw Error(Errc::empty_points, "no fixations to evaluate");
  double total = 0.0;
  for (const auto& [subj, acc] : per_subject)
    total += acc.sum_bits / static_cast<double>(acc.n);
  return total / static_cast<double>(per_subject.size());
}

}  // namespace

double gold_standard_ll(const GoldStandard& g, const Dataset& d) {
  return loso_balanced_ll(g, d, "");
}

double gold_standard_ll_image(const GoldStandard& g, const Dataset& d,
                              const std::string& image_id) {
  return loso_balanced_ll(g, d, image_id);
}

}  // namespace infogaze
