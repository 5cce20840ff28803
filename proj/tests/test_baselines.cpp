#include <doctest.h>

#include <cmath>
#include <set>

#include "infogaze/baselines.hpp"
#include "infogaze/synth.hpp"
#include "oracles.hpp"

using namespace infogaze;

namespace {

Dataset dataset_from_trains(std::vector<ImageFrame> frames, std::vector<FixationTrain> trains) {
  Dataset d;
  d.frames = std::move(frames);
  d.trains = std::move(trains);
  return d;
}

// Fixations of several subjects drawn from per-image generator pmfs.
Dataset synthetic_dataset(int n_images, int size, int n_subjects, int per_subject,
                          std::uint64_t seed, bool center_biased) {
  Dataset d;
  for (int i = 0; i < n_images; ++i) {
    const std::string id = "img" + std::to_string(i);
    d.frames.push_back({id, size, size});
    Grid gen = oracles::bumpy_map(size, size, seed + i) + 0.05;
    if (center_biased) {
      const double c = (size - 1) / 2.0;
      for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
          const double d2 = ((x - c) * (x - c) + (y - c) * (y - c)) / (c * c);
          gen(y, x) *= std::exp(-1.5 * d2);
        }
    }
    const DensityGrid pmf = normalize_to_pmf(id, gen);
    auto trains = sample_spatial(d.frames.back(), pmf, n_subjects, per_subject,
                                 seed * 131 + i);
    for (auto& t : trains) d.trains.push_back(std::move(t));
  }
  return d;
}

// Independent reimplementation of the leave-one-image-out candidate search.
std::pair<int, double> exhaustive_histogram_search(const Dataset& d,
                                                   const std::vector<int>& bin_grid,
                                                   const std::vector<double>& lambda_grid) {
  std::set<std::string> images;
  for (const auto& t : d.trains) images.insert(t.image_id);
  double best = -std::numeric_limits<double>::infinity();
  int best_bins = -1;
  double best_lambda = 0.0;
  for (int bins : bin_grid)
    for (double lambda : lambda_grid) {
      double ll = 0.0;
      for (const std::string& image : images) {
        const ImageFrame& f = d.frame(image);
        Grid counts = Grid::Zero(bins, bins);
        double total = 0.0;
        for (const auto& t : d.trains) {
          if (t.image_id == image) continue;
          const ImageFrame& g = d.frame(t.image_id);
          for (const auto& fx : t.fixations) {
            const int px = snap_pixel(fx.x, g.width), py = snap_pixel(fx.y, g.height);
            const int bx = std::min(px * bins / g.width, bins - 1);
            const int by = std::min(py * bins / g.height, bins - 1);
            counts(by, bx) += 1.0;
            total += 1.0;
          }
        }
        for (const auto& t : d.trains) {
          if (t.image_id != image) continue;
          for (const auto& fx : t.fixations) {
            const int px = snap_pixel(fx.x, f.width), py = snap_pixel(fx.y, f.height);
            const int bx = std::min(px * bins / f.width, bins - 1);
            const int by = std::min(py * bins / f.height, bins - 1);
            const auto edge_x = [&](int k) { return k * f.width / bins; };
            const auto edge_y = [&](int k) { return k * f.height / bins; };
            const double npix = static_cast<double>(edge_x(bx + 1) - edge_x(bx)) *
                                (edge_y(by + 1) - edge_y(by));
            const double v = (1.0 - lambda) * (counts(by, bx) / total) / npix +
                             lambda / f.pixel_count();
            ll += std::log2(v) + std::log2(static_cast<double>(f.pixel_count()));
          }
        }
      }
      if (ll > best) {
        best = ll;
        best_bins = bins;
        best_lambda = lambda;
      }
    }
  return {best_bins, best_lambda};
}

// Independent sigma selection loop over the same folds. Returns the winner
// and its held-out bits/fixation.
std::pair<double, double> exhaustive_sigma_search(const Dataset& d,
                                                  const std::vector<double>& sigma_grid,
                                                  int folds, std::uint64_t seed) {
  const auto fold_sets = subject_folds(d.subject_ids(), folds, seed);
  std::set<std::string> images;
  for (const auto& t : d.trains) images.insert(t.image_id);
  double best = -std::numeric_limits<double>::infinity();
  double best_sigma = sigma_grid.front();
  long best_n = 0;
  for (double sigma : sigma_grid) {
    double ll = 0.0;
    long n = 0;
    for (const auto& fold : fold_sets) {
      const std::set<std::string> held(fold.begin(), fold.end());
      for (const std::string& image : images) {
        const ImageFrame& f = d.frame(image);
        std::vector<Fixation> train_fix, test_fix;
        for (const auto& t : d.trains) {
          if (t.image_id != image) continue;
          auto& dst = held.count(t.subject_id) ? test_fix : train_fix;
          dst.insert(dst.end(), t.fixations.begin(), t.fixations.end());
        }
        if (train_fix.empty() || test_fix.empty()) continue;
        const DensityGrid kde = kde_density(f, train_fix, {sigma});
        for (const auto& fx : test_fix) {
          ll += std::log2(std::max(kde.pmf(snap_pixel(fx.y, f.height),
                                           snap_pixel(fx.x, f.width)),
                                   1e-300)) +
                std::log2(static_cast<double>(f.pixel_count()));
          ++n;
        }
      }
    }
    if (ll > best) {
      best = ll;
      best_sigma = sigma;
      best_n = n;
    }
  }
  return {best_sigma, best_n > 0 ? best / static_cast<double>(best_n) : 0.0};
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("lambda 1 forces the uniform model with zero held-out bits") {
  const Dataset d = synthetic_dataset(3, 16, 2, 50, 5, false);
  const HistogramBaseline b = fit_histogram_baseline(d, {4, 8}, {1.0});
  CHECK(b.lambda == 1.0);
  CHECK(b.heldout_bits_per_fix == doctest::Approx(0.0).epsilon(1e-12));
  const DensityGrid pmf = b.density_for(d.frames[0]);
  CHECK((pmf.pmf - 1.0 / 256.0).abs().maxCoeff() < 1e-15);
}

TEST_CASE("concentrated fixations pick the concentrated candidate") {
  std::vector<FixationTrain> trains;
  for (int i = 0; i < 3; ++i) {
    const std::string id = "img" + std::to_string(i);
    trains.push_back(oracles::train_from_pixels(id, "s0", {{8, 8}, {8, 8}, {8, 8}}));
    trains.push_back(oracles::train_from_pixels(id, "s1", {{8, 8}, {8, 8}}));
  }
  const Dataset d = dataset_from_trains(
      {{"img0", 16, 16}, {"img1", 16, 16}, {"img2", 16, 16}}, std::move(trains));
  const HistogramBaseline b = fit_histogram_baseline(d, {16}, {0.01, 1.0});
  CHECK(b.bins_x == 16);
  CHECK(b.lambda == 0.01);
  const DensityGrid pmf = b.density_for(d.frames[0]);
  double mx = -1.0;
  int my = -1, mxc = -1;
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x)
      if (pmf.pmf(y, x) > mx) { mx = pmf.pmf(y, x); my = y; mxc = x; }
  CHECK(my == 8);
  CHECK(mxc == 8);
  CHECK(b.heldout_bits_per_fix > 0.0);
}

TEST_CASE("gridsearch winner matches exhaustive enumeration") {
  const Dataset d = synthetic_dataset(3, 16, 3, 120, 77, true);
  const std::vector<int> bins{2, 4, 8};
  const std::vector<double> lambdas{1e-3, 1e-2, 1e-1};
  const HistogramBaseline b = fit_histogram_baseline(d, bins, lambdas);
  const auto [want_bins, want_lambda] = exhaustive_histogram_search(d, bins, lambdas);
  CHECK(b.bins_x == want_bins);
  CHECK(b.lambda == want_lambda);
}

TEST_CASE("histogram template is shared across same-size images") {
  const Dataset d = synthetic_dataset(3, 16, 2, 60, 3, true);
  const HistogramBaseline b = fit_histogram_baseline(d, {4}, {1e-2});
  const DensityGrid p0 = b.density_for(d.frames[0]);
  const DensityGrid p1 = b.density_for(d.frames[1]);
  CHECK((p0.pmf - p1.pmf).abs().maxCoeff() == 0.0);
  CHECK(p0.pmf.sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("single-image datasets are rejected") {
  Dataset d = dataset_from_trains({{"img0", 8, 8}, {"img1", 8, 8}},
                                  {oracles::train_from_pixels("img0", "s0", {{1, 1}})});
  CHECK_THROWS_AS(fit_histogram_baseline(d, {4}, {0.1}), Error);
  CHECK_THROWS_AS(fit_histogram_baseline(d, {}, {0.1}), Error);
}

TEST_CASE("singleton sigma grid is selected as-is") {
  const Dataset d = synthetic_dataset(2, 16, 3, 40, 9, false);
  const GoldStandard g = fit_gold_standard(d, {3.5}, 3, 0);
  CHECK(g.kernel_sigma == 3.5);
}

TEST_CASE("identical point data selects the smallest sigma") {
  std::vector<FixationTrain> trains;
  for (int s = 0; s < 4; ++s) {
    trains.push_back(oracles::train_from_pixels("img0", "s" + std::to_string(s),
                                                {{5, 5}, {5, 5}, {5, 5}}));
    trains.push_back(oracles::train_from_pixels("img1", "s" + std::to_string(s),
                                                {{5, 5}, {5, 5}}));
  }
  const Dataset d =
      dataset_from_trains({{"img0", 12, 12}, {"img1", 12, 12}}, std::move(trains));
  const GoldStandard g = fit_gold_standard(d, {0.5, 2.0, 8.0}, 2, 1);
  CHECK(g.kernel_sigma == 0.5);
}

TEST_CASE("cross-validated sigma matches the exhaustive grid oracle") {
  const Dataset d = synthetic_dataset(2, 32, 8, 250, 4, false);
  const std::vector<double> sigmas{1.0, 2.0, 4.0, 8.0, 16.0};
  const GoldStandard g = fit_gold_standard(d, sigmas, 4, 12);
  const auto [want_sigma, want_ll] = exhaustive_sigma_search(d, sigmas, 4, 12);
  CHECK(g.kernel_sigma == want_sigma);
  CHECK(g.heldout_bits_per_fix == doctest::Approx(want_ll).epsilon(1e-12));

  // the held-out LL sits near log2(WH) minus the cross-entropy of the true
  // generator against the selected-kernel pooled KDE, up to sampling noise
  double acc = 0.0;
  int count = 0;
  for (const auto& f : d.frames) {
    std::vector<Fixation> all;
    for (const auto& t : d.trains)
      if (t.image_id == f.image_id)
        all.insert(all.end(), t.fixations.begin(), t.fixations.end());
    const DensityGrid kde = kde_density(f, all, {g.kernel_sigma});
    // same generator construction as synthetic_dataset(seed = 4)
    const DensityGrid truth =
        normalize_to_pmf(f.image_id, oracles::bumpy_map(32, 32, 4 + count) + 0.05);
    double xent = 0.0;
    for (Eigen::Index i = 0; i < truth.pmf.size(); ++i)
      if (truth.pmf(i) > 0.0) xent -= truth.pmf(i) * std::log2(std::max(kde.pmf(i), 1e-12));
    acc += std::log2(static_cast<double>(f.pixel_count())) - xent;
    ++count;
  }
  CHECK(std::abs(g.heldout_bits_per_fix - acc / count) < 0.3);
}

TEST_CASE("two subjects with identical fixations give the symmetric LL") {
  const std::vector<std::pair<int, int>> pts{{2, 3}, {9, 4}, {6, 11}};
  std::vector<FixationTrain> trains{oracles::train_from_pixels("img0", "s0", pts),
                                    oracles::train_from_pixels("img0", "s1", pts),
                                    oracles::train_from_pixels("img1", "s0", pts),
                                    oracles::train_from_pixels("img1", "s1", pts)};
  const Dataset d =
      dataset_from_trains({{"img0", 16, 16}, {"img1", 16, 16}}, std::move(trains));
  const GoldStandard g = fit_gold_standard(d, {2.0}, 2, 0);

  std::vector<Fixation> pts_f;
  for (auto [x, y] : pts) pts_f.push_back({static_cast<double>(x), static_cast<double>(y), 0.0});
  const DensityGrid self = kde_density({"img0", 16, 16}, pts_f, {2.0});
  const FixationTrain probe = oracles::train_from_pixels("img0", "s0", pts);
  const double expect = log_likelihood_bits(self, probe);
  CHECK(gold_standard_ll_image(g, d, "img0") == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("LOSO gold never beats the in-sample KDE or the truth by much") {
  const int size = 32;
  Dataset d;
  d.frames.push_back({"img0", size, size});
  d.frames.push_back({"img1", size, size});
  std::map<std::string, DensityGrid> truths;
  for (int i = 0; i < 2; ++i) {
    const std::string id = "img" + std::to_string(i);
    const DensityGrid pmf = normalize_to_pmf(id, oracles::bumpy_map(size, size, 40 + i));
    truths.emplace(id, pmf);
    auto trains = sample_spatial(d.frames[i], pmf, 6, 800, 600 + i);
    for (auto& t : trains) d.trains.push_back(std::move(t));
  }
  const GoldStandard g = fit_gold_standard(d, {1.0, 2.0, 4.0}, 3, 7);
  const double loso = gold_standard_ll(g, d);

  // in-sample pooled KDE
  double pooled = 0.0;
  long n = 0;
  for (const auto& f : d.frames) {
    const auto ts = d.trains_for_image(f.image_id);
    long m = 0;
    for (const auto* t : ts) m += static_cast<long>(t->fixations.size());
    pooled += m * log_likelihood_bits(g.pooled.at(f.image_id), ts);
    n += m;
  }
  pooled /= n;
  CHECK(loso <= pooled + 1e-9);

  double truth_ll = 0.0;
  for (const auto& f : d.frames) {
    const auto ts = d.trains_for_image(f.image_id);
    long m = 0;
    for (const auto* t : ts) m += static_cast<long>(t->fixations.size());
    truth_ll += m * log_likelihood_bits(truths.at(f.image_id), ts);
  }
  truth_ll /= n;
  CHECK(loso <= truth_ll + 0.05);
}

TEST_CASE("fold assignment is deterministic and balanced") {
  std::vector<std::string> subjects{"s3", "s1", "s0", "s2", "s4"};
  const auto a = subject_folds(subjects, 2, 42);
  const auto b = subject_folds(subjects, 2, 42);
  CHECK(a == b);
  CHECK(a[0].size() + a[1].size() == 5);
  CHECK(std::abs(static_cast<int>(a[0].size()) - static_cast<int>(a[1].size())) <= 1);
  const auto c = subject_folds(subjects, 2, 43);
  CHECK(a != c);  // different seed, different deal (with high probability)
}

TEST_CASE("gold fitting is deterministic") {
  const Dataset d = synthetic_dataset(2, 16, 4, 60, 15, false);
  const GoldStandard g1 = fit_gold_standard(d, {1.0, 3.0}, 2, 5);
  const GoldStandard g2 = fit_gold_standard(d, {1.0, 3.0}, 2, 5);
  CHECK(g1.kernel_sigma == g2.kernel_sigma);
  CHECK(g1.heldout_bits_per_fix == g2.heldout_bits_per_fix);
  const auto& p1 = g1.loso.begin()->second.pmf;
  const auto& p2 = g2.loso.begin()->second.pmf;
  CHECK((p1 - p2).abs().maxCoeff() == 0.0);
}

}  // TEST_SUITE
