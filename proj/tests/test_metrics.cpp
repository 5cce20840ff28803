#include <doctest.h>

#include <random>

#include "infogaze/metrics.hpp"
#include "infogaze/synth.hpp"
#include "oracles.hpp"

using namespace infogaze;

TEST_SUITE("metrics") {

TEST_CASE("auc basics") {
  CHECK(auc({0.9, 0.8}, {0.1, 0.2}) == 1.0);
  CHECK(auc({0.3, 0.5, 0.7}, {0.3, 0.5, 0.7}) == 0.5);
  CHECK(auc({0.3, 0.7}, {0.3, 0.5}) == doctest::Approx(0.625).epsilon(1e-15));
  CHECK_THROWS_AS(auc({}, {0.1}), Error);
}

TEST_CASE("auc equals the pairwise 2AFC oracle") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> quant(0, 4);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> fix, nonfix;
    const int nf = 1 + static_cast<int>(u(rng) * 20);
    const int nn = 1 + static_cast<int>(u(rng) * 20);
    for (int i = 0; i < nf; ++i) fix.push_back(quant(rng) / 4.0);  // force ties
    for (int i = 0; i < nn; ++i) nonfix.push_back(quant(rng) / 4.0);
    CHECK(auc(fix, nonfix) == doctest::Approx(oracles::pairwise_auc(fix, nonfix)).epsilon(1e-13));
  }
}

TEST_CASE("uniform density has chance AUC under uniform pixels") {
  std::map<std::string, Grid> grids{{"i", Grid::Constant(8, 8, 0.5)}};
  const std::vector<ImageFrame> frames{{"i", 8, 8}};
  const FixationTrain t = oracles::train_from_pixels("i", "s", {{1, 1}, {4, 6}});
  CHECK(auc_for_model(grids, {&t}, frames, {}) == 0.5);
}

TEST_CASE("half-image indicator reaches 0.75 with exhaustive pixels") {
  Grid g = Grid::Zero(4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 2; ++x) g(y, x) = 1.0;
  std::map<std::string, Grid> grids{{"i", g}};
  const std::vector<ImageFrame> frames{{"i", 4, 4}};
  std::vector<std::pair<int, int>> pts;
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 2; ++x) pts.emplace_back(x, y);
  const FixationTrain t = oracles::train_from_pixels("i", "s", pts);
  CHECK(auc_for_model(grids, {&t}, frames, {}) == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("shuffled nonfixations come from the other images") {
  Grid g(2, 2);
  g << 0.9, 0.1, 0.1, 0.1;
  std::map<std::string, Grid> grids{{"a", g}};
  const std::vector<ImageFrame> frames{{"a", 2, 2}, {"b", 2, 2}};
  const FixationTrain ta = oracles::train_from_pixels("a", "s", {{0, 0}});
  const FixationTrain tb = oracles::train_from_pixels("b", "s", {{1, 0}, {1, 1}});
  NonfixationSpec spec;
  spec.kind = NonfixKind::shuffled_fixations;
  // fix score 0.9 vs nonfix scores at (1,0) and (1,1): both 0.1
  CHECK(auc_for_model(grids, {&ta, &tb}, frames, spec) == 1.0);

  CHECK_THROWS_AS(auc_for_model(grids, {&ta}, frames, spec), Error);
}

TEST_CASE("sampled uniform nonfixations are deterministic") {
  std::map<std::string, Grid> grids{{"i", oracles::random_positive_grid(8, 8, 2)}};
  const std::vector<ImageFrame> frames{{"i", 8, 8}};
  const FixationTrain t = oracles::train_from_pixels("i", "s", {{1, 1}, {6, 3}});
  NonfixationSpec spec;
  spec.exhaustive = false;
  spec.sample_size = 500;
  spec.seed = 9;
  CHECK(auc_for_model(grids, {&t}, frames, spec) == auc_for_model(grids, {&t}, frames, spec));
}

TEST_CASE("fixation-based KL basics") {
  CHECK(kl_fixation_based({0.2, 0.4, 0.6}, {0.2, 0.4, 0.6}, {10, 1e-9}) ==
        doctest::Approx(0.0).epsilon(1e-9));
  CHECK(kl_fixation_based({0.5, 0.5}, {0.5, 0.5}, {10, 1e-9}) ==
        doctest::Approx(0.0).epsilon(1e-9));

  // two-bin hand case: fix counts (3,1), nonfix counts (1,3)
  const std::vector<double> fix{0.1, 0.1, 0.1, 0.9};
  const std::vector<double> nonfix{0.1, 0.9, 0.9, 0.9};
  CHECK(kl_fixation_based(fix, nonfix, {2, 1e-9}) ==
        doctest::Approx(0.7924812503605781).epsilon(1e-6));
}

TEST_CASE("fixation-based KL is blind to value relabeling") {
  // quantized map with 4 equally spaced values; invert and bin-permute
  const std::vector<double> levels{0.1, 0.35, 0.6, 0.85};
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> pick(0, 3);
  std::vector<double> fix, nonfix;
  for (int i = 0; i < 200; ++i) fix.push_back(levels[std::min(pick(rng), pick(rng))]);
  for (int i = 0; i < 400; ++i) nonfix.push_back(levels[pick(rng)]);

  auto invert = [&](std::vector<double> v) {
    for (double& x : v) x = 0.95 - x;  // sup(S) - S keeps the level set
    return v;
  };
  const KlSpec spec{4, 1e-9};
  const double original = kl_fixation_based(fix, nonfix, spec);
  const double inverted = kl_fixation_based(invert(fix), invert(nonfix), spec);
  CHECK(original == doctest::Approx(inverted).epsilon(1e-12));

  // arbitrary permutation of the level labels
  auto permute = [&](std::vector<double> v) {
    const std::map<double, double> perm{
        {0.1, 0.6}, {0.35, 0.1}, {0.6, 0.85}, {0.85, 0.35}};
    for (double& x : v) x = perm.at(x);
    return v;
  };
  const double permuted = kl_fixation_based(permute(fix), permute(nonfix), spec);
  CHECK(original == doctest::Approx(permuted).epsilon(1e-12));
}

TEST_CASE("image-based KL basics") {
  const DensityGrid p = normalize_to_pmf("i", oracles::random_positive_grid(3, 3, 1));
  CHECK(kl_image_based(p, p) == doctest::Approx(0.0).epsilon(1e-12));

  Grid delta = Grid::Zero(2, 2);
  delta(1, 0) = 1.0;
  const DensityGrid dd = normalize_to_pmf("i", delta);
  Grid m(2, 2);
  m << 0.4, 0.3, 0.2, 0.1;
  const DensityGrid dm = normalize_to_pmf("i", m);
  CHECK(kl_image_based(dm, dd) == doctest::Approx(-std::log2(0.2)).epsilon(1e-12));

  Grid half(2, 2);
  half << 0.5, 0.5, 0.0, 0.0;
  const DensityGrid dh = normalize_to_pmf("i", half);
  const DensityGrid du = normalize_to_pmf("i", Grid::Ones(2, 2));
  CHECK(kl_image_based(du, dh) == doctest::Approx(1.0).epsilon(1e-12));

  // support violation: model zero where reference positive
  Grid z(2, 2);
  z << 1.0, 1.0, 1.0, 0.0;
  const DensityGrid dz = normalize_to_pmf("i", z);
  CHECK_THROWS_AS(kl_image_based(dz, du), Error);
  CHECK(kl_image_based(du, dz) >= 0.0);  // reference zero is fine
}

TEST_CASE("image-based KL is positive definite") {
  for (int rep = 0; rep < 20; ++rep) {
    const DensityGrid a = normalize_to_pmf("i", oracles::random_positive_grid(4, 4, 100 + rep));
    const DensityGrid b = normalize_to_pmf("i", oracles::random_positive_grid(4, 4, 200 + rep));
    CHECK(kl_image_based(a, b) >= -1e-12);
  }
  const DensityGrid a = normalize_to_pmf("i", oracles::random_positive_grid(4, 4, 300));
  CHECK(kl_image_based(a, a) < 1e-10);
}

TEST_CASE("ellr identity holds on random triples") {
  for (int rep = 0; rep < 100; ++rep) {
    const DensityGrid p = normalize_to_pmf("i", oracles::random_positive_grid(3, 3, 3 * rep));
    const DensityGrid q1 =
        normalize_to_pmf("i", oracles::random_positive_grid(3, 3, 3 * rep + 1));
    const DensityGrid q2 =
        normalize_to_pmf("i", oracles::random_positive_grid(3, 3, 3 * rep + 2));
    const auto [lhs, rhs] = ellr_identity_check(p, q1, q2);
    CHECK(std::abs(lhs - rhs) < 1e-10);
  }
  const DensityGrid p = normalize_to_pmf("i", oracles::random_positive_grid(3, 3, 1000));
  const DensityGrid q2 = normalize_to_pmf("i", oracles::random_positive_grid(3, 3, 1001));
  const auto [l_same, r_same] = ellr_identity_check(p, q2, q2);
  CHECK(l_same == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r_same == doctest::Approx(0.0).epsilon(1e-12));
  const auto [l_self, r_self] = ellr_identity_check(p, p, q2);
  CHECK(l_self == doctest::Approx(kl_image_based(q2, p)).epsilon(1e-10));
  (void)r_self;
}

TEST_CASE("metric rescaling anchors") {
  CHECK(rescale_metric(0.6, 0.6, 0.9) == 0.0);
  CHECK(rescale_metric(0.9, 0.6, 0.9) == 1.0);
  CHECK(rescale_metric(0.75, 0.6, 0.9) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(rescale_metric(0.5, 0.7, 0.7), Error);
}

TEST_CASE("correlation basics") {
  const std::vector<double> ig{0.1, 0.5, 1.2, 2.0};
  const auto [r1, s1] = metric_correlation(ig, ig);
  CHECK(r1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s1 == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<double> neg;
  for (double v : ig) neg.push_back(-v);
  const auto [r2, s2] = metric_correlation(neg, ig);
  CHECK(r2 == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(s2 == doctest::Approx(-1.0).epsilon(1e-12));

  const auto [r3, s3] = metric_correlation({1, 3, 2, 4}, {1, 2, 3, 4});
  CHECK(s3 == doctest::Approx(0.8).epsilon(1e-12));
  (void)r3;

  CHECK_THROWS_AS(metric_correlation({1, 1, 1}, {1, 2, 3}), Error);
  CHECK_THROWS_AS(metric_correlation({1, 2}, {1, 2}), Error);
}

TEST_CASE("the ratio map maximizes the population shuffled AUC") {
  // conditional density vs prior on an 8x8 raster; candidates are random
  // positive reweightings of the same image
  const Grid prior_g = oracles::bumpy_map(8, 8, 51);
  const Grid cond_g = oracles::bumpy_map(8, 8, 52);
  const DensityGrid prior = normalize_to_pmf("i", prior_g);
  const DensityGrid cond = normalize_to_pmf("i", cond_g);
  const Grid ratio = cond.pmf / prior.pmf;

  const double best = oracles::population_auc(ratio, cond.pmf, prior.pmf);
  std::mt19937_64 rng(99);
  for (int c = 0; c < 50; ++c) {
    const Grid cand = oracles::random_positive_grid(8, 8, rng());
    CHECK(oracles::population_auc(cand, cond.pmf, prior.pmf) <= best + 1e-12);
  }
  CHECK(best > 0.5);
}

}  // TEST_SUITE
