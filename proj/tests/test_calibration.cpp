#include <doctest.h>

#include <random>

#include "infogaze/calibration.hpp"
#include "infogaze/metrics.hpp"
#include "infogaze/synth.hpp"
#include "oracles.hpp"

using namespace infogaze;

namespace {

// Rescaled single-model dataset on synthetic frames: fixations drawn from
// a transform of the map itself.
struct SynthCalib {
  std::vector<ImageFrame> frames;
  std::vector<SaliencyMap> maps;
  std::vector<FixationTrain> trains;
  std::vector<const FixationTrain*> train_ptrs;

  CalibData data() const { return make_calib_data(maps, frames, train_ptrs); }
};

SynthCalib make_synth(int n_images, int size, int fixations_per_image, double exponent,
                      std::uint64_t seed, bool center_biased = false) {
  SynthCalib s;
  for (int i = 0; i < n_images; ++i) {
    const std::string id = "img" + std::to_string(i);
    s.frames.push_back({id, size, size});
    Grid m = oracles::bumpy_map(size, size, seed + i);
    m = (m - m.minCoeff()) / (m.maxCoeff() - m.minCoeff());
    s.maps.push_back({id, "model", m});

    Grid gen = m.pow(exponent);
    if (center_biased) {
      const double c = (size - 1) / 2.0;
      for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
          const double d2 = ((x - c) * (x - c) + (y - c) * (y - c)) / (2.0 * c * c);
          gen(y, x) *= std::exp(-2.0 * d2);
        }
    }
    const DensityGrid pmf = normalize_to_pmf(id, gen);
    for (auto& t : sample_spatial(s.frames.back(), pmf, 1, fixations_per_image, seed + 77 + i)) {
      t.subject_id = "s" + std::to_string(i);
      s.trains.push_back(std::move(t));
    }
  }
  for (const auto& t : s.trains) s.train_ptrs.push_back(&t);
  return s;
}

}  // namespace

TEST_SUITE("calibration") {

TEST_CASE("global_rescale preserves per-image contrast") {
  std::vector<SaliencyMap> maps;
  Grid a(1, 2), b(1, 2);
  a << 0.0, 2.0;
  b << 1.0, 2.0;
  maps.push_back({"a", "m", a});
  maps.push_back({"b", "m", b});
  global_rescale(maps);
  CHECK(maps[0].values(0, 0) == doctest::Approx(0.0));
  CHECK(maps[0].values(0, 1) == doctest::Approx(1.0));
  CHECK(maps[1].values(0, 0) == doctest::Approx(0.5));
  CHECK(maps[1].values(0, 1) == doctest::Approx(1.0));

  std::vector<SaliencyMap> one;
  Grid c(1, 3);
  c << 0.0, 0.25, 1.0;
  one.push_back({"a", "m", c});
  global_rescale(one);
  CHECK((one[0].values - c).abs().maxCoeff() == 0.0);

  std::vector<SaliencyMap> flat;
  flat.push_back({"a", "m", Grid::Constant(2, 2, 0.7)});
  CHECK_THROWS_AS(global_rescale(flat), Error);
}

TEST_CASE("apply_nonlinearity interpolates the knots") {
  const Grid in = oracles::random_positive_grid(4, 4, 9) / 1.0001;  // keep in [0,1]
  const PiecewiseLinear ident = PiecewiseLinear::identity(kNonlinKnots);
  CHECK((apply_nonlinearity(in, ident) - (in + kValueFloor)).abs().maxCoeff() < 1e-12);

  const PiecewiseLinear c = PiecewiseLinear::constant(kNonlinKnots, 0.4);
  CHECK((apply_nonlinearity(in, c) - 0.4).abs().maxCoeff() < 1e-15);

  PiecewiseLinear three;
  three.y.resize(3);
  three.y << 0.1, 0.2, 0.8;
  Grid probe(1, 1);
  probe << 0.75;
  CHECK(apply_nonlinearity(probe, three)(0, 0) == doctest::Approx(0.5).epsilon(1e-12));

  Grid bad(1, 1);
  bad << 1.5;
  CHECK_THROWS_AS(apply_nonlinearity(bad, ident), Error);
}

TEST_CASE("center_bias_weight on a 5x5 frame matches the direct formula") {
  const ImageFrame frame{"i", 5, 5};
  CenterBias flat{PiecewiseLinear::constant(kCenterBiasKnots, 1.0), 1.0};
  CHECK((center_bias_weight(frame, flat) - 1.0).abs().maxCoeff() < 1e-15);

  CenterBias falling{PiecewiseLinear::identity(kCenterBiasKnots), 1.0};
  falling.profile.y = falling.profile.y.reverse().eval();  // high at center
  const Grid wfall = center_bias_weight(frame, falling);
  CHECK(wfall(2, 2) > wfall(0, 0));

  CenterBias cb{PiecewiseLinear::identity(kCenterBiasKnots), 4.0};
  const Grid got = center_bias_weight(frame, cb);
  const double dmax = std::sqrt(2.0 * 2.0 + 4.0 * 2.0 * 2.0);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) {
      const double d = std::sqrt((x - 2.0) * (x - 2.0) + 4.0 * (y - 2.0) * (y - 2.0)) / dmax;
      CHECK(got(y, x) == doctest::Approx(cb.profile(d)).epsilon(1e-12));
    }
}

TEST_CASE("build_model_density neutral factors change nothing") {
  const ImageFrame frame{"i", 6, 6};
  const SaliencyMap map{"i", "m", oracles::random_positive_grid(6, 6, 21) / 1.0001};

  CalibrationParams nl;
  nl.stage = Stage::nonlin;
  nl.nonlinearity = PiecewiseLinear::identity(kNonlinKnots);
  const DensityGrid d1 = build_model_density(map, nl, frame);

  CalibrationParams cb = nl;
  cb.stage = Stage::nonlin_cb;
  cb.center_bias = CenterBias{PiecewiseLinear::constant(kCenterBiasKnots, 1.0), 1.0};
  const DensityGrid d2 = build_model_density(map, cb, frame);
  CHECK((d1.pmf - d2.pmf).abs().maxCoeff() < 1e-12);

  CalibrationParams bl = cb;
  bl.stage = Stage::nonlin_cb_blur;
  bl.blur_sigma = 0.0;
  const DensityGrid d3 = build_model_density(map, bl, frame);
  CHECK((d2.pmf - d3.pmf).abs().maxCoeff() == 0.0);

  // uniform map + identity nonlinearity -> uniform density
  const SaliencyMap unif{"i", "m", Grid::Constant(6, 6, 0.5)};
  const DensityGrid du = build_model_density(unif, nl, frame);
  CHECK((du.pmf - 1.0 / 36.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("objective gradient matches central finite differences") {
  const SynthCalib s = make_synth(2, 16, 300, 1.0, 42, true);
  const CalibData data = s.data();
  const CalibrationObjective obj(data, Stage::nonlin_cb_blur);

  std::mt19937_64 rng(4242);
  std::normal_distribution<double> jitter(0.0, 0.05);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::VectorXd theta = obj.init();
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) += jitter(rng);
    theta(theta.size() - 1) = std::log(1.1) + 0.3 * jitter(rng);  // keep 4*sigma off integers

    Eigen::VectorXd analytic;
    obj.eval(theta, &analytic);
    const Eigen::VectorXd numeric = oracles::central_diff(
        [&](const Eigen::VectorXd& x) { return obj.eval(x, nullptr); }, theta, 1e-5);
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      const double denom = std::max({0.1, std::abs(analytic(i)), std::abs(numeric(i))});
      CHECK(std::abs(analytic(i) - numeric(i)) / denom < 1e-4);
    }
  }
}

TEST_CASE("optimization beats the identity start and is deterministic") {
  const SynthCalib s = make_synth(2, 16, 400, 2.0, 7);
  const CalibData data = s.data();
  const CalibrationObjective obj(data, Stage::nonlin);
  const double ll_identity = -obj.eval(obj.init(), nullptr);

  const CalibrationFit fit = optimize_calibration(data, Stage::nonlin);
  CHECK(fit.ll_bits >= ll_identity - 1e-9);

  const CalibrationFit again = optimize_calibration(data, Stage::nonlin);
  CHECK(fit.ll_bits == again.ll_bits);
  CHECK((fit.params.nonlinearity.y - again.params.nonlinearity.y).norm() == 0.0);

  // monotone knots
  for (int i = 1; i < kNonlinKnots; ++i)
    CHECK(fit.params.nonlinearity.y(i) >= fit.params.nonlinearity.y(i - 1));
}

TEST_CASE("square-map fixations are recovered by the nonlinearity stage") {
  const SynthCalib s = make_synth(3, 24, 4000, 2.0, 31);
  const CalibData data = s.data();
  const CalibrationFit fit = optimize_calibration(data, Stage::nonlin);

  // analytic square model
  double weighted = 0.0;
  long n = 0;
  for (std::size_t i = 0; i < s.maps.size(); ++i) {
    const DensityGrid sq = normalize_to_pmf(s.maps[i].image_id, s.maps[i].values.square() + 1e-12);
    std::vector<const FixationTrain*> ts;
    for (const auto* t : s.train_ptrs)
      if (t->image_id == s.maps[i].image_id) ts.push_back(t);
    long m = 0;
    for (const auto* t : ts) m += static_cast<long>(t->fixations.size());
    weighted += static_cast<double>(m) * log_likelihood_bits(sq, ts);
    n += m;
  }
  const double ll_square = weighted / n;
  CHECK(std::abs(fit.ll_bits - ll_square) < 0.05);
}

TEST_CASE("stage upgrades never lose likelihood") {
  const SynthCalib s = make_synth(2, 16, 500, 1.5, 13, true);
  const CalibData data = s.data();
  const double a = optimize_calibration(data, Stage::nonlin).ll_bits;
  const double b = optimize_calibration(data, Stage::nonlin_cb).ll_bits;
  const double c = optimize_calibration(data, Stage::nonlin_cb_blur).ll_bits;
  CHECK(b >= a - 1e-6);
  CHECK(c >= b - 1e-6);
}

TEST_CASE("contribution breakdown recovers neutral factors") {
  const SynthCalib s = make_synth(2, 16, 3000, 1.0, 17);
  const ContributionBreakdown br = contribution_breakdown(s.data());
  CHECK(br.dll_center_bias < 0.02);
  CHECK(br.dll_blur < 0.02);
  CHECK(br.dll_center_bias >= -1e-6);
  CHECK(br.dll_blur >= -1e-6);
}

TEST_CASE("center-biased generator shows up in the breakdown") {
  // flat map x strongly center-biased generator: the bias factor carries
  // all the signal the nonlinearity cannot express.
  SynthCalib s;
  const int size = 24;
  for (int i = 0; i < 2; ++i) {
    const std::string id = "img" + std::to_string(i);
    s.frames.push_back({id, size, size});
    Grid m = oracles::random_positive_grid(size, size, 900 + i);  // no spatial structure
    m = (m - m.minCoeff()) / (m.maxCoeff() - m.minCoeff());
    s.maps.push_back({id, "model", m});
    Grid gen(size, size);
    const double c = (size - 1) / 2.0;
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double d2 = ((x - c) * (x - c) + (y - c) * (y - c)) / (c * c);
        gen(y, x) = std::exp(-2.5 * d2);  // > 2:1 center:edge ratio
      }
    const DensityGrid pmf = normalize_to_pmf(id, gen);
    for (auto& t : sample_spatial(s.frames.back(), pmf, 1, 2500, 400 + i)) {
      t.subject_id = "s" + std::to_string(i);
      s.trains.push_back(std::move(t));
    }
  }
  for (const auto& t : s.trains) s.train_ptrs.push_back(&t);
  const ContributionBreakdown br = contribution_breakdown(s.data());
  CHECK(br.dll_center_bias > 0.2);
}

TEST_CASE("monotone nonlinearity preserves AUC but moves likelihood") {
  const SynthCalib s = make_synth(2, 16, 800, 3.0, 23);
  PiecewiseLinear cube;
  cube.y.resize(kNonlinKnots);
  for (int i = 0; i < kNonlinKnots; ++i) {
    const double x = static_cast<double>(i) / (kNonlinKnots - 1);
    cube.y(i) = kValueFloor + x * x * x;  // strictly increasing
  }

  std::map<std::string, Grid> raw, transformed;
  std::map<std::string, DensityGrid> raw_d, trans_d;
  for (const auto& m : s.maps) {
    raw.emplace(m.image_id, m.values);
    transformed.emplace(m.image_id, apply_nonlinearity(m.values, cube));
    raw_d.emplace(m.image_id, normalize_to_pmf(m.image_id, m.values + kValueFloor));
    trans_d.emplace(m.image_id,
                    normalize_to_pmf(m.image_id, apply_nonlinearity(m.values, cube)));
  }
  const NonfixationSpec unif;
  CHECK(auc_for_model(raw, s.train_ptrs, s.frames, unif) ==
        doctest::Approx(auc_for_model(transformed, s.train_ptrs, s.frames, unif))
            .epsilon(1e-12));

  double ll_raw = 0.0, ll_trans = 0.0;
  long n = 0;
  for (const auto& m : s.maps) {
    std::vector<const FixationTrain*> ts;
    for (const auto* t : s.train_ptrs)
      if (t->image_id == m.image_id) ts.push_back(t);
    long c = 0;
    for (const auto* t : ts) c += static_cast<long>(t->fixations.size());
    ll_raw += c * log_likelihood_bits(raw_d.at(m.image_id), ts);
    ll_trans += c * log_likelihood_bits(trans_d.at(m.image_id), ts);
    n += c;
  }
  CHECK(std::abs(ll_raw - ll_trans) / n > 0.1);
}

}  // TEST_SUITE
