#include "infogaze/density.hpp"

#include <cmath>

namespace infogaze {

namespace {

// Reflect an arbitrary index into [0, n-1], repeating the edge sample
// (... 2 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...).
inline int reflect_index(int i, int n) {
  const int period = 2 * n;
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

Grid convolve_separable(const Grid& g, const Eigen::VectorXd& taps, int radius) {
  const int h = static_cast<int>(g.rows());
  const int w = static_cast<int>(g.cols());
  Grid rows(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += taps(k + radius) * g(y, reflect_index(x - k, w));
      rows(y, x) = acc;
    }
  Grid out(h, w);
  for (int x = 0; x < w; ++x)
    for (int y = 0; y < h; ++y) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += taps(k + radius) * rows(reflect_index(y - k, h), x);
      out(y, x) = acc;
    }
  return out;
}

}  // namespace

GaussianTaps gaussian_taps(double sigma) {
  if (sigma < 0.0) throw Error(Errc::negative_sigma, "sigma must be >= 0");
  GaussianTaps t;
  t.radius = static_cast<int>(std::floor(4.0 * sigma));
  t.weights.resize(2 * t.radius + 1);
  for (int k = -t.radius; k <= t.radius; ++k)
    t.weights(k + t.radius) = std::exp(-0.5 * k * k / (sigma * sigma));
  if (t.radius == 0) t.weights(0) = 1.0;
  t.weights /= t.weights.sum();
  return t;
}

DensityGrid normalize_to_pmf(const std::string& image_id, const Grid& values) {
  if (!values.isFinite().all())
    throw Error(Errc::non_finite, "grid contains non-finite values");
  if ((values < 0.0).any())
    throw Error(Errc::negative_value, "grid contains negative values");
  const double total = values.sum();
  if (total <= 0.0) throw Error(Errc::all_zero, "grid has zero total mass");
  return DensityGrid{image_id, values / total};
}

Grid gaussian_blur(const Grid& g, double sigma) {
  if (sigma < 0.0) throw Error(Errc::negative_sigma, "sigma must be >= 0");
  if (sigma == 0.0) return g;
  const GaussianTaps t = gaussian_taps(sigma);
  if (t.radius == 0) return g;
  return convolve_separable(g, t.weights, t.radius);
}

Grid gaussian_blur_dsigma(const Grid& g, double sigma) {
  if (sigma <= 0.0) return Grid::Zero(g.rows(), g.cols());
  const GaussianTaps t = gaussian_taps(sigma);
  if (t.radius == 0) return Grid::Zero(g.rows(), g.cols());
  // d w_k / d sigma = w_k * (k^2 - sum_j w_j j^2) / sigma^3
  Eigen::VectorXd dtaps(t.weights.size());
  double m2 = 0.0;
  for (int k = -t.radius; k <= t.radius; ++k)
    m2 += t.weights(k + t.radius) * k * k;
  const double s3 = sigma * sigma * sigma;
  for (int k = -t.radius; k <= t.radius; ++k)
    dtaps(k + t.radius) = t.weights(k + t.radius) * (k * k - m2) / s3;
  // d(Kx Ky g)/dsigma = dKx(Ky g) + Kx(dKy g); both sides share the taps.
  const Grid ky = convolve_separable(g, t.weights, t.radius);
  const Grid dky = convolve_separable(g, dtaps, t.radius);
  // convolve_separable applies the same taps to rows and columns, so build
  // the two mixed passes explicitly.
  const int h = static_cast<int>(g.rows());
  const int w = static_cast<int>(g.cols());
  auto pass_cols = [&](const Grid& in, const Eigen::VectorXd& taps) {
    Grid out(h, w);
    for (int x = 0; x < w; ++x)
      for (int y = 0; y < h; ++y) {
        double acc = 0.0;
        for (int k = -t.radius; k <= t.radius; ++k)
          acc += taps(k + t.radius) * in(reflect_index(y - k, h), x);
        out(y, x) = acc;
      }
    return out;
  };
  auto pass_rows = [&](const Grid& in, const Eigen::VectorXd& taps) {
    Grid out(h, w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int k = -t.radius; k <= t.radius; ++k)
          acc += taps(k + t.radius) * in(y, reflect_index(x - k, w));
        out(y, x) = acc;
      }
    return out;
  };
  const Grid a = pass_cols(pass_rows(g, dtaps), t.weights);
  const Grid b = pass_cols(pass_rows(g, t.weights), dtaps);
  return a + b;
}

DensityGrid kde_density(const ImageFrame& frame, const std::vector<Fixation>& points,
                        const KdeSpec& spec) {
  if (points.empty()) throw Error(Errc::empty_points, "kde needs at least one point");
  if (!(spec.kernel_sigma > 0.0))
    throw Error(Errc::negative_sigma, "kde kernel_sigma must be > 0");
  const GaussianTaps t = gaussian_taps(spec.kernel_sigma);
  const int w = frame.width, h = frame.height;
  Grid acc = Grid::Zero(h, w);
  for (const Fixation& f : points) {
    const int px = snap_pixel(f.x, w);
    const int py = snap_pixel(f.y, h);
    const int x0 = std::max(0, px - t.radius), x1 = std::min(w - 1, px + t.radius);
    const int y0 = std::max(0, py - t.radius), y1 = std::min(h - 1, py + t.radius);
    double sx = 0.0, sy = 0.0;
    for (int x = x0; x <= x1; ++x) sx += t.weights(x - px + t.radius);
    for (int y = y0; y <= y1; ++y) sy += t.weights(y - py + t.radius);
    const double norm = sx * sy;  // in-frame kernel mass; renormalize per point
    for (int y = y0; y <= y1; ++y) {
      const double wy = t.weights(y - py + t.radius);
      for (int x = x0; x <= x1; ++x)
        acc(y, x) += wy * t.weights(x - px + t.radius) / norm;
    }
  }
  return normalize_to_pmf(frame.image_id, acc);
}

double log_likelihood_bits(const DensityGrid& model,
                           const std::vector<const FixationTrain*>& trains) {
  const int w = model.width(), h = model.height();
  double sum = 0.0;
  long n = 0;
  for (const FixationTrain* train : trains) {
    if (train->image_id != model.image_id)
      throw Error(Errc::image_mismatch, "train on image '" + train->image_id +
                                            "' evaluated against model of '" +
                                            model.image_id + "'");
    for (const Fixation& f : train->fixations) {
      const int px = snap_pixel(f.x, w);
      const int py = snap_pixel(f.y, h);
      const double p = model.pmf(py, px);
      if (!(p > 0.0))
        throw Error(Errc::zero_density_at_fixation,
                    "zero density at fixation (x=" + std::to_string(f.x) +
                        ", y=" + std::to_string(f.y) + ") on image '" +
                        model.image_id + "'");
      sum += std::log2(p);
      ++n;
    }
  }
  if (n == 0) throw Error(Errc::empty_points, "no fixations to evaluate");
  return sum / static_cast<double>(n) + std::log2(static_cast<double>(w) * h);
}

double log_likelihood_bits(const DensityGrid& model, const FixationTrain& train) {
  std::vector<const FixationTrain*> one{&train};
  return log_likelihood_bits(model, one);
}

double ellr(const DensityGrid& model_a, const DensityGrid& model_b,
            const std::vector<const FixationTrain*>& trains) {
  if (model_a.image_id != model_b.image_id ||
      model_a.pmf.rows() != model_b.pmf.rows() ||
      model_a.pmf.cols() != model_b.pmf.cols())
    throw Error(Errc::image_mismatch, "ellr models belong to different images");
  const int w = model_a.width(), h = model_a.height();
  double sum = 0.0;
  long n = 0;
  for (const FixationTrain* train : trains) {
    if (train->image_id != model_a.image_id)
      throw Error(Errc::image_mismatch, "train on image '" + train->image_id +
                                            "' evaluated against model of '" +
                                            model_a.image_id + "'");
    for (const Fixation& f : train->fixations) {
      const int px = snap_pixel(f.x, w);
      const int py = snap_pixel(f.y, h);
      const double pa = model_a.pmf(py, px);
      const double pb = model_b.pmf(py, px);
      if (!(pa > 0.0) || !(pb > 0.0))
        throw Error(Errc::zero_density_at_fixation,
                    "zero density at fixation (x=" + std::to_string(f.x) +
                        ", y=" + std::to_string(f.y) + ") on image '" +
                        model_a.image_id + "'");
      sum += std::log2(pa / pb);
      ++n;
    }
  }
  if (n == 0) throw Error(Errc::empty_points, "no fixations to evaluate");
  return sum / static_cast<double>(n);
}

double percent_explained(double model_ll, double baseline_ll, double gold_ll) {
  if (!(gold_ll > baseline_ll))
    throw Error(Errc::degenerate_bounds, "gold LL must exceed baseline LL");
  return 100.0 * (model_ll - baseline_ll) / (gold_ll - baseline_ll);
}

}  // namespace infogaze
