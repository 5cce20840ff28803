#include "infogaze/maps.hpp"

#include <cmath>
#include <limits>

namespace infogaze {

namespace {

void check_same_image(const DensityGrid& a, const DensityGrid& b) {
  if (a.image_id != b.image_id || a.pmf.rows() != b.pmf.rows() ||
      a.pmf.cols() != b.pmf.cols())
    throw Error(Errc::image_mismatch, "density grids belong to different images");
}

}  // namespace

Grid ratio_map(const DensityGrid& model, const DensityGrid& prior) {
  check_same_image(model, prior);
  if ((prior.pmf <= 0.0).any())
    throw Error(Errc::zero_prior, "prior must be strictly positive");
  return model.pmf / prior.pmf;
}

InfoGainMap info_gain_map(const DensityGrid& gold, const DensityGrid& model,
                          const DensityGrid& prior) {
  check_same_image(gold, model);
  check_same_image(gold, prior);
  Grid out(gold.pmf.rows(), gold.pmf.cols());
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      const double g = gold.pmf(i, j);
      if (g == 0.0) {
        out(i, j) = 0.0;
        continue;
      }
      const double m = model.pmf(i, j), p = prior.pmf(i, j);
      if (!(m > 0.0) || !(p > 0.0))
        throw Error(Errc::support_violation,
                    "model and prior must be positive where gold has mass");
      out(i, j) = g * std::log2(m / p);
    }
  return {gold.image_id, std::move(out)};
}

InfoGainMap info_gain_diff_map(const DensityGrid& gold, const DensityGrid& model) {
  check_same_image(gold, model);
  Grid out(gold.pmf.rows(), gold.pmf.cols());
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      const double g = gold.pmf(i, j);
      if (g == 0.0) {
        out(i, j) = 0.0;
        continue;
      }
      const double m = model.pmf(i, j);
      if (!(m > 0.0))
        throw Error(Errc::support_violation, "model must be positive where gold has mass");
      out(i, j) = g * std::log2(m / g);
    }
  return {gold.image_id, std::move(out)};
}

std::vector<ScatterPoint> scatter_data(const std::vector<PerImageLl>& per_image) {
  std::vector<ScatterPoint> out;
  out.reserve(per_image.size());
  for (const PerImageLl& row : per_image) {
    ScatterPoint pt;
    pt.image_id = row.image_id;
    pt.possible_gain_bits = row.gold_ll - row.baseline_ll;
    if (pt.possible_gain_bits > 0.0) {
      pt.explained_percent = percent_explained(row.model_ll, row.baseline_ll, row.gold_ll);
    } else {
      pt.degenerate = true;
      pt.explained_percent = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace infogaze
