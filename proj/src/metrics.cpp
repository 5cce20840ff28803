#include "infogaze/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace infogaze {

namespace {

// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double auc(const std::vector<double>& scores_at_fixations,
           const std::vector<double>& scores_at_nonfixations) {
  if (scores_at_fixations.empty() || scores_at_nonfixations.empty())
    throw Error(Errc::empty_list, "auc needs non-empty score lists");
  const std::size_t nf = scores_at_fixations.size();
  const std::size_t nn = scores_at_nonfixations.size();
  std::vector<double> pool;
  pool.reserve(nf + nn);
  pool.insert(pool.end(), scores_at_fixations.begin(), scores_at_fixations.end());
  pool.insert(pool.end(), scores_at_nonfixations.begin(), scores_at_nonfixations.end());
  const std::vector<double> ranks = average_ranks(pool);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < nf; ++i) rank_sum += ranks[i];
  const double u = rank_sum - 0.5 * static_cast<double>(nf) * (nf + 1);
  return u / (static_cast<double>(nf) * static_cast<double>(nn));
}

ScoreSets gather_scores(const Grid& score_grid, const ImageFrame& frame,
                        const std::vector<const FixationTrain*>& trains_on_image,
                        const std::vector<const FixationTrain*>& trains_elsewhere,
                        const std::vector<ImageFrame>& frames,
                        const NonfixationSpec& spec) {
  ScoreSets out;
  const int w = frame.width, h = frame.height;
  for (const FixationTrain* t : trains_on_image)
    for (const Fixation& f : t->fixations)
      out.fixations.push_back(score_grid(snap_pixel(f.y, h), snap_pixel(f.x, w)));

  if (spec.kind == NonfixKind::uniform_pixels) {
    if (spec.exhaustive) {
      out.nonfixations.reserve(static_cast<std::size_t>(w) * h);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out.nonfixations.push_back(score_grid(y, x));
    } else {
      std::mt19937_64 rng(spec.seed ^ fnv1a64(frame.image_id));
      std::uniform_int_distribution<int> ux(0, w - 1), uy(0, h - 1);
      for (int i = 0; i < spec.sample_size; ++i) {
        const int x = ux(rng), y = uy(rng);
        out.nonfixations.push_back(score_grid(y, x));
      }
    }
  } else {
    // Fixations on other images, mapped onto this raster by proportional
    // coordinate scaling when dimensions differ.
    for (const FixationTrain* t : trains_elsewhere) {
      const ImageFrame* src = nullptr;
      for (const auto& f : frames)
        if (f.image_id == t->image_id) src = &f;
      if (!src)
        throw Error(Errc::missing_artifact, "no frame for image '" + t->image_id + "'");
      for (const Fixation& f : t->fixations) {
        const double x = f.x * (static_cast<double>(w) / src->width);
        const double y = f.y * (static_cast<double>(h) / src->height);
        out.nonfixations.push_back(score_grid(snap_pixel(y, h), snap_pixel(x, w)));
      }
    }
  }
  return out;
}

namespace {

template <typename PerImage>
double fixation_weighted_mean(const std::map<std::string, Grid>& score_grids,
                              const std::vector<const FixationTrain*>& trains,
                              const std::vector<ImageFrame>& frames,
                              const NonfixationSpec& spec, PerImage&& per_image) {
  double weighted = 0.0;
  long total = 0;
  for (const auto& [image_id, grid] : score_grids) {
    const ImageFrame* frame = nullptr;
    for (const auto& f : frames)
      if (f.image_id == image_id) frame = &f;
    if (!frame)
      throw Error(Errc::missing_artifact, "no frame for image '" + image_id + "'");
    std::vector<const FixationTrain*> here, elsewhere;
    for (const FixationTrain* t : trains)
      (t->image_id == image_id ? here : elsewhere).push_back(t);
    if (here.empty()) continue;
    if (spec.kind == NonfixKind::shuffled_fixations && elsewhere.empty())
      throw Error(Errc::empty_list, "shuffled nonfixations need >= 2 images with fixations");
    const ScoreSets sets = gather_scores(grid, *frame, here, elsewhere, frames, spec);
    long n = 0;
    for (const FixationTrain* t : here) n += static_cast<long>(t->fixations.size());
    weighted += static_cast<double>(n) * per_image(sets);
    total += n;
  }
  if (total == 0) throw Error(Errc::empty_list, "no fixations on any scored image");
  return weighted / static_cast<double>(total);
}

}  // namespace

double auc_for_model(const std::map<std::string, Grid>& score_grids,
                     const std::vector<const FixationTrain*>& trains,
                     const std::vector<ImageFrame>& frames, const NonfixationSpec& spec) {
  return fixation_weighted_mean(score_grids, trains, frames, spec,
                                [](const ScoreSets& s) { return auc(s.fixations, s.nonfixations); });
}

double kl_fixation_based(const std::vector<double>& fix_scores,
                         const std::vector<double>& nonfix_scores, const KlSpec& spec) {
  if (fix_scores.empty() || nonfix_scores.empty())
    throw Error(Errc::empty_list, "fixation-based KL needs non-empty score lists");
  if (spec.bins < 2) throw Error(Errc::bad_config, "KL bins must be >= 2");
  if (!(spec.epsilon > 0.0)) throw Error(Errc::bad_config, "KL epsilon must be > 0");

  double lo = fix_scores[0], hi = fix_scores[0];
  for (double v : fix_scores) { lo = std::min(lo, v); hi = std::max(hi, v); }
  for (double v : nonfix_scores) { lo = std::min(lo, v); hi = std::max(hi, v); }
  const double width = (hi - lo) / spec.bins;

  auto bin_of = [&](double v) {
    if (width <= 0.0) return 0;
    const int b = static_cast<int>((v - lo) / width);
    return std::clamp(b, 0, spec.bins - 1);
  };
  std::vector<double> pf(spec.bins, spec.epsilon), pn(spec.bins, spec.epsilon);
  for (double v : fix_scores) pf[bin_of(v)] += 1.0;
  for (double v : nonfix_scores) pn[bin_of(v)] += 1.0;
  const double sf = std::accumulate(pf.begin(), pf.end(), 0.0);
  const double sn = std::accumulate(pn.begin(), pn.end(), 0.0);

  double kl = 0.0;
  for (int i = 0; i < spec.bins; ++i) {
    const double p = pf[i] / sf, q = pn[i] / sn;
    kl += p * std::log2(p / q);
  }
  return kl;
}

double kl_fixation_based_for_model(const std::map<std::string, Grid>& score_grids,
                                   const std::vector<const FixationTrain*>& trains,
                                   const std::vector<ImageFrame>& frames,
                                   const NonfixationSpec& nonfix, const KlSpec& spec) {
  return fixation_weighted_mean(
      score_grids, trains, frames, nonfix,
      [&](const ScoreSets& s) { return kl_fixation_based(s.fixations, s.nonfixations, spec); });
}

double kl_image_based(const DensityGrid& model, const DensityGrid& reference) {
  if (model.image_id != reference.image_id || model.pmf.rows() != reference.pmf.rows() ||
      model.pmf.cols() != reference.pmf.cols())
    throw Error(Errc::image_mismatch, "KL operands belong to different images");
  double kl = 0.0;
  for (Eigen::Index j = 0; j < model.pmf.cols(); ++j)
    for (Eigen::Index i = 0; i < model.pmf.rows(); ++i) {
      const double r = reference.pmf(i, j);
      if (r == 0.0) continue;
      const double m = model.pmf(i, j);
      if (!(m > 0.0))
        throw Error(Errc::support_violation,
                    "model density is zero where the reference has mass");
      kl += r * std::log2(r / m);
    }
  return kl;
}

std::pair<double, double> ellr_identity_check(const DensityGrid& p, const DensityGrid& q1,
                                              const DensityGrid& q2) {
  double lhs = 0.0;
  for (Eigen::Index j = 0; j < p.pmf.cols(); ++j)
    for (Eigen::Index i = 0; i < p.pmf.rows(); ++i) {
      const double w = p.pmf(i, j);
      if (w == 0.0) continue;
      lhs += w * std::log2(q1.pmf(i, j) / q2.pmf(i, j));
    }
  const double rhs = kl_image_based(q2, p) - kl_image_based(q1, p);
  return {lhs, rhs};
}

double rescale_metric(double value, double baseline_value, double gold_value) {
  if (gold_value == baseline_value)
    throw Error(Errc::degenerate_anchors, "gold and baseline metric values coincide");
  return (value - baseline_value) / (gold_value - baseline_value);
}

double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw Error(Errc::bad_config, "correlation needs two equally sized vectors");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0)
    throw Error(Errc::constant_vector, "correlation undefined for a constant vector");
  return sxy / std::sqrt(sxx * syy);
}

double spearman_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw Error(Errc::bad_config, "correlation needs two equally sized vectors");
  return pearson_correlation(average_ranks(x), average_ranks(y));
}

std::pair<double, double> metric_correlation(const std::vector<double>& metric_values,
                                             const std::vector<double>& info_gain_explained) {
  if (metric_values.size() < 3)
    throw Error(Errc::bad_config, "metric correlations need >= 3 models");
  return {pearson_correlation(metric_values, info_gain_explained),
          spearman_correlation(metric_values, info_gain_explained)};
}

}  // namespace infogaze
