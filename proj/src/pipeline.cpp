#include "infogaze/pipeline.hpp"

#include <cmath>

#include "infogaze/metrics.hpp"

namespace infogaze {

OptimOptions optimizer_options(const RunConfig& cfg) {
  OptimOptions o;
  o.max_iter = cfg.max_iter;
  o.rel_tol = cfg.tolerance;
  return o;
}

FittedModel calibrate_model(const RunConfig& cfg, const Dataset& dataset,
                            const std::string& model_id, Stage stage) {
  std::vector<SaliencyMap> maps;
  for (const auto& [key, m] : dataset.maps)
    if (key.first == model_id) maps.push_back(m);
  if (maps.empty())
    throw Error(Errc::missing_map, "no maps loaded for model '" + model_id + "'");
  global_rescale(maps);

  std::vector<const FixationTrain*> trains;
  for (const auto& t : dataset.trains) trains.push_back(&t);
  const CalibData data = make_calib_data(maps, dataset.frames, trains);

  FittedModel out;
  out.model_id = model_id;
  out.fit = optimize_calibration(data, stage, optimizer_options(cfg));
  for (const auto& m : maps) {
    out.rescaled.emplace(m.image_id, m.values);
    out.densities.emplace(m.image_id,
                          build_model_density(m, out.fit.params, dataset.frame(m.image_id)));
  }
  return out;
}

PipelineContext prepare_pipeline(const RunConfig& cfg, std::vector<std::string> model_ids,
                                 bool fit_models) {
  if (model_ids.empty())
    for (const auto& m : cfg.models) model_ids.push_back(m.model_id);

  PipelineContext ctx;
  ctx.cfg = cfg;
  ctx.dataset = load_dataset(cfg, model_ids);

  ctx.baseline = fit_histogram_baseline(ctx.dataset, cfg.baseline_bin_grid,
                                        cfg.baseline_lambda_grid);
  ctx.baseline_ll = ctx.baseline.heldout_bits_per_fix;
  for (const auto& frame : ctx.dataset.frames)
    ctx.prior.emplace(frame.image_id,
                      histogram_loio_density(ctx.dataset, ctx.baseline, frame.image_id));

  const std::vector<double> sigma_grid =
      cfg.gold_sigma_grid.empty() ? GoldGrids().sigma_grid : cfg.gold_sigma_grid;
  const int max_folds = static_cast<int>(ctx.dataset.subject_ids().size());
  ctx.gold = fit_gold_standard(ctx.dataset, sigma_grid, std::min(cfg.gold_folds, max_folds),
                               cfg.seed);
  ctx.gold_ll = gold_standard_ll(ctx.gold, ctx.dataset);

  if (fit_models) {
    ctx.models.resize(model_ids.size());
    parallel_for(static_cast<int>(model_ids.size()), cfg.jobs, [&](int i) {
      ctx.models[i] = calibrate_model(cfg, ctx.dataset, model_ids[i], cfg.stage);
    });
  }
  return ctx;
}

double model_ll_on_image(const DensityGrid& density, const Dataset& d,
                         const std::string& image_id) {
  return log_likelihood_bits(density, d.trains_for_image(image_id));
}

double model_ll_dataset(const std::map<std::string, DensityGrid>& densities, const Dataset& d) {
  double weighted = 0.0;
  long total = 0;
  for (const auto& [image_id, density] : densities) {
    const auto trains = d.trains_for_image(image_id);
    long n = 0;
    for (const auto* t : trains) n += static_cast<long>(t->fixations.size());
    if (n == 0) continue;
    weighted += static_cast<double>(n) * log_likelihood_bits(density, trains);
    total += n;
  }
  if (total == 0) throw Error(Errc::empty_points, "no fixations to evaluate");
  return weighted / static_cast<double>(total);
}

std::map<std::string, double> compute_metrics(const PipelineContext& ctx,
                                              const std::map<std::string, Grid>& score_grids,
                                              const std::map<std::string, DensityGrid>& densities,
                                              double model_ll) {
  std::vector<const FixationTrain*> trains;
  for (const auto& t : ctx.dataset.trains) trains.push_back(&t);

  NonfixationSpec uniform;
  uniform.kind = NonfixKind::uniform_pixels;
  uniform.exhaustive = ctx.cfg.auc_exhaustive;
  uniform.sample_size = ctx.cfg.auc_sample_size;
  uniform.seed = ctx.cfg.seed;
  NonfixationSpec shuffled = uniform;
  shuffled.kind = NonfixKind::shuffled_fixations;

  const KlSpec kl{ctx.cfg.kl_bins, ctx.cfg.kl_epsilon};

  std::map<std::string, double> out;
  out["ll_bits"] = model_ll;
  out["auc_uniform"] = auc_for_model(score_grids, trains, ctx.dataset.frames, uniform);
  out["auc_shuffled"] = auc_for_model(score_grids, trains, ctx.dataset.frames, shuffled);
  out["kl_fixation"] =
      kl_fixation_based_for_model(score_grids, trains, ctx.dataset.frames, uniform, kl);

  // Image-based KL against the pooled gold reference, mean over images.
  double kl_sum = 0.0;
  int kl_n = 0;
  for (const auto& [image_id, density] : densities) {
    auto it = ctx.gold.pooled.find(image_id);
    if (it == ctx.gold.pooled.end())
      throw Error(Errc::missing_grid, "no pooled gold density for image '" + image_id + "'");
    kl_sum += kl_image_based(density, it->second);
    ++kl_n;
  }
  out["kl_image"] = kl_n > 0 ? kl_sum / kl_n : 0.0;
  return out;
}

}  // namespace infogaze
