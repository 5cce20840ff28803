// Command-line front end: dataset validation, baseline fitting, model
// calibration, evaluation tables, diagnostic maps, metric comparison,
// temporal fitting and synthetic data generation.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <set>

#include "infogaze/io.hpp"
#include "infogaze/maps.hpp"
#include "infogaze/metrics.hpp"
#include "infogaze/pipeline.hpp"
#include "infogaze/report.hpp"
#include "infogaze/synth.hpp"
#include "infogaze/temporal.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace infogaze;

namespace {

struct CommonFlags {
  std::string output_dir;
  std::int64_t seed = -1;
  int jobs = 0;
};

void apply_overrides(RunConfig& cfg, const CommonFlags& flags) {
  if (!flags.output_dir.empty()) cfg.output_dir = flags.output_dir;
  if (flags.seed >= 0) cfg.seed = static_cast<std::uint64_t>(flags.seed);
  if (flags.jobs > 0) cfg.jobs = flags.jobs;
}

int run_validate(const std::string& config_path) {
  const RunConfig cfg = load_config(config_path);
  Dataset d;
  d.frames = parse_frames_csv(cfg.frames_csv);
  d.trains = parse_fixations_csv(cfg.fixations_csv);
  for (const auto& m : cfg.models)
    for (const auto& frame : d.frames) {
      const fs::path p = m.map_dir / (frame.image_id + ".smap");
      if (fs::exists(p))
        d.maps.emplace(std::make_pair(m.model_id, frame.image_id),
                       SaliencyMap{frame.image_id, m.model_id, read_map(p)});
    }
  const auto violations = validate_dataset(d);
  json out;
  out["valid"] = violations.empty();
  out["violations"] = json::array();
  for (const auto& v : violations)
    out["violations"].push_back({{"entity", v.entity}, {"rule", v.rule}});
  std::cout << out.dump(2) << "\n";
  return violations.empty() ? 0 : 2;
}

int run_baseline_histogram(const RunConfig& cfg) {
  const Dataset d = load_dataset(cfg, {});
  const HistogramBaseline b =
      fit_histogram_baseline(d, cfg.baseline_bin_grid, cfg.baseline_lambda_grid);

  std::set<std::pair<int, int>> sizes;
  for (const auto& f : d.frames) sizes.insert({f.width, f.height});
  fs::create_directories(cfg.output_dir);
  for (const auto& [w, h] : sizes) {
    const ImageFrame probe{"template", w, h};
    const fs::path p = cfg.output_dir / ("baseline_histogram_" + std::to_string(w) + "x" +
                                         std::to_string(h) + ".smap");
    write_map(p, b.density_for(probe).pmf);
  }
  json j;
  j["bins_x"] = b.bins_x;
  j["bins_y"] = b.bins_y;
  j["lambda"] = b.lambda;
  j["heldout_bits_per_fix"] = b.heldout_bits_per_fix;
  j["config_hash"] = cfg.config_hash;
  j["seed"] = cfg.seed;
  j["tool_version"] = kToolVersion;
  write_text_file(cfg.output_dir / "baseline_histogram.json", j.dump(2) + "\n");
  std::cout << "histogram baseline: bins=" << b.bins_x << " lambda=" << format_double(b.lambda)
            << " heldout_bits_per_fix=" << format_double(b.heldout_bits_per_fix) << "\n";
  return 0;
}

int run_baseline_gold(const RunConfig& cfg) {
  const Dataset d = load_dataset(cfg, {});
  const std::vector<double> sigma_grid =
      cfg.gold_sigma_grid.empty() ? GoldGrids().sigma_grid : cfg.gold_sigma_grid;
  const int folds =
      std::min<int>(cfg.gold_folds, static_cast<int>(d.subject_ids().size()));
  const GoldStandard g = fit_gold_standard(d, sigma_grid, folds, cfg.seed);
  const double loso_ll = gold_standard_ll(g, d);

  const fs::path dir = cfg.output_dir / "gold";
  fs::create_directories(dir);
  for (const auto& [key, grid] : g.loso)
    write_map(dir / (key.first + "__" + key.second + ".smap"), grid.pmf);
  for (const auto& [image, grid] : g.pooled)
    write_map(dir / (image + "__pooled.smap"), grid.pmf);

  json j;
  j["kernel_sigma"] = g.kernel_sigma;
  j["folds"] = folds;
  j["cv_heldout_bits_per_fix"] = g.heldout_bits_per_fix;
  j["loso_bits_per_fix"] = loso_ll;
  j["config_hash"] = cfg.config_hash;
  j["seed"] = cfg.seed;
  j["tool_version"] = kToolVersion;
  write_text_file(cfg.output_dir / "baseline_gold.json", j.dump(2) + "\n");
  std::cout << "gold standard: sigma=" << format_double(g.kernel_sigma)
            << " loso_bits_per_fix=" << format_double(loso_ll) << "\n";
  return 0;
}

int run_calibrate(const RunConfig& cfg, const std::string& model_id,
                  const std::string& stage_str) {
  RunConfig c = cfg;
  if (!stage_str.empty()) c.stage = parse_stage(stage_str);
  const Dataset d = load_dataset(c, {model_id});
  const FittedModel fm = calibrate_model(c, d, model_id, c.stage);

  fs::create_directories(c.output_dir);
  write_text_file(c.output_dir / ("params_" + model_id + ".json"),
                  calibration_params_to_json(fm.fit.params));
  json j;
  j["model_id"] = model_id;
  j["stage"] = stage_name(c.stage);
  j["ll_bits"] = fm.fit.ll_bits;
  j["ll_nonlin_bits"] = fm.fit.ll_nonlin;
  j["dll_center_bias_bits"] = fm.fit.dll_center_bias;
  j["dll_blur_bits"] = fm.fit.dll_blur;
  j["iterations"] = fm.fit.iterations;
  j["config_hash"] = c.config_hash;
  j["seed"] = c.seed;
  write_text_file(c.output_dir / ("calibration_" + model_id + ".json"), j.dump(2) + "\n");
  std::cout << "model " << model_id << " stage " << stage_name(c.stage)
            << ": ll=" << format_double(fm.fit.ll_bits)
            << " (nonlin " << format_double(fm.fit.ll_nonlin) << ", cb +"
            << format_double(fm.fit.dll_center_bias) << ", blur +"
            << format_double(fm.fit.dll_blur) << ")\n";
  return 0;
}

int run_eval(const RunConfig& cfg, const std::vector<std::string>& model_ids) {
  const PipelineContext ctx = prepare_pipeline(cfg, model_ids, true);

  std::vector<ModelArtifacts> artifacts;
  for (const FittedModel& fm : ctx.models) {
    ModelArtifacts a;
    a.model_id = fm.model_id;
    a.fit = fm.fit;
    artifacts.push_back(std::move(a));

    write_text_file(cfg.output_dir / ("params_" + fm.model_id + ".json"),
                    calibration_params_to_json(fm.fit.params));
    const fs::path ddir = cfg.output_dir / "densities" / fm.model_id;
    fs::create_directories(ddir);
    for (const auto& [image, density] : fm.densities)
      write_map(ddir / (image + ".smap"), density.pmf);
  }
  const EvaluationReport report = build_report(ctx.baseline_ll, ctx.gold_ll, artifacts);

  fs::create_directories(cfg.output_dir);
  write_text_file(cfg.output_dir / "report.json", report_to_json(report));
  write_text_file(cfg.output_dir / "report.csv", report_to_csv(report));
  write_meta_sidecar(cfg.output_dir / "report.csv", cfg, "eval");

  const fs::path pdir = cfg.output_dir / "densities" / "baseline";
  fs::create_directories(pdir);
  for (const auto& [image, density] : ctx.prior) write_map(pdir / (image + ".smap"), density.pmf);
  const fs::path gdir = cfg.output_dir / "densities" / "gold";
  fs::create_directories(gdir);
  for (const auto& [image, density] : ctx.gold.pooled)
    write_map(gdir / (image + ".smap"), density.pmf);

  std::cout << report_to_csv(report);
  std::cout << "anchors: baseline=" << format_double(ctx.baseline_ll)
            << " gold=" << format_double(ctx.gold_ll) << "\n";
  return 0;
}

int run_maps(const RunConfig& cfg, const std::string& model_id,
             std::vector<std::string> images) {
  const PipelineContext ctx = prepare_pipeline(cfg, {model_id}, true);
  const FittedModel& fm = ctx.models.at(0);

  if (images.empty())
    for (const auto& f : ctx.dataset.frames) images.push_back(f.image_id);

  const fs::path dir = cfg.output_dir / "maps" / model_id;
  fs::create_directories(dir);

  std::vector<PerImageLl> per_image(images.size());
  parallel_for(static_cast<int>(images.size()), cfg.jobs, [&](int i) {
    const std::string& image = images[i];
    const DensityGrid& model = fm.densities.at(image);
    const DensityGrid& prior = ctx.prior.at(image);
    auto gold_it = ctx.gold.pooled.find(image);
    if (gold_it == ctx.gold.pooled.end())
      throw Error(Errc::missing_grid, "no gold density for image '" + image + "'");
    const DensityGrid& gold = gold_it->second;

    write_map(dir / (image + "_ratio.smap"), ratio_map(model, prior));
    write_map(dir / (image + "_infogain.smap"), info_gain_map(gold, model, prior).grid);
    write_map(dir / (image + "_diff.smap"), info_gain_diff_map(gold, model).grid);

    PerImageLl row;
    row.image_id = image;
    row.model_ll = model_ll_on_image(model, ctx.dataset, image);
    row.baseline_ll = model_ll_on_image(prior, ctx.dataset, image);
    row.gold_ll = gold_standard_ll_image(ctx.gold, ctx.dataset, image);
    per_image[i] = row;
  });

  const auto scatter = scatter_data(per_image);
  std::string csv = "image_id,possible_gain_bits,explained_percent,flags\n";
  for (const auto& p : scatter) {
    csv += p.image_id + "," + format_double(p.possible_gain_bits) + ",";
    csv += p.degenerate ? "nan" : format_double(p.explained_percent);
    csv += ",";
    csv += p.degenerate ? "degenerate_possible_gain" : "";
    csv += "\n";
  }
  const fs::path scatter_path = cfg.output_dir / ("scatter_" + model_id + ".csv");
  write_text_file(scatter_path, csv);
  write_meta_sidecar(scatter_path, cfg, "maps");
  std::cout << "wrote " << scatter.size() << " scatter rows and " << 3 * images.size()
            << " map files under " << dir.string() << "\n";
  return 0;
}

int run_metrics(const RunConfig& cfg, bool raw_scores) {
  const PipelineContext ctx = prepare_pipeline(cfg, {}, true);

  // Anchor models: the LOIO histogram baseline and the pooled gold KDE.
  std::map<std::string, Grid> base_grids, gold_grids;
  std::map<std::string, DensityGrid> base_densities, gold_densities;
  for (const auto& [image, density] : ctx.prior) {
    base_grids.emplace(image, density.pmf);
    base_densities.emplace(image, density);
  }
  for (const auto& [image, density] : ctx.gold.pooled) {
    gold_grids.emplace(image, density.pmf);
    gold_densities.emplace(image, density);
  }
  const auto base_metrics = compute_metrics(ctx, base_grids, base_densities, ctx.baseline_ll);
  const auto gold_metrics = compute_metrics(ctx, gold_grids, gold_densities, ctx.gold_ll);

  std::vector<ModelArtifacts> artifacts;
  for (const FittedModel& fm : ctx.models) {
    std::map<std::string, Grid> score_grids;
    std::map<std::string, DensityGrid> densities;
    if (raw_scores) {
      for (const auto& [image, grid] : fm.rescaled) {
        score_grids.emplace(image, grid);
        densities.emplace(image, normalize_to_pmf(image, grid + kValueFloor));
      }
    } else {
      for (const auto& [image, density] : fm.densities) {
        score_grids.emplace(image, density.pmf);
        densities.emplace(image, density);
      }
    }
    std::map<std::string, DensityGrid> ll_densities = raw_scores ? densities : fm.densities;
    const double model_ll = model_ll_dataset(ll_densities, ctx.dataset);

    ModelArtifacts a;
    a.model_id = fm.model_id;
    a.fit = fm.fit;
    a.metrics_raw = compute_metrics(ctx, score_grids, densities, model_ll);
    for (const auto& [metric, value] : a.metrics_raw)
      a.metrics_rescaled[metric] =
          rescale_metric(value, base_metrics.at(metric), gold_metrics.at(metric));
    artifacts.push_back(std::move(a));
  }
  const EvaluationReport report = build_report(ctx.baseline_ll, ctx.gold_ll, artifacts);

  std::string csv = "model_id,metric_id,raw,rescaled\n";
  for (const auto& row : report.rows)
    for (const auto& [metric, value] : row.metrics_raw) {
      csv += row.model_id + "," + metric + "," + format_double(value) + "," +
             format_double(row.metrics_rescaled.at(metric)) + "\n";
    }
  fs::create_directories(cfg.output_dir);
  const fs::path metrics_path = cfg.output_dir / "metrics.csv";
  write_text_file(metrics_path, csv);
  write_meta_sidecar(metrics_path, cfg, raw_scores ? "metrics --raw" : "metrics");

  // Correlations against information gain explained need >= 3 models.
  if (report.rows.size() >= 3) {
    std::vector<double> ig;
    for (const auto& row : report.rows) ig.push_back(row.percent_explained / 100.0);
    std::string ccsv = "metric_id,pearson_r,spearman_rho\n";
    for (const auto& [metric, unused] : report.rows.front().metrics_rescaled) {
      std::vector<double> values;
      for (const auto& row : report.rows) values.push_back(row.metrics_rescaled.at(metric));
      const auto [r, rho] = metric_correlation(values, ig);
      ccsv += metric + "," + format_double(r) + "," + format_double(rho) + "\n";
      (void)unused;
    }
    const fs::path corr_path = cfg.output_dir / "correlations.csv";
    write_text_file(corr_path, ccsv);
    write_meta_sidecar(corr_path, cfg, "metrics correlations");
  }
  std::cout << csv;
  return 0;
}

int run_temporal(const RunConfig& cfg, const std::string& model_id) {
  const PipelineContext ctx = prepare_pipeline(cfg, {model_id}, true);
  const FittedModel& fm = ctx.models.at(0);

  std::vector<const FixationTrain*> trains;
  for (const auto& t : ctx.dataset.trains) trains.push_back(&t);
  const TemporalFit fit = fit_temporal(fm.densities, trains, optimizer_options(cfg));

  fs::create_directories(cfg.output_dir);
  write_text_file(cfg.output_dir / ("temporal_" + model_id + ".json"),
                  temporal_params_to_json(fit.params));
  json j;
  j["model_id"] = model_id;
  j["ll_spatial_bits"] = fit.ll_spatial;
  j["ll_temporal_bits"] = fit.ll_bits;
  j["dll_bits"] = fit.ll_bits - fit.ll_spatial;
  j["iterations"] = fit.iterations;
  j["config_hash"] = cfg.config_hash;
  j["seed"] = cfg.seed;
  write_text_file(cfg.output_dir / ("temporal_" + model_id + "_fit.json"), j.dump(2) + "\n");
  std::cout << "temporal " << model_id << ": delta=" << format_double(fit.params.delta)
            << " sigma_t=" << format_double(fit.params.sigma_t)
            << " alpha_t=" << format_double(fit.params.alpha_t)
            << " dll=" << format_double(fit.ll_bits - fit.ll_spatial) << "\n";
  return 0;
}

struct SynthArgs {
  std::string image_id = "synth0";
  int width = 64, height = 64;
  std::string pmf_path;
  int subjects = 2;
  int fixations = 100;
  double delta = -0.5, sigma_t = 10.0, alpha_t = 1.0;
  int length = 100;
  std::uint64_t seed = 0;
  std::string out_dir = "synth_out";
};

int run_synth(bool temporal_mode, const SynthArgs& a) {
  const Grid raw = read_map(a.pmf_path);
  if (raw.cols() != a.width || raw.rows() != a.height)
    throw Error(Errc::image_mismatch, "pmf file dimensions do not match --width/--height");
  const ImageFrame frame{a.image_id, a.width, a.height};
  const DensityGrid pmf = normalize_to_pmf(a.image_id, raw);

  std::vector<FixationTrain> trains;
  if (temporal_mode) {
    trains.push_back(sample_temporal(frame, pmf, {a.delta, a.sigma_t, a.alpha_t}, a.length,
                                     a.seed));
  } else {
    trains = sample_spatial(frame, pmf, a.subjects, a.fixations, a.seed);
  }
  fs::create_directories(a.out_dir);
  write_fixations_csv(fs::path(a.out_dir) / "fixations.csv", trains);
  write_frames_csv(fs::path(a.out_dir) / "frames.csv", {frame});
  json meta;
  meta["generator"] = temporal_mode ? "synth temporal" : "synth spatial";
  meta["seed"] = a.seed;
  meta["rng"] = "mt19937_64";
  meta["tool_version"] = kToolVersion;
  write_text_file(fs::path(a.out_dir) / "fixations.csv.meta.json", meta.dump(2) + "\n");
  std::cout << "wrote " << trains.size() << " trains to " << a.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"saliency maps as point processes: information-gain evaluation"};
  app.require_subcommand(1);

  std::string config_path;
  CommonFlags flags;
  std::string model_id, stage_str;
  std::vector<std::string> model_list, image_list;
  bool raw_scores = false;
  SynthArgs synth_args;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "run config JSON")->required();
    cmd->add_option("--out", flags.output_dir, "override output directory");
    cmd->add_option("--seed", flags.seed, "override seed");
    cmd->add_option("--jobs", flags.jobs, "parallel workers");
  };

  CLI::App* validate = app.add_subcommand("validate", "dataset validation report");
  add_common(validate);

  CLI::App* baseline = app.add_subcommand("baseline", "fit a reference model");
  baseline->require_subcommand(1);
  CLI::App* bh = baseline->add_subcommand("histogram", "cross-image histogram lower bound");
  add_common(bh);
  CLI::App* bg = baseline->add_subcommand("gold", "leave-one-subject-out gold standard");
  add_common(bg);

  CLI::App* calibrate = app.add_subcommand("calibrate", "fit the image-independent factors");
  add_common(calibrate);
  calibrate->add_option("--model", model_id, "model id")->required();
  calibrate->add_option("--stage", stage_str, "nonlin | cb | blur");

  CLI::App* eval = app.add_subcommand("eval", "full evaluation table");
  add_common(eval);
  eval->add_option("--models", model_list, "subset of model ids");

  CLI::App* maps_cmd = app.add_subcommand("maps", "ratio / info-gain / difference maps");
  add_common(maps_cmd);
  maps_cmd->add_option("--model", model_id, "model id")->required();
  maps_cmd->add_option("--images", image_list, "subset of image ids");

  CLI::App* metrics_cmd = app.add_subcommand("metrics", "AUC / KL table and correlations");
  add_common(metrics_cmd);
  metrics_cmd->add_flag("--raw", raw_scores, "score the raw rescaled maps");

  CLI::App* temporal_cmd = app.add_subcommand("temporal", "fit the self-excitation factor");
  add_common(temporal_cmd);
  temporal_cmd->add_option("--model", model_id, "model id")->required();

  CLI::App* synth = app.add_subcommand("synth", "sample fixation trains");
  synth->require_subcommand(1);
  auto add_synth_common = [&](CLI::App* cmd) {
    cmd->add_option("--pmf", synth_args.pmf_path, "density .smap file")->required();
    cmd->add_option("--width", synth_args.width);
    cmd->add_option("--height", synth_args.height);
    cmd->add_option("--image-id", synth_args.image_id);
    cmd->add_option("--seed", synth_args.seed);
    cmd->add_option("--out", synth_args.out_dir);
  };
  CLI::App* ss = synth->add_subcommand("spatial", "i.i.d. draws from a pmf");
  add_synth_common(ss);
  ss->add_option("--subjects", synth_args.subjects);
  ss->add_option("--fixations", synth_args.fixations);
  CLI::App* st = synth->add_subcommand("temporal", "self-excited train from a base pmf");
  add_synth_common(st);
  st->add_option("--delta", synth_args.delta);
  st->add_option("--sigma-t", synth_args.sigma_t);
  st->add_option("--alpha-t", synth_args.alpha_t);
  st->add_option("--length", synth_args.length);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return run_validate(config_path);
    if (*synth) return run_synth(st->parsed(), synth_args);

    RunConfig cfg = load_config(config_path);
    apply_overrides(cfg, flags);
    if (*bh) return run_baseline_histogram(cfg);
    if (*bg) return run_baseline_gold(cfg);
    if (*calibrate) return run_calibrate(cfg, model_id, stage_str);
    if (*eval) return run_eval(cfg, model_list);
    if (*maps_cmd) return run_maps(cfg, model_id, image_list);
    if (*metrics_cmd) return run_metrics(cfg, raw_scores);
    if (*temporal_cmd) return run_temporal(cfg, model_id);
  } catch (const Error& e) {
    json err;
    err["error"] = std::string(errc_name(e.code()));
    err["message"] = e.message();
    std::cerr << err.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    json err;
    err["error"] = "Internal";
    err["message"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
