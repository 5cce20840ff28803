#pragma once

#include <map>
#include <string>
#include <vector>

#include "infogaze/baselines.hpp"
#include "infogaze/calibration.hpp"
#include "infogaze/io.hpp"
#include "infogaze/report.hpp"

namespace infogaze {

struct FittedModel {
  std::string model_id;
  CalibrationFit fit;
  std::map<std::string, Grid> rescaled;           // per image, [0,1]
  std::map<std::string, DensityGrid> densities;   // calibrated, per image
};

// Everything a run needs: dataset, baselines and (optionally) fitted models.
struct PipelineContext {
  RunConfig cfg;
  Dataset dataset;
  HistogramBaseline baseline;
  std::map<std::string, DensityGrid> prior;  // per-image LOIO baseline density
  GoldStandard gold;
  double baseline_ll = 0.0;  // held-out LOIO estimate
  double gold_ll = 0.0;      // subject-balanced LOSO estimate
  std::vector<FittedModel> models;
};

// Loads the dataset for the given models (all configured models when the
// list is empty), fits both baselines, and calibrates every model at the
// configured stage. `fit_models = false` skips calibration.
PipelineContext prepare_pipeline(const RunConfig& cfg, std::vector<std::string> model_ids,
                                 bool fit_models);

FittedModel calibrate_model(const RunConfig& cfg, const Dataset& dataset,
                            const std::string& model_id, Stage stage);

OptimOptions optimizer_options(const RunConfig& cfg);

// Sample-mean LL of a per-image density on that image's fixations.
double model_ll_on_image(const DensityGrid& density, const Dataset& d,
                         const std::string& image_id);

// Fixation-weighted dataset LL of a per-image density family.
double model_ll_dataset(const std::map<std::string, DensityGrid>& densities,
                        const Dataset& d);

// The named metric set of the comparison appendix for one model.
std::map<std::string, double> compute_metrics(const PipelineContext& ctx,
                                              const std::map<std::string, Grid>& score_grids,
                                              const std::map<std::string, DensityGrid>& densities,
                                              double model_ll);

}  // namespace infogaze
