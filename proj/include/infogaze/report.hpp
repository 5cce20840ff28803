#pragma once

#include <map>
#include <string>
#include <vector>

#include "infogaze/calibration.hpp"

namespace infogaze {

struct ModelReportRow {
  std::string model_id;
  double ll_nonlin = 0.0;
  double dll_center_bias = 0.0;
  double dll_blur = 0.0;
  double ll_final = 0.0;
  double percent_of_total = 0.0;  // 100 * ll_final / gold_ll
  double percent_explained = 0.0; // of the possible gain gold - baseline
  std::map<std::string, double> metrics_raw;
  std::map<std::string, double> metrics_rescaled;
};

struct EvaluationReport {
  double baseline_ll = 0.0;
  double gold_ll = 0.0;
  double possible_gain = 0.0;
  std::vector<ModelReportRow> rows;  // final LL descending, ties by model_id
};

struct ModelArtifacts {
  std::string model_id;
  CalibrationFit fit;
  std::map<std::string, double> metrics_raw;
  std::map<std::string, double> metrics_rescaled;
};

// Assembles the rows, checks the contribution and percentage invariants,
// and orders models deterministically.
EvaluationReport build_report(double baseline_ll, double gold_ll,
                              const std::vector<ModelArtifacts>& artifacts);

struct ReportMeta {
  std::string config_hash;
  std::uint64_t seed = 0;
};

std::string report_to_json(const EvaluationReport& r, const ReportMeta& meta = {});
std::string report_to_csv(const EvaluationReport& r);

}  // namespace infogaze
