#include "infogaze/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "infogaze/density.hpp"
#include "infogaze/io.hpp"

namespace infogaze {

using nlohmann::json;

EvaluationReport build_report(double baseline_ll, double gold_ll,
                              const std::vector<ModelArtifacts>& artifacts) {
  if (!(gold_ll > baseline_ll))
    throw Error(Errc::degenerate_bounds, "gold LL must exceed baseline LL");
  EvaluationReport r;
  r.baseline_ll = baseline_ll;
  r.gold_ll = gold_ll;
  r.possible_gain = gold_ll - baseline_ll;

  for (const ModelArtifacts& a : artifacts) {
    ModelReportRow row;
    row.model_id = a.model_id;
    row.ll_nonlin = a.fit.ll_nonlin;
    row.dll_center_bias = a.fit.dll_center_bias;
    row.dll_blur = a.fit.dll_blur;
    row.ll_final = a.fit.ll_bits;
    const double contrib_sum = row.ll_nonlin + row.dll_center_bias + row.dll_blur;
    if (std::abs(contrib_sum - row.ll_final) > 1e-9)
      throw Error(Errc::missing_artifact,
                  "contributions do not sum to the final LL for '" + a.model_id + "'");
    row.percent_of_total = 100.0 * row.ll_final / gold_ll;
    row.percent_explained = percent_explained(row.ll_final, baseline_ll, gold_ll);
    row.metrics_raw = a.metrics_raw;
    row.metrics_rescaled = a.metrics_rescaled;
    r.rows.push_back(std::move(row));
  }

  std::sort(r.rows.begin(), r.rows.end(), [](const ModelReportRow& a, const ModelReportRow& b) {
    if (a.ll_final != b.ll_final) return a.ll_final > b.ll_final;
    return a.model_id < b.model_id;
  });
  return r;
}

std::string report_to_json(const EvaluationReport& r, const ReportMeta& meta) {
  json j;
  j["meta"] = {{"tool", kToolName},
               {"version", kToolVersion},
               {"config_hash", meta.config_hash},
               {"seed", meta.seed}};
  j["anchors"] = {{"baseline_ll_bits", r.baseline_ll},
                  {"gold_ll_bits", r.gold_ll},
                  {"possible_gain_bits", r.possible_gain}};
  j["models"] = json::array();
  for (const auto& row : r.rows) {
    json m;
    m["model_id"] = row.model_id;
    m["ll_nonlin_bits"] = row.ll_nonlin;
    m["dll_center_bias_bits"] = row.dll_center_bias;
    m["dll_blur_bits"] = row.dll_blur;
    m["ll_bits"] = row.ll_final;
    m["percent_of_total"] = row.percent_of_total;
    m["percent_explained"] = row.percent_explained;
    if (!row.metrics_raw.empty()) {
      m["metrics_raw"] = row.metrics_raw;
      m["metrics_rescaled"] = row.metrics_rescaled;
    }
    j["models"].push_back(std::move(m));
  }
  return j.dump(2) + "\n";
}

std::string report_to_csv(const EvaluationReport& r) {
  std::ostringstream os;
  os << "model_id,ll_bits,ll_nonlin_bits,dll_center_bias_bits,dll_blur_bits,"
        "percent_of_total,percent_explained\n";
  for (const auto& row : r.rows)
    os << row.model_id << ',' << format_double(row.ll_final) << ','
       << format_double(row.ll_nonlin) << ',' << format_double(row.dll_center_bias) << ','
       << format_double(row.dll_blur) << ',' << format_double(row.percent_of_total) << ','
       << format_double(row.percent_explained) << '\n';
  return os.str();
}

}  // namespace infogaze
