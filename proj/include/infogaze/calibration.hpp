#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "infogaze/density.hpp"
#include "infogaze/optim.hpp"
#include "infogaze/types.hpp"

namespace infogaze {

inline constexpr int kNonlinKnots = 20;
inline constexpr int kCenterBiasKnots = 12;
inline constexpr double kValueFloor = 1e-6;  // keeps densities strictly positive

// Continuous piecewise-linear function with equidistant knots on [0, 1].
struct PiecewiseLinear {
  Eigen::VectorXd y;

  int knots() const { return static_cast<int>(y.size()); }
  double knot_spacing() const { return 1.0 / (knots() - 1); }

  double operator()(double v) const;
  double slope_at(double v) const;

  static PiecewiseLinear identity(int knots, double floor = kValueFloor);
  static PiecewiseLinear constant(int knots, double value);
};

struct CenterBias {
  PiecewiseLinear profile;  // 12 knots over normalized distance [0, 1]
  double alpha = 1.0;       // eccentricity weight on the vertical axis
};

enum class Stage { nonlin, nonlin_cb, nonlin_cb_blur };

std::string stage_name(Stage s);
Stage parse_stage(const std::string& name);

struct CalibrationParams {
  Stage stage = Stage::nonlin;
  PiecewiseLinear nonlinearity;          // 20 knots
  std::optional<CenterBias> center_bias; // present iff stage includes cb
  std::optional<double> blur_sigma;      // present iff stage includes blur
};

// Affine rescale of one model's maps to [0, 1] using the min/max over all
// images at once, preserving per-image contrast.
void global_rescale(std::vector<SaliencyMap>& maps);

// Pointwise interpolation of the knots; input values must lie in [0, 1].
Grid apply_nonlinearity(const Grid& map01, const PiecewiseLinear& f);

// Per-pixel profile(d) with d = sqrt(dx^2 + alpha*dy^2) / d_max measured
// from the frame center ((W-1)/2, (H-1)/2) and d_max the largest
// unnormalized distance over the frame.
Grid center_bias_weight(const ImageFrame& frame, const CenterBias& cb);

// blur (if staged; clamped back to [0,1]) -> nonlinearity -> center-bias
// weighting -> per-image normalization.
DensityGrid build_model_density(const SaliencyMap& map, const CalibrationParams& params,
                                const ImageFrame& frame);

// One image of the calibration problem: rescaled map plus snapped fixations.
struct CalibImage {
  ImageFrame frame;
  Grid map01;
  std::vector<std::pair<int, int>> fix;  // (px, py)
};

struct CalibData {
  std::vector<CalibImage> images;
  long total_fixations = 0;
};

CalibData make_calib_data(const std::vector<SaliencyMap>& maps,
                          const std::vector<ImageFrame>& frames,
                          const std::vector<const FixationTrain*>& trains);

// Negative mean log-likelihood (bits/fixation) of the calibrated density as
// a smooth function of the unconstrained parameter vector.
//
// Layout: u[0..19] with y_i = floor + sum_{j<=i} u_j^2 (monotone by
// construction); then, per stage, v[0..11] with cb_i = floor + exp(v_i),
// a with alpha = exp(a), and s with sigma = exp(s).
class CalibrationObjective {
 public:
  CalibrationObjective(const CalibData& data, Stage stage);

  int dim() const;
  Eigen::VectorXd init() const;  // identity nonlinearity, flat bias, alpha 1

  // Returns the objective value; writes the analytic gradient if grad != nullptr.
  double eval(const Eigen::VectorXd& theta, Eigen::VectorXd* grad) const;

  CalibrationParams unpack(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd pack(const CalibrationParams& params) const;

  Stage stage() const { return stage_; }

 private:
  const CalibData* data_;
  Stage stage_;
};

struct CalibrationFit {
  CalibrationParams params;
  double ll_bits = 0.0;          // achieved LL at the requested stage
  double ll_nonlin = 0.0;        // stage-1 LL
  double dll_center_bias = 0.0;  // successive stage improvements
  double dll_blur = 0.0;
  int iterations = 0;
};

// Joint maximization of bits/fixation over the stage's parameters. Stages
// are optimized progressively (each warm-started from the previous optimum
// with the new factor initialized neutrally), so achieved LL is
// nondecreasing in the stage.
CalibrationFit optimize_calibration(const CalibData& data, Stage stage,
                                    const OptimOptions& opts = {});

// Stage-1 LL and the successive center-bias / blur improvements.
struct ContributionBreakdown {
  double ll_nonlin = 0.0;
  double dll_center_bias = 0.0;
  double dll_blur = 0.0;
};
ContributionBreakdown contribution_breakdown(const CalibData& data,
                                             const OptimOptions& opts = {});

}  // namespace infogaze
