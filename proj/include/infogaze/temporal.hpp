#pragma once

#include <map>
#include <string>
#include <vector>

#include "infogaze/density.hpp"
#include "infogaze/optim.hpp"
#include "infogaze/types.hpp"

namespace infogaze {

// Self-excitation reweighting around the previous fixation:
// factor = 1 + f(D) with f(D) = -delta * exp(-D^2 / (2 sigma_t^2)) and
// D^2 = dx^2 + alpha_t * dy^2. Negative delta excites, positive inhibits;
// delta < 1 keeps the factor positive.
struct TemporalParams {
  double delta = 0.0;
  double sigma_t = 10.0;  // pixels, > 0
  double alpha_t = 1.0;   // > 0
};

bool temporal_params_valid(const TemporalParams& p);

double temporal_factor(double dx, double dy, const TemporalParams& p);

// pmf'(x, y) proportional to factor(x - prev.x, y - prev.y) * pmf(x, y),
// renormalized. delta = 0 returns base unchanged.
DensityGrid conditional_density(const DensityGrid& base, const Fixation& prev,
                                const TemporalParams& p);

// First fixation of each train scored under the base density, later ones
// under the conditional given the immediately preceding fixation.
// bits/fixation relative to uniform, as in log_likelihood_bits.
double temporal_log_likelihood(const std::map<std::string, DensityGrid>& base_per_image,
                               const std::vector<const FixationTrain*>& trains,
                               const TemporalParams& p);

struct TemporalFit {
  TemporalParams params;
  double ll_bits = 0.0;       // achieved temporal LL
  double ll_spatial = 0.0;    // LL at delta = 0 (the spatial base)
  int iterations = 0;
};

// Joint maximization over (delta, sigma_t, alpha_t); delta < 1 via
// delta = 1 - exp(e), the scales via log-parameterization. Starts at the
// neutral point delta = 0, so the achieved LL never falls below the
// spatial LL.
TemporalFit fit_temporal(const std::map<std::string, DensityGrid>& base_per_image,
                         const std::vector<const FixationTrain*>& trains,
                         const OptimOptions& opts = {},
                         const TemporalParams& init = {});

// Negative temporal LL over the unconstrained vector (e, log sigma_t,
// log alpha_t); exposed for gradient checks.
class TemporalObjective {
 public:
  TemporalObjective(const std::map<std::string, DensityGrid>& base_per_image,
                    const std::vector<const FixationTrain*>& trains);

  double eval(const Eigen::VectorXd& theta, Eigen::VectorXd* grad) const;
  static TemporalParams unpack(const Eigen::VectorXd& theta);
  static Eigen::VectorXd pack(const TemporalParams& p);

 private:
  struct Step {
    std::size_t base_index;
    double prev_x, prev_y;  // conditioning fixation
    int px, py;             // current fixation pixel
  };
  std::vector<DensityGrid> bases_;  // owned copies, one per distinct image
  std::vector<Step> steps_;
  double first_fix_nats_ = 0.0;  // theta-independent part (first fixations)
  long total_fixations_ = 0;
};

}  // namespace infogaze
