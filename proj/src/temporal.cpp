#include "infogaze/temporal.hpp"

#include <cmath>
#include <numbers>

namespace infogaze {

namespace {
constexpr double kLn2 = std::numbers::ln2;
}

bool temporal_params_valid(const TemporalParams& p) {
  return p.delta < 1.0 && p.sigma_t > 0.0 && p.alpha_t > 0.0;
}

double temporal_factor(double dx, double dy, const TemporalParams& p) {
  const double d2 = dx * dx + p.alpha_t * dy * dy;
  return 1.0 - p.delta * std::exp(-0.5 * d2 / (p.sigma_t * p.sigma_t));
}

DensityGrid conditional_density(const DensityGrid& base, const Fixation& prev,
                                const TemporalParams& p) {
  if (!temporal_params_valid(p))
    throw Error(Errc::out_of_support, "temporal parameters out of range");
  if (p.delta == 0.0) return base;
  const int w = base.width(), h = base.height();
  Grid g(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      g(y, x) = base.pmf(y, x) * temporal_factor(x - prev.x, y - prev.y, p);
  return normalize_to_pmf(base.image_id, g);
}

double temporal_log_likelihood(const std::map<std::string, DensityGrid>& base_per_image,
                               const std::vector<const FixationTrain*>& trains,
                               const TemporalParams& p) {
  TemporalObjective obj(base_per_image, trains);
  return -obj.eval(TemporalObjective::pack(p), nullptr);
}

TemporalObjective::TemporalObjective(const std::map<std::string, DensityGrid>& base_per_image,
                                     const std::vector<const FixationTrain*>& trains) {
  std::map<std::string, std::size_t> base_index;
  for (const FixationTrain* t : trains) {
    auto bi = base_index.find(t->image_id);
    if (bi == base_index.end()) {
      auto it = base_per_image.find(t->image_id);
      if (it == base_per_image.end())
        throw Error(Errc::missing_grid, "no base density for image '" + t->image_id + "'");
      bi = base_index.emplace(t->image_id, bases_.size()).first;
      bases_.push_back(it->second);
    }
    const DensityGrid& base = bases_[bi->second];
    const int w = base.width(), h = base.height();
    if (t->fixations.empty())
      throw Error(Errc::empty_points, "empty train for image '" + t->image_id + "'");
    for (std::size_t i = 0; i < t->fixations.size(); ++i) {
      const Fixation& f = t->fixations[i];
      const int px = snap_pixel(f.x, w), py = snap_pixel(f.y, h);
      const double pv = base.pmf(py, px);
      if (!(pv > 0.0))
        throw Error(Errc::zero_density_at_fixation,
                    "zero base density at fixation on image '" + t->image_id + "'");
      if (i == 0) {
        first_fix_nats_ += std::log(pv) + std::log(static_cast<double>(w) * h);
      } else {
        const Fixation& prev = t->fixations[i - 1];
        steps_.push_back({bi->second, prev.x, prev.y, px, py});
      }
      ++total_fixations_;
    }
  }
}

TemporalParams TemporalObjective::unpack(const Eigen::VectorXd& theta) {
  return {1.0 - std::exp(theta(0)), std::exp(theta(1)), std::exp(theta(2))};
}

Eigen::VectorXd TemporalObjective::pack(const TemporalParams& p) {
  if (!temporal_params_valid(p))
    throw Error(Errc::out_of_support, "temporal parameters out of range");
  Eigen::VectorXd theta(3);
  theta << std::log(1.0 - p.delta), std::log(p.sigma_t), std::log(p.alpha_t);
  return theta;
}

double TemporalObjective::eval(const Eigen::VectorXd& theta, Eigen::VectorXd* grad) const {
  const TemporalParams p = unpack(theta);
  const double delta = p.delta, sigma = p.sigma_t, alpha = p.alpha_t;
  const double inv2s2 = 0.5 / (sigma * sigma);

  double nats = first_fix_nats_;
  double d_delta = 0.0, d_sigma = 0.0, d_alpha = 0.0;

  // The Gaussian factor is separable, so the per-step normalizer reduces to
  // Ey^T B Ex over the base pmf; the same products give the gradients.
  std::size_t cur = static_cast<std::size_t>(-1);
  Eigen::MatrixXd bmat;
  for (const Step& s : steps_) {
    if (s.base_index != cur) {
      cur = s.base_index;
      bmat = bases_[cur].pmf.matrix();
    }
    const DensityGrid* curg = &bases_[cur];
    const int w = curg->width(), h = curg->height();
    Eigen::VectorXd ex(w), ex_dx2(w), ey(h), ey_dy2(h);
    for (int x = 0; x < w; ++x) {
      const double dx = x - s.prev_x;
      ex(x) = std::exp(-dx * dx * inv2s2);
      ex_dx2(x) = ex(x) * dx * dx;
    }
    for (int y = 0; y < h; ++y) {
      const double dy = y - s.prev_y;
      ey(y) = std::exp(-alpha * dy * dy * inv2s2);
      ey_dy2(y) = ey(y) * dy * dy;
    }
    const Eigen::VectorXd bex = bmat * ex;
    const double s0 = ey.dot(bex);                       // sum B * E
    const double sy = ey_dy2.dot(bex);                   // sum B * E * dy^2
    const double sx = ey.dot(bmat * ex_dx2);             // sum B * E * dx^2
    const double z = 1.0 - delta * s0;

    const double fdx = s.px - s.prev_x, fdy = s.py - s.prev_y;
    const double e_fix = std::exp(-(fdx * fdx + alpha * fdy * fdy) * inv2s2);
    const double fac = 1.0 - delta * e_fix;
    nats += std::log(curg->pmf(s.py, s.px)) + std::log(fac) - std::log(z) +
            std::log(static_cast<double>(w) * h);

    if (grad) {
      // d log(fac/z) / d theta = fac'/fac - z'/z
      d_delta += -e_fix / fac + s0 / z;
      const double dfac_dsigma = -delta * e_fix * (fdx * fdx + alpha * fdy * fdy) /
                                 (sigma * sigma * sigma);
      const double dz_dsigma = -delta * (sx + alpha * sy) / (sigma * sigma * sigma);
      d_sigma += dfac_dsigma / fac - dz_dsigma / z;
      const double dfac_dalpha = delta * e_fix * fdy * fdy * inv2s2;
      const double dz_dalpha = delta * sy * inv2s2;
      d_alpha += dfac_dalpha / fac - dz_dalpha / z;
    }
  }

  const double n = static_cast<double>(total_fixations_);
  if (grad) {
    grad->resize(3);
    const double scale = 1.0 / (n * kLn2);
    (*grad)(0) = -(delta - 1.0) * d_delta * scale;  // ddelta/de = -(1-delta)
    (*grad)(1) = -sigma * d_sigma * scale;
    (*grad)(2) = -alpha * d_alpha * scale;
  }
  return -nats / (n * kLn2);
}

TemporalFit fit_temporal(const std::map<std::string, DensityGrid>& base_per_image,
                         const std::vector<const FixationTrain*>& trains,
                         const OptimOptions& opts, const TemporalParams& init) {
  TemporalObjective obj(base_per_image, trains);
  TemporalParams start = init;
  start.delta = 0.0;  // neutral point; the spatial LL is the floor
  auto fn = [&obj](const Eigen::VectorXd& x, Eigen::VectorXd* g) { return obj.eval(x, g); };
  const double ll_spatial = -obj.eval(TemporalObjective::pack(start), nullptr);
  OptimResult r = minimize_lbfgs(fn, TemporalObjective::pack(start), opts);
  TemporalFit fit;
  fit.params = TemporalObjective::unpack(r.x);
  fit.ll_bits = -r.f;
  fit.ll_spatial = ll_spatial;
  fit.iterations = r.iterations;
  return fit;
}

}  // namespace infogaze
