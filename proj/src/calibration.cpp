#include "infogaze/calibration.hpp"

#include <cmath>
#include <numbers>

namespace infogaze {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kTinySigma = 1e-9;  // effectively no blur

struct Segment {
  int i;     // left knot
  double t;  // position within [knot i, knot i+1]
};

inline Segment locate(double v, int knots) {
  const double scaled = v * (knots - 1);
  int i = static_cast<int>(scaled);
  if (i > knots - 2) i = knots - 2;
  if (i < 0) i = 0;
  return {i, scaled - i};
}

}  // namespace

double PiecewiseLinear::operator()(double v) const {
  const Segment s = locate(v, knots());
  return y(s.i) * (1.0 - s.t) + y(s.i + 1) * s.t;
}

double PiecewiseLinear::slope_at(double v) const {
  const Segment s = locate(v, knots());
  return (y(s.i + 1) - y(s.i)) * (knots() - 1);
}

PiecewiseLinear PiecewiseLinear::identity(int knots, double floor) {
  PiecewiseLinear f;
  f.y = Eigen::VectorXd::LinSpaced(knots, 0.0, 1.0).array() + floor;
  return f;
}

PiecewiseLinear PiecewiseLinear::constant(int knots, double value) {
  PiecewiseLinear f;
  f.y = Eigen::VectorXd::Constant(knots, value);
  return f;
}

std::string stage_name(Stage s) {
  switch (s) {
    case Stage::nonlin: return "nonlin";
    case Stage::nonlin_cb: return "nonlin+cb";
    case Stage::nonlin_cb_blur: return "nonlin+cb+blur";
  }
  return "?";
}

Stage parse_stage(const std::string& name) {
  if (name == "nonlin") return Stage::nonlin;
  if (name == "nonlin+cb" || name == "cb") return Stage::nonlin_cb;
  if (name == "nonlin+cb+blur" || name == "blur") return Stage::nonlin_cb_blur;
  throw Error(Errc::bad_config, "unknown stage '" + name + "'");
}

void global_rescale(std::vector<SaliencyMap>& maps) {
  if (maps.empty()) throw Error(Errc::empty_grids, "no maps to rescale");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& m : maps) {
    if (!m.values.isFinite().all())
      throw Error(Errc::non_finite, "map for image '" + m.image_id + "' has non-finite values");
    lo = std::min(lo, m.values.minCoeff());
    hi = std::max(hi, m.values.maxCoeff());
  }
  if (!(hi > lo))
    throw Error(Errc::constant_model, "all saliency values are equal; cannot rescale");
  const double scale = 1.0 / (hi - lo);
  for (auto& m : maps) m.values = (m.values - lo) * scale;
}

Grid apply_nonlinearity(const Grid& map01, const PiecewiseLinear& f) {
  if ((map01 < -1e-12).any() || (map01 > 1.0 + 1e-12).any())
    throw Error(Errc::out_of_support, "nonlinearity input outside [0, 1]");
  Grid out(map01.rows(), map01.cols());
  for (Eigen::Index j = 0; j < map01.cols(); ++j)
    for (Eigen::Index i = 0; i < map01.rows(); ++i)
      out(i, j) = f(std::clamp(map01(i, j), 0.0, 1.0));
  return out;
}

Grid center_bias_weight(const ImageFrame& frame, const CenterBias& cb) {
  const int w = frame.width, h = frame.height;
  const double xc = (w - 1) / 2.0, yc = (h - 1) / 2.0;
  const double dmax = std::sqrt(xc * xc + cb.alpha * yc * yc);
  Grid out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double dx = x - xc, dy = y - yc;
      const double d = std::sqrt(dx * dx + cb.alpha * dy * dy) / dmax;
      out(y, x) = cb.profile(std::min(d, 1.0));
    }
  return out;
}

DensityGrid build_model_density(const SaliencyMap& map, const CalibrationParams& params,
                                const ImageFrame& frame) {
  if (map.values.rows() != frame.height || map.values.cols() != frame.width)
    throw Error(Errc::image_mismatch, "map dimensions do not match frame '" + frame.image_id + "'");
  Grid g = map.values;
  if (params.stage == Stage::nonlin_cb_blur && params.blur_sigma.value_or(0.0) > 0.0)
    g = gaussian_blur(g, *params.blur_sigma).min(1.0).max(0.0);
  g = apply_nonlinearity(g, params.nonlinearity);
  if (params.stage != Stage::nonlin && params.center_bias)
    g *= center_bias_weight(frame, *params.center_bias);
  return normalize_to_pmf(map.image_id, g);
}

CalibData make_calib_data(const std::vector<SaliencyMap>& maps,
                          const std::vector<ImageFrame>& frames,
                          const std::vector<const FixationTrain*>& trains) {
  CalibData data;
  for (const auto& m : maps) {
    const ImageFrame* frame = nullptr;
    for (const auto& f : frames)
      if (f.image_id == m.image_id) frame = &f;
    if (!frame)
      throw Error(Errc::missing_artifact, "no frame for image '" + m.image_id + "'");
    if ((m.values < -1e-12).any() || (m.values > 1.0 + 1e-12).any())
      throw Error(Errc::out_of_support,
                  "map for image '" + m.image_id + "' is not rescaled to [0, 1]");
    CalibImage ci;
    ci.frame = *frame;
    ci.map01 = m.values.min(1.0).max(0.0);
    for (const FixationTrain* t : trains) {
      if (t->image_id != m.image_id) continue;
      for (const Fixation& f : t->fixations)
        ci.fix.emplace_back(snap_pixel(f.x, frame->width), snap_pixel(f.y, frame->height));
    }
    data.total_fixations += static_cast<long>(ci.fix.size());
    data.images.push_back(std::move(ci));
  }
  if (data.total_fixations == 0)
    throw Error(Errc::empty_points, "no fixations on any calibrated image");
  return data;
}

CalibrationObjective::CalibrationObjective(const CalibData& data, Stage stage)
    : data_(&data), stage_(stage) {}

int CalibrationObjective::dim() const {
  int n = kNonlinKnots;
  if (stage_ != Stage::nonlin) n += kCenterBiasKnots + 1;
  if (stage_ == Stage::nonlin_cb_blur) n += 1;
  return n;
}

Eigen::VectorXd CalibrationObjective::init() const {
  Eigen::VectorXd theta(dim());
  const double h = 1.0 / (kNonlinKnots - 1);
  theta(0) = 1e-2;  // a hair above the floor so the first knot is not pinned
  for (int i = 1; i < kNonlinKnots; ++i) theta(i) = std::sqrt(h);
  if (stage_ != Stage::nonlin) {
    for (int i = 0; i < kCenterBiasKnots; ++i)
      theta(kNonlinKnots + i) = std::log(1.0 - kValueFloor);  // flat profile = 1
    theta(kNonlinKnots + kCenterBiasKnots) = 0.0;             // alpha = 1
  }
  if (stage_ == Stage::nonlin_cb_blur)
    theta(kNonlinKnots + kCenterBiasKnots + 1) = 0.0;  // sigma = 1 px
  return theta;
}

CalibrationParams CalibrationObjective::unpack(const Eigen::VectorXd& theta) const {
  CalibrationParams p;
  p.stage = stage_;
  p.nonlinearity.y.resize(kNonlinKnots);
  double acc = kValueFloor;
  for (int i = 0; i < kNonlinKnots; ++i) {
    acc += theta(i) * theta(i);
    p.nonlinearity.y(i) = acc;
  }
  if (stage_ != Stage::nonlin) {
    CenterBias cb;
    cb.profile.y.resize(kCenterBiasKnots);
    for (int i = 0; i < kCenterBiasKnots; ++i)
      cb.profile.y(i) = kValueFloor + std::exp(theta(kNonlinKnots + i));
    cb.alpha = std::exp(theta(kNonlinKnots + kCenterBiasKnots));
    p.center_bias = cb;
  }
  if (stage_ == Stage::nonlin_cb_blur)
    p.blur_sigma = std::exp(theta(kNonlinKnots + kCenterBiasKnots + 1));
  return p;
}

Eigen::VectorXd CalibrationObjective::pack(const CalibrationParams& params) const {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim());
  double prev = kValueFloor;
  for (int i = 0; i < kNonlinKnots; ++i) {
    const double inc = std::max(params.nonlinearity.y(i) - prev, 0.0);
    theta(i) = std::sqrt(inc);
    prev = params.nonlinearity.y(i);
  }
  if (stage_ != Stage::nonlin) {
    const CenterBias& cb = params.center_bias ? *params.center_bias
                                              : CenterBias{PiecewiseLinear::constant(
                                                               kCenterBiasKnots, 1.0),
                                                           1.0};
    for (int i = 0; i < kCenterBiasKnots; ++i)
      theta(kNonlinKnots + i) = std::log(std::max(cb.profile.y(i) - kValueFloor, 1e-12));
    theta(kNonlinKnots + kCenterBiasKnots) = std::log(cb.alpha);
  }
  if (stage_ == Stage::nonlin_cb_blur)
    theta(kNonlinKnots + kCenterBiasKnots + 1) =
        std::log(std::max(params.blur_sigma.value_or(kTinySigma), kTinySigma));
  return theta;
}

double CalibrationObjective::eval(const Eigen::VectorXd& theta, Eigen::VectorXd* grad) const {
  const CalibrationParams p = unpack(theta);
  const bool with_cb = stage_ != Stage::nonlin;
  const bool with_blur = stage_ == Stage::nonlin_cb_blur;
  const int kn = kNonlinKnots, kc = kCenterBiasKnots;
  const Eigen::VectorXd& ny = p.nonlinearity.y;

  double ll_nats = 0.0;
  Eigen::VectorXd d_ny = Eigen::VectorXd::Zero(kn);
  Eigen::VectorXd d_cb = Eigen::VectorXd::Zero(kc);
  double d_alpha = 0.0, d_sigma = 0.0;

  for (const CalibImage& img : data_->images) {
    const int w = img.frame.width, h = img.frame.height;
    const double sigma = with_blur ? *p.blur_sigma : 0.0;

    Grid base = img.map01;
    Grid dbase;
    if (with_blur && sigma > 0.0) {
      base = gaussian_blur(base, sigma).min(1.0).max(0.0);
      if (grad) dbase = gaussian_blur_dsigma(img.map01, sigma);
    }

    const double xc = (w - 1) / 2.0, yc = (h - 1) / 2.0;
    double alpha = 1.0, dmax = 1.0;
    const PiecewiseLinear* cbp = nullptr;
    if (with_cb) {
      alpha = p.center_bias->alpha;
      dmax = std::sqrt(xc * xc + alpha * yc * yc);
      cbp = &p.center_bias->profile;
    }

    // Single pixel pass: density weights plus the Z-side gradient sums.
    Grid wgrid(h, w);
    double z = 0.0;
    Eigen::VectorXd a_ny = Eigen::VectorXd::Zero(kn);
    Eigen::VectorXd a_cb = Eigen::VectorXd::Zero(kc);
    double a_alpha = 0.0, a_sigma = 0.0;

    auto pixel_terms = [&](int x, int y, double* nv, double* cv, Segment* sn, Segment* sc,
                           double* dd_dalpha) {
      const double v = base(y, x);
      *sn = locate(v, kn);
      *nv = ny(sn->i) * (1.0 - sn->t) + ny(sn->i + 1) * sn->t;
      *cv = 1.0;
      *dd_dalpha = 0.0;
      if (with_cb) {
        const double dx = x - xc, dy = y - yc;
        const double r = std::sqrt(dx * dx + alpha * dy * dy);
        const double d = std::min(r / dmax, 1.0);
        *sc = locate(d, kc);
        *cv = cbp->y(sc->i) * (1.0 - sc->t) + cbp->y(sc->i + 1) * sc->t;
        if (r > 0.0)
          *dd_dalpha = (dy * dy / (2.0 * r)) / dmax - r * (yc * yc / (2.0 * dmax)) / (dmax * dmax);
      }
    };

    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double nv, cv, dda;
        Segment sn{0, 0.0}, sc{0, 0.0};
        pixel_terms(x, y, &nv, &cv, &sn, &sc, &dda);
        const double wv = nv * cv;
        wgrid(y, x) = wv;
        z += wv;
        if (grad) {
          a_ny(sn.i) += cv * (1.0 - sn.t);
          a_ny(sn.i + 1) += cv * sn.t;
          if (with_cb) {
            a_cb(sc.i) += nv * (1.0 - sc.t);
            a_cb(sc.i + 1) += nv * sc.t;
            a_alpha += nv * (cbp->y(sc.i + 1) - cbp->y(sc.i)) * (kc - 1) * dda;
          }
          if (with_blur && sigma > 0.0)
            a_sigma += cv * (ny(sn.i + 1) - ny(sn.i)) * (kn - 1) * dbase(y, x);
        }
      }

    const double m = static_cast<double>(img.fix.size());
    ll_nats += m * (std::log(static_cast<double>(w) * h) - std::log(z));

    for (const auto& [px, py] : img.fix) {
      double nv, cv, dda;
      Segment sn{0, 0.0}, sc{0, 0.0};
      pixel_terms(px, py, &nv, &cv, &sn, &sc, &dda);
      const double wv = wgrid(py, px);
      ll_nats += std::log(wv);
      if (grad) {
        const double inv = 1.0 / wv;
        d_ny(sn.i) += cv * (1.0 - sn.t) * inv;
        d_ny(sn.i + 1) += cv * sn.t * inv;
        if (with_cb) {
          d_cb(sc.i) += nv * (1.0 - sc.t) * inv;
          d_cb(sc.i + 1) += nv * sc.t * inv;
          d_alpha += nv * (cbp->y(sc.i + 1) - cbp->y(sc.i)) * (kc - 1) * dda * inv;
        }
        if (with_blur && sigma > 0.0)
          d_sigma += cv * (ny(sn.i + 1) - ny(sn.i)) * (kn - 1) * dbase(py, px) * inv;
      }
    }

    if (grad) {
      const double mz = m / z;
      d_ny -= mz * a_ny;
      d_cb -= mz * a_cb;
      d_alpha -= mz * a_alpha;
      d_sigma -= mz * a_sigma;
    }
  }

  const double n = static_cast<double>(data_->total_fixations);
  const double ll_bits = ll_nats / (n * kLn2);

  if (grad) {
    grad->setZero(dim());
    const double scale = 1.0 / (n * kLn2);
    // y_i = floor + sum_{j<=i} u_j^2 : suffix-sum then chain through 2u.
    double suffix = 0.0;
    Eigen::VectorXd du(kn);
    for (int i = kn - 1; i >= 0; --i) {
      suffix += d_ny(i) * scale;
      du(i) = 2.0 * theta(i) * suffix;
    }
    grad->head(kn) = -du;
    if (with_cb) {
      for (int i = 0; i < kc; ++i)
        (*grad)(kn + i) = -(p.center_bias->profile.y(i) - kValueFloor) * d_cb(i) * scale;
      (*grad)(kn + kc) = -p.center_bias->alpha * d_alpha * scale;
    }
    if (with_blur) (*grad)(kn + kc + 1) = -(*p.blur_sigma) * d_sigma * scale;
  }
  // Non-finite values are returned as-is: the optimizer backtracks through
  // them and raises NonFinite only when the start point is already bad.
  return -ll_bits;
}

namespace {

struct StageRun {
  Eigen::VectorXd theta;
  double ll = 0.0;
  int iterations = 0;
};

StageRun run_stage(const CalibData& data, Stage stage, const Eigen::VectorXd& start,
                   const OptimOptions& opts) {
  CalibrationObjective obj(data, stage);
  auto fn = [&obj](const Eigen::VectorXd& x, Eigen::VectorXd* g) { return obj.eval(x, g); };
  OptimResult r = minimize_lbfgs(fn, start, opts);
  return {std::move(r.x), -r.f, r.iterations};
}

}  // namespace

CalibrationFit optimize_calibration(const CalibData& data, Stage stage,
                                    const OptimOptions& opts) {
  CalibrationFit fit;

  CalibrationObjective obj1(data, Stage::nonlin);
  StageRun s1 = run_stage(data, Stage::nonlin, obj1.init(), opts);
  fit.ll_nonlin = s1.ll;
  fit.iterations = s1.iterations;
  StageRun last = s1;

  if (stage != Stage::nonlin) {
    CalibrationObjective obj2(data, Stage::nonlin_cb);
    CalibrationParams warm = obj1.unpack(s1.theta);
    warm.stage = Stage::nonlin_cb;
    warm.center_bias = CenterBias{PiecewiseLinear::constant(kCenterBiasKnots, 1.0), 1.0};
    StageRun s2 = run_stage(data, Stage::nonlin_cb, obj2.pack(warm), opts);
    fit.dll_center_bias = s2.ll - s1.ll;
    fit.iterations += s2.iterations;
    last = s2;

    if (stage == Stage::nonlin_cb_blur) {
      CalibrationObjective obj3(data, Stage::nonlin_cb_blur);
      CalibrationParams base = obj2.unpack(s2.theta);
      base.stage = Stage::nonlin_cb_blur;
      // Two starts: no blur (keeps the previous optimum reachable) and the
      // neutral 1 px kernel; keep the better run.
      base.blur_sigma = kTinySigma;
      StageRun sa = run_stage(data, Stage::nonlin_cb_blur, obj3.pack(base), opts);
      base.blur_sigma = 1.0;
      StageRun sb = run_stage(data, Stage::nonlin_cb_blur, obj3.pack(base), opts);
      StageRun s3 = (sa.ll >= sb.ll) ? sa : sb;
      fit.dll_blur = s3.ll - s2.ll;
      fit.iterations += sa.iterations + sb.iterations;
      last = s3;
    }
  }

  CalibrationObjective obj_final(data, stage);
  fit.params = obj_final.unpack(last.theta);
  fit.ll_bits = last.ll;
  return fit;
}

ContributionBreakdown contribution_breakdown(const CalibData& data, const OptimOptions& opts) {
  const CalibrationFit fit = optimize_calibration(data, Stage::nonlin_cb_blur, opts);
  return {fit.ll_nonlin, fit.dll_center_bias, fit.dll_blur};
}

}  // namespace infogaze
