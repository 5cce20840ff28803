#include "infogaze/optim.hpp"

#include <cmath>
#include <deque>

namespace infogaze {

namespace {

bool finite(double v) { return std::isfinite(v); }
bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

OptimResult minimize_lbfgs(const ObjectiveFn& f, Eigen::VectorXd x0,
                           const OptimOptions& opts) {
  const int n = static_cast<int>(x0.size());
  Eigen::VectorXd x = std::move(x0);
  Eigen::VectorXd g(n);
  double fx = f(x, &g);
  if (!finite(fx) || !finite(g))
    throw Error(Errc::non_finite_objective,
                "objective or gradient non-finite at the start point");

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  OptimResult res;
  res.converged = false;

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    res.iterations = iter + 1;
    if (g.lpNorm<Eigen::Infinity>() <= opts.grad_tol) {
      res.converged = true;
      break;
    }

    // Two-loop recursion for the search direction.
    Eigen::VectorXd q = g;
    const int m = static_cast<int>(s_hist.size());
    std::vector<double> alpha(m);
    for (int i = m - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (m > 0) {
      const double gamma =
          s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      q *= gamma;
    }
    for (int i = 0; i < m; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    Eigen::VectorXd dir = -q;
    double dg = dir.dot(g);
    if (!(dg < 0.0)) {  // not a descent direction: reset to steepest descent
      dir = -g;
      dg = -g.squaredNorm();
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    // Weak-Wolfe line search by bracketing: the curvature condition makes
    // every accepted step a valid curvature pair (s.y > 0).
    const double c1 = 1e-4, c2 = 0.9;
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double step = 1.0;
    double f_new = fx;
    Eigen::VectorXd x_new(n), g_new(n);
    bool accepted = false;
    double best_step = 0.0, best_f = fx;
    Eigen::VectorXd best_x, best_g;
    for (int ls = 0; ls < opts.max_line_steps; ++ls) {
      x_new = x + step * dir;
      f_new = f(x_new, &g_new);
      const bool ok = finite(f_new) && finite(g_new);
      if (!ok || f_new > fx + c1 * step * dg) {
        hi = step;
      } else {
        if (f_new < best_f) {  // Armijo point; remember the best as fallback
          best_step = step;
          best_f = f_new;
          best_x = x_new;
          best_g = g_new;
        }
        if (g_new.dot(dir) < c2 * dg) {
          lo = step;
        } else {
          accepted = true;
          break;
        }
      }
      step = std::isinf(hi) ? 2.0 * step : 0.5 * (lo + hi);
    }
    if (!accepted) {
      if (best_step > 0.0) {  // settle for sufficient decrease
        x_new = std::move(best_x);
        g_new = std::move(best_g);
        f_new = best_f;
      } else {  // no admissible step; treat as converged
        res.converged = true;
        break;
      }
    }

    Eigen::VectorXd s = x_new - x;
    Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm() && sy > 0.0) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(yv));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    const double improvement = fx - f_new;
    x.swap(x_new);
    g.swap(g_new);
    fx = f_new;
    if (improvement <= opts.rel_tol * std::max(1.0, std::abs(fx))) {
      res.converged = true;
      break;
    }
  }

  res.x = std::move(x);
  res.f = fx;
  return res;
}

}  // namespace infogaze
