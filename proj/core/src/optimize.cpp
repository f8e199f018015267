#include "wifield/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "wifield/error.hpp"

namespace wifield {

namespace {

void check_divergence(double f, double f0, double factor, double floor, int iteration) {
  if (!std::isfinite(f) || f > factor * std::max(f0, floor)) {
    std::ostringstream msg;
    msg << "optimizer diverged at iteration " << iteration << ": objective " << f << " vs initial " << f0
        << " (limit " << factor << "x)";
    throw NumericError(msg.str());
  }
}

bool small_change(double prev, double cur, double tol) {
  return tol > 0.0 && std::abs(prev - cur) <= tol * std::max(1.0, std::abs(cur));
}

}  // namespace

OptimizeResult adam(const Objective& f, const Eigen::VectorXd& x0, const AdamOptions& options) {
  if (options.max_iterations <= 0 || !(options.learning_rate > 0.0)) {
    throw ConfigError("adam: iterations and learning rate must be positive");
  }
  OptimizeResult res;
  res.x = x0;
  Eigen::VectorXd g(x0.size());
  Eigen::VectorXd m = Eigen::VectorXd::Zero(x0.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(x0.size());
  double fx = f(res.x, &g);
  const double f0 = fx;
  check_divergence(fx, f0, options.divergence_factor, options.divergence_floor, 0);
  res.history.push_back(fx);
  double b1t = 1.0;
  double b2t = 1.0;
  for (int k = 1; k <= options.max_iterations; ++k) {
    if (g.norm() <= options.gradient_tolerance) {
      res.stopped_early = true;
      break;
    }
    b1t *= options.beta1;
    b2t *= options.beta2;
    m = options.beta1 * m + (1.0 - options.beta1) * g;
    v = options.beta2 * v + (1.0 - options.beta2) * g.cwiseAbs2();
    const double mc = 1.0 / (1.0 - b1t);
    const double vc = 1.0 / (1.0 - b2t);
    res.x.array() -= options.learning_rate * (m.array() * mc) / ((v.array() * vc).sqrt() + options.epsilon);
    const double prev = fx;
    fx = f(res.x, &g);
    check_divergence(fx, f0, options.divergence_factor, options.divergence_floor, k);
    res.history.push_back(fx);
    res.iterations = k;
    if (small_change(prev, fx, options.tolerance)) {
      res.stopped_early = true;
      break;
    }
  }
  return res;
}

OptimizeResult lbfgs(const Objective& f, const Eigen::VectorXd& x0, const LbfgsOptions& options) {
  if (options.max_iterations <= 0 || options.memory <= 0) {
    throw ConfigError("lbfgs: iterations and memory must be positive");
  }
  OptimizeResult res;
  res.x = x0;
  Eigen::VectorXd g(x0.size());
  double fx = f(res.x, &g);
  const double f0 = fx;
  check_divergence(fx, f0, options.divergence_factor, options.divergence_floor, 0);
  res.history.push_back(fx);

  std::deque<Eigen::VectorXd> s_hist;
  std::deque<Eigen::VectorXd> y_hist;
  std::deque<double> rho_hist;
  Eigen::VectorXd g_new(x0.size());
  for (int k = 1; k <= options.max_iterations; ++k) {
    if (g.norm() <= options.gradient_tolerance) {
      res.stopped_early = true;
      break;
    }
    // Two-loop recursion.
    Eigen::VectorXd d = -g;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(d);
      d -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) {
      d *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(d);
      d += (alpha[i] - beta) * s_hist[i];
    }
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      d = -g;
      slope = -g.squaredNorm();
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }
    double step = s_hist.empty() ? std::min(1.0, 1.0 / std::max(g.norm(), 1e-300)) : 1.0;
    bool accepted = false;
    Eigen::VectorXd x_new;
    double f_new = 0.0;
    for (int b = 0; b < options.max_backtracks; ++b) {
      x_new = res.x + step * d;
      f_new = f(x_new, &g_new);
      if (std::isfinite(f_new) && f_new <= fx + options.armijo_c1 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.stopped_early = true;
      break;
    }
    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > options.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    const double prev = fx;
    res.x = x_new;
    g = g_new;
    fx = f_new;
    check_divergence(fx, f0, options.divergence_factor, options.divergence_floor, k);
    res.history.push_back(fx);
    res.iterations = k;
    if (small_change(prev, fx, options.tolerance)) {
      res.stopped_early = true;
      break;
    }
  }
  return res;
}

}  // namespace wifield
