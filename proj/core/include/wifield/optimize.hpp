#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace wifield {

/// Returns f(x); writes the gradient when `grad` is non-null.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct AdamOptions {
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int max_iterations = 500;
  // Stop once |f_k - f_{k-1}| <= tolerance * max(1, |f_k|); 0 runs every iteration.
  double tolerance = 0.0;
  // Stop once ||grad f|| <= gradient_tolerance; 0 stops only at an exact zero gradient.
  double gradient_tolerance = 0.0;
  // Abort when the objective exceeds this multiple of its starting value.
  double divergence_factor = 10.0;
  // Starting values below this are treated as this value by the divergence check.
  double divergence_floor = 1e-12;
};

struct LbfgsOptions {
  int memory = 10;
  int max_iterations = 500;
  double tolerance = 0.0;
  double gradient_tolerance = 1e-14;
  double armijo_c1 = 1e-4;
  int max_backtracks = 50;
  double divergence_factor = 10.0;
  double divergence_floor = 1e-12;
};

struct OptimizeResult {
  Eigen::VectorXd x;
  std::vector<double> history;  // objective at each accepted iterate, starting with x0
  int iterations = 0;
  bool stopped_early = false;
};

/// Throws NumericError on divergence, with the iteration and objective values.
OptimizeResult adam(const Objective& f, const Eigen::VectorXd& x0, const AdamOptions& options = {});

/// Limited-memory BFGS with Armijo backtracking; the recorded history is non-increasing.
OptimizeResult lbfgs(const Objective& f, const Eigen::VectorXd& x0, const LbfgsOptions& options = {});

}  // namespace wifield
