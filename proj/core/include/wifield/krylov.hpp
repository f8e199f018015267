#pragma once

#include <functional>

#include "wifield/types.hpp"

namespace wifield {

using LinearOperator = std::function<void(const VectorXc& in, VectorXc& out)>;

struct GmresOptions {
  double tolerance = 1e-10;  // on ||b - A x|| / ||b||
  int restart = 1000;        // capped further by memory_budget_bytes
  int max_iterations = 20000;
  std::size_t memory_budget_bytes = std::size_t{1} << 30;
};

struct GmresResult {
  VectorXc x;
  int iterations = 0;
  double relative_residual = 0.0;  // recomputed from the final iterate
  bool converged = false;
};

/// Restarted GMRES with classical Gram-Schmidt plus one reorthogonalization pass.
GmresResult gmres(const LinearOperator& apply, const VectorXc& b, const GmresOptions& options = {},
                  const VectorXc* x0 = nullptr);

}  // namespace wifield
