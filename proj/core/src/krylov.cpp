#include "wifield/krylov.hpp"

#include <algorithm>
#include <cmath>

#include "wifield/error.hpp"

namespace wifield {

namespace {

// Complex Givens rotation zeroing b in (a, b).
void make_rotation(cplx a, cplx b, double& c, cplx& s, cplx& r) {
  const double na = std::abs(a);
  const double nb = std::abs(b);
  if (nb == 0.0) {
    c = 1.0;
    s = 0.0;
    r = a;
    return;
  }
  if (na == 0.0) {
    c = 0.0;
    s = std::conj(b) / nb;
    r = nb;
    return;
  }
  const double norm = std::hypot(na, nb);
  const cplx phase = a / na;
  c = na / norm;
  s = phase * std::conj(b) / norm;
  r = phase * norm;
}

}  // namespace

GmresResult gmres(const LinearOperator& apply, const VectorXc& b, const GmresOptions& options,
                  const VectorXc* x0) {
  const Eigen::Index n = b.size();
  if (options.tolerance <= 0.0 || options.max_iterations <= 0 || options.restart <= 0) {
    throw ConfigError("gmres: tolerance, restart and max_iterations must be positive");
  }
  GmresResult res;
  res.x = x0 != nullptr ? *x0 : VectorXc::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.x.setZero();
    res.converged = true;
    return res;
  }
  const std::size_t per_vector = static_cast<std::size_t>(n) * sizeof(cplx);
  const int budget_m = static_cast<int>(std::max<std::size_t>(2, options.memory_budget_bytes / per_vector) - 1);
  const int m = std::max(1, std::min({options.restart, budget_m, static_cast<int>(n)}));

  MatrixXc v(n, m + 1);
  MatrixXc h = MatrixXc::Zero(m + 1, m);
  std::vector<double> cs(static_cast<std::size_t>(m));
  std::vector<cplx> sn(static_cast<std::size_t>(m));
  VectorXc g(m + 1);
  VectorXc w(n);
  VectorXc r(n);

  auto residual = [&] {
    apply(res.x, w);
    r = b - w;
    return r.norm();
  };

  double rnorm = residual();
  while (res.iterations < options.max_iterations) {
    if (rnorm <= options.tolerance * bnorm) {
      break;
    }
    v.col(0) = r / rnorm;
    g.setZero();
    g[0] = rnorm;
    h.setZero();
    int k = 0;
    for (; k < m && res.iterations < options.max_iterations; ++k) {
      apply(v.col(k), w);
      ++res.iterations;
      auto basis = v.leftCols(k + 1);
      VectorXc coeff = basis.adjoint() * w;
      w.noalias() -= basis * coeff;
      VectorXc again = basis.adjoint() * w;
      w.noalias() -= basis * again;
      coeff += again;
      const double wnorm = w.norm();
      h.col(k).head(k + 1) = coeff;
      h(k + 1, k) = wnorm;
      for (int i = 0; i < k; ++i) {
        const cplx hi = h(i, k);
        const cplx hi1 = h(i + 1, k);
        h(i, k) = cs[static_cast<std::size_t>(i)] * hi + sn[static_cast<std::size_t>(i)] * hi1;
        h(i + 1, k) = -std::conj(sn[static_cast<std::size_t>(i)]) * hi + cs[static_cast<std::size_t>(i)] * hi1;
      }
      double c = 0.0;
      cplx s;
      cplx rr;
      make_rotation(h(k, k), h(k + 1, k), c, s, rr);
      cs[static_cast<std::size_t>(k)] = c;
      sn[static_cast<std::size_t>(k)] = s;
      h(k, k) = rr;
      h(k + 1, k) = 0.0;
      g[k + 1] = -std::conj(s) * g[k];
      g[k] = c * g[k];
      if (wnorm > 0.0) {
        v.col(k + 1) = w / wnorm;
      }
      if (std::abs(g[k + 1]) <= options.tolerance * bnorm || wnorm == 0.0) {
        ++k;
        break;
      }
    }
    // Back substitution on the k x k triangle.
    VectorXc y = h.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    res.x.noalias() += v.leftCols(k) * y;
    rnorm = residual();
  }
  res.relative_residual = rnorm / bnorm;
  res.converged = res.relative_residual <= options.tolerance;
  return res;
}

}  // namespace wifield
