#include "wifield/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace wifield::specfun {

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209008240243;
constexpr double kRescaleAbove = 1e250;

void check_argument(double x) {
  if (std::isnan(x)) {
    throw std::domain_error("bessel: NaN argument");
  }
  if (std::isinf(x)) {
    throw std::domain_error("bessel: infinite argument");
  }
}

void check_order(int order) {
  if (order != 0 && order != 1) {
    throw std::domain_error("bessel: only orders 0 and 1 are provided, got " + std::to_string(order));
  }
}

// Miller's backward recurrence for J_0..J_top, normalized by J_0 + 2 sum J_2k = 1.
// The start order sits far enough above max(top, x) that the truncation error
// is below double precision for x up to the asymptotic switch and beyond.
std::vector<double> miller_j(int top, double x) {
  if (x == 0.0) {
    std::vector<double> j(static_cast<std::size_t>(top) + 1, 0.0);
    j[0] = 1.0;
    return j;
  }
  int start = std::max(top, static_cast<int>(std::ceil(x))) + 40 +
              static_cast<int>(8.0 * std::cbrt(x));
  start += start % 2;

  std::vector<double> t(static_cast<std::size_t>(start) + 2, 0.0);
  t[static_cast<std::size_t>(start)] = 1e-300;
  for (int k = start; k >= 1; --k) {
    const auto ku = static_cast<std::size_t>(k);
    t[ku - 1] = (2.0 * k / x) * t[ku] - t[ku + 1];
    if (std::abs(t[ku - 1]) > kRescaleAbove) {
      for (std::size_t i = ku - 1; i <= static_cast<std::size_t>(start); ++i) {
        t[i] /= kRescaleAbove;
      }
    }
  }
  double norm = t[0];
  for (std::size_t k = 2; k <= static_cast<std::size_t>(start); k += 2) {
    norm += 2.0 * t[k];
  }
  t.resize(static_cast<std::size_t>(top) + 1);
  for (double& v : t) {
    v /= norm;
  }
  return t;
}

// Neumann-type series for Y0 and Y1 in terms of J_k, valid for all x > 0.
struct SmallArg {
  double j0, j1, y0, y1;
};

SmallArg series_branch(double x) {
  const int top = std::max(8, static_cast<int>(std::ceil(x)) + 40);
  const std::vector<double> j = miller_j(top, x);
  const double log_term = std::log(0.5 * x) + kEulerGamma;

  double even_sum = 0.0;
  double odd_sum = 0.0;
  for (int k = 1; 2 * k + 1 <= top; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    even_sum += sign * j[static_cast<std::size_t>(2 * k)] / k;
    odd_sum += sign * (2.0 * k + 1.0) / (static_cast<double>(k) * (k + 1.0)) *
               j[static_cast<std::size_t>(2 * k + 1)];
  }
  const double two_over_pi = 2.0 / std::numbers::pi;
  SmallArg out{};
  out.j0 = j[0];
  out.j1 = j[1];
  out.y0 = two_over_pi * (log_term * j[0] - 2.0 * even_sum);
  out.y1 = two_over_pi * (-j[0] / x + (log_term - 1.0) * j[1] - odd_sum);
  return out;
}

// Hankel's large-argument expansion; terms are summed until they stop shrinking.
void asymptotic_branch(int order, double x, double& jv, double& yv) {
  const double mu = 4.0 * order * order;
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  double last = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (k * 8.0 * x);
    const double mag = std::abs(term);
    if (mag >= last || mag < 1e-18) {
      break;
    }
    last = mag;
    // k odd contributes to Q with sign (-1)^((k-1)/2); k even to P with sign (-1)^(k/2)
    if (k % 2 == 1) {
      q += (((k - 1) / 2) % 2 == 0 ? 1.0 : -1.0) * term;
    } else {
      p += ((k / 2) % 2 == 0 ? 1.0 : -1.0) * term;
    }
  }
  // chi = x - (order/2 + 1/4) pi
  const double c = std::cos(x);
  const double s = std::sin(x);
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  double cos_chi = 0.0;
  double sin_chi = 0.0;
  if (order == 0) {
    cos_chi = (c + s) * inv_sqrt2;
    sin_chi = (s - c) * inv_sqrt2;
  } else {
    cos_chi = (s - c) * inv_sqrt2;
    sin_chi = -(c + s) * inv_sqrt2;
  }
  const double amp = std::sqrt(2.0 / (std::numbers::pi * x));
  jv = amp * (p * cos_chi - q * sin_chi);
  yv = amp * (p * sin_chi + q * cos_chi);
}

}  // namespace

double bessel(BesselKind kind, int order, double x) {
  check_argument(x);
  check_order(order);
  if (kind == BesselKind::Y && x <= 0.0) {
    throw std::domain_error("bessel: Y requires x > 0");
  }
  if (kind == BesselKind::J && x < 0.0) {
    throw std::domain_error("bessel: J requires x >= 0");
  }
  if (kind == BesselKind::J && x == 0.0) {
    return order == 0 ? 1.0 : 0.0;
  }
  if (x > kAsymptoticSwitch) {
    double jv = 0.0;
    double yv = 0.0;
    asymptotic_branch(order, x, jv, yv);
    return kind == BesselKind::J ? jv : yv;
  }
  const SmallArg s = series_branch(x);
  if (kind == BesselKind::J) {
    return order == 0 ? s.j0 : s.j1;
  }
  return order == 0 ? s.y0 : s.y1;
}

cplx hankel2(int order, double x) {
  check_argument(x);
  check_order(order);
  if (x <= 0.0) {
    throw std::domain_error("hankel2: requires x > 0");
  }
  if (x > kAsymptoticSwitch) {
    double jv = 0.0;
    double yv = 0.0;
    asymptotic_branch(order, x, jv, yv);
    return {jv, -yv};
  }
  const SmallArg s = series_branch(x);
  return order == 0 ? cplx{s.j0, -s.y0} : cplx{s.j1, -s.y1};
}

std::vector<double> bessel_j_sequence(int max_order, double x) {
  check_argument(x);
  if (max_order < 0) {
    throw std::domain_error("bessel_j_sequence: negative order");
  }
  if (x < 0.0) {
    throw std::domain_error("bessel_j_sequence: requires x >= 0");
  }
  std::vector<double> j = miller_j(std::max(max_order, 1), x);
  if (x > kAsymptoticSwitch) {
    // Renormalize against the accurate asymptotic J0 to remove the normalization-sum error.
    const double j0 = bessel(BesselKind::J, 0, x);
    const double j1 = bessel(BesselKind::J, 1, x);
    const double scale = std::abs(j0) > std::abs(j1) ? j0 / j[0] : j1 / j[1];
    for (double& v : j) {
      v *= scale;
    }
  }
  j.resize(static_cast<std::size_t>(max_order) + 1);
  return j;
}

std::vector<double> bessel_y_sequence(int max_order, double x) {
  check_argument(x);
  if (max_order < 0) {
    throw std::domain_error("bessel_y_sequence: negative order");
  }
  if (x <= 0.0) {
    throw std::domain_error("bessel_y_sequence: requires x > 0");
  }
  std::vector<double> y(static_cast<std::size_t>(max_order) + 1);
  y[0] = bessel(BesselKind::Y, 0, x);
  if (max_order >= 1) {
    y[1] = bessel(BesselKind::Y, 1, x);
  }
  for (int n = 1; n < max_order; ++n) {
    y[static_cast<std::size_t>(n + 1)] =
        (2.0 * n / x) * y[static_cast<std::size_t>(n)] - y[static_cast<std::size_t>(n - 1)];
  }
  return y;
}

}  // namespace wifield::specfun
