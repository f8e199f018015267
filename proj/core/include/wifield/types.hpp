#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace wifield {

using cplx = std::complex<double>;
using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr cplx kJ{0.0, 1.0};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Free-space wavenumber for a frequency in Hz.
inline double wavenumber(double freq_hz) {
  return 2.0 * std::numbers::pi * freq_hz / kSpeedOfLight;
}

inline double wavelength(double freq_hz) { return kSpeedOfLight / freq_hz; }

}  // namespace wifield
