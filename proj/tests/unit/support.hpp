#pragma once

#include <cmath>
#include <numbers>

#include "wifield/greens.hpp"
#include "wifield/scene.hpp"

namespace wifield::test {

inline double rel_diff(const VectorXc& a, const VectorXc& b) { return (a - b).norm() / b.norm(); }

/// P transmitters and Q receivers evenly spaced on circles around the origin.
inline ArrayLayout ring_array(int p, int q, double r_tx, double r_rx, std::vector<double> tones) {
  ArrayLayout a;
  for (int i = 0; i < p; ++i) {
    const double t = 2.0 * std::numbers::pi * (i + 0.5) / p;
    a.tx.push_back({r_tx * std::cos(t), r_tx * std::sin(t)});
  }
  for (int i = 0; i < q; ++i) {
    const double t = 2.0 * std::numbers::pi * i / q;
    a.rx.push_back({r_rx * std::cos(t), r_rx * std::sin(t)});
  }
  a.tones_hz = std::move(tones);
  return a;
}

inline Scene scene_with(SensingDomain domain, std::vector<Target> targets) {
  Scene s;
  s.domain = domain;
  s.targets = std::move(targets);
  return s;
}

inline Target rect_target(std::uint8_t label, double x, double y, double w, double h) {
  return {label, Rect{{x, y}, w, h}};
}

}  // namespace wifield::test
