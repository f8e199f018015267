#pragma once

#include <vector>

#include "wifield/forward.hpp"
#include "wifield/types.hpp"

namespace wifield {

struct CylinderOracleOptions {
  Point2 center{0.0, 0.0};
  cplx amplitude{1.0, 0.0};  // line-source constant C
  double term_tolerance = 1e-12;
  int max_terms = 200;
};

/// Scattered field of a homogeneous dielectric cylinder (real eps_r) under line-source
/// incidence C (-j/4) H0^(2)(k0 |r - r_src|), by the cylindrical-harmonic series.
/// Throws NumericError if the series has not converged after max_terms orders.
VectorXc cylinder_oracle(double radius, double eps_r, double k0, Point2 source,
                         const std::vector<Point2>& rx, const CylinderOracleOptions& options = {});

/// Cylinder centred at the origin, line source at (-source_distance, 0) and a ring of
/// receivers; the MoM grid spans the cylinder's bounding box. Lengths in wavelengths.
struct CylinderCase {
  double freq_hz = 2.4e9;
  double radius = 0.25;
  double eps_r = 2.0;
  int n = 40;
  int rx_count = 40;
  double ring_radius = 1.5;
  double source_distance = 2.0;
  SolverOptions solver{};
};

struct CylinderComparison {
  std::vector<Point2> rx;
  VectorXc oracle;
  VectorXc mom;
  double rel_err = 0.0;    // ||mom - oracle|| / ||oracle||
  double residual = 0.0;   // discrete total-field residual of the MoM solve
  double seconds = 0.0;    // operator assembly plus solve
};

CylinderComparison compare_cylinder(const CylinderCase& c);

}  // namespace wifield
