#pragma once

// Straight-ray slab-transmission baseline and its comparison against the full-wave solver.

#include <string>
#include <vector>

#include "wifield/greens.hpp"
#include "wifield/krylov.hpp"
#include "wifield/scene.hpp"

namespace wifield {

/// Normal-incidence transmission through a slab of thickness w relative to free space:
/// t1 t2 e^{-j(k - k0) w} / (1 + r1 r2 e^{-2jkw}), with k = sqrt(eps_r) k0.
cplx slab_transmission(cplx eps_r, double k0, double thickness);

/// Length of the segment a-b lying inside the shape.
double chord_length(const Shape& shape, Point2 a, Point2 b);

/// Incident field along tx -> rx times the slab transmission of every target the segment
/// crosses (chord length as thickness). No diffraction. Throws ConfigError when tx or rx
/// lies inside or on a target.
cplx ray_predict(const Scene& scene, Point2 tx, Point2 rx, double k0, const AntennaModel& antenna = {});

struct RayComparisonConfig {
  double freq_hz = 5e9;
  double target_width = 0.1;  // along the tx-rx axis
  double eps_r = 10.0;
  Point2 tx{0.0, 0.0};
  double center_distance = 3.0;  // tx to target centre along +x
  std::vector<double> l_over_lambda{0.5, 1.0, 2.0, 3.0, 5.0, 7.5, 10.0, 12.5, 15.0};
  std::vector<double> d_values{0.1, 0.2, 0.3, 0.4, 0.5};  // receiver distance behind the target
  // Each l uses the finest mesh in [min, max] cells across the width whose cell count
  // stays within max_unknowns; the longest targets fall back to min_cells_per_width.
  int min_cells_per_width = 52;
  int max_cells_per_width = 240;
  long max_unknowns = 25000;
  AntennaModel antenna{IncidentMode::Line2d, {1.0, 0.0}};
  GmresOptions gmres{1e-7, 2000, 20000, std::size_t{1} << 30};

  void validate() const;
};

struct RayComparison {
  std::vector<double> l_over_lambda;
  std::vector<double> d_values;
  Eigen::MatrixXd rel_err;    // | |E_ray| - |E_field| | / |E_field|, rows l, cols d
  Eigen::MatrixXd ray_amp;
  Eigen::MatrixXd field_amp;
  std::vector<int> gmres_iterations;  // per l
  std::vector<int> cells_per_width;   // per l

  double row_mean(std::size_t l_index) const { return rel_err.row(static_cast<Eigen::Index>(l_index)).mean(); }
  double row_max(std::size_t l_index) const { return rel_err.row(static_cast<Eigen::Index>(l_index)).maxCoeff(); }
  std::size_t index_of(double l_over_lambda) const;

  /// Header "l_over_lambda,d_m,rel_err".
  std::string to_csv() const;
  /// {"max_err_at_halflambda", "err_at_15lambda", ...}; missing rows are omitted.
  std::string summary_json() const;
};

int mesh_cells_per_width(const RayComparisonConfig& config, std::size_t l_index);

/// Target of width w along x and length l along y, meshed with square cells
/// (l rounded to an even number of cells). The field reference is
/// the full-wave total field at each receiver.
RayComparison compare_models(const RayComparisonConfig& config);

}  // namespace wifield
