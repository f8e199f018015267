#include "wifield/raybase.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json_util.hpp"
#include "wifield/error.hpp"
#include "wifield/parallel.hpp"
#include "wifield/toeplitz.hpp"

namespace wifield {

using detail::json;

namespace {

int slab_rows(double length, double delta) {
  return std::max(2, 2 * static_cast<int>(std::lround(0.5 * length / delta)));
}

}  // namespace

int mesh_cells_per_width(const RayComparisonConfig& config, std::size_t l_index) {
  const double length = config.l_over_lambda.at(l_index) * wavelength(config.freq_hz);
  for (int c = config.max_cells_per_width; c > config.min_cells_per_width; --c) {
    const double unknowns = static_cast<double>(c) * slab_rows(length, config.target_width / c);
    if (unknowns <= static_cast<double>(config.max_unknowns)) {
      return c;
    }
  }
  return config.min_cells_per_width;
}

cplx slab_transmission(cplx eps_r, double k0, double thickness) {
  const cplx n = std::sqrt(eps_r);
  const cplx r1 = (1.0 - n) / (1.0 + n);
  const cplx r2 = (n - 1.0) / (n + 1.0);
  const cplx t1t2 = 4.0 * n / ((1.0 + n) * (1.0 + n));
  const cplx k = n * k0;
  return t1t2 * std::exp(-kJ * (k - k0) * thickness) / (1.0 + r1 * r2 * std::exp(-2.0 * kJ * k * thickness));
}

double chord_length(const Shape& shape, Point2 a, Point2 b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len = std::hypot(dx, dy);
  if (len == 0.0) {
    return 0.0;
  }
  double t0 = 0.0;
  double t1 = 1.0;
  if (const auto* r = std::get_if<Rect>(&shape)) {
    // Liang-Barsky clipping against the slab pairs.
    auto clip = [&](double p, double q) {
      if (p == 0.0) {
        return q >= 0.0;
      }
      const double t = q / p;
      if (p < 0.0) {
        t0 = std::max(t0, t);
      } else {
        t1 = std::min(t1, t);
      }
      return t0 <= t1;
    };
    const double x0 = r->center.x - 0.5 * r->width, x1 = r->center.x + 0.5 * r->width;
    const double y0 = r->center.y - 0.5 * r->height, y1 = r->center.y + 0.5 * r->height;
    if (!clip(-dx, a.x - x0) || !clip(dx, x1 - a.x) || !clip(-dy, a.y - y0) || !clip(dy, y1 - a.y)) {
      return 0.0;
    }
    return (t1 - t0) * len;
  }
  const auto& c = std::get<Circle>(shape);
  const double fx = a.x - c.center.x;
  const double fy = a.y - c.center.y;
  const double qa = dx * dx + dy * dy;
  const double qb = 2.0 * (fx * dx + fy * dy);
  const double qc = fx * fx + fy * fy - c.radius * c.radius;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc <= 0.0) {
    return 0.0;
  }
  const double s = std::sqrt(disc);
  t0 = std::max(0.0, (-qb - s) / (2.0 * qa));
  t1 = std::min(1.0, (-qb + s) / (2.0 * qa));
  return t1 > t0 ? (t1 - t0) * len : 0.0;
}

cplx ray_predict(const Scene& scene, Point2 tx, Point2 rx, double k0, const AntennaModel& antenna) {
  antenna.validate();
  for (const Target& t : scene.targets) {
    if (shape_contains(t.shape, tx) || shape_contains(t.shape, rx)) {
      throw ConfigError("ray_predict: antenna inside or on the boundary of a target");
    }
  }
  cplx field = incident_field(antenna, tx, {rx}, k0)[0];
  for (const Target& t : scene.targets) {
    const double w = chord_length(t.shape, tx, rx);
    if (w > 0.0) {
      field *= slab_transmission(scene.materials.at(t.label).relative_permittivity, k0, w);
    }
  }
  return field;
}

void RayComparisonConfig::validate() const {
  if (!(freq_hz > 0.0) || !(target_width > 0.0) || !(eps_r > 0.0) || !(center_distance > 0.0)) {
    throw ConfigError("ray comparison: frequency, width, eps_r and distance must be positive");
  }
  if (l_over_lambda.empty() || d_values.empty()) {
    throw ConfigError("ray comparison: empty l or d grid");
  }
  for (double l : l_over_lambda) {
    if (!(l > 0.0)) {
      throw ConfigError("ray comparison: l values must be positive");
    }
  }
  for (double d : d_values) {
    if (!(d > 0.0)) {
      throw ConfigError("ray comparison: d values must be positive");
    }
  }
  if (min_cells_per_width < 2 || max_cells_per_width < min_cells_per_width || max_unknowns <= 0) {
    throw ConfigError("ray comparison: need 2 <= min_cells_per_width <= max_cells_per_width and a positive budget");
  }
  antenna.validate();
}

std::size_t RayComparison::index_of(double l) const {
  for (std::size_t i = 0; i < l_over_lambda.size(); ++i) {
    if (std::abs(l_over_lambda[i] - l) < 1e-9) {
      return i;
    }
  }
  throw ConfigError("ray comparison has no row for l = " + std::to_string(l) + " lambda");
}

std::string RayComparison::to_csv() const {
  std::ostringstream out;
  out.precision(10);
  out << "l_over_lambda,d_m,rel_err\n";
  for (std::size_t i = 0; i < l_over_lambda.size(); ++i) {
    for (std::size_t j = 0; j < d_values.size(); ++j) {
      out << l_over_lambda[i] << ',' << d_values[j] << ','
          << rel_err(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) << '\n';
    }
  }
  return out.str();
}

std::string RayComparison::summary_json() const {
  json doc;
  auto find = [&](double l) -> std::ptrdiff_t {
    for (std::size_t i = 0; i < l_over_lambda.size(); ++i) {
      if (std::abs(l_over_lambda[i] - l) < 1e-9) {
        return static_cast<std::ptrdiff_t>(i);
      }
    }
    return -1;
  };
  if (const auto i = find(0.5); i >= 0) {
    doc["max_err_at_halflambda"] = row_max(static_cast<std::size_t>(i));
    doc["mean_err_at_halflambda"] = row_mean(static_cast<std::size_t>(i));
  }
  if (const auto i = find(15.0); i >= 0) {
    doc["err_at_15lambda"] = row_mean(static_cast<std::size_t>(i));
    doc["max_err_at_15lambda"] = row_max(static_cast<std::size_t>(i));
  }
  json rows = json::array();
  for (std::size_t i = 0; i < l_over_lambda.size(); ++i) {
    rows.push_back({{"l_over_lambda", l_over_lambda[i]},
                    {"mean", row_mean(i)},
                    {"max", row_max(i)},
                    {"cells_per_width", cells_per_width[i]},
                    {"gmres_iterations", gmres_iterations[i]}});
  }
  doc["rows"] = std::move(rows);
  return doc.dump(2);
}

RayComparison compare_models(const RayComparisonConfig& config) {
  config.validate();
  const double k0 = wavenumber(config.freq_hz);
  const double lambda = wavelength(config.freq_hz);
  const double x_left = config.tx.x + config.center_distance - 0.5 * config.target_width;
  const cplx chi = config.eps_r - 1.0;

  RayComparison out;
  out.l_over_lambda = config.l_over_lambda;
  out.d_values = config.d_values;
  const auto n_l = static_cast<Eigen::Index>(config.l_over_lambda.size());
  const auto n_d = static_cast<Eigen::Index>(config.d_values.size());
  out.rel_err.resize(n_l, n_d);
  out.ray_amp.resize(n_l, n_d);
  out.field_amp.resize(n_l, n_d);
  out.gmres_iterations.assign(config.l_over_lambda.size(), 0);
  out.cells_per_width.assign(config.l_over_lambda.size(), 0);

  std::vector<Point2> receivers;
  for (double d : config.d_values) {
    receivers.push_back({x_left + config.target_width + d, config.tx.y});
  }

  parallel_for(config.l_over_lambda.size(), [&](std::size_t li) {
    const double length = config.l_over_lambda[li] * lambda;
    const int cols = mesh_cells_per_width(config, li);  // along x
    const double delta = config.target_width / cols;
    const int rows = slab_rows(length, delta);  // along y, always even
    const int half = rows / 2;
    const double y_bottom = config.tx.y - 0.5 * rows * delta;

    // The Green table only needs cell offsets, so any square domain with the same pitch works.
    const int n_side = std::max(rows, cols);
    const SensingDomain pitch{{0.0, 0.0}, n_side * delta, n_side};
    const GreenTable table(pitch, k0);
    const GridWindow window{0, 0, rows, cols};
    const ToeplitzConvolver conv(table, window, window);

    std::vector<Point2> centers(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        centers[static_cast<std::size_t>(r * cols + c)] = {x_left + (c + 0.5) * delta, y_bottom + (r + 0.5) * delta};
      }
    }
    // The source sits on the slab axis, so the field is even in y: solve for the upper
    // half of the rows and mirror.
    const auto half_size = static_cast<Eigen::Index>(half) * cols;
    auto mirror = [&](const VectorXc& upper) {
      VectorXc full(static_cast<Eigen::Index>(rows) * cols);
      for (int r = 0; r < half; ++r) {
        const auto src = upper.segment(static_cast<Eigen::Index>(r) * cols, cols);
        full.segment(static_cast<Eigen::Index>(half + r) * cols, cols) = src;
        full.segment(static_cast<Eigen::Index>(half - 1 - r) * cols, cols) = src;
      }
      return full;
    };
    const VectorXc e_i_full = incident_field(config.antenna, config.tx, centers, k0);
    const VectorXc e_i = e_i_full.tail(half_size);
    VectorXc tmp;
    const LinearOperator apply = [&](const VectorXc& x, VectorXc& y) {
      conv.apply(mirror(chi * x), tmp);
      y = x - tmp.tail(half_size);
    };
    const GmresResult sol = gmres(apply, e_i, config.gmres);
    if (!sol.converged) {
      throw NumericError("compare_models: GMRES did not converge at l = " +
                         std::to_string(config.l_over_lambda[li]) + " lambda (relative residual " +
                         std::to_string(sol.relative_residual) + ")");
    }
    out.gmres_iterations[li] = sol.iterations;
    out.cells_per_width[li] = cols;
    const VectorXc current = chi * mirror(sol.x);

    Scene slab;
    slab.domain = {{x_left, y_bottom}, std::max(config.target_width, rows * delta), 2};
    slab.materials[1] = {"slab", 1, {config.eps_r, 0.0}};
    slab.targets.push_back({1, Rect{{x_left + 0.5 * config.target_width, config.tx.y}, config.target_width, rows * delta}});

    const double scale = k0 * k0 * delta * delta;
    for (Eigen::Index j = 0; j < n_d; ++j) {
      const Point2 rx = receivers[static_cast<std::size_t>(j)];
      cplx scattered{0.0, 0.0};
      for (std::size_t c = 0; c < centers.size(); ++c) {
        scattered += scale * green2d(k0, distance(rx, centers[c])) * current[static_cast<Eigen::Index>(c)];
      }
      const cplx field = incident_field(config.antenna, config.tx, {rx}, k0)[0] + scattered;
      const cplx ray = ray_predict(slab, config.tx, rx, k0, config.antenna);
      const auto li_ = static_cast<Eigen::Index>(li);
      out.field_amp(li_, j) = std::abs(field);
      out.ray_amp(li_, j) = std::abs(ray);
      out.rel_err(li_, j) = std::abs(std::abs(ray) - std::abs(field)) / std::abs(field);
    }
  });
  return out;
}

}  // namespace wifield
