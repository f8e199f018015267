#include "wifield/greens.hpp"

#include <cmath>
#include <numbers>

#include "json_util.hpp"
#include "wifield/error.hpp"
#include "wifield/parallel.hpp"
#include "wifield/specfun.hpp"

namespace wifield {

using detail::json;

std::string to_string(IncidentMode mode) {
  return mode == IncidentMode::Antenna3d ? "antenna3d" : "line2d";
}

IncidentMode parse_incident_mode(std::string_view text) {
  if (text == "antenna3d") {
    return IncidentMode::Antenna3d;
  }
  if (text == "line2d") {
    return IncidentMode::Line2d;
  }
  throw ConfigError("unknown incident mode \"" + std::string(text) + "\" (antenna3d|line2d)");
}

void AntennaModel::validate() const {
  if (amplitude == cplx{0.0, 0.0} || !std::isfinite(amplitude.real()) ||
      !std::isfinite(amplitude.imag())) {
    throw ConfigError("antenna amplitude must be finite and non-zero");
  }
}

void ArrayLayout::validate(const SensingDomain& domain) const {
  if (tx.empty() || rx.empty()) {
    throw ConfigError("array needs at least one transmitter and one receiver");
  }
  if (tones_hz.empty()) {
    throw ConfigError("array needs at least one tone");
  }
  for (std::size_t i = 0; i < tones_hz.size(); ++i) {
    if (!(tones_hz[i] > 0.0) || !std::isfinite(tones_hz[i])) {
      throw ConfigError("tones must be positive and finite");
    }
    if (i > 0 && !(tones_hz[i] > tones_hz[i - 1])) {
      throw ConfigError("tones must be strictly increasing");
    }
  }
  auto check = [&](const std::vector<Point2>& pts, const char* what) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (!std::isfinite(pts[i].x) || !std::isfinite(pts[i].y)) {
        throw ConfigError(std::string(what) + " " + std::to_string(i) + " is not finite");
      }
      if (domain.contains(pts[i])) {
        throw ConfigError(std::string(what) + " " + std::to_string(i) +
                          " lies inside the sensing domain");
      }
    }
  };
  check(tx, "transmitter");
  check(rx, "receiver");
}

ArrayLayout parse_array(std::string_view json_text) {
  const json doc = detail::parse_json(json_text, "array");
  ArrayLayout a;
  auto points = [&](const char* key) {
    const json& arr = detail::member(doc, key, "array");
    if (!arr.is_array()) {
      throw ConfigError(std::string("array.") + key + " must be an array");
    }
    std::vector<Point2> pts;
    for (const json& p : arr) {
      pts.push_back(detail::point_from_json(p, key));
    }
    return pts;
  };
  a.tx = points("tx");
  a.rx = points("rx");
  a.tones_hz = detail::require<std::vector<double>>(doc, "tones_hz", "array");
  return a;
}

std::string array_to_json(const ArrayLayout& array) {
  json doc;
  doc["tx"] = json::array();
  for (Point2 p : array.tx) {
    doc["tx"].push_back(detail::point_to_json(p));
  }
  doc["rx"] = json::array();
  for (Point2 p : array.rx) {
    doc["rx"].push_back(detail::point_to_json(p));
  }
  doc["tones_hz"] = array.tones_hz;
  return doc.dump(2);
}

ArrayLayout load_array(const std::filesystem::path& path) {
  return parse_array(detail::read_text_file(path));
}

void save_array(const ArrayLayout& array, const std::filesystem::path& path) {
  detail::write_text_file(path, array_to_json(array) + "\n");
}

cplx green2d(double k0, double r) { return cplx{0.0, -0.25} * specfun::hankel2(0, k0 * r); }

cplx self_term(double k0, double cell_size) {
  const double a = cell_size / std::sqrt(std::numbers::pi);
  const double ka = k0 * a;
  return cplx{0.0, -0.5} * (std::numbers::pi * ka * specfun::hankel2(1, ka) - cplx{0.0, 2.0});
}

VectorXc incident_field(const AntennaModel& model, Point2 source, const std::vector<Point2>& points,
                        double k0) {
  VectorXc out(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double r = distance(source, points[i]);
    if (!(r > 0.0)) {
      throw ConfigError("incident_field: evaluation point coincides with the source");
    }
    if (model.mode == IncidentMode::Antenna3d) {
      out[static_cast<Eigen::Index>(i)] = model.amplitude * std::exp(cplx{0.0, -k0 * r}) / r;
    } else {
      out[static_cast<Eigen::Index>(i)] = model.amplitude * green2d(k0, r);
    }
  }
  return out;
}

GreenTable::GreenTable(const SensingDomain& domain, double k0) : n_(domain.n), k0_(k0) {
  domain.validate();
  if (!(k0 > 0.0)) {
    throw ConfigError("wavenumber must be positive");
  }
  const double d = domain.cell_size();
  const double scale = k0 * k0 * d * d;
  table_.assign(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_), cplx{});
  for (int r = 0; r < n_; ++r) {
    for (int c = 0; c < n_; ++c) {
      // The table is symmetric in (r, c); fill the lower triangle and mirror.
      if (c > r) {
        continue;
      }
      const cplx v = (r == 0 && c == 0) ? self_term(k0, d) : scale * green2d(k0, d * std::hypot(r, c));
      table_[static_cast<std::size_t>(r * n_ + c)] = v;
      table_[static_cast<std::size_t>(c * n_ + r)] = v;
    }
  }
}

MatrixXc GreenTable::block(const std::vector<int>& rows, const std::vector<int>& cols) const {
  MatrixXc out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*this)(rows[i], cols[j]);
    }
  }
  return out;
}

MatrixXc GreenTable::dense() const {
  const int cells = n_ * n_;
  MatrixXc out(cells, cells);
  for (int k = 0; k < cells; ++k) {
    for (int m = 0; m < cells; ++m) {
      out(m, k) = (*this)(m, k);
    }
  }
  return out;
}

MatrixXc assemble_gs(const SensingDomain& domain, double k0) { return GreenTable(domain, k0).dense(); }

std::vector<Point2> cell_centers(const SensingDomain& domain) {
  std::vector<Point2> pts(static_cast<std::size_t>(domain.cell_count()));
  for (int i = 0; i < domain.cell_count(); ++i) {
    pts[static_cast<std::size_t>(i)] = domain.cell_center(i);
  }
  return pts;
}

MatrixXc assemble_go(const SensingDomain& domain, const std::vector<Point2>& rx, double k0) {
  domain.validate();
  if (!(k0 > 0.0)) {
    throw ConfigError("wavenumber must be positive");
  }
  const double d = domain.cell_size();
  const double scale = k0 * k0 * d * d;
  const int cells = domain.cell_count();
  MatrixXc go(static_cast<Eigen::Index>(rx.size()), cells);
  for (std::size_t q = 0; q < rx.size(); ++q) {
    if (domain.contains(rx[q])) {
      throw ConfigError("receiver " + std::to_string(q) + " lies inside the sensing domain");
    }
    for (int n = 0; n < cells; ++n) {
      go(static_cast<Eigen::Index>(q), n) = scale * green2d(k0, distance(rx[q], domain.cell_center(n)));
    }
  }
  return go;
}

bool grid_too_coarse(const SensingDomain& domain, double k0) {
  return domain.cell_size() > 0.25 * (2.0 * std::numbers::pi / k0);
}

OperatorSet build_operators(const SensingDomain& domain, const ArrayLayout& array,
                            const AntennaModel& antenna) {
  domain.validate();
  array.validate(domain);
  antenna.validate();
  OperatorSet ops{domain, array, antenna, std::vector<ToneOperators>(array.tones_hz.size())};
  const std::vector<Point2> centers = cell_centers(domain);
  parallel_for(array.tones_hz.size(), [&](std::size_t t) {
    ToneOperators& op = ops.tones[t];
    op.freq_hz = array.tones_hz[t];
    op.k0 = wavenumber(op.freq_hz);
    op.gs = GreenTable(domain, op.k0);
    op.go = assemble_go(domain, array.rx, op.k0);
    op.ei_cells.resize(static_cast<Eigen::Index>(array.tx.size()), domain.cell_count());
    op.ei_rx.resize(static_cast<Eigen::Index>(array.tx.size()),
                    static_cast<Eigen::Index>(array.rx.size()));
    for (std::size_t p = 0; p < array.tx.size(); ++p) {
      const auto pi = static_cast<Eigen::Index>(p);
      op.ei_cells.row(pi) = incident_field(antenna, array.tx[p], centers, op.k0).transpose();
      op.ei_rx.row(pi) = incident_field(antenna, array.tx[p], array.rx, op.k0).transpose();
    }
  });
  return ops;
}

}  // namespace wifield
