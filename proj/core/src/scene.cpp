#include "wifield/scene.hpp"

#include <cmath>
#include <string>

#include "json_util.hpp"
#include "wifield/error.hpp"

namespace wifield {

using detail::json;

namespace {

constexpr double kBoundsSlack = 1e-12;

struct Bounds {
  double x0, y0, x1, y1;
};

Bounds shape_bounds(const Shape& shape) {
  if (const auto* r = std::get_if<Rect>(&shape)) {
    return {r->center.x - 0.5 * r->width, r->center.y - 0.5 * r->height,
            r->center.x + 0.5 * r->width, r->center.y + 0.5 * r->height};
  }
  const auto& c = std::get<Circle>(shape);
  return {c.center.x - c.radius, c.center.y - c.radius, c.center.x + c.radius,
          c.center.y + c.radius};
}

bool shape_is_degenerate(const Shape& shape) {
  if (const auto* r = std::get_if<Rect>(&shape)) {
    return !(r->width > 0.0) || !(r->height > 0.0) || !std::isfinite(r->width) ||
           !std::isfinite(r->height);
  }
  const auto& c = std::get<Circle>(shape);
  return !(c.radius > 0.0) || !std::isfinite(c.radius);
}

}  // namespace

std::map<std::uint8_t, Material> default_materials() {
  return {
      {0, {"air", 0, {1.0, 0.0}}},
      {1, {"wood", 1, {2.2, -0.1}}},
      {2, {"glass", 2, {5.5, -0.05}}},
      {3, {"rubber", 3, {3.0, -0.3}}},
  };
}

Point2 SensingDomain::cell_center(int index) const { return cell_center(index / n, index % n); }

Point2 SensingDomain::cell_center(int row, int col) const {
  const double d = cell_size();
  return {origin.x + (col + 0.5) * d, origin.y + (row + 0.5) * d};
}

bool SensingDomain::contains(Point2 p) const {
  return p.x >= origin.x && p.x <= origin.x + side && p.y >= origin.y && p.y <= origin.y + side;
}

void SensingDomain::validate() const {
  if (n < 2) {
    throw ConfigError("domain: n must be at least 2");
  }
  if (!(side > 0.0) || !std::isfinite(side)) {
    throw ConfigError("domain: side must be positive and finite");
  }
  if (!std::isfinite(origin.x) || !std::isfinite(origin.y)) {
    throw ConfigError("domain: origin must be finite");
  }
}

bool shape_contains(const Shape& shape, Point2 p) {
  if (const auto* r = std::get_if<Rect>(&shape)) {
    return std::abs(p.x - r->center.x) <= 0.5 * r->width &&
           std::abs(p.y - r->center.y) <= 0.5 * r->height;
  }
  const auto& c = std::get<Circle>(shape);
  const double dx = p.x - c.center.x;
  const double dy = p.y - c.center.y;
  return dx * dx + dy * dy <= c.radius * c.radius;
}

void Scene::validate(std::size_t max_targets) const {
  domain.validate();
  for (const auto& [label, m] : materials) {
    if (m.label != label) {
      throw ConfigError("material table key " + std::to_string(label) + " does not match its label");
    }
    const cplx eps = m.relative_permittivity;
    if (!std::isfinite(eps.real()) || !std::isfinite(eps.imag())) {
      throw ConfigError("material " + m.name + ": non-finite permittivity");
    }
    if (label == 0 && eps != cplx{1.0, 0.0}) {
      throw ConfigError("label 0 is reserved for air with permittivity 1+0j");
    }
    if (eps.imag() > 0.0) {
      throw ConfigError("material " + m.name + ": imaginary permittivity must be <= 0");
    }
  }
  if (targets.size() > max_targets) {
    throw ConfigError("scene has " + std::to_string(targets.size()) + " targets, limit is " +
                      std::to_string(max_targets));
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const Target& t = targets[i];
    if (!materials.contains(t.label)) {
      throw ConfigError("target " + std::to_string(i) + ": unknown material label " +
                        std::to_string(t.label));
    }
    if (shape_is_degenerate(t.shape)) {
      throw ConfigError("target " + std::to_string(i) + ": non-positive size");
    }
    const Bounds b = shape_bounds(t.shape);
    const double slack = kBoundsSlack * std::max(1.0, domain.side);
    if (b.x0 < domain.origin.x - slack || b.y0 < domain.origin.y - slack ||
        b.x1 > domain.origin.x + domain.side + slack ||
        b.y1 > domain.origin.y + domain.side + slack) {
      throw ConfigError("target " + std::to_string(i) + " lies outside the sensing domain");
    }
  }
}

std::pair<ContrastGrid, LabelGrid> rasterize(const Scene& scene) {
  scene.validate(std::max(scene.targets.size(), Scene::kDefaultMaxTargets));
  const SensingDomain& dom = scene.domain;
  const int cells = dom.cell_count();

  ContrastGrid grid{dom, VectorXc::Zero(cells)};
  LabelGrid labels{dom.n, std::vector<std::uint8_t>(static_cast<std::size_t>(cells), 0)};

  for (const Target& t : scene.targets) {
    const cplx chi = scene.materials.at(t.label).relative_permittivity - 1.0;
    for (int i = 0; i < cells; ++i) {
      if (shape_contains(t.shape, dom.cell_center(i))) {
        grid.chi[i] = t.label == 0 ? cplx{0.0, 0.0} : chi;
        labels.labels[static_cast<std::size_t>(i)] = t.label;
      }
    }
  }
  return {std::move(grid), std::move(labels)};
}

Scene parse_scene(std::string_view json_text) {
  const json doc = detail::parse_json(json_text, "scene");
  if (!doc.is_object()) {
    throw ConfigError("scene: top level must be an object");
  }
  Scene scene;
  if (doc.contains("domain")) {
    const json& d = doc.at("domain");
    if (d.contains("origin")) {
      scene.domain.origin = detail::point_from_json(d.at("origin"), "scene.domain.origin");
    }
    if (d.contains("side")) {
      scene.domain.side = detail::require<double>(d, "side", "scene.domain");
    }
    if (d.contains("n")) {
      scene.domain.n = detail::require<int>(d, "n", "scene.domain");
    }
  }
  if (doc.contains("materials")) {
    const json& ms = doc.at("materials");
    if (!ms.is_array()) {
      throw ConfigError("scene.materials must be an array");
    }
    // Listed materials override or extend the defaults.
    for (const json& m : ms) {
      Material mat;
      mat.name = detail::require<std::string>(m, "name", "scene.materials");
      const int label = detail::require<int>(m, "label", "scene.materials");
      if (label < 0 || label > 255) {
        throw ConfigError("scene.materials: label out of range");
      }
      mat.label = static_cast<std::uint8_t>(label);
      if (!m.contains("eps")) {
        throw ConfigError("scene.materials: missing \"eps\"");
      }
      mat.relative_permittivity = detail::complex_from_json(m.at("eps"), "scene.materials.eps");
      scene.materials[mat.label] = mat;
    }
  }
  if (doc.contains("targets")) {
    const json& ts = doc.at("targets");
    if (!ts.is_array()) {
      throw ConfigError("scene.targets must be an array");
    }
    for (const json& t : ts) {
      Target target;
      const int label = detail::require<int>(t, "label", "scene.targets");
      if (label < 0 || label > 255) {
        throw ConfigError("scene.targets: label out of range");
      }
      target.label = static_cast<std::uint8_t>(label);
      if (t.contains("rect")) {
        const json& r = t.at("rect");
        target.shape = Rect{detail::point_from_json(detail::member(r, "center", "rect"), "rect.center"),
                            detail::require<double>(r, "w", "rect"),
                            detail::require<double>(r, "h", "rect")};
      } else if (t.contains("circle")) {
        const json& c = t.at("circle");
        target.shape = Circle{detail::point_from_json(detail::member(c, "center", "circle"), "circle.center"),
                              detail::require<double>(c, "r", "circle")};
      } else {
        throw ConfigError("scene.targets: each target needs \"rect\" or \"circle\"");
      }
      scene.targets.push_back(target);
    }
  }
  scene.validate();
  return scene;
}

std::string scene_to_json(const Scene& scene) {
  json doc;
  doc["domain"] = {{"origin", detail::point_to_json(scene.domain.origin)},
                   {"side", scene.domain.side},
                   {"n", scene.domain.n}};
  json ms = json::array();
  for (const auto& [label, m] : scene.materials) {
    ms.push_back({{"name", m.name}, {"label", label}, {"eps", detail::complex_to_json(m.relative_permittivity)}});
  }
  doc["materials"] = ms;
  json ts = json::array();
  for (const Target& t : scene.targets) {
    json jt{{"label", t.label}};
    if (const auto* r = std::get_if<Rect>(&t.shape)) {
      jt["rect"] = {{"center", detail::point_to_json(r->center)}, {"w", r->width}, {"h", r->height}};
    } else {
      const auto& c = std::get<Circle>(t.shape);
      jt["circle"] = {{"center", detail::point_to_json(c.center)}, {"r", c.radius}};
    }
    ts.push_back(jt);
  }
  doc["targets"] = ts;
  return doc.dump(2);
}

Scene load_scene(const std::filesystem::path& path) {
  return parse_scene(detail::read_text_file(path));
}

void save_scene(const Scene& scene, const std::filesystem::path& path) {
  detail::write_text_file(path, scene_to_json(scene) + "\n");
}

}  // namespace wifield
