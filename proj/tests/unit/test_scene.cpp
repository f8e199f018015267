#include <doctest.h>

#include <set>

#include "support.hpp"
#include "wifield/error.hpp"
#include "wifield/scene.hpp"

using namespace wifield;
using namespace wifield::test;

TEST_SUITE("scene") {
  TEST_CASE("empty scene rasterizes to air") {
    const auto [grid, labels] = rasterize(Scene{});
    CHECK(grid.chi.size() == 1600);
    CHECK(grid.chi.isZero(0.0));
    CHECK(labels.n == 40);
    CHECK(std::all_of(labels.labels.begin(), labels.labels.end(), [](auto v) { return v == 0; }));
  }

  TEST_CASE("rectangle occupancy matches a brute-force count") {
    const SensingDomain d;
    const Point2 c = d.cell_center(20, 17);
    const Rect r{c, 0.05, 0.10};
    const Scene s = scene_with(d, {{1, r}});
    const auto [grid, labels] = rasterize(s);
    int brute = 0;
    for (int i = 0; i < d.cell_count(); ++i) {
      const Point2 p = d.cell_center(i);
      brute += std::abs(p.x - c.x) <= 0.025 && std::abs(p.y - c.y) <= 0.05;
    }
    const auto occupied = std::count_if(labels.labels.begin(), labels.labels.end(), [](auto v) { return v != 0; });
    CHECK(occupied == brute);
    CHECK(brute == 3);
    for (int i = 0; i < d.cell_count(); ++i) {
      CHECK((labels.labels[i] == 0) == (grid.chi[i] == cplx{0.0, 0.0}));
    }
  }

  TEST_CASE("later targets win on overlap") {
    const Scene s = scene_with({}, {rect_target(1, 0.0, 0.0, 0.2, 0.2), rect_target(2, 0.05, 0.0, 0.1, 0.1)});
    const auto [grid, labels] = rasterize(s);
    const SensingDomain d;
    for (int i = 0; i < d.cell_count(); ++i) {
      const Point2 p = d.cell_center(i);
      if (std::abs(p.x - 0.05) <= 0.05 && std::abs(p.y) <= 0.05) {
        CHECK(labels.labels[i] == 2);
        CHECK(grid.chi[i] == s.materials.at(2).relative_permittivity - 1.0);
      }
    }
  }

  TEST_CASE("translating by one pitch shifts the occupied set by one column") {
    const SensingDomain d;
    const double h = d.cell_size();
    const Point2 c = d.cell_center(12, 12);
    auto occupied = [&](double dx) {
      const auto labels = rasterize(scene_with(d, {rect_target(3, c.x + dx, c.y, 0.05, 0.1)})).second;
      std::set<int> cells;
      for (int i = 0; i < d.cell_count(); ++i) {
        if (labels.labels[i] != 0) {
          cells.insert(i);
        }
      }
      return cells;
    };
    std::set<int> shifted;
    for (int i : occupied(0.0)) {
      shifted.insert(i + 1);
    }
    CHECK(occupied(h) == shifted);
  }

  TEST_CASE("rasterize is deterministic") {
    const Scene s = scene_with({}, {{2, Circle{{0.1, -0.2}, 0.07}}, rect_target(1, -0.3, 0.3, 0.05, 0.1)});
    const auto a = rasterize(s);
    const auto b = rasterize(s);
    CHECK(a.first.chi == b.first.chi);
    CHECK(a.second.labels == b.second.labels);
  }

  TEST_CASE("cell geometry") {
    const SensingDomain d;
    CHECK(d.cell_size() == doctest::Approx(0.02625));
    const Point2 p0 = d.cell_center(0);
    CHECK(p0.x == doctest::Approx(-0.525 + 0.013125));
    CHECK(p0.y == doctest::Approx(-0.525 + 0.013125));
    const Point2 p1 = d.cell_center(1);
    CHECK(p1.x > p0.x);
    CHECK(d.cell_center(40).y > p0.y);
  }

  TEST_CASE("validation") {
    Scene s = scene_with({}, {rect_target(1, 0.5, 0.0, 0.1, 0.1)});
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.targets = {rect_target(9, 0.0, 0.0, 0.1, 0.1)};
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.targets = {rect_target(1, 0.0, 0.0, 0.0, 0.1)};
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.targets = {rect_target(1, 0.0, 0.0, 0.1, 0.1)};
    s.materials[1].relative_permittivity = {2.0, 0.5};
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.materials = default_materials();
    s.materials[0].relative_permittivity = {1.1, 0.0};
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.materials = default_materials();
    s.targets.assign(9, rect_target(1, 0.0, 0.0, 0.05, 0.05));
    CHECK_THROWS_AS(s.validate(), ConfigError);
    CHECK_NOTHROW(s.validate(9));
    SensingDomain bad;
    bad.n = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
  }

  TEST_CASE("JSON round trip") {
    Scene s = scene_with({{-0.5, -0.5}, 1.0, 20}, {rect_target(1, 0.1, 0.2, 0.05, 0.1), {3, Circle{{-0.2, 0.1}, 0.05}}});
    s.materials[2].relative_permittivity = {4.0, -0.25};
    const Scene back = parse_scene(scene_to_json(s));
    CHECK(back.domain == s.domain);
    CHECK(back.targets.size() == 2);
    CHECK(back.materials.at(2).relative_permittivity == cplx{4.0, -0.25});
    CHECK(rasterize(back).first.chi == rasterize(s).first.chi);
    CHECK_THROWS_AS(parse_scene("{\"targets\": [{\"label\": 1}]}"), ConfigError);
    CHECK_THROWS_AS(parse_scene("not json"), ConfigError);
  }
}
