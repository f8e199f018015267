#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "wifield/error.hpp"
#include "wifield/greens.hpp"
#include "wifield/specfun.hpp"

using namespace wifield;
using namespace wifield::test;

namespace {

constexpr double kF = 2.462e9;

}  // namespace

TEST_SUITE("greens") {
  TEST_CASE("kernel and self term against high-precision values") {
    const double k0 = wavenumber(kF);
    CHECK(k0 == doctest::Approx(51.599704440450406).epsilon(1e-14));
    const cplx g1 = green2d(k0, 0.01);
    CHECK(std::abs(g1 - cplx{0.10532323567546792, -0.23363406761809728}) < 1e-12);
    const cplx g2 = green2d(k0, 0.3);
    CHECK(std::abs(g2 - cplx{-0.043229426574666106, 0.026461889807351626}) < 1e-12);
    const cplx g3 = green2d(k0, 2.0);
    CHECK(std::abs(g3 - cplx{-0.018693185233704241, 0.0060093489640545679}) < 1e-12);
    // Equal to the quadrature of k0^2 g over the equal-area disk.
    const cplx st = self_term(k0, 1.05 / 40);
    CHECK(std::abs(st - cplx{0.22457826473957703, -0.42598556648786843}) < 1e-12);
    CHECK(std::abs(st) < 1.0);
  }

  TEST_CASE("incident field laws") {
    const double k0 = wavenumber(kF);
    const AntennaModel a3{IncidentMode::Antenna3d, {1.0, 0.0}};
    const VectorXc e = incident_field(a3, {0.0, 0.0}, {{1.0, 0.0}, {2.0, 0.0}, {0.0, wavelength(kF)}}, k0);
    CHECK(std::abs(e[0]) == doctest::Approx(1.0));
    CHECK(std::abs(e[1]) == doctest::Approx(0.5));
    CHECK(std::abs(std::arg(e[2] * std::exp(cplx{0.0, k0 * wavelength(kF)}))) < 1e-12);
    for (double kk : {10.0, 80.0}) {
      const VectorXc f = incident_field(a3, {0.3, 0.1}, {{1.3, 0.1}, {2.3, 0.1}}, kk);
      CHECK(std::abs(f[1]) == doctest::Approx(0.5 * std::abs(f[0])));
    }
    const AntennaModel l2{IncidentMode::Line2d, {1.0, 0.0}};
    const cplx v = incident_field(l2, {0.0, 0.0}, {{1.0, 0.0}}, 1.0)[0];
    const cplx want = cplx{0.0, -0.25} * cplx{specfun::bessel(specfun::BesselKind::J, 0, 1.0),
                                             -specfun::bessel(specfun::BesselKind::Y, 0, 1.0)};
    CHECK(std::abs(v - want) < 1e-14);
    CHECK_THROWS_AS(incident_field(a3, {0.0, 0.0}, {{0.0, 0.0}}, k0), ConfigError);
  }

  TEST_CASE("G_S is symmetric and matches direct evaluation") {
    const SensingDomain d{{-0.1, -0.1}, 0.2, 8};
    const double k0 = wavenumber(kF);
    const MatrixXc gs = assemble_gs(d, k0);
    CHECK((gs - gs.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const double h = d.cell_size();
    for (int m = 0; m < d.cell_count(); m += 7) {
      for (int n = 0; n < d.cell_count(); n += 5) {
        if (m == n) {
          CHECK(gs(m, n) == self_term(k0, h));
          continue;
        }
        const cplx want = k0 * k0 * h * h * green2d(k0, distance(d.cell_center(m), d.cell_center(n)));
        CHECK(std::abs(gs(m, n) - want) <= 1e-14 * std::abs(want));
      }
    }
    CHECK(assemble_gs(d, k0) == gs);
    const GreenTable t(d, k0);
    CHECK(t.dense() == gs);
    CHECK(t.block({3, 10}, {0, 63}) == gs({3, 10}, {0, 63}));
  }

  TEST_CASE("far-field 1/sqrt(R) decay along a row") {
    const double f = 5e9;
    const double lambda = wavelength(f);
    const SensingDomain d{{0.0, 0.0}, 0.75, 60};
    const GreenTable t(d, wavenumber(f));
    double lo = 1e300;
    double hi = 0.0;
    for (int c = 0; c < d.n; ++c) {
      const double r = c * d.cell_size();
      if (r < 5.0 * lambda || r > 10.0 * lambda) {
        continue;
      }
      const double v = std::abs(t.at_offset(0, c)) * std::sqrt(r);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CHECK(hi > 0.0);
    CHECK(hi / lo < 1.02);
  }

  TEST_CASE("G_O entries and a receiver on a larger grid's cell centre") {
    const double k0 = wavenumber(kF);
    const SensingDomain small{{0.0, 0.0}, 0.5, 10};
    const SensingDomain big{{0.0, 0.0}, 1.0, 20};
    const Point2 rx = big.cell_center(15, 15);
    const MatrixXc go = assemble_go(small, {rx}, k0);
    const GreenTable tb(big, k0);
    for (int r = 0; r < small.n; ++r) {
      for (int c = 0; c < small.n; ++c) {
        const cplx want = tb.at_offset(15 - r, 15 - c);
        CHECK(std::abs(go(0, r * small.n + c) - want) <= 1e-13 * std::abs(want));
      }
    }
    // Radially outward receivers see a smaller coefficient.
    const MatrixXc g2 = assemble_go(small, {{0.6, 0.25}, {0.8, 0.25}, {1.5, 0.25}}, k0);
    for (int n = 0; n < small.cell_count(); ++n) {
      CHECK(std::abs(g2(0, n)) > std::abs(g2(1, n)));
      CHECK(std::abs(g2(1, n)) > std::abs(g2(2, n)));
    }
    CHECK_THROWS_AS(assemble_go(small, {{0.2, 0.2}}, k0), ConfigError);
  }

  TEST_CASE("operator set shapes and array validation") {
    const SensingDomain d{{-0.2, -0.2}, 0.4, 10};
    const ArrayLayout a = ring_array(3, 7, 0.5, 0.6, {2.4e9, 2.45e9});
    const OperatorSet ops = build_operators(d, a, {});
    REQUIRE(ops.tones.size() == 2);
    CHECK(ops.tones[1].go.rows() == 7);
    CHECK(ops.tones[1].go.cols() == 100);
    CHECK(ops.tones[0].ei_cells.rows() == 3);
    CHECK(ops.tones[0].ei_rx.cols() == 7);
    CHECK(ops.tones[1].k0 == wavenumber(2.45e9));
    const OperatorSet again = build_operators(d, a, {});
    CHECK(again.tones[1].go == ops.tones[1].go);
    CHECK(again.tones[0].ei_cells == ops.tones[0].ei_cells);

    ArrayLayout bad = a;
    bad.tones_hz = {2.45e9, 2.4e9};
    CHECK_THROWS_AS(bad.validate(d), ConfigError);
    bad = a;
    bad.rx.push_back({0.0, 0.0});
    CHECK_THROWS_AS(bad.validate(d), ConfigError);
    bad = a;
    bad.tx.clear();
    CHECK_THROWS_AS(bad.validate(d), ConfigError);
    CHECK_FALSE(grid_too_coarse(SensingDomain{}, wavenumber(2.462e9)));
    CHECK(grid_too_coarse(SensingDomain{{0, 0}, 1.0, 10}, wavenumber(2.462e9)));
  }

  TEST_CASE("array JSON round trip") {
    const ArrayLayout a = ring_array(2, 5, 0.8, 0.9, {2.4e9});
    const ArrayLayout b = parse_array(array_to_json(a));
    CHECK(b.tx == a.tx);
    CHECK(b.rx == a.rx);
    CHECK(b.tones_hz == a.tones_hz);
    CHECK(parse_incident_mode(to_string(IncidentMode::Line2d)) == IncidentMode::Line2d);
    CHECK_THROWS_AS(parse_incident_mode("plane"), ConfigError);
  }
}
