#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wifield/specfun.hpp"

using namespace wifield;
using specfun::BesselKind;

namespace {

struct Row {
  double x, j0, j1, y0, y1;
};

// 30-digit mpmath evaluations.
constexpr Row kTable[] = {
    {1e-06, 9.99999999999749978e-01, 4.99999999999937509e-07, -8.86903148165944444e+00, -6.36619772372175008e+05},
    {0.1, 9.97501562066040015e-01, 4.99375260362419984e-02, -1.53423865135036674e+00, -6.45895109470202655e+00},
    {1.0, 7.65197686557966605e-01, 4.40050585744933498e-01, 8.82569642156769557e-02, -7.81212821300288685e-01},
    {5.0, -1.77596771314338292e-01, -3.27579137591465230e-01, -3.08517625249033756e-01, 1.47863143391226831e-01},
    {8.0, 1.71650807137553901e-01, 2.34636346853914629e-01, 2.23521489387566219e-01, -1.58060461731247492e-01},
    {24.9, 8.32459683530154954e-02, -1.34855699531408857e-01, -1.36499183996765222e-01, -8.60025575955542521e-02},
    {25.1, 1.08275671499949447e-01, -1.14634784134422574e-01, -1.16767707638036941e-01, -1.10622233227830991e-01},
    {60.0, -9.14718040890618728e-02, 4.65983837581663146e-02, 4.73589522094493981e-02, 9.18696093698668920e-02},
    {300.0, -3.32985548763056680e-02, -3.18874313774999488e-02, -3.18318897300034001e-02, 3.32455481213102186e-02},
};

double close(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

}  // namespace

TEST_SUITE("specfun") {
  TEST_CASE("matches high-precision reference values") {
    for (const Row& r : kTable) {
      CAPTURE(r.x);
      CHECK(close(specfun::bessel(BesselKind::J, 0, r.x), r.j0) < 1e-10);
      CHECK(close(specfun::bessel(BesselKind::J, 1, r.x), r.j1) < 1e-10);
      CHECK(close(specfun::bessel(BesselKind::Y, 0, r.x), r.y0) < 1e-10);
      CHECK(close(specfun::bessel(BesselKind::Y, 1, r.x), r.y1) < 1e-10);
    }
  }

  TEST_CASE("values at the origin and near the logarithmic singularity") {
    CHECK(specfun::bessel(BesselKind::J, 0, 0.0) == 1.0);
    CHECK(specfun::bessel(BesselKind::J, 1, 0.0) == 0.0);
    CHECK(specfun::bessel(BesselKind::Y, 0, 1e-8) < -10.0);
  }

  TEST_CASE("first zero of J0 found by bisection on an independent power series") {
    auto series_j0 = [](double x) {
      double term = 1.0;
      double sum = 1.0;
      for (int k = 1; k < 60; ++k) {
        term *= -(x * x) / (4.0 * k * k);
        sum += term;
      }
      return sum;
    };
    double lo = 2.0;
    double hi = 3.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (series_j0(lo) * series_j0(mid) <= 0.0 ? hi : lo) = mid;
    }
    CHECK(std::abs(lo - 2.404825557695773) < 1e-12);
    CHECK(std::abs(specfun::bessel(BesselKind::J, 0, 2.404825557695773)) < 1e-9);
  }

  TEST_CASE("hankel2 is J - jY") {
    for (double x : {0.01, 0.7, 3.3, 12.0, 24.99, 25.01, 41.0}) {
      for (int order : {0, 1}) {
        const cplx h = specfun::hankel2(order, x);
        CHECK(h.real() == specfun::bessel(BesselKind::J, order, x));
        CHECK(h.imag() == -specfun::bessel(BesselKind::Y, order, x));
      }
    }
    const cplx h1 = specfun::hankel2(1, 1.0);
    CHECK(std::abs(h1.real() - 4.40050585744933498e-01) < 1e-10);
    CHECK(std::abs(h1.imag() - 7.81212821300288685e-01) < 1e-10);
    CHECK(std::abs(std::abs(specfun::hankel2(0, 40.0)) * std::sqrt(40.0) - std::sqrt(2.0 / std::numbers::pi)) <
          0.01 * std::sqrt(2.0 / std::numbers::pi));
  }

  TEST_CASE("Wronskian on 100 log-spaced points") {
    for (int i = 0; i < 100; ++i) {
      const double x = std::pow(10.0, -3.0 + i * (std::log10(50.0) + 3.0) / 99.0);
      const double w = specfun::bessel(BesselKind::J, 1, x) * specfun::bessel(BesselKind::Y, 0, x) -
                       specfun::bessel(BesselKind::J, 0, x) * specfun::bessel(BesselKind::Y, 1, x);
      const double want = 2.0 / (std::numbers::pi * x);
      CAPTURE(x);
      CHECK(std::abs(w - want) / want < 1e-8);
    }
  }

  TEST_CASE("continuous across the asymptotic switch") {
    const double s = specfun::kAsymptoticSwitch;
    const double left = std::nextafter(s, 0.0);
    const double right = std::nextafter(s, 100.0);
    for (auto kind : {BesselKind::J, BesselKind::Y}) {
      for (int order : {0, 1}) {
        CHECK(std::abs(specfun::bessel(kind, order, left) - specfun::bessel(kind, order, right)) < 1e-9);
      }
    }
  }

  TEST_CASE("higher orders by recurrence") {
    const auto j = specfun::bessel_j_sequence(10, 3.0);
    const auto y = specfun::bessel_y_sequence(5, 3.0);
    CHECK(std::abs(j[5] - 0.043028434877047584) < 1e-12);
    CHECK(std::abs(y[5] + 1.9059459538286738) < 1e-10);
    CHECK(std::abs(specfun::bessel_j_sequence(10, 2.0)[10] - 2.5153862827167367e-7) < 1e-16);
    CHECK(std::abs(specfun::bessel_y_sequence(10, 2.0)[10] + 129184.54220803929) / 129184.54220803929 < 1e-10);
    CHECK(std::abs(specfun::bessel_j_sequence(3, 30.0)[3] - 0.12921122875972498) < 1e-10);
    CHECK(std::abs(specfun::bessel_y_sequence(3, 30.0)[3] + 0.068035690253198722) < 1e-10);
    CHECK(j[0] == doctest::Approx(specfun::bessel(BesselKind::J, 0, 3.0)).epsilon(1e-12));
  }

  TEST_CASE("domain errors") {
    CHECK_THROWS_AS(specfun::bessel(BesselKind::Y, 0, 0.0), std::domain_error);
    CHECK_THROWS_AS(specfun::bessel(BesselKind::J, 0, -1.0), std::domain_error);
    CHECK_THROWS_AS(specfun::bessel(BesselKind::J, 2, 1.0), std::domain_error);
    CHECK_THROWS_AS(specfun::bessel(BesselKind::J, 0, std::nan("")), std::domain_error);
    CHECK_THROWS_AS(specfun::hankel2(0, 0.0), std::domain_error);
  }
}
