#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"
#include "wifield/dataset.hpp"
#include "wifield/error.hpp"
#include "wifield/measure.hpp"

using namespace wifield;
using namespace wifield::test;

namespace {

FieldSet constant_fields(std::size_t tx, std::size_t rx, cplx value, std::size_t tones = 1) {
  FieldSet fs;
  for (std::size_t t = 0; t < tones; ++t) {
    fs.tones_hz.push_back(2.4e9 + 1e6 * static_cast<double>(t));
    ToneFields tf;
    tf.e_i_rx = MatrixXc::Constant(static_cast<Eigen::Index>(tx), static_cast<Eigen::Index>(rx), value);
    tf.e_s_rx = MatrixXc::Zero(tf.e_i_rx.rows(), tf.e_i_rx.cols());
    tf.e_total_rx = tf.e_i_rx;
    fs.tones.push_back(tf);
  }
  return fs;
}

FieldSet empty_room(const OperatorSet& ops) {
  FieldSet fs{ops.array.tones_hz, {}};
  for (const auto& op : ops.tones) {
    ToneFields tf;
    tf.e_i_rx = op.ei_rx;
    tf.e_s_rx = MatrixXc::Zero(op.ei_rx.rows(), op.ei_rx.cols());
    tf.e_total_rx = op.ei_rx;
    fs.tones.push_back(tf);
  }
  return fs;
}

// Mean of |v + n| for complex Gaussian n with E|n|^2 = sigma^2 (Rice distribution).
double rice_mean(double v, double sigma) {
  const double s2 = 0.5 * sigma * sigma;
  const double x = -v * v / (2.0 * s2);
  const double laguerre =
      std::exp(x / 2.0) * ((1.0 - x) * std::cyl_bessel_i(0.0, -x / 2.0) - x * std::cyl_bessel_i(1.0, -x / 2.0));
  return std::sqrt(s2) * std::sqrt(std::numbers::pi / 2.0) * laguerre;
}

}  // namespace

TEST_SUITE("measure") {
  TEST_CASE("clean simulation reproduces the field") {
    const cplx e{0.3, -0.4};
    const MeasurementSet m = simulate_csi(constant_fields(2, 3, e), GainTable::uniform(2, 3), {}, 17);
    CHECK(m.link_count() == 6);
    CHECK(m.sample_count() == 17);
    for (const auto& series : m.iq) {
      for (cplx y : series) {
        CHECK(y == e);
      }
    }
  }

  TEST_CASE("packet phase keeps the magnitude and spreads the angle") {
    NoiseConfig nc;
    nc.packet_phase = PacketPhase::UniformRandom;
    nc.seed = 11;
    const MeasurementSet m = simulate_csi(constant_fields(1, 1, {0.5, 0.0}), GainTable::uniform(1, 1), nc, 4000);
    cplx resultant{0.0, 0.0};
    for (cplx y : m.iq[0]) {
      CHECK(std::abs(y) == doctest::Approx(0.5).epsilon(1e-14));
      resultant += y / std::abs(y);
    }
    CHECK(std::abs(resultant) / 4000.0 < 0.05);
  }

  TEST_CASE("noisy amplitude mean follows the law of large numbers") {
    const double v = 0.6;
    const double sigma = 0.2;
    const std::size_t n = 100;
    double acc = 0.0;
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
      NoiseConfig nc{sigma, PacketPhase::UniformRandom, 0.0, 1000 + rep};
      const MeasurementSet m = simulate_csi(constant_fields(1, 1, {v, 0.0}), GainTable::uniform(1, 1), nc, n);
      for (double a : m.amplitude(0, 0, 0)) {
        acc += a;
      }
    }
    const double mean = acc / (20.0 * n);
    CHECK(std::abs(mean - rice_mean(v, sigma)) < 3.0 * sigma / std::sqrt(20.0 * n));
  }

  TEST_CASE("simulation is deterministic per seed") {
    NoiseConfig nc{0.05, PacketPhase::UniformRandom, 0.01, 5};
    const FieldSet fs = constant_fields(2, 2, {1.0, 1.0}, 2);
    const MeasurementSet a = simulate_csi(fs, GainTable::uniform(2, 2), nc, 30);
    const MeasurementSet b = simulate_csi(fs, GainTable::uniform(2, 2), nc, 30);
    CHECK(a.iq == b.iq);
    nc.seed = 6;
    CHECK(simulate_csi(fs, GainTable::uniform(2, 2), nc, 30).iq != a.iq);
  }

  TEST_CASE("mean filter") {
    const std::vector<double> flat(120, 3.5);
    CHECK(mean_filter(flat, 50) == flat);
    std::vector<double> ramp(30);
    for (std::size_t i = 0; i < ramp.size(); ++i) {
      ramp[i] = std::sin(0.3 * static_cast<double>(i));
    }
    CHECK(mean_filter(ramp, 1) == ramp);
    std::vector<double> impulse(201, 0.0);
    impulse[100] = 1.0;
    const std::vector<double> out = mean_filter(impulse, 50);
    int plateau = 0;
    for (double v : out) {
      if (v != 0.0) {
        CHECK(v == doctest::Approx(1.0 / 50.0));
        ++plateau;
      }
    }
    CHECK(plateau == 50);
  }

  TEST_CASE("outlier removal") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal(1.0, 0.05);
    std::vector<double> clean(1400);
    for (double& v : clean) {
      v = normal(rng);
    }
    const std::vector<double> out = remove_outliers(clean, 50, 3.0);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
      changed += out[i] != clean[i];
    }
    CHECK(changed < clean.size() / 100);

    std::vector<double> spiky = clean;
    spiky[700] = 100.0;
    CHECK(remove_outliers(spiky, 50, 3.0)[700] < 2.0);
    const std::vector<double> flat(80, 0.25);
    CHECK(remove_outliers(flat, 50, 3.0) == flat);
  }

  TEST_CASE("calibration inverts the antenna law exactly without noise") {
    const SensingDomain d{{-0.2, -0.2}, 0.4, 8};
    ArrayLayout arr;
    arr.tx = {{-1.5, 0.0}};
    arr.rx = {{1.5, 0.0}};
    arr.tones_hz = {2.4e9, 2.45e9};
    const OperatorSet ops = build_operators(d, arr, {});
    const MeasurementSet m = simulate_csi(empty_room(ops), GainTable::uniform(1, 1, 2.0), {}, 100, true);
    const GainTable g = calibrate_gains(m, arr, {});
    CHECK(g.link(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  }

  TEST_CASE("calibration under noise and packet phase") {
    const SensingDomain d;
    const ArrayLayout arr = default_array(d, channel11_tones(3));
    const OperatorSet ops = build_operators(d, arr, {});
    GainTable truth = GainTable::uniform(4, 40);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (Eigen::Index i = 0; i < truth.link.size(); ++i) {
      truth.link.data()[i] = u(rng);
    }
    NoiseConfig nc{0.01, PacketPhase::UniformRandom, 0.0, 21};
    const MeasurementSet m = simulate_csi(empty_room(ops), truth, nc, 1400, true);
    const GainTable g = calibrate_gains(m, arr, {});
    CHECK((g.link - truth.link).cwiseQuotient(truth.link).cwiseAbs().maxCoeff() < 0.01);

    NoiseConfig no_phase{0.0, PacketPhase::None, 0.0, 21};
    NoiseConfig phase{0.0, PacketPhase::UniformRandom, 0.0, 21};
    const GainTable a = calibrate_gains(simulate_csi(empty_room(ops), truth, no_phase, 200, true), arr, {});
    const GainTable b = calibrate_gains(simulate_csi(empty_room(ops), truth, phase, 200, true), arr, {});
    CHECK((a.link - b.link).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("normalized total field") {
    const cplx e{0.2, 0.7};
    const FieldSet fs = constant_fields(2, 3, e, 2);
    const MeasurementSet m = simulate_csi(fs, GainTable::uniform(2, 3, 1.7), {}, 60);
    const auto a = normalize_total_field(m, GainTable::uniform(2, 3, 1.7));
    CHECK(a.size() == 2);
    CHECK((a[1].array() - std::abs(e)).abs().maxCoeff() < 1e-14);

    NoiseConfig nc{0.01, PacketPhase::None, 0.0, 4};
    const MeasurementSet m1 = simulate_csi(fs, GainTable::uniform(2, 3, 1.0), nc, 60);
    const MeasurementSet m3 = simulate_csi(fs, GainTable::uniform(2, 3, 3.0), NoiseConfig{0.03, PacketPhase::None, 0.0, 4}, 60);
    const auto n1 = normalize_total_field(m1, GainTable::uniform(2, 3, 1.0));
    const auto n3 = normalize_total_field(m3, GainTable::uniform(2, 3, 3.0));
    CHECK((n1[0] - n3[0]).cwiseAbs().maxCoeff() < 1e-12);

    MeasurementSet rotated = m1;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    for (auto& series : rotated.iq) {
      for (cplx& y : series) {
        y *= std::polar(1.0, angle(rng));
      }
    }
    CHECK((normalize_total_field(rotated, GainTable::uniform(2, 3))[0] - n1[0]).cwiseAbs().maxCoeff() < 1e-12);
    MeasurementSet quarter = m1;
    for (auto& series : quarter.iq) {
      for (std::size_t i = 0; i < series.size(); ++i) {
        series[i] = i % 2 == 0 ? cplx{-series[i].imag(), series[i].real()} : -series[i];
      }
    }
    CHECK(normalize_total_field(quarter, GainTable::uniform(2, 3))[1] == n1[1]);
  }

  TEST_CASE("incident field at cells matches the operator set") {
    const SensingDomain d{{-0.2, -0.2}, 0.4, 8};
    const ArrayLayout arr = ring_array(2, 4, 0.7, 0.8, {2.4e9});
    const OperatorSet ops = build_operators(d, arr, {});
    CHECK(incident_at_cells(arr, d, {}, ops.tones[0].k0) == ops.tones[0].ei_cells);
  }

  TEST_CASE("JSON round trips and validation") {
    NoiseConfig nc{0.01, PacketPhase::UniformRandom, 0.0, 9};
    MeasurementSet m = simulate_csi(constant_fields(2, 2, {0.5, 0.1}, 2), GainTable::uniform(2, 2), nc, 12, false, "s1");
    const MeasurementSet back = parse_measurements(measurements_to_json(m));
    CHECK(back.scene_id == "s1");
    CHECK(back.tone_count == 2);
    CHECK(back.iq == m.iq);

    MeasurementSet amp = m;
    amp.amp.clear();
    for (const auto& s : m.iq) {
      std::vector<double> a;
      for (cplx y : s) {
        a.push_back(std::abs(y));
      }
      amp.amp.push_back(a);
    }
    amp.iq.clear();
    amp.amplitude_only = true;
    const MeasurementSet amp_back = parse_measurements(measurements_to_json(amp));
    CHECK(amp_back.amplitude_only);
    CHECK(amp_back.amp == amp.amp);

    GainTable g = GainTable::uniform(2, 3, 1.5);
    g.link(1, 2) = 0.7;
    g.agc[1] = 1.1;
    const GainTable gb = parse_gains(gains_to_json(g));
    CHECK(gb.link == g.link);
    CHECK(gb.agc == g.agc);
    CHECK_THROWS_AS(parse_gains("{\"link\": [[1.0, -1.0]]}"), ConfigError);
    CHECK_THROWS_AS(parse_gains("{\"link\": [[1.0], [1.0, 2.0]]}"), ConfigError);

    MeasurementSet ragged = m;
    ragged.iq[3].pop_back();
    CHECK_THROWS_AS(ragged.validate(), ConfigError);
    CHECK_THROWS_AS(simulate_csi(constant_fields(2, 2, {1.0, 0.0}), GainTable::uniform(3, 2), {}, 5), ConfigError);
  }
}
