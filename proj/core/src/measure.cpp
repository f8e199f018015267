#include "wifield/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "json_util.hpp"
#include "wifield/error.hpp"
#include "wifield/parallel.hpp"
#include "wifield/rng.hpp"

namespace wifield {

using detail::json;

namespace {

constexpr double kMadScale = 1.4826;

struct Span {
  std::size_t begin;
  std::size_t end;
};

Span centered(std::size_t i, std::size_t size, std::size_t window) {
  const std::size_t before = (window - 1) / 2;
  const std::size_t after = window / 2;
  return {i >= before ? i - before : 0, std::min(size, i + after + 1)};
}

double median_of(std::vector<double>& v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) {
    return upper;
  }
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) {
    s += x;
  }
  return s / static_cast<double>(v.size());
}

}  // namespace

GainTable GainTable::uniform(std::size_t tx, std::size_t rx, double gain) {
  return {Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(tx), static_cast<Eigen::Index>(rx), gain),
          Eigen::VectorXd::Ones(static_cast<Eigen::Index>(rx))};
}

void GainTable::validate() const {
  if (agc.size() != link.cols()) {
    throw ConfigError("gain table: AGC length does not match the receiver count");
  }
  if (!(link.array() > 0.0).all() || !(agc.array() > 0.0).all() || !link.allFinite() || !agc.allFinite()) {
    throw ConfigError("gain table entries must be positive and finite");
  }
}

void NoiseConfig::validate() const {
  if (!(amp_noise_sigma >= 0.0) || !(agc_jitter >= 0.0)) {
    throw ConfigError("noise sigmas must be non-negative");
  }
}

std::size_t MeasurementSet::sample_count() const {
  if (amplitude_only) {
    return amp.empty() ? 0 : amp.front().size();
  }
  return iq.empty() ? 0 : iq.front().size();
}

std::vector<double> MeasurementSet::amplitude(std::size_t p, std::size_t q, std::size_t tone) const {
  if (p >= tx_count || q >= rx_count || tone >= tone_count) {
    throw ConfigError("measurement link index out of range");
  }
  const std::size_t k = link_index(p, q, tone);
  if (amplitude_only) {
    return amp.at(k);
  }
  const auto& s = iq.at(k);
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i] = std::abs(s[i]);
  }
  return out;
}

void MeasurementSet::validate() const {
  const std::size_t links = link_count();
  if (links == 0) {
    throw ConfigError("measurement set has no links");
  }
  if ((amplitude_only ? amp.size() : iq.size()) != links) {
    throw ConfigError("measurement set is missing links");
  }
  const std::size_t n = sample_count();
  if (n == 0) {
    throw ConfigError("measurement series are empty");
  }
  for (std::size_t k = 0; k < links; ++k) {
    const std::size_t len = amplitude_only ? amp[k].size() : iq[k].size();
    if (len != n) {
      throw ConfigError("measurement series lengths differ across links");
    }
    if (amplitude_only) {
      for (double a : amp[k]) {
        if (!(a >= 0.0) || !std::isfinite(a)) {
          throw ConfigError("amplitudes must be finite and non-negative");
        }
      }
    }
  }
  if (!(sample_rate > 0.0)) {
    throw ConfigError("sample rate must be positive");
  }
}

MeasurementSet simulate_csi(const FieldSet& fields, const GainTable& gains, const NoiseConfig& noise,
                            std::size_t n_samples, bool empty_scene, std::string scene_id) {
  gains.validate();
  noise.validate();
  if (fields.tones.empty() || n_samples == 0) {
    throw ConfigError("simulate_csi needs at least one tone and one sample");
  }
  MeasurementSet m;
  m.tone_count = fields.tones.size();
  m.tx_count = static_cast<std::size_t>(fields.tones[0].e_total_rx.rows());
  m.rx_count = static_cast<std::size_t>(fields.tones[0].e_total_rx.cols());
  m.empty_scene = empty_scene;
  m.scene_id = std::move(scene_id);
  if (static_cast<std::size_t>(gains.link.rows()) != m.tx_count ||
      static_cast<std::size_t>(gains.link.cols()) != m.rx_count) {
    throw ConfigError("gain table shape does not match the field set");
  }
  m.iq.assign(m.link_count(), {});
  const double component_sigma = noise.amp_noise_sigma / std::numbers::sqrt2;
  parallel_for(m.link_count(), [&](std::size_t k) {
    const std::size_t q = k % m.rx_count;
    const std::size_t p = (k / m.rx_count) % m.tx_count;
    const std::size_t t = k / (m.rx_count * m.tx_count);
    const cplx e = fields.tones[t].e_total_rx(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
    const double g = gains.effective(p, q);
    Rng rng(derive_seed(noise.seed, {t, p, q}));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::vector<cplx>& series = m.iq[k];
    series.resize(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
      double agc = 1.0;
      if (noise.agc_jitter > 0.0) {
        agc += noise.agc_jitter * normal(rng);
      }
      cplx y = g * agc * e;
      if (noise.packet_phase == PacketPhase::UniformRandom) {
        y *= std::polar(1.0, angle(rng));
      }
      if (noise.amp_noise_sigma > 0.0) {
        const double re = normal(rng);
        const double im = normal(rng);
        y += component_sigma * cplx{re, im};
      }
      series[i] = y;
    }
  });
  return m;
}

std::vector<double> mean_filter(const std::vector<double>& series, std::size_t window) {
  if (series.empty()) {
    throw ConfigError("mean_filter: empty series");
  }
  if (window == 0) {
    throw ConfigError("mean_filter: window must be at least 1");
  }
  std::vector<double> prefix(series.size() + 1, 0.0);
  for (std::size_t i = 0; i < series.size(); ++i) {
    prefix[i + 1] = prefix[i] + series[i];
  }
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const Span s = centered(i, series.size(), window);
    // Summing directly keeps constant series exactly constant.
    double sum = 0.0;
    if (s.end - s.begin <= 64) {
      for (std::size_t k = s.begin; k < s.end; ++k) {
        sum += series[k];
      }
    } else {
      sum = prefix[s.end] - prefix[s.begin];
    }
    out[i] = sum / static_cast<double>(s.end - s.begin);
  }
  return out;
}

std::vector<double> remove_outliers(const std::vector<double>& series, std::size_t window, double n_sigmas) {
  if (series.size() < 3) {
    return series;
  }
  if (window == 0) {
    throw ConfigError("remove_outliers: window must be at least 1");
  }
  std::vector<double> out(series);
  std::vector<double> buf;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const Span s = centered(i, series.size(), window);
    buf.assign(series.begin() + static_cast<std::ptrdiff_t>(s.begin),
               series.begin() + static_cast<std::ptrdiff_t>(s.end));
    const double med = median_of(buf);
    for (double& v : buf) {
      v = std::abs(v - med);
    }
    const double mad = kMadScale * median_of(buf);
    if (std::abs(series[i] - med) > n_sigmas * mad) {
      out[i] = med;
    }
  }
  return out;
}

std::vector<double> preprocess_amplitude(const std::vector<double>& series, const PreprocessOptions& options) {
  if (options.remove_outliers) {
    return mean_filter(remove_outliers(series, options.window), options.window);
  }
  return mean_filter(series, options.window);
}

GainTable calibrate_gains(const MeasurementSet& empty, const ArrayLayout& array, const AntennaModel& antenna,
                          const PreprocessOptions& options) {
  empty.validate();
  if (array.tx.size() != empty.tx_count || array.rx.size() != empty.rx_count ||
      array.tones_hz.size() != empty.tone_count) {
    throw ConfigError("calibration measurements do not match the array layout");
  }
  GainTable gains = GainTable::uniform(empty.tx_count, empty.rx_count);
  for (std::size_t p = 0; p < empty.tx_count; ++p) {
    for (std::size_t q = 0; q < empty.rx_count; ++q) {
      double acc = 0.0;
      for (std::size_t t = 0; t < empty.tone_count; ++t) {
        const double measured = mean_of(preprocess_amplitude(empty.amplitude(p, q, t), options));
        if (!(measured > 0.0)) {
          throw NumericError("calibration: link tx " + std::to_string(p) + " rx " + std::to_string(q) +
                             " has zero amplitude");
        }
        const double model =
            std::abs(incident_field(antenna, array.tx[p], {array.rx[q]}, wavenumber(array.tones_hz[t]))[0]);
        acc += measured / model;
      }
      gains.link(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = acc / static_cast<double>(empty.tone_count);
    }
  }
  return gains;
}

std::vector<Eigen::MatrixXd> normalize_total_field(const MeasurementSet& measurements, const GainTable& gains,
                                                   const PreprocessOptions& options) {
  measurements.validate();
  gains.validate();
  if (static_cast<std::size_t>(gains.link.rows()) != measurements.tx_count ||
      static_cast<std::size_t>(gains.link.cols()) != measurements.rx_count) {
    throw ConfigError("normalize_total_field: missing gains for some links");
  }
  std::vector<Eigen::MatrixXd> out(measurements.tone_count,
                                   Eigen::MatrixXd(static_cast<Eigen::Index>(measurements.tx_count),
                                                   static_cast<Eigen::Index>(measurements.rx_count)));
  parallel_for(measurements.link_count(), [&](std::size_t k) {
    const std::size_t q = k % measurements.rx_count;
    const std::size_t p = (k / measurements.rx_count) % measurements.tx_count;
    const std::size_t t = k / (measurements.rx_count * measurements.tx_count);
    const double a = mean_of(preprocess_amplitude(measurements.amplitude(p, q, t), options));
    out[t](static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = a / gains.effective(p, q);
  });
  return out;
}

MatrixXc incident_at_cells(const ArrayLayout& array, const SensingDomain& domain, const AntennaModel& antenna,
                           double k0) {
  const std::vector<Point2> centers = cell_centers(domain);
  MatrixXc out(static_cast<Eigen::Index>(array.tx.size()), domain.cell_count());
  for (std::size_t p = 0; p < array.tx.size(); ++p) {
    out.row(static_cast<Eigen::Index>(p)) = incident_field(antenna, array.tx[p], centers, k0).transpose();
  }
  return out;
}

std::string gains_to_json(const GainTable& gains) {
  json link = json::array();
  for (Eigen::Index p = 0; p < gains.link.rows(); ++p) {
    json row = json::array();
    for (Eigen::Index q = 0; q < gains.link.cols(); ++q) {
      row.push_back(gains.link(p, q));
    }
    link.push_back(std::move(row));
  }
  json agc = json::array();
  for (Eigen::Index q = 0; q < gains.agc.size(); ++q) {
    agc.push_back(gains.agc[q]);
  }
  return json{{"link", std::move(link)}, {"agc", std::move(agc)}}.dump(2);
}

GainTable parse_gains(std::string_view json_text) {
  const json doc = detail::parse_json(json_text, "gains");
  const auto rows = detail::require<std::vector<std::vector<double>>>(doc, "link", "gains");
  if (rows.empty() || rows[0].empty()) {
    throw ConfigError("gains: empty link table");
  }
  GainTable g = GainTable::uniform(rows.size(), rows[0].size());
  for (std::size_t p = 0; p < rows.size(); ++p) {
    if (rows[p].size() != rows[0].size()) {
      throw ConfigError("gains: ragged link table");
    }
    for (std::size_t q = 0; q < rows[p].size(); ++q) {
      g.link(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = rows[p][q];
    }
  }
  if (doc.contains("agc")) {
    const auto agc = detail::require<std::vector<double>>(doc, "agc", "gains");
    if (agc.size() != rows[0].size()) {
      throw ConfigError("gains: AGC length does not match the receiver count");
    }
    for (std::size_t q = 0; q < agc.size(); ++q) {
      g.agc[static_cast<Eigen::Index>(q)] = agc[q];
    }
  }
  g.validate();
  return g;
}

std::string measurements_to_json(const MeasurementSet& m) {
  json doc;
  doc["sample_rate"] = m.sample_rate;
  doc["empty_scene"] = m.empty_scene;
  doc["scene_id"] = m.scene_id;
  json links = json::array();
  for (std::size_t t = 0; t < m.tone_count; ++t) {
    for (std::size_t p = 0; p < m.tx_count; ++p) {
      for (std::size_t q = 0; q < m.rx_count; ++q) {
        json l{{"tx", p}, {"rx", q}, {"tone", t}};
        const std::size_t k = m.link_index(p, q, t);
        if (m.amplitude_only) {
          l["amp"] = m.amp[k];
        } else {
          json s = json::array();
          for (cplx v : m.iq[k]) {
            s.push_back(detail::complex_to_json(v));
          }
          l["iq"] = std::move(s);
        }
        links.push_back(std::move(l));
      }
    }
  }
  doc["links"] = std::move(links);
  return doc.dump();
}

MeasurementSet parse_measurements(std::string_view json_text) {
  const json doc = detail::parse_json(json_text, "measurements");
  MeasurementSet m;
  if (doc.contains("sample_rate")) {
    m.sample_rate = detail::require<double>(doc, "sample_rate", "measurements");
  }
  if (doc.contains("empty_scene")) {
    m.empty_scene = detail::require<bool>(doc, "empty_scene", "measurements");
  }
  if (doc.contains("scene_id")) {
    m.scene_id = detail::require<std::string>(doc, "scene_id", "measurements");
  }
  const json& links = detail::member(doc, "links", "measurements");
  if (!links.is_array() || links.empty()) {
    throw ConfigError("measurements.links must be a non-empty array");
  }
  std::size_t max_p = 0, max_q = 0, max_t = 0;
  bool any_amp = false, any_iq = false;
  for (const json& l : links) {
    max_p = std::max(max_p, detail::require<std::size_t>(l, "tx", "measurements.links"));
    max_q = std::max(max_q, detail::require<std::size_t>(l, "rx", "measurements.links"));
    max_t = std::max(max_t, detail::require<std::size_t>(l, "tone", "measurements.links"));
    any_amp = any_amp || l.contains("amp");
    any_iq = any_iq || l.contains("iq");
  }
  if (any_amp == any_iq) {
    throw ConfigError("measurements: every link must carry either \"amp\" or \"iq\", not a mix");
  }
  m.tx_count = max_p + 1;
  m.rx_count = max_q + 1;
  m.tone_count = max_t + 1;
  m.amplitude_only = any_amp;
  std::vector<bool> seen(m.link_count(), false);
  if (m.amplitude_only) {
    m.amp.assign(m.link_count(), {});
  } else {
    m.iq.assign(m.link_count(), {});
  }
  for (const json& l : links) {
    const std::size_t k = m.link_index(l["tx"].get<std::size_t>(), l["rx"].get<std::size_t>(),
                                       l["tone"].get<std::size_t>());
    if (seen[k]) {
      throw ConfigError("measurements: duplicate link");
    }
    seen[k] = true;
    if (m.amplitude_only) {
      m.amp[k] = detail::require<std::vector<double>>(l, "amp", "measurements.links");
    } else {
      const json& s = detail::member(l, "iq", "measurements.links");
      if (!s.is_array()) {
        throw ConfigError("measurements: iq must be an array");
      }
      for (const json& v : s) {
        m.iq[k].push_back(detail::complex_from_json(v, "measurements.iq"));
      }
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw ConfigError("measurements: missing links");
  }
  m.validate();
  return m;
}

}  // namespace wifield
