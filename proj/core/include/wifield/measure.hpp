#pragma once

// CSI simulation with WiFi impairments, amplitude preprocessing and gain calibration.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wifield/forward.hpp"
#include "wifield/greens.hpp"

namespace wifield {

/// Per-link gains g_tp * g_rq (P x Q) and a per-receiver AGC multiplier.
struct GainTable {
  Eigen::MatrixXd link;
  Eigen::VectorXd agc;

  static GainTable uniform(std::size_t tx, std::size_t rx, double gain = 1.0);
  double effective(std::size_t p, std::size_t q) const {
    return link(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) * agc[static_cast<Eigen::Index>(q)];
  }
  void validate() const;
};

enum class PacketPhase { None, UniformRandom };

struct NoiseConfig {
  // Complex circular Gaussian noise with E|n|^2 = amp_noise_sigma^2.
  double amp_noise_sigma = 0.0;
  PacketPhase packet_phase = PacketPhase::None;
  // Relative per-sample AGC fluctuation, multiplier 1 + agc_jitter * N(0, 1).
  double agc_jitter = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct MeasurementSet {
  double sample_rate = 100.0;
  std::size_t tx_count = 0;
  std::size_t rx_count = 0;
  std::size_t tone_count = 0;
  std::string scene_id;
  bool empty_scene = false;
  bool amplitude_only = false;
  // One series per link, indexed by link_index(). Exactly one of iq / amp is filled.
  std::vector<std::vector<cplx>> iq;
  std::vector<std::vector<double>> amp;

  std::size_t link_index(std::size_t p, std::size_t q, std::size_t tone) const {
    return (tone * tx_count + p) * rx_count + q;
  }
  std::size_t link_count() const { return tx_count * rx_count * tone_count; }
  std::size_t sample_count() const;
  std::vector<double> amplitude(std::size_t p, std::size_t q, std::size_t tone) const;
  void validate() const;
};

/// Y[t] = g * agc[t] * E_total * e^{j phi_t} + n_t for every (tone, tx, rx) link.
/// Each link draws from its own stream derived from the seed, so results do not depend
/// on scheduling.
MeasurementSet simulate_csi(const FieldSet& fields, const GainTable& gains, const NoiseConfig& noise,
                            std::size_t n_samples, bool empty_scene = false, std::string scene_id = {});

/// Centered moving average; the window holds (w-1)/2 samples before and w/2 after the
/// centre and is truncated at the edges.
std::vector<double> mean_filter(const std::vector<double>& series, std::size_t window = 50);

/// Hampel filter: samples further than n_sigmas * 1.4826 * MAD from the rolling median
/// are replaced by that median. Uses the same centered window as mean_filter.
std::vector<double> remove_outliers(const std::vector<double>& series, std::size_t window = 50,
                                    double n_sigmas = 3.0);

struct PreprocessOptions {
  std::size_t window = 50;
  bool remove_outliers = true;
};

/// remove_outliers (optional) followed by mean_filter.
std::vector<double> preprocess_amplitude(const std::vector<double>& series, const PreprocessOptions& options = {});

/// g = mean(preprocessed |Y_w/o|) / |E_i(r_tr)|, averaged over tones. For the antenna3d
/// model with C = 1 this is r * mean |Y_w/o|. The AGC column of the result is 1.
GainTable calibrate_gains(const MeasurementSet& empty, const ArrayLayout& array, const AntennaModel& antenna,
                          const PreprocessOptions& options = {});

/// Per tone, the P x Q matrix mean(preprocessed |Y_w|) / g.
std::vector<Eigen::MatrixXd> normalize_total_field(const MeasurementSet& measurements, const GainTable& gains,
                                                   const PreprocessOptions& options = {});

/// Incident field of every transmitter at the cell centres, P x N^2.
MatrixXc incident_at_cells(const ArrayLayout& array, const SensingDomain& domain, const AntennaModel& antenna,
                           double k0);

// Gains JSON: {"link":[[g_00, g_01, ...], ...], "agc":[...]}
std::string gains_to_json(const GainTable& gains);
GainTable parse_gains(std::string_view json_text);

// Measurements JSON: {"sample_rate":100,"empty_scene":false,"scene_id":"..",
//   "links":[{"tx":p,"rx":q,"tone":t,"amp":[...]} | {"tx":p,"rx":q,"tone":t,"iq":[[re,im],...]}]}
std::string measurements_to_json(const MeasurementSet& m);
MeasurementSet parse_measurements(std::string_view json_text);

}  // namespace wifield
