#pragma once

// Synthetic dataset generation: scene sampling, the simulate -> preprocess -> pre-identify
// pipeline and the manifest consumed by the segmentation network.
//
// Directory layout:
//   manifest.json
//   scenes/<combo>.json    one scene per position combination
//   labels/<combo>.wlbl    label grid shared by all repetitions of a combination
//   pre/<combo>_r<rep>.wfld one PreImage per repetition
//
// Manifest schema (version 1):
//   {"format":"wifield-dataset","version":1,"complete":bool,
//    "n_tone":T,"n":N,"n_class":C,"class_names":["air","wood","glass","rubber"],
//    "tones_hz":[...],"split":{"mode":"iid"|"position_held_out","train_fraction":f},
//    "seed":s,"config_hash":"...",
//    "records":[{"combo_id":"c000","materials":"wood","rep":0,"split":"train"|"test",
//                "status":"ok"|"skipped"|"failed","scene":"scenes/c000.json",
//                "labels":"labels/c000.wlbl","preimage":"pre/c000_r00.wfld"|null,
//                "error":"..." (failed only)}]}

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "wifield/forward.hpp"
#include "wifield/greens.hpp"
#include "wifield/invert.hpp"
#include "wifield/measure.hpp"
#include "wifield/rng.hpp"
#include "wifield/scene.hpp"

namespace wifield {

/// WiFi channel 11 centre frequency and OFDM subcarrier spacing.
inline constexpr double kChannel11Hz = 2.462e9;
inline constexpr double kSubcarrierSpacingHz = 312.5e3;

/// The 30 subcarrier indices reported by the Intel 5300 CSI tool for a 20 MHz channel.
const std::vector<int>& csi_tool_subcarriers();

/// n_tone frequencies (Hz) drawn evenly from the 30 CSI-tool subcarriers of channel 11.
std::vector<double> channel11_tones(int n_tone = 30);

/// 4 transmitters at the corners of a square 0.375 m outside the domain and 40 receivers,
/// 10 per side, on a square 0.15 m outside the domain.
ArrayLayout default_array(const SensingDomain& domain, const std::vector<double>& tones_hz);

struct Combination {
  std::vector<std::uint8_t> labels;  // material labels, one per target
  int positions = 0;                 // number of sampled position combinations
  std::string name() const;          // e.g. "rubber,wood,glass"
};

/// The twelve material combinations and position counts of the reference protocol (197 total).
std::vector<Combination> default_combinations();

enum class SplitMode { Iid, PositionHeldOut };

std::string to_string(SplitMode mode);
SplitMode parse_split_mode(std::string_view text);

struct DatasetConfig {
  std::vector<Combination> combinations = default_combinations();
  int reps = 20;
  double preimage_noise_variance = 0.2;  // complex Gaussian, E|n|^2
  int n_tone = 30;
  int n_class = 4;
  SplitMode split = SplitMode::Iid;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;

  SensingDomain domain{};
  std::map<std::uint8_t, Material> materials = default_materials();
  AntennaModel antenna{};
  NoiseConfig csi_noise{0.01, PacketPhase::UniformRandom, 0.0, 0};
  std::size_t samples_per_rep = 100;  // one second at 100 Hz
  double min_link_gain = 0.5;         // true gains are drawn log-uniformly in [min, max]
  double max_link_gain = 2.0;
  InversionConfig inversion{1e-3, 500, 1e-2, OptimizerKind::Adam, 0.0, 0};
  PreprocessOptions preprocess{};
  SolverOptions solver{};
  // Only the first `generate_limit` records are computed; the rest are listed as skipped.
  // 0 generates every record.
  std::size_t generate_limit = 0;

  void validate() const;
  std::string hash() const;
};

/// Rect sizes per material: glass 5 x 5 cm, others 5 x 10 cm with random orientation.
Rect target_rect(std::uint8_t label, Point2 center, bool rotated);

/// One scene per position combination, in table order. Placements are uniform with
/// rejection: targets must keep at least one cell pitch of clearance. Deterministic in rng.
std::vector<Scene> sample_scenes(const DatasetConfig& config, Rng& rng);

/// Samples a scene with the given target labels; used by sample_scenes.
Scene sample_scene(const SensingDomain& domain, const std::map<std::uint8_t, Material>& materials,
                   const std::vector<std::uint8_t>& labels, Rng& rng);

/// Operators, true link gains and the calibrated gain table shared by every record.
struct DatasetContext {
  DatasetConfig config;
  OperatorSet ops;
  GainTable true_gains;
  GainTable calibrated_gains;
};

DatasetContext prepare_dataset(const DatasetConfig& config);

/// Full pipeline for one repetition of one scene: forward sweep, CSI simulation,
/// preprocessing, pre-identification (labels enable the BCE term when alpha > 0) and
/// additive PreImage noise. `record_seed` drives every random draw of the record.
PreImage generate_preimage(const DatasetContext& ctx, const Scene& scene, std::uint64_t record_seed);

struct DatasetRecord {
  std::string combo_id;
  std::string materials;
  int rep = 0;
  std::string split;
  std::string status;  // ok | skipped | failed
  std::string scene_file;
  std::string label_file;
  std::string preimage_file;  // empty unless status == ok
  std::string error;
};

struct DatasetManifest {
  bool complete = false;
  int n_tone = 0;
  int n = 0;
  int n_class = 0;
  std::vector<std::string> class_names;
  std::vector<double> tones_hz;
  SplitMode split = SplitMode::Iid;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<DatasetRecord> records;

  std::size_t combo_count() const;
};

/// Split tags for `records` (combo-major, rep-minor). Position-held-out keeps all reps of a
/// combination together.
std::vector<std::string> assign_splits(std::size_t combos, int reps, SplitMode mode, double train_fraction,
                                       std::uint64_t seed);

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Writes the dataset under `out_dir` and returns the manifest (also written there).
DatasetManifest build_dataset(const DatasetConfig& config, const std::filesystem::path& out_dir,
                              const ProgressFn& progress = {});

std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest parse_manifest(std::string_view json_text);

}  // namespace wifield
