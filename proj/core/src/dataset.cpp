#include "wifield/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "json_util.hpp"
#include "wifield/error.hpp"
#include "wifield/preimage_io.hpp"

namespace wifield {

using detail::json;

namespace {

constexpr int kMaxPlacementAttempts = 10000;
constexpr double kGlassSide = 0.05;
constexpr double kSlabShort = 0.05;
constexpr double kSlabLong = 0.10;
constexpr std::uint8_t kGlassLabel = 2;

std::string lower_name(const std::map<std::uint8_t, Material>& materials, std::uint8_t label) {
  const auto it = materials.find(label);
  return it == materials.end() ? "label" + std::to_string(label) : it->second.name;
}

std::string combo_id(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "c%03zu", index);
  return buf;
}

std::string rep_suffix(int rep) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "_r%02d", rep);
  return buf;
}

bool clear_of(const Rect& a, const Rect& b, double gap) {
  return std::abs(a.center.x - b.center.x) >= 0.5 * (a.width + b.width) + gap ||
         std::abs(a.center.y - b.center.y) >= 0.5 * (a.height + b.height) + gap;
}

}  // namespace

const std::vector<int>& csi_tool_subcarriers() {
  static const std::vector<int> idx{-28, -26, -24, -22, -20, -18, -16, -14, -12, -10, -8, -6, -4, -2, -1,
                                    1,   3,   5,   7,   9,   11,  13,  15,  17,  19,  21,  23, 25, 27, 28};
  return idx;
}

std::vector<double> channel11_tones(int n_tone) {
  const auto& idx = csi_tool_subcarriers();
  const int total = static_cast<int>(idx.size());
  if (n_tone < 1 || n_tone > total) {
    throw ConfigError("n_tone must be in [1, " + std::to_string(total) + "]");
  }
  std::vector<double> tones;
  for (int i = 0; i < n_tone; ++i) {
    const int k = n_tone == 1 ? total / 2
                              : static_cast<int>(std::lround(static_cast<double>(i) * (total - 1) / (n_tone - 1)));
    tones.push_back(kChannel11Hz + idx[static_cast<std::size_t>(k)] * kSubcarrierSpacingHz);
  }
  return tones;
}

ArrayLayout default_array(const SensingDomain& domain, const std::vector<double>& tones_hz) {
  const double cx = domain.origin.x + 0.5 * domain.side;
  const double cy = domain.origin.y + 0.5 * domain.side;
  const double half = 0.5 * domain.side;
  const double tx_half = half + 0.375;
  const double rx_half = half + 0.15;
  ArrayLayout a;
  a.tx = {{cx - tx_half, cy - tx_half}, {cx + tx_half, cy - tx_half}, {cx + tx_half, cy + tx_half},
          {cx - tx_half, cy + tx_half}};
  constexpr int per_side = 10;
  for (int side = 0; side < 4; ++side) {
    for (int i = 0; i < per_side; ++i) {
      const double t = -rx_half + (i + 0.5) * (2.0 * rx_half / per_side);
      switch (side) {
        case 0: a.rx.push_back({cx + t, cy - rx_half}); break;
        case 1: a.rx.push_back({cx + rx_half, cy + t}); break;
        case 2: a.rx.push_back({cx - t, cy + rx_half}); break;
        default: a.rx.push_back({cx - rx_half, cy - t}); break;
      }
    }
  }
  a.tones_hz = tones_hz;
  return a;
}

std::string Combination::name() const {
  const auto materials = default_materials();
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out += (i ? "," : "") + lower_name(materials, labels[i]);
  }
  return out;
}

std::vector<Combination> default_combinations() {
  constexpr std::uint8_t W = 1, G = 2, R = 3;
  return {
      {{W}, 15},       {{R}, 15},       {{G}, 15},    {{R, R}, 15},    {{G, W}, 15},       {{G, R}, 15},
      {{G, G}, 15},    {{W, W}, 20},    {{R, W}, 15}, {{R, R, R}, 15}, {{W, W, W}, 22},    {{R, W, G}, 20},
  };
}

std::string to_string(SplitMode mode) { return mode == SplitMode::Iid ? "iid" : "position_held_out"; }

SplitMode parse_split_mode(std::string_view text) {
  if (text == "iid") return SplitMode::Iid;
  if (text == "position_held_out") return SplitMode::PositionHeldOut;
  throw ConfigError("unknown split mode \"" + std::string(text) + "\" (iid|position_held_out)");
}

void DatasetConfig::validate() const {
  if (combinations.empty()) {
    throw ConfigError("dataset: no combinations");
  }
  std::vector<bool> used(256, false);
  for (const Combination& c : combinations) {
    if (c.labels.empty()) {
      throw ConfigError("dataset: a combination must contain at least one target");
    }
    if (c.positions < 1) {
      throw ConfigError("dataset: position counts must be positive");
    }
    for (std::uint8_t l : c.labels) {
      if (l == 0 || !materials.contains(l)) {
        throw ConfigError("dataset: combination uses unknown or air label " + std::to_string(l));
      }
      used[l] = true;
    }
  }
  const int distinct = static_cast<int>(std::count(used.begin(), used.end(), true));
  if (n_class != distinct + 1) {
    throw ConfigError("dataset: n_class must equal the number of distinct materials plus air");
  }
  if (reps < 1) {
    throw ConfigError("dataset: reps must be positive");
  }
  if (!(preimage_noise_variance >= 0.0)) {
    throw ConfigError("dataset: noise variance must be non-negative");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("dataset: train fraction must lie in (0, 1)");
  }
  if (!(min_link_gain > 0.0) || max_link_gain < min_link_gain) {
    throw ConfigError("dataset: invalid link gain range");
  }
  if (samples_per_rep < 1) {
    throw ConfigError("dataset: samples_per_rep must be positive");
  }
  channel11_tones(n_tone);
  domain.validate();
  antenna.validate();
  csi_noise.validate();
  inversion.validate();
}

std::string DatasetConfig::hash() const {
  std::ostringstream canon;
  canon.precision(17);
  for (const Combination& c : combinations) {
    canon << c.name() << ':' << c.positions << ';';
  }
  canon << reps << ';' << preimage_noise_variance << ';' << n_tone << ';' << n_class << ';' << to_string(split) << ';'
        << train_fraction << ';' << seed << ';' << domain.origin.x << ',' << domain.origin.y << ',' << domain.side
        << ',' << domain.n << ';' << to_string(antenna.mode) << ',' << antenna.amplitude << ';'
        << csi_noise.amp_noise_sigma << ',' << static_cast<int>(csi_noise.packet_phase) << ',' << csi_noise.agc_jitter
        << ';' << samples_per_rep << ';' << min_link_gain << ',' << max_link_gain << ';' << inversion.hash() << ';'
        << preprocess.window << ',' << preprocess.remove_outliers;
  for (const auto& [label, m] : materials) {
    canon << ';' << int{label} << '=' << m.relative_permittivity;
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon.str()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Rect target_rect(std::uint8_t label, Point2 center, bool rotated) {
  if (label == kGlassLabel) {
    return {center, kGlassSide, kGlassSide};
  }
  return rotated ? Rect{center, kSlabLong, kSlabShort} : Rect{center, kSlabShort, kSlabLong};
}

Scene sample_scene(const SensingDomain& domain, const std::map<std::uint8_t, Material>& materials,
                   const std::vector<std::uint8_t>& labels, Rng& rng) {
  if (labels.empty()) {
    throw ConfigError("dataset: a scene needs at least one target");
  }
  Scene scene;
  scene.domain = domain;
  scene.materials = materials;
  const double gap = domain.cell_size();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
    std::vector<Rect> placed;
    bool ok = true;
    for (std::uint8_t label : labels) {
      const bool rotated = coin(rng);
      Rect r = target_rect(label, {}, rotated);
      if (r.width > domain.side || r.height > domain.side) {
        throw ConfigError("dataset: target does not fit in the domain");
      }
      r.center = {domain.origin.x + 0.5 * r.width + unit(rng) * (domain.side - r.width),
                  domain.origin.y + 0.5 * r.height + unit(rng) * (domain.side - r.height)};
      for (const Rect& other : placed) {
        if (!clear_of(r, other, gap)) {
          ok = false;
          break;
        }
      }
      if (!ok) {
        break;
      }
      placed.push_back(r);
    }
    if (ok) {
      for (std::size_t i = 0; i < labels.size(); ++i) {
        scene.targets.push_back({labels[i], placed[i]});
      }
      scene.validate();
      return scene;
    }
  }
  throw ConfigError("dataset: could not place targets without overlap after " +
                    std::to_string(kMaxPlacementAttempts) + " attempts");
}

std::vector<Scene> sample_scenes(const DatasetConfig& config, Rng& rng) {
  config.validate();
  std::vector<Scene> scenes;
  for (const Combination& c : config.combinations) {
    for (int i = 0; i < c.positions; ++i) {
      scenes.push_back(sample_scene(config.domain, config.materials, c.labels, rng));
    }
  }
  return scenes;
}

DatasetContext prepare_dataset(const DatasetConfig& config) {
  config.validate();
  DatasetContext ctx{config, {}, {}, {}};
  const ArrayLayout array = default_array(config.domain, channel11_tones(config.n_tone));
  ctx.ops = build_operators(config.domain, array, config.antenna);

  Rng rng(derive_seed(config.seed, {0x6761696eULL}));
  std::uniform_real_distribution<double> log_gain(std::log(config.min_link_gain), std::log(config.max_link_gain));
  ctx.true_gains = GainTable::uniform(array.tx.size(), array.rx.size());
  for (Eigen::Index p = 0; p < ctx.true_gains.link.rows(); ++p) {
    for (Eigen::Index q = 0; q < ctx.true_gains.link.cols(); ++q) {
      ctx.true_gains.link(p, q) = std::exp(log_gain(rng));
    }
  }
  // Empty-room capture for calibration.
  FieldSet empty{array.tones_hz, {}};
  for (const ToneOperators& op : ctx.ops.tones) {
    ToneFields tf;
    tf.e_i_rx = op.ei_rx;
    tf.e_s_rx = MatrixXc::Zero(op.ei_rx.rows(), op.ei_rx.cols());
    tf.e_total_rx = op.ei_rx;
    empty.tones.push_back(std::move(tf));
  }
  NoiseConfig noise = config.csi_noise;
  noise.seed = derive_seed(config.seed, {0x656d707479ULL});
  const MeasurementSet m = simulate_csi(empty, ctx.true_gains, noise, config.samples_per_rep, true, "empty");
  ctx.calibrated_gains = calibrate_gains(m, array, config.antenna, config.preprocess);
  return ctx;
}

PreImage generate_preimage(const DatasetContext& ctx, const Scene& scene, std::uint64_t record_seed) {
  const DatasetConfig& cfg = ctx.config;
  if (!(scene.domain == ctx.ops.domain)) {
    throw ConfigError("dataset: scene domain does not match the operator set");
  }
  const auto [grid, labels] = rasterize(scene);
  const FieldSet fields = mimo_sweep(grid.chi, ctx.ops, cfg.solver);
  NoiseConfig noise = cfg.csi_noise;
  noise.seed = derive_seed(record_seed, {1});
  const MeasurementSet m = simulate_csi(fields, ctx.true_gains, noise, cfg.samples_per_rep, false);
  InversionConfig inv = cfg.inversion;
  inv.seed = record_seed;
  PreImage img = pre_identify(m, ctx.calibrated_gains, ctx.ops, inv, target_indicator(labels), cfg.preprocess);

  if (cfg.preimage_noise_variance > 0.0) {
    Rng rng(derive_seed(record_seed, {2}));
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * cfg.preimage_noise_variance));
    for (cplx& v : img.data) {
      const double re = normal(rng);
      const double im = normal(rng);
      v += cplx{re, im};
    }
  }
  return img;
}

std::size_t DatasetManifest::combo_count() const {
  std::vector<std::string> ids;
  for (const auto& r : records) {
    ids.push_back(r.combo_id);
  }
  std::sort(ids.begin(), ids.end());
  return static_cast<std::size_t>(std::unique(ids.begin(), ids.end()) - ids.begin());
}

std::vector<std::string> assign_splits(std::size_t combos, int reps, SplitMode mode, double train_fraction,
                                       std::uint64_t seed) {
  const std::size_t units = mode == SplitMode::Iid ? combos * static_cast<std::size_t>(reps) : combos;
  std::vector<std::size_t> order(units);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, {0x73706c6974ULL}));
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(units)));
  std::vector<bool> train(units, false);
  for (std::size_t i = 0; i < n_train && i < units; ++i) {
    train[order[i]] = true;
  }
  std::vector<std::string> tags(combos * static_cast<std::size_t>(reps));
  for (std::size_t c = 0; c < combos; ++c) {
    for (int r = 0; r < reps; ++r) {
      const std::size_t k = c * static_cast<std::size_t>(reps) + static_cast<std::size_t>(r);
      tags[k] = train[mode == SplitMode::Iid ? k : c] ? "train" : "test";
    }
  }
  return tags;
}

DatasetManifest build_dataset(const DatasetConfig& config, const std::filesystem::path& out_dir,
                              const ProgressFn& progress) {
  config.validate();
  Rng rng(derive_seed(config.seed, {0x7363656e6573ULL}));
  const std::vector<Scene> scenes = sample_scenes(config, rng);

  DatasetManifest man;
  man.n_tone = config.n_tone;
  man.n = config.domain.n;
  man.n_class = config.n_class;
  for (int c = 0; c < config.n_class; ++c) {
    man.class_names.push_back(lower_name(config.materials, static_cast<std::uint8_t>(c)));
  }
  man.tones_hz = channel11_tones(config.n_tone);
  man.split = config.split;
  man.train_fraction = config.train_fraction;
  man.seed = config.seed;
  man.config_hash = config.hash();

  const std::vector<std::string> splits =
      assign_splits(scenes.size(), config.reps, config.split, config.train_fraction, config.seed);
  std::filesystem::create_directories(out_dir / "scenes");
  std::filesystem::create_directories(out_dir / "labels");
  std::filesystem::create_directories(out_dir / "pre");

  std::size_t scene_index = 0;
  for (const Combination& c : config.combinations) {
    for (int i = 0; i < c.positions; ++i, ++scene_index) {
      const std::string id = combo_id(scene_index);
      const Scene& scene = scenes[scene_index];
      save_scene(scene, out_dir / "scenes" / (id + ".json"));
      write_labels(rasterize(scene).second, out_dir / "labels" / (id + ".wlbl"));
      for (int r = 0; r < config.reps; ++r) {
        DatasetRecord rec;
        rec.combo_id = id;
        rec.materials = c.name();
        rec.rep = r;
        rec.split = splits[scene_index * static_cast<std::size_t>(config.reps) + static_cast<std::size_t>(r)];
        rec.scene_file = "scenes/" + id + ".json";
        rec.label_file = "labels/" + id + ".wlbl";
        rec.status = "skipped";
        man.records.push_back(std::move(rec));
      }
    }
  }

  const std::size_t total = man.records.size();
  const std::size_t to_generate = config.generate_limit == 0 ? total : std::min(total, config.generate_limit);
  std::unique_ptr<DatasetContext> ctx;
  for (std::size_t k = 0; k < to_generate; ++k) {
    DatasetRecord& rec = man.records[k];
    const std::size_t s = k / static_cast<std::size_t>(config.reps);
    try {
      if (!ctx) {
        ctx = std::make_unique<DatasetContext>(prepare_dataset(config));
      }
      PreImage img = generate_preimage(*ctx, scenes[s], derive_seed(config.seed, {s, static_cast<std::uint64_t>(rec.rep)}));
      img.measurement_id = rec.combo_id + rep_suffix(rec.rep);
      const std::string file = "pre/" + rec.combo_id + rep_suffix(rec.rep) + ".wfld";
      write_preimage(img, out_dir / file);
      rec.preimage_file = file;
      rec.status = "ok";
    } catch (const std::exception& e) {
      rec.status = "failed";
      rec.error = e.what();
    }
    if (progress) {
      progress(k + 1, to_generate);
    }
  }
  man.complete = std::all_of(man.records.begin(), man.records.end(), [](const DatasetRecord& r) { return r.status == "ok"; });
  detail::write_text_file(out_dir / "manifest.json", manifest_to_json(man) + "\n");
  return man;
}

std::string manifest_to_json(const DatasetManifest& m) {
  json doc;
  doc["format"] = "wifield-dataset";
  doc["version"] = 1;
  doc["complete"] = m.complete;
  doc["n_tone"] = m.n_tone;
  doc["n"] = m.n;
  doc["n_class"] = m.n_class;
  doc["class_names"] = m.class_names;
  doc["tones_hz"] = m.tones_hz;
  doc["split"] = {{"mode", to_string(m.split)}, {"train_fraction", m.train_fraction}};
  doc["seed"] = m.seed;
  doc["config_hash"] = m.config_hash;
  json recs = json::array();
  for (const DatasetRecord& r : m.records) {
    json j{{"combo_id", r.combo_id}, {"materials", r.materials}, {"rep", r.rep},          {"split", r.split},
           {"status", r.status},     {"scene", r.scene_file},    {"labels", r.label_file}};
    j["preimage"] = r.preimage_file.empty() ? json(nullptr) : json(r.preimage_file);
    if (!r.error.empty()) {
      j["error"] = r.error;
    }
    recs.push_back(std::move(j));
  }
  doc["records"] = std::move(recs);
  return doc.dump(1);
}

DatasetManifest parse_manifest(std::string_view json_text) {
  const json doc = detail::parse_json(json_text, "manifest");
  if (detail::require<std::string>(doc, "format", "manifest") != "wifield-dataset") {
    throw ConfigError("manifest: unexpected format tag");
  }
  if (detail::require<int>(doc, "version", "manifest") != 1) {
    throw ConfigError("manifest: unsupported version");
  }
  DatasetManifest m;
  m.complete = detail::require<bool>(doc, "complete", "manifest");
  m.n_tone = detail::require<int>(doc, "n_tone", "manifest");
  m.n = detail::require<int>(doc, "n", "manifest");
  m.n_class = detail::require<int>(doc, "n_class", "manifest");
  m.tones_hz = detail::require<std::vector<double>>(doc, "tones_hz", "manifest");
  m.class_names = detail::require<std::vector<std::string>>(doc, "class_names", "manifest");
  const json& split = detail::member(doc, "split", "manifest");
  m.split = parse_split_mode(detail::require<std::string>(split, "mode", "manifest.split"));
  m.train_fraction = detail::require<double>(split, "train_fraction", "manifest.split");
  m.seed = detail::require<std::uint64_t>(doc, "seed", "manifest");
  m.config_hash = detail::require<std::string>(doc, "config_hash", "manifest");
  for (const json& j : detail::member(doc, "records", "manifest")) {
    DatasetRecord r;
    r.combo_id = detail::require<std::string>(j, "combo_id", "manifest.records");
    r.materials = detail::require<std::string>(j, "materials", "manifest.records");
    r.rep = detail::require<int>(j, "rep", "manifest.records");
    r.split = detail::require<std::string>(j, "split", "manifest.records");
    r.status = detail::require<std::string>(j, "status", "manifest.records");
    r.scene_file = detail::require<std::string>(j, "scene", "manifest.records");
    r.label_file = detail::require<std::string>(j, "labels", "manifest.records");
    if (j.contains("preimage") && !j["preimage"].is_null()) {
      r.preimage_file = j["preimage"].get<std::string>();
    }
    if (j.contains("error")) {
      r.error = j["error"].get<std::string>();
    }
    m.records.push_back(std::move(r));
  }
  return m;
}

}  // namespace wifield
