#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "wifield/cylinder.hpp"
#include "wifield/dataset.hpp"
#include "wifield/error.hpp"
#include "wifield/forward.hpp"
#include "wifield/greens.hpp"
#include "wifield/invert.hpp"
#include "wifield/measure.hpp"
#include "wifield/parallel.hpp"
#include "wifield/preimage_io.hpp"
#include "wifield/raybase.hpp"
#include "wifield/scene.hpp"

namespace wifield::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) {
    throw ConfigError("cannot write " + path.string());
  }
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream ss;
  ss << std::hex << h;
  return ss.str();
}

// Hash of the invocation; --threads does not change results and is left out.
std::string invocation_hash(int argc, char** argv, std::uint64_t seed) {
  std::string key;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--threads") {
      ++i;
      continue;
    }
    if (arg.rfind("--threads=", 0) == 0) {
      continue;
    }
    key += arg;
    key.push_back('\0');
  }
  key += "seed=" + std::to_string(seed);
  return fnv1a_hex(key);
}

double localization_ratio(const VectorXc& chi, const LabelGrid& labels) {
  double on = 0.0;
  double off = 0.0;
  std::size_t n_on = 0;
  std::size_t n_off = 0;
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    const double a = std::abs(chi[static_cast<Eigen::Index>(i)]);
    if (labels.labels[i] != 0) {
      on += a;
      ++n_on;
    } else {
      off += a;
      ++n_off;
    }
  }
  if (n_on == 0 || n_off == 0 || off == 0.0) {
    return 0.0;
  }
  return (on / static_cast<double>(n_on)) / (off / static_cast<double>(n_off));
}

struct Common {
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, const std::string& out_help) {
  cmd->add_option("--seed", c.seed, "RNG seed (overrides WIFIELD_SEED)");
  cmd->add_option("--threads", c.threads, "Worker thread cap, 0 = all cores");
  cmd->add_option("--out", c.out, out_help)->required();
}

using Handler = std::function<void(RunReport&)>;

struct Command {
  CLI::App* app = nullptr;
  Common common;
  Handler run;
};

AntennaModel antenna_from(const std::string& mode) { return {parse_incident_mode(mode), {1.0, 0.0}}; }

SolverOptions solver_from(const std::string& method) {
  SolverOptions s;
  s.method = parse_solver_method(method);
  return s;
}

}  // namespace

std::string report_to_json(const RunReport& r) {
  json doc;
  doc["command"] = r.command;
  doc["config_hash"] = r.config_hash;
  doc["seed"] = r.seed;
  doc["wall_time_s"] = r.wall_time_s;
  doc["outputs"] = r.outputs;
  json metrics = json::object();
  for (const auto& [k, v] : r.metrics) {
    metrics[k] = std::isfinite(v) ? json(v) : json(nullptr);
  }
  doc["metrics"] = std::move(metrics);
  doc["error"] = r.error ? json(*r.error) : json(nullptr);
  return doc.dump(2);
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag) {
  if (flag) {
    return *flag;
  }
  const char* env = std::getenv("WIFIELD_SEED");
  if (env == nullptr || *env == '\0') {
    return 0;
  }
  const std::string_view text(env);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError("WIFIELD_SEED must be an unsigned integer, got '" + std::string(text) + "'");
  }
  return value;
}

std::string render_pgm(const PreImage& img, int tone) {
  if (tone < 0 || tone >= img.n_tone) {
    throw ConfigError("render: tone " + std::to_string(tone) + " outside [0, " + std::to_string(img.n_tone) + ")");
  }
  const int n = img.n;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double a = std::abs(img.at(tone, r, c));
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
  }
  const double span = hi - lo;
  std::string out = "P5\n" + std::to_string(n) + " " + std::to_string(n) + "\n255\n";
  for (int r = n - 1; r >= 0; --r) {
    for (int c = 0; c < n; ++c) {
      const double v = span > 0.0 ? (std::abs(img.at(tone, r, c)) - lo) / span : 0.0;
      out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v))));
    }
  }
  return out;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"wifield: 2D WiFi-band scattering simulation and phaseless inversion"};
  app.require_subcommand(1);
  std::vector<std::unique_ptr<Command>> commands;
  auto add = [&](const std::string& name, const std::string& help) -> Command& {
    commands.push_back(std::make_unique<Command>());
    commands.back()->app = app.add_subcommand(name, help);
    return *commands.back();
  };

  // forward
  {
    Command& c = add("forward", "Total and scattered fields of a scene for every tx, rx and tone");
    auto* o = c.app;
    auto scene = std::make_shared<std::string>();
    auto array = std::make_shared<std::string>();
    auto incident = std::make_shared<std::string>("antenna3d");
    auto solver = std::make_shared<std::string>("auto");
    auto full = std::make_shared<bool>(false);
    o->add_option("--scene", *scene, "Scene JSON")->required()->check(CLI::ExistingFile);
    o->add_option("--array", *array, "Array JSON")->required()->check(CLI::ExistingFile);
    o->add_option("--incident", *incident, "antenna3d | line2d");
    o->add_option("--solver", *solver, "auto | dense | iterative");
    o->add_flag("--full", *full, "Also write cell fields and equivalent currents");
    add_common(o, c.common, "Fields JSON");
    c.run = [&c, scene, array, incident, solver, full](RunReport& rep) {
      const Scene s = load_scene(*scene);
      const ArrayLayout a = load_array(*array);
      const AntennaModel ant = antenna_from(*incident);
      const OperatorSet ops = build_operators(s.domain, a, ant);
      const ContrastGrid grid = rasterize(s).first;
      const FieldSet f = mimo_sweep(grid.chi, ops, solver_from(*solver));
      double worst = 0.0;
      for (std::size_t t = 0; t < f.tones.size(); ++t) {
        for (Eigen::Index p = 0; p < f.tones[t].e_t_cells.rows(); ++p) {
          worst = std::max(worst, total_field_residual(grid.chi, f.tones[t].e_t_cells.row(p).transpose(),
                                                       ops.tones[t].ei_cells.row(p).transpose(), s.domain,
                                                       ops.tones[t].gs));
        }
      }
      write_file(c.common.out, fields_to_json(f, *full) + "\n");
      rep.outputs.push_back(c.common.out);
      rep.metrics["max_residual"] = worst;
      rep.metrics["support_cells"] = static_cast<double>((grid.chi.array() != cplx{0.0, 0.0}).count());
      rep.metrics["grid_too_coarse"] = grid_too_coarse(s.domain, wavenumber(a.tones_hz.back())) ? 1.0 : 0.0;
    };
  }

  // oracle-cylinder
  {
    Command& c = add("oracle-cylinder", "Dielectric cylinder: analytic series versus the MoM solver");
    auto* o = c.app;
    auto cc = std::make_shared<CylinderCase>();
    auto solver = std::make_shared<std::string>("auto");
    o->add_option("--n", cc->n, "Grid cells per side")->capture_default_str();
    o->add_option("--eps", cc->eps_r, "Relative permittivity (real)")->capture_default_str();
    o->add_option("--radius", cc->radius, "Radius in wavelengths")->capture_default_str();
    o->add_option("--freq", cc->freq_hz, "Frequency in Hz")->capture_default_str();
    o->add_option("--rx", cc->rx_count, "Receivers on the ring")->capture_default_str();
    o->add_option("--ring", cc->ring_radius, "Ring radius in wavelengths")->capture_default_str();
    o->add_option("--source", cc->source_distance, "Line source distance in wavelengths")->capture_default_str();
    o->add_option("--solver", *solver, "auto | dense | iterative");
    add_common(o, c.common, "Comparison JSON");
    c.run = [&c, cc, solver](RunReport& rep) {
      CylinderCase k = *cc;
      k.solver = solver_from(*solver);
      const CylinderComparison r = compare_cylinder(k);
      json doc;
      doc["rel_err"] = r.rel_err;
      doc["residual"] = r.residual;
      doc["rx"] = json::array();
      doc["oracle"] = json::array();
      doc["mom"] = json::array();
      for (std::size_t q = 0; q < r.rx.size(); ++q) {
        const auto i = static_cast<Eigen::Index>(q);
        doc["rx"].push_back({r.rx[q].x, r.rx[q].y});
        doc["oracle"].push_back({r.oracle[i].real(), r.oracle[i].imag()});
        doc["mom"].push_back({r.mom[i].real(), r.mom[i].imag()});
      }
      write_file(c.common.out, doc.dump(2) + "\n");
      rep.outputs.push_back(c.common.out);
      rep.metrics["rel_err"] = r.rel_err;
      rep.metrics["residual"] = r.residual;
      rep.metrics["solve_s"] = r.seconds;
    };
  }

  // compare-ray
  {
    Command& c = add("compare-ray", "Straight-ray slab model versus the full-wave solver");
    auto* o = c.app;
    auto cfg = std::make_shared<RayComparisonConfig>();
    o->add_option("--freq", cfg->freq_hz, "Frequency in Hz")->capture_default_str();
    o->add_option("--eps", cfg->eps_r, "Target relative permittivity")->capture_default_str();
    o->add_option("--width", cfg->target_width, "Target width along the link (m)")->capture_default_str();
    o->add_option("--l-values", cfg->l_over_lambda, "Target lengths in wavelengths");
    o->add_option("--d-values", cfg->d_values, "Receiver distances behind the target (m)");
    o->add_option("--min-cells", cfg->min_cells_per_width, "Coarsest cells across the width")->capture_default_str();
    o->add_option("--max-cells", cfg->max_cells_per_width, "Finest cells across the width")->capture_default_str();
    o->add_option("--max-unknowns", cfg->max_unknowns, "Cell budget per target")->capture_default_str();
    o->add_option("--tolerance", cfg->gmres.tolerance, "GMRES relative tolerance")->capture_default_str();
    add_common(o, c.common, "CSV of relative errors");
    c.run = [&c, cfg](RunReport& rep) {
      const RayComparison r = compare_models(*cfg);
      write_file(c.common.out, r.to_csv());
      const std::string summary = c.common.out + ".summary.json";
      write_file(summary, r.summary_json() + "\n");
      rep.outputs.push_back(c.common.out);
      rep.outputs.push_back(summary);
      for (std::size_t i = 0; i < r.l_over_lambda.size(); ++i) {
        std::ostringstream key;
        key << r.l_over_lambda[i];
        rep.metrics["max_err_l" + key.str()] = r.row_max(i);
        rep.metrics["mean_err_l" + key.str()] = r.row_mean(i);
      }
    };
  }

  // simulate
  {
    Command& c = add("simulate", "CSI series from a fields file with gains, noise and packet phase");
    auto* o = c.app;
    auto fields = std::make_shared<std::string>();
    auto gains_file = std::make_shared<std::string>();
    auto gain = std::make_shared<double>(1.0);
    auto noise = std::make_shared<NoiseConfig>();
    auto phase = std::make_shared<std::string>("uniform");
    auto samples = std::make_shared<std::size_t>(100);
    auto empty = std::make_shared<bool>(false);
    auto amp_only = std::make_shared<bool>(false);
    auto scene_id = std::make_shared<std::string>();
    o->add_option("--fields", *fields, "Fields JSON")->required()->check(CLI::ExistingFile);
    o->add_option("--gains", *gains_file, "Gains JSON (default: uniform --gain)")->check(CLI::ExistingFile);
    o->add_option("--gain", *gain, "Uniform link gain")->capture_default_str();
    o->add_option("--noise", noise->amp_noise_sigma, "Complex noise standard deviation")->capture_default_str();
    o->add_option("--phase", *phase, "none | uniform");
    o->add_option("--agc-jitter", noise->agc_jitter, "Relative per-sample AGC fluctuation")->capture_default_str();
    o->add_option("--samples", *samples, "Samples per link")->capture_default_str();
    o->add_flag("--empty", *empty, "Mark as an empty-room capture");
    o->add_flag("--amplitude-only", *amp_only, "Store |Y| only");
    o->add_option("--scene-id", *scene_id, "Identifier stored with the measurements");
    add_common(o, c.common, "Measurements JSON");
    c.run = [&c, fields, gains_file, gain, noise, phase, samples, empty, amp_only, scene_id](RunReport& rep) {
      const FieldSet f = parse_fields(read_file(*fields));
      if (f.tones.empty()) {
        throw ConfigError("simulate: fields file has no tones");
      }
      const auto tx = static_cast<std::size_t>(f.tones[0].e_total_rx.rows());
      const auto rx = static_cast<std::size_t>(f.tones[0].e_total_rx.cols());
      const GainTable g = gains_file->empty() ? GainTable::uniform(tx, rx, *gain) : parse_gains(read_file(*gains_file));
      NoiseConfig nc = *noise;
      if (*phase == "none") {
        nc.packet_phase = PacketPhase::None;
      } else if (*phase == "uniform") {
        nc.packet_phase = PacketPhase::UniformRandom;
      } else {
        throw ConfigError("simulate: --phase must be none or uniform");
      }
      nc.seed = rep.seed;
      MeasurementSet m = simulate_csi(f, g, nc, *samples, *empty, *scene_id);
      if (*amp_only) {
        m.amp.resize(m.iq.size());
        for (std::size_t k = 0; k < m.iq.size(); ++k) {
          m.amp[k].resize(m.iq[k].size());
          std::transform(m.iq[k].begin(), m.iq[k].end(), m.amp[k].begin(), [](cplx v) { return std::abs(v); });
        }
        m.iq.clear();
        m.amplitude_only = true;
      }
      write_file(c.common.out, measurements_to_json(m) + "\n");
      rep.outputs.push_back(c.common.out);
      rep.metrics["links"] = static_cast<double>(m.link_count());
      rep.metrics["samples"] = static_cast<double>(m.sample_count());
    };
  }

  // calibrate
  {
    Command& c = add("calibrate", "Link gains from an empty-room capture");
    auto* o = c.app;
    auto meas = std::make_shared<std::string>();
    auto array = std::make_shared<std::string>();
    auto incident = std::make_shared<std::string>("antenna3d");
    auto pre = std::make_shared<PreprocessOptions>();
    auto no_outliers = std::make_shared<bool>(false);
    o->add_option("--measurements", *meas, "Empty-room measurements JSON")->required()->check(CLI::ExistingFile);
    o->add_option("--array", *array, "Array JSON")->required()->check(CLI::ExistingFile);
    o->add_option("--incident", *incident, "antenna3d | line2d");
    o->add_option("--window", pre->window, "Mean-filter window")->capture_default_str();
    o->add_flag("--no-outlier-removal", *no_outliers, "Skip the Hampel filter");
    add_common(o, c.common, "Gains JSON");
    c.run = [&c, meas, array, incident, pre, no_outliers](RunReport& rep) {
      const MeasurementSet m = parse_measurements(read_file(*meas));
      PreprocessOptions po = *pre;
      po.remove_outliers = !*no_outliers;
      const GainTable g = calibrate_gains(m, load_array(*array), antenna_from(*incident), po);
      write_file(c.common.out, gains_to_json(g) + "\n");
      rep.outputs.push_back(c.common.out);
      rep.metrics["mean_gain"] = g.link.mean();
      rep.metrics["min_gain"] = g.link.minCoeff();
      rep.metrics["max_gain"] = g.link.maxCoeff();
    };
  }

  // invert-born
  {
    Command& c = add("invert-born", "Regularized Born inversion of complex scattered fields for one tone");
    auto* o = c.app;
    auto scene = std::make_shared<std::string>();
    auto array = std::make_shared<std::string>();
    auto fields = std::make_shared<std::string>();
    auto incident = std::make_shared<std::string>("antenna3d");
    auto tone = std::make_shared<int>(0);
    auto alpha = std::make_shared<double>(1e-3);
    o->add_option("--scene", *scene, "Scene JSON (domain, and truth when --fields is absent)")
        ->required()
        ->check(CLI::ExistingFile);
    o->add_option("--array", *array, "Array JSON")->required()->check(CLI::ExistingFile);
    o->add_option("--fields", *fields, "Fields JSON; simulated from the scene when omitted")
        ->check(CLI::ExistingFile);
    o->add_option("--incident", *incident, "antenna3d | line2d");
    o->add_option("--tone", *tone, "Tone index")->capture_default_str();
    o->add_option("--alpha", *alpha, "Tikhonov weight")->capture_default_str();
    add_common(o, c.common, "PreImage (.wfld) with one tone");
    c.run = [&c, scene, array, fields, incident, tone, alpha](RunReport& rep) {
      const Scene s = load_scene(*scene);
      const ArrayLayout a = load_array(*array);
      const AntennaModel ant = antenna_from(*incident);
      const OperatorSet ops = build_operators(s.domain, a, ant);
      if (*tone < 0 || static_cast<std::size_t>(*tone) >= ops.tones.size()) {
        throw ConfigError("invert-born: --tone out of range");
      }
      const auto [truth, labels] = rasterize(s);
      const FieldSet f = fields->empty() ? mimo_sweep(truth.chi, ops) : parse_fields(read_file(*fields));
      if (f.tones.size() != ops.tones.size()) {
        throw ConfigError("invert-born: fields and array disagree on the tone count");
      }
      const ContrastGrid est = born_invert(f.tones[static_cast<std::size_t>(*tone)].e_s_rx, ops,
                                           static_cast<std::size_t>(*tone), *alpha);
      PreImage img;
      img.n_tone = 1;
      img.n = s.domain.n;
      img.data.assign(est.chi.data(), est.chi.data() + est.chi.size());
      write_preimage(img, c.common.out);
      rep.outputs.push_back(c.common.out);
      if (truth.chi.norm() > 0.0) {
        rep.metrics["rel_err_vs_truth"] = (est.chi - truth.chi).norm() / truth.chi.norm();
        rep.metrics["target_air_ratio"] = localization_ratio(est.chi, labels);
      }
    };
  }

  // invert-phaseless
  {
    Command& c = add("invert-phaseless", "Phaseless pre-identification from amplitude measurements");
    auto* o = c.app;
    auto meas = std::make_shared<std::string>();
    auto gains = std::make_shared<std::string>();
    auto array = std::make_shared<std::string>();
    auto scene = std::make_shared<std::string>();
    auto incident = std::make_shared<std::string>("antenna3d");
    auto use_labels = std::make_shared<bool>(false);
    auto cfg = std::make_shared<InversionConfig>();
    auto optimizer = std::make_shared<std::string>("adam");
    auto pre = std::make_shared<PreprocessOptions>();
    o->add_option("--measurements", *meas, "Measurements JSON")->required()->check(CLI::ExistingFile);
    o->add_option("--gains", *gains, "Gains JSON")->required()->check(CLI::ExistingFile);
    o->add_option("--array", *array, "Array JSON")->required()->check(CLI::ExistingFile);
    o->add_option("--scene", *scene, "Scene JSON providing the domain (and labels)")
        ->required()
        ->check(CLI::ExistingFile);
    o->add_option("--incident", *incident, "antenna3d | line2d");
    o->add_flag("--use-labels", *use_labels, "Enable the BCE position term (dataset generation)");
    o->add_option("--alpha", cfg->alpha, "BCE weight")->capture_default_str();
    o->add_option("--iters", cfg->max_iters, "Optimizer iterations")->capture_default_str();
    o->add_option("--step", cfg->step_size, "Adam learning rate")->capture_default_str();
    o->add_option("--optimizer", *optimizer, "adam | lbfgs");
    o->add_option("--tolerance", cfg->tolerance, "Relative objective change for early stop")->capture_default_str();
    o->add_option("--window", pre->window, "Mean-filter window")->capture_default_str();
    add_common(o, c.common, "PreImage (.wfld)");
    c.run = [&c, meas, gains, array, scene, incident, use_labels, cfg, optimizer, pre](RunReport& rep) {
      const Scene s = load_scene(*scene);
      const MeasurementSet m = parse_measurements(read_file(*meas));
      const GainTable g = parse_gains(read_file(*gains));
      const OperatorSet ops = build_operators(s.domain, load_array(*array), antenna_from(*incident));
      InversionConfig ic = *cfg;
      ic.optimizer = parse_optimizer(*optimizer);
      ic.seed = rep.seed;
      const LabelGrid labels = rasterize(s).second;
      std::optional<std::vector<std::uint8_t>> indicator;
      if (*use_labels) {
        indicator = target_indicator(labels);
      }
      const PreImage img = pre_identify(m, g, ops, ic, indicator, *pre);
      write_preimage(img, c.common.out);
      rep.outputs.push_back(c.common.out);
      double final_sum = 0.0;
      for (const auto& h : img.objective_history) {
        final_sum += h.empty() ? 0.0 : h.back();
      }
      rep.metrics["mean_final_objective"] = final_sum / std::max<std::size_t>(1, img.objective_history.size());
      if (!s.targets.empty()) {
        double ratio = 0.0;
        for (int t = 0; t < img.n_tone; ++t) {
          ratio += localization_ratio(img.tone_vector(t), labels);
        }
        rep.metrics["target_air_ratio"] = ratio / img.n_tone;
      }
    };
  }

  // gen-dataset
  {
    Command& c = add("gen-dataset", "Synthetic pre-image dataset with labels and manifest");
    auto* o = c.app;
    auto cfg = std::make_shared<DatasetConfig>();
    auto split = std::make_shared<std::string>("iid");
    auto quiet = std::make_shared<bool>(false);
    o->add_option("--limit", cfg->generate_limit, "Records to compute, 0 = all")->capture_default_str();
    o->add_option("--reps", cfg->reps, "Repetitions per position combination")->capture_default_str();
    o->add_option("--n-tone", cfg->n_tone, "Tones per pre-image")->capture_default_str();
    o->add_option("--split", *split, "iid | position_held_out");
    o->add_option("--train-fraction", cfg->train_fraction, "Training share")->capture_default_str();
    o->add_option("--alpha", cfg->inversion.alpha, "BCE weight")->capture_default_str();
    o->add_option("--iters", cfg->inversion.max_iters, "Optimizer iterations")->capture_default_str();
    o->add_option("--noise-variance", cfg->preimage_noise_variance, "PreImage noise variance")->capture_default_str();
    o->add_flag("--quiet", *quiet, "No progress on stderr");
    add_common(o, c.common, "Output directory");
    c.run = [&c, cfg, split, quiet](RunReport& rep) {
      DatasetConfig dc = *cfg;
      dc.split = parse_split_mode(*split);
      dc.seed = rep.seed;
      const bool show = !*quiet;
      const DatasetManifest man = build_dataset(dc, c.common.out, [show](std::size_t done, std::size_t total) {
        if (show) {
          std::cerr << "\r" << done << "/" << total << std::flush;
          if (done == total) {
            std::cerr << "\n";
          }
        }
      });
      rep.outputs.push_back((fs::path(c.common.out) / "manifest.json").string());
      std::size_t ok = 0;
      std::size_t failed = 0;
      for (const auto& r : man.records) {
        ok += r.status == "ok";
        failed += r.status == "failed";
      }
      rep.metrics["records"] = static_cast<double>(man.records.size());
      rep.metrics["combinations"] = static_cast<double>(man.combo_count());
      rep.metrics["ok"] = static_cast<double>(ok);
      rep.metrics["failed"] = static_cast<double>(failed);
      rep.metrics["complete"] = man.complete ? 1.0 : 0.0;
    };
  }

  // render
  {
    Command& c = add("render", "Grayscale PGM of |chi| for one tone of a pre-image");
    auto* o = c.app;
    auto chi = std::make_shared<std::string>();
    auto tone = std::make_shared<int>(0);
    o->add_option("--chi", *chi, "PreImage (.wfld)")->required()->check(CLI::ExistingFile);
    o->add_option("--tone", *tone, "Tone index")->capture_default_str();
    add_common(o, c.common, "PGM image");
    c.run = [&c, chi, tone](RunReport& rep) {
      write_file(c.common.out, render_pgm(read_preimage(*chi), *tone));
      rep.outputs.push_back(c.common.out);
    };
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  Command* active = nullptr;
  for (auto& c : commands) {
    if (c->app->parsed()) {
      active = c.get();
    }
  }
  RunReport rep;
  rep.command = active->app->get_name();
  const auto t0 = std::chrono::steady_clock::now();
  int code = kOk;
  try {
    rep.seed = resolve_seed(active->common.seed);
    rep.config_hash = invocation_hash(argc, argv, rep.seed);
    set_max_threads(active->common.threads);
    active->run(rep);
  } catch (const NumericError& e) {
    rep.error = std::string("numeric: ") + e.what();
    code = kNumericError;
  } catch (const std::domain_error& e) {
    rep.error = std::string("numeric: ") + e.what();
    code = kNumericError;
  } catch (const std::exception& e) {
    rep.error = std::string("config: ") + e.what();
    code = kConfigError;
  }
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (rep.error) {
    std::cerr << "wifield " << rep.command << ": " << *rep.error << "\n";
  }
  try {
    write_file(active->common.out + ".report.json", report_to_json(rep) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "wifield: could not write run report: " << e.what() << "\n";
  }
  return code;
}

}  // namespace wifield::cli
