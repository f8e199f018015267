#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "support.hpp"
#include "wifield/error.hpp"
#include "wifield/forward.hpp"
#include "wifield/measure.hpp"
#include "wifield/preimage_io.hpp"

using namespace wifield;
using namespace wifield::test;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "wifield");
  std::vector<char*> argv;
  for (auto& a : args) {
    argv.push_back(a.data());
  }
  return cli::run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

struct Workspace {
  fs::path dir = fs::temp_directory_path() / "wifield_cli_test";
  Workspace() {
    fs::remove_all(dir);
    fs::create_directories(dir);
    const SensingDomain d{{-0.2, -0.2}, 0.4, 12};
    spit(dir / "empty.json", scene_to_json(scene_with(d, {})));
    spit(dir / "scene.json", scene_to_json(scene_with(d, {rect_target(1, 0.05, 0.0, 0.05, 0.1)})));
    spit(dir / "array.json", array_to_json(ring_array(3, 12, 0.6, 0.5, {2.45e9, 2.46e9})));
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("forward on an empty scene returns the incident field") {
    const Workspace w;
    CHECK(run({"forward", "--scene", w / "empty.json", "--array", w / "array.json", "--out", w / "f.json"}) == 0);
    const FieldSet f = parse_fields(slurp(w / "f.json"));
    REQUIRE(f.tones.size() == 2);
    CHECK(f.tones[1].e_total_rx == f.tones[1].e_i_rx);
    const json rep = json::parse(slurp(w / "f.json.report.json"));
    CHECK(rep["command"] == "forward");
    CHECK(rep["outputs"][0] == w / "f.json");
    CHECK(rep["error"].is_null());
  }

  TEST_CASE("simulate, calibrate and invert-phaseless chain") {
    const Workspace w;
    REQUIRE(run({"forward", "--scene", w / "empty.json", "--array", w / "array.json", "--out", w / "e.json"}) == 0);
    REQUIRE(run({"forward", "--scene", w / "scene.json", "--array", w / "array.json", "--out", w / "s.json"}) == 0);
    REQUIRE(run({"simulate", "--fields", w / "e.json", "--gain", "1.5", "--empty", "--samples", "60", "--out",
                 w / "me.json"}) == 0);
    REQUIRE(run({"calibrate", "--measurements", w / "me.json", "--array", w / "array.json", "--out", w / "g.json"}) ==
            0);
    const GainTable g = parse_gains(slurp(w / "g.json"));
    CHECK((g.link.array() - 1.5).abs().maxCoeff() < 1e-9);
    REQUIRE(run({"simulate", "--fields", w / "s.json", "--gain", "1.5", "--phase", "uniform", "--noise", "0.001",
                 "--samples", "60", "--seed", "4", "--out", w / "m.json"}) == 0);
    CHECK(run({"invert-phaseless", "--measurements", w / "m.json", "--gains", w / "g.json", "--array",
               w / "array.json", "--scene", w / "scene.json", "--iters", "20", "--out", w / "p.wfld"}) == 0);
    const PreImage img = read_preimage(w / "p.wfld");
    CHECK(img.n_tone == 2);
    CHECK(img.n == 12);

    CHECK(run({"render", "--chi", w / "p.wfld", "--tone", "1", "--out", w / "p.pgm"}) == 0);
    CHECK(slurp(w / "p.pgm").rfind("P5\n12 12\n255\n", 0) == 0);
    CHECK(run({"render", "--chi", w / "p.wfld", "--tone", "2", "--out", w / "q.pgm"}) == 2);
    const json rep = json::parse(slurp(w / "q.pgm.report.json"));
    CHECK(rep["error"].is_string());
  }

  TEST_CASE("identical invocations give identical outputs and the seed flag wins") {
    const Workspace w;
    REQUIRE(run({"forward", "--scene", w / "scene.json", "--array", w / "array.json", "--out", w / "s.json"}) == 0);
    auto sim = [&](const std::string& out, std::vector<std::string> extra) {
      std::vector<std::string> a{"simulate", "--fields", w / "s.json", "--noise", "0.01", "--phase", "uniform",
                                 "--samples", "20", "--out", w / out};
      a.insert(a.end(), extra.begin(), extra.end());
      return run(a);
    };
    REQUIRE(sim("a.json", {"--seed", "9"}) == 0);
    REQUIRE(sim("b.json", {"--seed", "9"}) == 0);
    REQUIRE(sim("c.json", {"--seed", "10"}) == 0);
    CHECK(slurp(w / "a.json") == slurp(w / "b.json"));
    CHECK(slurp(w / "a.json") != slurp(w / "c.json"));
    ::setenv("WIFIELD_SEED", "9", 1);
    REQUIRE(sim("d.json", {}) == 0);
    REQUIRE(sim("e.json", {"--seed", "10"}) == 0);
    ::unsetenv("WIFIELD_SEED");
    CHECK(slurp(w / "d.json") == slurp(w / "a.json"));
    CHECK(slurp(w / "e.json") == slurp(w / "c.json"));
    CHECK(json::parse(slurp(w / "d.json.report.json"))["seed"] == 9);
  }

  TEST_CASE("seed resolution") {
    ::unsetenv("WIFIELD_SEED");
    CHECK(cli::resolve_seed(std::nullopt) == 0);
    CHECK(cli::resolve_seed(5) == 5);
    ::setenv("WIFIELD_SEED", "123", 1);
    CHECK(cli::resolve_seed(std::nullopt) == 123);
    CHECK(cli::resolve_seed(7) == 7);
    ::setenv("WIFIELD_SEED", "12x", 1);
    CHECK_THROWS_AS(cli::resolve_seed(std::nullopt), ConfigError);
    ::unsetenv("WIFIELD_SEED");
  }

  TEST_CASE("exit codes") {
    const Workspace w;
    CHECK(run({"forward", "--bogus", "--out", w / "x.json"}) == 2);
    CHECK(run({"forward", "--scene", w / "missing.json", "--array", w / "array.json", "--out", w / "x.json"}) == 2);
    CHECK(run({"nonsense"}) == 2);
    CHECK(run({"invert-born", "--scene", w / "scene.json", "--array", w / "array.json", "--tone", "5", "--out",
               w / "x.wfld"}) == 2);

    ArrayLayout same;
    same.tx = {{-0.6, 0.0}};
    same.rx.assign(20, Point2{0.6, 0.1});
    same.tones_hz = {2.45e9};
    spit(w.dir / "same.json", array_to_json(same));
    CHECK(run({"invert-born", "--scene", w / "scene.json", "--array", w / "same.json", "--alpha", "0", "--out",
               w / "y.wfld"}) == 3);
    const json rep = json::parse(slurp(w / "y.wfld.report.json"));
    CHECK(rep["error"].get<std::string>().find("rank") != std::string::npos);
  }

  TEST_CASE("oracle-cylinder writes its comparison") {
    const Workspace w;
    CHECK(run({"oracle-cylinder", "--n", "16", "--rx", "8", "--out", w / "c.json"}) == 0);
    const json out = json::parse(slurp(w / "c.json"));
    CHECK(out["rx"].size() == 8);
    CHECK(out["rel_err"].get<double>() < 0.1);
    const json rep = json::parse(slurp(w / "c.json.report.json"));
    CHECK(rep["metrics"].contains("rel_err"));
  }

  TEST_CASE("report JSON and PGM rendering") {
    cli::RunReport r;
    r.command = "render";
    r.config_hash = "abc";
    r.seed = 3;
    r.outputs = {"x.pgm"};
    r.metrics["m"] = 1.5;
    json j = json::parse(cli::report_to_json(r));
    CHECK(j["seed"] == 3);
    CHECK(j["metrics"]["m"] == 1.5);
    CHECK(j["error"].is_null());
    r.error = "bad";
    CHECK(json::parse(cli::report_to_json(r))["error"] == "bad");

    PreImage img;
    img.n_tone = 1;
    img.n = 2;
    img.data = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 0.5}, {0.0, 0.25}};
    const std::string pgm = cli::render_pgm(img, 0);
    const std::string header = "P5\n2 2\n255\n";
    REQUIRE(pgm.size() == header.size() + 4);
    const auto px = [&](std::size_t i) { return static_cast<unsigned char>(pgm[header.size() + i]); };
    // Top image row is the highest grid row.
    CHECK(px(0) == 128);
    CHECK(px(1) == 64);
    CHECK(px(2) == 0);
    CHECK(px(3) == 255);
    CHECK_THROWS_AS(cli::render_pgm(img, 1), ConfigError);
  }
}
