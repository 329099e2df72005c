/// Config parsing, strict key rejection, and the run orchestration layer:
/// artifact presence, header provenance, determinism, prerequisites.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "zoll/config.hpp"
#include "zoll/geometry.hpp"
#include "zoll/run.hpp"

using namespace zoll;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const char* name) {
  fs::path d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  return d;
}

RunConfig small_sphere(const fs::path& dir) {
  RunConfig cfg;
  cfg.grid_size = 2049;
  cfg.n_points = 1025;
  cfg.n_max = 3;
  cfg.A_config = 0.3;
  cfg.grid_refine = 1;
  cfg.wave_n_max = 2;
  cfg.dt = 2e-3;
  cfg.T = 2.0;
  cfg.directory = dir.string();
  return cfg;
}
}  // namespace

TEST_CASE("parse_config: defaults, values, list syntax") {
  auto cfg = parse_config("");
  CHECK(cfg.coefficients.empty());
  CHECK(cfg.n_points == 2049);
  CHECK(cfg.A_config == 1.0);
  CHECK(cfg.damping == "indicator_upper");

  auto c2 = parse_config(
      "[surface]\n"
      "coefficients = [0.1, 0.02]  # bracketed list\n"
      "grid_size = 8193\n"
      "[spectral]\n"
      "n_max = 20\n"
      "A_config = 0.9\n"
      "window_pad = 2.0\n"
      "[wave]\n"
      "seed = 42\n");
  CHECK(c2.coefficients == std::vector<double>{0.1, 0.02});
  CHECK(c2.grid_size == 8193);
  CHECK(c2.n_max == 20);
  CHECK(c2.window_pad == 2.0);
  CHECK(c2.seed == 42);
  // bare list spelling parses the same
  auto c3 = parse_config("[surface]\ncoefficients = 0.1 0.02\n");
  CHECK(c3.coefficients == c2.coefficients);
}

TEST_CASE("parse_config: unknown keys rejected by name") {
  try {
    parse_config("[spectral]\nn_mxa = 5\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("n_mxa") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("[badsection]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("orphan = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[chart]\nn_points = 1024\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[spectral]\nA_config = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[wave]\ndt = oops\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[output]\nformats = xml\n"), ConfigError);
}

TEST_CASE("config hash: stable under reparse, sensitive to values") {
  RunConfig a;
  auto b = parse_config(a.canonical());
  CHECK(a.hash() == b.hash());
  b.epsilon = 0.3;
  CHECK(a.hash() != b.hash());
}

TEST_CASE("surface run: artifacts, header block, determinism") {
  auto dir = fresh_dir("zoll_cli_surface");
  auto cfg = small_sphere(dir);
  CHECK(run_subcommand("surface", cfg) == 0);
  REQUIRE(fs::exists(dir / "surface.csv"));
  REQUIRE(fs::exists(dir / "surface.json"));

  auto text = slurp(dir / "surface.csv");
  CHECK(text.rfind("# tool = zollwave", 0) == 0);
  CHECK(text.find("# config_hash = ") != std::string::npos);
  CHECK(text.find("x,f,rho,V") != std::string::npos);

  auto first = slurp(dir / "surface.csv");
  auto first_json = slurp(dir / "surface.json");
  run_subcommand("surface", cfg);
  CHECK(slurp(dir / "surface.csv") == first);       // byte-identical rerun
  CHECK(slurp(dir / "surface.json") == first_json);

  // serial reference path produces the same bytes
  RunOptions serial;
  serial.threads = 1;
  run_subcommand("surface", cfg, serial);
  CHECK(slurp(dir / "surface.csv") == first);
}

TEST_CASE("surface run: metric violation surfaces as an error") {
  auto dir = fresh_dir("zoll_cli_bad");
  RunConfig cfg = small_sphere(dir);
  cfg.coefficients = {1.2};
  CHECK_THROWS_AS(run_subcommand("surface", cfg), MetricViolation);
  CHECK_THROWS_AS(run_subcommand("nonsense", cfg), std::invalid_argument);
}

TEST_CASE("spectrum then observe then report: sphere pipeline") {
  auto dir = fresh_dir("zoll_cli_pipe");
  auto cfg = small_sphere(dir);
  cfg.epsilon = 0.9;  // admissible even at n <= 3

  CHECK_THROWS_AS(run_subcommand("observe", cfg), MissingPrerequisite);

  run_subcommand("spectrum", cfg);
  auto sc = slurp(dir / "spectrum.csv");
  CHECK(sc.find("n,k,lambda2,center,deviation,residual") != std::string::npos);
  // sphere deviation column is constantly 0.25
  std::istringstream rows(sc);
  std::string line;
  int data_rows = 0;
  while (std::getline(rows, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'n') continue;
    ++data_rows;
    int n, k;
    double l2, center, dev, res;
    char c;
    std::istringstream ls(line);
    ls >> n >> c >> k >> c >> l2 >> c >> center >> c >> dev >> c >> res;
    CHECK(std::abs(dev - 0.25) < 1e-6);
  }
  CHECK(data_rows == 10);  // one member per (n, k), n <= 3

  run_subcommand("observe", cfg);
  auto oj = nlohmann::json::parse(slurp(dir / "observe.json"));
  CHECK(std::abs(oj["scan"]["min_ratio"].get<double>() - 0.5) < 1e-8);

  run_subcommand("report", cfg);
  auto rj = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(rj["structural"]["exclusion_ok"].get<bool>());
  CHECK(rj["structural"]["meridian_defect"].get<double>() == 0.0);
  CHECK(rj["structural"]["gram_defect"].get<double>() < 1e-6);
  CHECK(rj["structural"]["wronskian_dev"].get<double>() < 1e-6);
  CHECK(rj["structural"]["pass"].get<bool>());
  CHECK(std::abs(rj["observability"]["min_ratio"].get<double>() - 0.5) < 1e-8);
}

TEST_CASE("wave run: single-mode decay artifact") {
  auto dir = fresh_dir("zoll_cli_wave");
  auto cfg = small_sphere(dir);
  RunOptions opt;
  opt.mode_n = 2;
  opt.mode_k = 1;
  run_subcommand("wave", cfg, opt);
  auto wj = slurp(dir / "wave.json");
  CHECK(wj.find("\"degenerate_fit\": false") != std::string::npos);
  CHECK(wj.find("\"beta\":") != std::string::npos);
  CHECK(slurp(dir / "wave.csv").find("t,E,dissipation") != std::string::npos);

  // seed changes move the random-data run, but identical seeds agree
  RunOptions s1, s2;
  s1.seed = 5;
  s2.seed = 5;
  run_subcommand("wave", cfg, s1);
  auto first = slurp(dir / "wave.csv");
  run_subcommand("wave", cfg, s2);
  CHECK(slurp(dir / "wave.csv") == first);
  RunOptions s3;
  s3.seed = 6;
  run_subcommand("wave", cfg, s3);
  CHECK(slurp(dir / "wave.csv") != first);
}

TEST_CASE("structural_suite: sphere invariants at moderate resolution") {
  auto p = std::make_shared<const SurfaceProfile>(
      validate_profile(std::vector<double>{}, 4097));
  auto ch = build_chart(p, 8.0, 2049);
  auto sp = assemble_spectrum(ch, 3, 0.3);
  auto su = structural_suite(ch, sp);
  CHECK(su.meridian_defect == 0.0);
  CHECK(su.exclusion_ok);
  CHECK(su.gram_defect < 1e-6);
  CHECK(su.wronskian_dev < 1e-6);
}
