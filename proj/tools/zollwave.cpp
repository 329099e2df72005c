// Command-line driver. Subcommands map 1:1 onto run_subcommand; all numeric
// work lives in the library so the binary stays a thin argument parser.
#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "zoll/config.hpp"
#include "zoll/io.hpp"
#include "zoll/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{std::string(zoll::io::kToolName) + " " + zoll::io::kToolVersion};
  app.require_subcommand(1);

  std::string config_path, out_dir, damping, mode, fit_window;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  double t_cap = 4.0 * 3.14159265358979324;

  app.add_option("--config", config_path, "configuration file");
  app.add_option("--out", out_dir, "output directory (overrides [output])");
  app.add_option("--seed", seed, "random seed (overrides [wave] seed)")
      ->each([&](const std::string&) { seed_set = true; });
  app.add_option("--threads", threads, "worker threads; 1 = serial reference");

  auto* surface = app.add_subcommand("surface", "profile and chart tables");
  auto* geodesics =
      app.add_subcommand("geodesics", "geodesic flow and control-region timing");
  geodesics->add_option("--tcap", t_cap, "entry-time cap for the region check");
  auto* spectrum = app.add_subcommand("spectrum", "clustered eigenvalue table");
  auto* observe =
      app.add_subcommand("observe", "localization diagnostics per member");
  auto* wave = app.add_subcommand("wave", "damped wave evolution and decay fit");
  wave->add_option("--damping", damping, "damping kind (overrides [wave])");
  wave->add_option("--mode", mode, "single-mode initial data as n,k");
  wave->add_option("--fit-window", fit_window, "decay fit window as t_lo,t_hi");
  auto* report = app.add_subcommand("report", "aggregate JSON summary");
  (void)surface;
  (void)spectrum;
  (void)observe;
  (void)report;

  CLI11_PARSE(app, argc, argv);

  try {
    zoll::RunConfig cfg =
        config_path.empty() ? zoll::RunConfig{} : zoll::load_config(config_path);
    if (!out_dir.empty()) cfg.directory = out_dir;

    zoll::RunOptions opt;
    if (seed_set) opt.seed = seed;
    opt.threads = threads;
    opt.t_cap = t_cap;
    opt.damping = damping;
    if (!mode.empty() &&
        std::sscanf(mode.c_str(), "%d,%d", &opt.mode_n, &opt.mode_k) != 2) {
      std::fprintf(stderr, "error: --mode expects n,k\n");
      return 1;
    }
    if (!fit_window.empty() &&
        std::sscanf(fit_window.c_str(), "%lf,%lf", &opt.fit_lo, &opt.fit_hi) != 2) {
      std::fprintf(stderr, "error: --fit-window expects t_lo,t_hi\n");
      return 1;
    }

    return zoll::run_subcommand(app.get_subcommands().front()->get_name(), cfg,
                                opt);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
