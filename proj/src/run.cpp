#include "zoll/run.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "zoll/geodesics.hpp"
#include "zoll/io.hpp"
#include "zoll/observability.hpp"
#include "zoll/par.hpp"
#include "zoll/wavesim.hpp"

namespace zoll {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
constexpr double kPi = std::numbers::pi;

struct Ctx {
  const RunConfig& cfg;
  const RunOptions& opt;
  fs::path dir;
  std::string hash;
  std::uint64_t seed;

  bool wants(const std::string& fmt) const {
    return std::find(cfg.formats.begin(), cfg.formats.end(), fmt) !=
           cfg.formats.end();
  }
  io::CsvWriter csv() const {
    io::CsvWriter w;
    w.header_block(hash, seed);
    return w;
  }
  ordered_json json_header() const {
    ordered_json j;
    j["tool"] = std::string(io::kToolName) + " " + io::kToolVersion;
    j["config_hash"] = hash;
    j["seed"] = seed;
    return j;
  }
  void write_json(const ordered_json& j, const std::string& name) const {
    if (!wants("json")) return;
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + (dir / name).string());
    out << j.dump(2) << "\n";
  }
};

std::shared_ptr<const SurfaceProfile> make_profile(const RunConfig& cfg) {
  return std::make_shared<const SurfaceProfile>(
      validate_profile(cfg.coefficients, cfg.grid_size));
}

// the spectral stage runs on a refined chart; other stages use n_points as is
IsothermalChart spectral_chart(const RunConfig& cfg,
                               std::shared_ptr<const SurfaceProfile> p) {
  int n = (cfg.n_points - 1) * cfg.grid_refine + 1;
  return build_chart(std::move(p), cfg.X, n);
}

void run_surface(const Ctx& c) {
  auto p = make_profile(c.cfg);
  auto ch = build_chart(p, c.cfg.X, c.cfg.n_points);
  if (c.wants("csv")) {
    auto w = c.csv();
    w.raw_line("x,f,rho,V");
    for (int i = 0; i < ch.n; ++i)
      w.row({io::cell(ch.x[i]), io::cell(ch.f[i]), io::cell(ch.rho[i]),
             io::cell(ch.V[i])});
    w.write(c.dir / "surface.csv");
  }
  ordered_json j = c.json_header();
  j["coefficients"] = p->coefficients();
  j["meridian_length"] = p->meridian_length();
  j["ell0"] = p->ell0();
  j["c"] = p->c();
  j["cV"] = p->cV();
  j["area"] = ch.area();
  c.write_json(j, "surface.json");
}

void run_geodesics(const Ctx& c) {
  auto p = make_profile(c.cfg);
  auto region = DampingSpec::parse(c.cfg.damping);
  auto rep = check_gcc(*p, region, 100, c.opt.t_cap);

  std::vector<double> closure(rep.initials.size()), clairaut(rep.initials.size());
  par::parallel_for(std::int64_t(rep.initials.size()), [&](std::int64_t i) {
    auto fr = flow_geodesic(*p, rep.initials[i], 2.0 * kPi, 2e-4);
    closure[i] = state_distance(rep.initials[i], fr.final_state);
    clairaut[i] = fr.clairaut_drift;
  });

  if (c.wants("csv")) {
    auto w = c.csv();
    w.raw_line("sample,ell,p_ell,p_phi,entry_time,closure_defect,clairaut_drift");
    for (std::size_t i = 0; i < rep.initials.size(); ++i) {
      const auto& s = rep.initials[i];
      double entry = rep.entry_times[i] ? *rep.entry_times[i] : -1.0;
      w.row({io::cell(int(i)), io::cell(s.ell), io::cell(s.p_ell),
             io::cell(s.p_phi), io::cell(entry), io::cell(closure[i]),
             io::cell(clairaut[i])});
    }
    w.write(c.dir / "geodesics.csv");
  }
  ordered_json j = c.json_header();
  j["region"] = region.to_string();
  j["t_cap"] = c.opt.t_cap;
  j["fraction_controlled"] = rep.fraction_controlled;
  j["max_entry_time"] = rep.max_entry_time;
  j["exceptional_orbits"] = rep.exceptional_orbits;
  j["max_closure_defect"] = *std::max_element(closure.begin(), closure.end());
  j["max_clairaut_drift"] = *std::max_element(clairaut.begin(), clairaut.end());
  c.write_json(j, "geodesics.json");
}

void run_spectrum(const Ctx& c) {
  auto ch = spectral_chart(c.cfg, make_profile(c.cfg));
  auto sp = assemble_spectrum(ch, c.cfg.n_max, c.cfg.A_config, c.cfg.window_pad);

  if (c.wants("csv")) {
    auto w = c.csv();
    w.raw_line("n,k,lambda2,center,deviation,residual");
    for (const auto& cl : sp.clusters)
      for (const auto& m : cl.members)
        w.row({io::cell(cl.n), io::cell(m.k), io::cell(m.lambda2),
               io::cell(cl.center()), io::cell(std::abs(m.lambda2 - cl.center())),
               io::cell(m.residual)});
    for (const auto& m : sp.outliers)
      w.raw_line("# outlier," + io::cell(m.k) + "," + io::cell(m.lambda2));
    w.write(c.dir / "spectrum.csv");
  }
  ordered_json j = c.json_header();
  j["n_max"] = c.cfg.n_max;
  j["A_config"] = sp.A_config;
  ordered_json cls = ordered_json::array();
  for (const auto& cl : sp.clusters)
    cls.push_back({{"n", cl.n},
                   {"A_observed", cl.A_observed},
                   {"members", cl.members.size()},
                   {"multiplicity", cl.multiplicity()}});
  j["clusters"] = cls;
  j["outliers"] = sp.outliers.size();
  c.write_json(j, "spectrum.json");
}

// rebuild the spectrum from a spectrum.csv artifact by re-solving each listed
// (k, lambda2) in a tight window; keeps `observe` an honest consumer of the
// spectrum stage's output
Spectrum spectrum_from_csv(const fs::path& path, const IsothermalChart& ch,
                           const RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw MissingPrerequisite("observe requires " + path.string() +
                                     "; run `spectrum` first");
  struct Row {
    int n, k;
    double lambda2;
  };
  std::vector<Row> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'n') continue;
    Row r{};
    char comma;
    std::istringstream ls(line);
    if (ls >> r.n >> comma >> r.k >> comma >> r.lambda2) rows.push_back(r);
  }
  if (rows.empty())
    throw MissingPrerequisite("observe: no spectrum rows in " + path.string());

  int n_max = 0;
  for (const auto& r : rows) n_max = std::max(n_max, r.n);
  Spectrum sp;
  sp.A_config = cfg.A_config;
  sp.clusters.resize(std::size_t(n_max) + 1);
  auto chart_copy = std::make_shared<const IsothermalChart>(ch);
  for (int n = 0; n <= n_max; ++n) {
    sp.clusters[n].n = n;
    sp.clusters[n].h = 1.0 / (n + 0.5);
    sp.clusters[n].chart = chart_copy;
  }
  std::vector<RadialEigenfunction> solved(rows.size());
  std::vector<char> missing(rows.size(), 0);  // no throwing inside the pool
  par::parallel_for(std::int64_t(rows.size()), [&](std::int64_t i) {
    const auto& r = rows[i];
    double lo = r.lambda2 - 0.05, hi = r.lambda2 + 0.05;
    if (r.k != 0) lo = std::max(lo, double(r.k) * double(r.k));
    auto evs = radial_solve(ch, r.k, lo, hi);
    if (evs.empty()) {
      missing[i] = 1;
      return;
    }
    std::size_t best = 0;
    for (std::size_t j = 1; j < evs.size(); ++j)
      if (std::abs(evs[j].lambda2 - r.lambda2) <
          std::abs(evs[best].lambda2 - r.lambda2))
        best = j;
    solved[i] = std::move(evs[best]);
  });
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (missing[i])
      throw NoConvergence("observe: listed eigenvalue not recovered at k = " +
                          std::to_string(rows[i].k));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& cl = sp.clusters[rows[i].n];
    cl.A_observed = std::max(cl.A_observed,
                             std::abs(solved[i].lambda2 - cl.center()));
    cl.members.push_back(std::move(solved[i]));
  }
  return sp;
}

void run_observe(const Ctx& c) {
  auto ch = spectral_chart(c.cfg, make_profile(c.cfg));
  auto sp = spectrum_from_csv(c.dir / "spectrum.csv", ch, c.cfg);

  ordered_json j = c.json_header();
  j["epsilon"] = c.cfg.epsilon;
  j["epsilon_a"] = c.cfg.epsilon_a;
  j["band"] = c.cfg.band;
  try {
    auto scan = observability_scan(sp.clusters, c.cfg.epsilon);
    j["scan"] = {{"min_ratio", scan.min_ratio},
                 {"argmin_n", scan.argmin_n},
                 {"argmin_k", scan.argmin_k},
                 {"trend_slope", scan.trend_slope},
                 {"entries", scan.entries.size()}};
  } catch (const EmptyAdmissibleSet&) {
    j["scan"] = {{"empty_admissible_set", true}};
  }

  io::CsvWriter w = c.csv();
  w.raw_line(
      "n,k,E,ratio,agmon_defect,agmon_bound,F,l2_error,ring_mass,half_mass");
  ordered_json members = ordered_json::array();
  double max_A = 0.0;
  for (const auto& cl : sp.clusters) {
    max_A = std::max(max_A, cl.A_observed);
    for (const auto& m : cl.members) {
      double E = 1.0 - cl.h * cl.h * double(m.k) * double(m.k);
      double ratio = mass_ratio(m, ch).weighted;
      double nan = std::nan("");
      double defect = nan, bound = nan, F = nan, l2 = nan, ring = nan, half = nan;
      if (m.k != 0) {
        defect = agmon_check(m, ch, c.cfg.epsilon_a);
        bound = 2.0 * c.cfg.epsilon_a / cl.h + 5.0;
      }
      double ratio_Eh = E / cl.h;
      if (ratio_Eh <= 10.0) {  // oscillator comparison, lenient in the gap
        auto hr = hermite_compare(m, ch, /*strict_regime=*/false);
        F = hr.F;
        l2 = hr.l2_error;
      }
      if (ratio_Eh >= 5.0 && E > 0.0) {
        auto hf = husimi(m, ch, c.cfg.band, /*strict_regime=*/false);
        ring = hf.ring_mass;
        half = hf.half_mass;
      }
      w.row({io::cell(cl.n), io::cell(m.k), io::cell(E), io::cell(ratio),
             io::cell(defect), io::cell(bound), io::cell(F), io::cell(l2),
             io::cell(ring), io::cell(half)});
      ordered_json mj = {{"n", cl.n}, {"k", m.k}, {"E", E}, {"ratio", ratio}};
      if (m.k != 0) {
        mj["agmon_defect"] = defect;
        mj["agmon_bound"] = bound;
      }
      if (!std::isnan(F)) {
        mj["F"] = F;
        mj["l2_error"] = l2;
      }
      if (!std::isnan(ring)) {
        mj["ring_mass"] = ring;
        mj["half_mass"] = half;
      }
      members.push_back(std::move(mj));
    }
  }
  if (c.wants("csv")) w.write(c.dir / "observe.csv");
  j["max_A_observed"] = max_A;
  j["members"] = members;
  c.write_json(j, "observe.json");
}

void run_wave(const Ctx& c) {
  auto p = make_profile(c.cfg);
  auto ch = build_chart(p, c.cfg.X, c.cfg.n_points);
  auto sp = assemble_spectrum(ch, c.cfg.wave_n_max, c.cfg.A_config);
  std::string damping_text =
      c.opt.damping.empty() ? c.cfg.damping : c.opt.damping;
  auto damping = DampingSpec::parse(damping_text);

  ModalWaveState st;
  if (c.opt.mode_n >= 0) {
    const RadialEigenfunction* found = nullptr;
    for (const auto& cl : sp.clusters) {
      if (cl.n != c.opt.mode_n) continue;
      for (const auto& m : cl.members)
        if (m.k == c.opt.mode_k) found = &m;
    }
    if (!found)
      throw std::invalid_argument("wave: mode (" + std::to_string(c.opt.mode_n) +
                                  "," + std::to_string(c.opt.mode_k) +
                                  ") not in the assembled spectrum");
    st = state_from_mode(ch, *found);
  } else {
    st = random_band_limited(ch, sp, c.seed);
  }

  auto tr = evolve(ch, st, damping, c.cfg.T, c.cfg.dt);
  double lo = c.opt.fit_lo >= 0.0 ? c.opt.fit_lo : 0.5 * c.cfg.T;
  double hi = c.opt.fit_hi >= 0.0 ? c.opt.fit_hi : c.cfg.T;
  DecayFit fit;
  bool degenerate = false;
  try {
    fit = fit_decay(tr, lo, hi);
  } catch (const DegenerateFit&) {
    degenerate = true;
  }

  if (c.wants("csv")) {
    auto w = c.csv();
    w.raw_line("t,E,dissipation");
    for (std::size_t i = 0; i < tr.times.size(); ++i)
      w.row({io::cell(tr.times[i]), io::cell(tr.energy[i]),
             io::cell(tr.dissipation[i])});
    w.write(c.dir / "wave.csv");
  }
  ordered_json j = c.json_header();
  j["damping"] = damping.to_string();
  j["dt"] = c.cfg.dt;
  j["T"] = c.cfg.T;
  j["n_max"] = c.cfg.wave_n_max;
  if (c.opt.mode_n >= 0)
    j["mode"] = {c.opt.mode_n, c.opt.mode_k};
  j["lambda_max"] = st.lambda_max;
  j["fit_window"] = {lo, hi};
  j["beta"] = degenerate ? 0.0 : fit.beta;
  j["C"] = degenerate ? 0.0 : fit.C;
  j["r2"] = degenerate ? 0.0 : fit.r2;
  j["degenerate_fit"] = degenerate;
  j["identity_residual"] = energy_identity_residual(tr);
  j["final_energy_fraction"] = tr.energy.back() / tr.energy.front();
  c.write_json(j, "wave.json");
}

ordered_json load_json_if_present(const fs::path& p) {
  std::ifstream in(p);
  if (!in) return nullptr;
  ordered_json j;
  in >> j;
  return j;
}

void run_report(const Ctx& c) {
  // the structural suite is recomputed in-process; the remaining sections
  // aggregate whatever artifacts earlier subcommands left in the directory
  auto ch = spectral_chart(c.cfg, make_profile(c.cfg));
  auto sp = assemble_spectrum(ch, c.cfg.n_max, c.cfg.A_config, c.cfg.window_pad);
  auto su = structural_suite(ch, sp);

  ordered_json j = c.json_header();
  j["structural"] = {{"meridian_defect", su.meridian_defect},
                     {"gram_defect", su.gram_defect},
                     {"exclusion_ok", su.exclusion_ok},
                     {"wronskian_dev", su.wronskian_dev},
                     {"pass", su.meridian_defect <= 1e-6 &&
                                  su.gram_defect <= 1e-6 && su.exclusion_ok &&
                                  su.wronskian_dev <= 1e-6}};

  double max_A = 0.0;
  for (const auto& cl : sp.clusters) max_A = std::max(max_A, cl.A_observed);
  j["spectrum"] = {{"n_max", c.cfg.n_max},
                   {"max_A_observed", max_A},
                   {"outliers", sp.outliers.size()}};

  if (auto obs = load_json_if_present(c.dir / "observe.json"); !obs.is_null())
    j["observability"] = obs.contains("scan") ? obs["scan"] : ordered_json(nullptr);
  if (auto wv = load_json_if_present(c.dir / "wave.json"); !wv.is_null())
    j["wave"] = {{"beta", wv.value("beta", 0.0)},
                 {"identity_residual", wv.value("identity_residual", 0.0)}};
  if (auto ge = load_json_if_present(c.dir / "geodesics.json"); !ge.is_null())
    j["geodesics"] = {
        {"fraction_controlled", ge.value("fraction_controlled", 0.0)},
        {"max_closure_defect", ge.value("max_closure_defect", 0.0)},
        {"max_clairaut_drift", ge.value("max_clairaut_drift", 0.0)}};

  std::ofstream out(c.dir / "report.json", std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot open " + (c.dir / "report.json").string());
  out << j.dump(2) << "\n";
}

}  // namespace

StructuralReport structural_suite(const IsothermalChart& chart,
                                  const Spectrum& spectrum) {
  StructuralReport rep;
  rep.meridian_defect = std::abs(chart.profile->meridian_length() - kPi);

  rep.exclusion_ok = true;
  std::map<int, std::vector<const RadialEigenfunction*>> by_k;
  for (const auto& cl : spectrum.clusters)
    for (const auto& m : cl.members) {
      if (m.lambda2 <= double(m.k) * double(m.k)) rep.exclusion_ok = false;
      by_k[m.k].push_back(&m);
    }

  // The chart window [-X, X] misses rho^2-mass ~ 2 e^{-2X} near the poles,
  // which k = 0 members (bounded, not decaying in x) can feel at the 1e-6
  // level. Complete the inner products with the linearized pole tails
  // r(ell) ~ |r'| * dist and renormalize, so the Gram measures orthogonality
  // rather than window truncation.
  const auto& prof = *chart.profile;
  double ell_l = chart.f.front(), ell_r = chart.f.back();
  double tail_l = std::abs(prof.dr_at_ell(0.0)) * ell_l * ell_l / 2.0;
  double tail_r = std::abs(prof.dr_at_ell(prof.meridian_length())) *
                  (prof.meridian_length() - ell_r) *
                  (prof.meridian_length() - ell_r) / 2.0;
  auto inner = [&](const RadialEigenfunction& a, const RadialEigenfunction& b) {
    double g = 0.0;
    for (int q = 0; q < chart.n; ++q) {
      double wgt = (q == 0 || q == chart.n - 1) ? 0.5 : 1.0;
      g += wgt * chart.rho[q] * chart.rho[q] * a.w[q] * b.w[q];
    }
    g *= chart.dx;
    g += tail_l * a.w.front() * b.w.front() + tail_r * a.w.back() * b.w.back();
    return g;
  };
  for (const auto& [k, ms] : by_k) {
    std::vector<double> nrm(ms.size());
    for (std::size_t i = 0; i < ms.size(); ++i) nrm[i] = std::sqrt(inner(*ms[i], *ms[i]));
    for (std::size_t i = 0; i < ms.size(); ++i)
      for (std::size_t jj = i; jj < ms.size(); ++jj) {
        double g = inner(*ms[i], *ms[jj]) / (nrm[i] * nrm[jj]);
        rep.gram_defect =
            std::max(rep.gram_defect, std::abs(g - (i == jj ? 1.0 : 0.0)));
      }
  }

  // Conservation of the discrete Wronskian holds at any lambda^2; evaluate
  // slightly off the eigenvalue, where the two one-sided growing sweeps are
  // genuinely independent (at the eigenvalue they are near-parallel and the
  // normalized deviation measures cancellation, not conservation).
  for (const auto& [k, ms] : by_k) {
    if (k == 0) continue;
    for (const auto* m : ms) {
      double l2 = m->lambda2 + 0.37;
      auto w1 = radial_ivp_solution(chart, k, l2, true, true);
      auto w2 = radial_ivp_solution(chart, k, l2, false, true);
      rep.wronskian_dev =
          std::max(rep.wronskian_dev, wronskian_check(chart, w1, w2));
    }
  }
  return rep;
}

int run_subcommand(const std::string& subcommand, const RunConfig& config,
                   const RunOptions& options) {
  par::set_threads(options.threads);
  Ctx c{config, options, fs::path(config.directory), io::hash_hex(config.hash()),
        options.seed.value_or(config.seed)};
  fs::create_directories(c.dir);

  if (subcommand == "surface")
    run_surface(c);
  else if (subcommand == "geodesics")
    run_geodesics(c);
  else if (subcommand == "spectrum")
    run_spectrum(c);
  else if (subcommand == "observe")
    run_observe(c);
  else if (subcommand == "wave")
    run_wave(c);
  else if (subcommand == "report")
    run_report(c);
  else
    throw std::invalid_argument("unknown subcommand '" + subcommand + "'");
  return 0;
}

}  // namespace zoll
