#include "zoll/config.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "zoll/io.hpp"

namespace zoll {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// list values may be written bare or bracketed, comma or space separated
std::vector<std::string> split_list(std::string v) {
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') throw ConfigError("unterminated list: " + v);
    v = v.substr(1, v.size() - 2);
  }
  for (char& c : v)
    if (c == ',') c = ' ';
  std::vector<std::string> out;
  std::istringstream in(v);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not a number: " + v);
  }
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    long r = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return static_cast<int>(r);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not an integer: " + v);
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    unsigned long long r = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not a seed value: " + v);
  }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "surface" && section != "chart" && section != "spectral" &&
          section != "observability" && section != "wave" && section != "output")
        throw ConfigError("unknown section [" + section + "]");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError("key '" + key + "' appears before any section");
    std::string full = section + "." + key;

    if (section == "surface") {
      if (key == "coefficients") {
        cfg.coefficients.clear();
        for (const auto& t : split_list(val))
          cfg.coefficients.push_back(parse_real(full, t));
      } else if (key == "grid_size") {
        cfg.grid_size = parse_int(full, val);
      } else {
        throw ConfigError("unknown key '" + full + "'");
      }
    } else if (section == "chart") {
      if (key == "X")
        cfg.X = parse_real(full, val);
      else if (key == "n_points")
        cfg.n_points = parse_int(full, val);
      else
        throw ConfigError("unknown key '" + full + "'");
    } else if (section == "spectral") {
      if (key == "n_max")
        cfg.n_max = parse_int(full, val);
      else if (key == "A_config")
        cfg.A_config = parse_real(full, val);
      else if (key == "window_pad")
        cfg.window_pad = parse_real(full, val);
      else if (key == "grid_refine")
        cfg.grid_refine = parse_int(full, val);
      else
        throw ConfigError("unknown key '" + full + "'");
    } else if (section == "observability") {
      if (key == "epsilon")
        cfg.epsilon = parse_real(full, val);
      else if (key == "epsilon_a")
        cfg.epsilon_a = parse_real(full, val);
      else if (key == "band")
        cfg.band = parse_real(full, val);
      else
        throw ConfigError("unknown key '" + full + "'");
    } else if (section == "wave") {
      if (key == "n_max")
        cfg.wave_n_max = parse_int(full, val);
      else if (key == "dt")
        cfg.dt = parse_real(full, val);
      else if (key == "T")
        cfg.T = parse_real(full, val);
      else if (key == "damping")
        cfg.damping = val;
      else if (key == "seed")
        cfg.seed = parse_u64(full, val);
      else
        throw ConfigError("unknown key '" + full + "'");
    } else {  // output
      if (key == "directory")
        cfg.directory = val;
      else if (key == "formats")
        cfg.formats = split_list(val);
      else
        throw ConfigError("unknown key '" + full + "'");
    }
  }
  if (cfg.grid_size < 3) throw ConfigError("key 'surface.grid_size': must be >= 3");
  if (cfg.n_points < 3 || cfg.n_points % 2 == 0)
    throw ConfigError("key 'chart.n_points': must be odd and >= 3");
  if (cfg.X <= 0.0) throw ConfigError("key 'chart.X': must be positive");
  if (cfg.n_max < 1) throw ConfigError("key 'spectral.n_max': must be >= 1");
  if (cfg.A_config <= 0.0 || cfg.A_config > 1.0)
    throw ConfigError("key 'spectral.A_config': must lie in (0, 1]");
  if (cfg.window_pad < 0.0)
    throw ConfigError("key 'spectral.window_pad': must be >= 0");
  if (cfg.grid_refine < 1)
    throw ConfigError("key 'spectral.grid_refine': must be >= 1");
  if (cfg.dt <= 0.0) throw ConfigError("key 'wave.dt': must be positive");
  if (cfg.T <= 0.0) throw ConfigError("key 'wave.T': must be positive");
  for (const auto& f : cfg.formats)
    if (f != "csv" && f != "json")
      throw ConfigError("key 'output.formats': unknown format '" + f + "'");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string RunConfig::canonical() const {
  std::string s = "[surface]\ncoefficients =";
  for (double a : coefficients) s += " " + io::format_double(a);
  s += "\ngrid_size = " + std::to_string(grid_size);
  s += "\n[chart]\nX = " + io::format_double(X);
  s += "\nn_points = " + std::to_string(n_points);
  s += "\n[spectral]\nn_max = " + std::to_string(n_max);
  s += "\nA_config = " + io::format_double(A_config);
  s += "\nwindow_pad = " + io::format_double(window_pad);
  s += "\ngrid_refine = " + std::to_string(grid_refine);
  s += "\n[observability]\nepsilon = " + io::format_double(epsilon);
  s += "\nepsilon_a = " + io::format_double(epsilon_a);
  s += "\nband = " + io::format_double(band);
  s += "\n[wave]\nn_max = " + std::to_string(wave_n_max);
  s += "\ndt = " + io::format_double(dt);
  s += "\nT = " + io::format_double(T);
  s += "\ndamping = " + damping;
  s += "\nseed = " + std::to_string(seed);
  s += "\n[output]\ndirectory = " + directory;
  s += "\nformats =";
  for (const auto& f : formats) s += " " + f;
  s += "\n";
  return s;
}

std::uint64_t RunConfig::hash() const { return io::fnv1a(canonical()); }

}  // namespace zoll
