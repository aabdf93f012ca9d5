#include "carnot/config.hpp"

#include <cctype>
#include <istream>
#include <sstream>

#include "carnot/convergence.hpp"
#include "carnot/errors.hpp"

namespace carnot {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& key, const std::string& v) {
  size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': bad number '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError("config key '" + key + "': bad number '" + v + "'");
  return d;
}

long parse_long(const std::string& key, const std::string& v) {
  size_t pos = 0;
  long n = 0;
  try {
    n = std::stol(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': bad integer '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError("config key '" + key + "': bad integer '" + v + "'");
  return n;
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) out.push_back(parse_double(key, trim(item)));
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

// "2^-2..2^-6" or a comma list of positive reals.
std::vector<double> parse_schedule(const std::string& key, const std::string& v) {
  const size_t dots = v.find("..");
  if (dots != std::string::npos) {
    const std::string a = trim(v.substr(0, dots)), b = trim(v.substr(dots + 2));
    const auto power = [&](const std::string& s) {
      if (s.rfind("2^", 0) != 0)
        throw ConfigError("config key '" + key + "': range bounds must look like 2^-k");
      return parse_long(key, s.substr(2));
    };
    const long ka = -power(a), kb = -power(b);
    if (ka < 0 || kb < ka)
      throw ConfigError("config key '" + key + "': range must decrease, e.g. 2^-2..2^-6");
    return dyadic_schedule(static_cast<int>(ka), static_cast<int>(kb));
  }
  const std::vector<double> out = parse_list(key, v);
  for (double e : out)
    if (!(e > 0.0)) throw ConfigError("config key '" + key + "': eps must be positive");
  return out;
}

std::string join(const std::vector<double>& v) {
  std::ostringstream out;
  out.precision(17);
  for (size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
  return out.str();
}

} // namespace

std::vector<double> ExperimentConfig::schedule() const {
  if (!eps.empty()) return eps;
  return dyadic_schedule(2, 6);
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "group") group = v;
  else if (key == "group_dst") group_dst = v;
  else if (key == "map") map = v;
  else if (key == "kernel") kernel = v;
  else if (key == "kernel_center") kernel_center = parse_list(key, v);
  else if (key == "kernel_half") kernel_half = parse_list(key, v);
  else if (key == "x_box") x_box = parse_double(key, v);
  else if (key == "x_res") x_res = static_cast<int>(parse_long(key, v));
  else if (key == "z_res") z_res = static_cast<int>(parse_long(key, v));
  else if (key == "z_pad") z_pad = parse_double(key, v);
  else if (key == "eps") eps = parse_schedule(key, v);
  else if (key == "f_box") f_box = parse_double(key, v);
  else if (key == "f_margin") f_margin = parse_double(key, v);
  else if (key == "bank") bank = static_cast<int>(parse_long(key, v));
  else if (key == "f") f = v;
  else if (key == "workers") workers = static_cast<int>(parse_long(key, v));
  else if (key == "seed") seed = static_cast<std::uint64_t>(parse_long(key, v));
  else if (key == "tol") tol = parse_double(key, v);
  else if (key == "noise_floor") noise_floor = parse_double(key, v);
  else if (key == "slope_min") slope_min = parse_double(key, v);
  else if (key == "rule") rule = v;
  else if (key == "qmc_count") qmc_count = parse_long(key, v);
  else if (key == "out") out = v;
  else if (key == "x") x = parse_list(key, v);
  else if (key == "z") z = parse_list(key, v);
  else throw ConfigError("unknown config key '" + key + "'");
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    cfg.set(key, line.substr(eq + 1));
  }
  return cfg;
}

ExperimentConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream o;
  o.precision(17);
  o << "group = " << group << "\n";
  o << "group_dst = " << group_dst << "\n";
  o << "map = " << map << "\n";
  o << "kernel = " << kernel << "\n";
  o << "kernel_center = " << join(kernel_center) << "\n";
  o << "kernel_half = " << join(kernel_half) << "\n";
  o << "x_box = " << x_box << "\n";
  o << "x_res = " << x_res << "\n";
  o << "z_res = " << z_res << "\n";
  o << "z_pad = " << z_pad << "\n";
  o << "eps = " << (eps.empty() ? "2^-2..2^-6" : join(eps)) << "\n";
  o << "f_box = " << f_box << "\n";
  o << "f_margin = " << f_margin << "\n";
  o << "bank = " << bank << "\n";
  o << "f = " << f << "\n";
  o << "workers = " << workers << "\n";
  o << "seed = " << seed << "\n";
  o << "tol = " << tol << "\n";
  o << "noise_floor = " << noise_floor << "\n";
  o << "slope_min = " << slope_min << "\n";
  o << "rule = " << rule << "\n";
  o << "qmc_count = " << qmc_count << "\n";
  o << "out = " << out << "\n";
  o << "x = " << join(x) << "\n";
  o << "z = " << join(z) << "\n";
  return o.str();
}

std::string config_documentation() {
  return "group         builtin id or .group file path            [heisenberg]\n"
         "group_dst     map target group; empty = same as group    []\n"
         "map           registered map id, e.g. contact_shear      [contact_shear]\n"
         "kernel        kernel preset: default | odd               [default]\n"
         "kernel_center kernel x-support center, comma list        [0,0.45,0]\n"
         "kernel_half   kernel x-support half-widths               [0.5,0.35,0.5]\n"
         "x_box         x grid cube half-width                     [1]\n"
         "x_res         x nodes per axis                           [16]\n"
         "z_res         z nodes per axis (tensor rule)             [32]\n"
         "z_pad         z radius margin beyond the tail radius     [0.5]\n"
         "eps           schedule: 2^-a..2^-b or comma list         [2^-2..2^-6]\n"
         "f_box         test bank support cube half-width          [0.8]\n"
         "f_margin      test bank margin                           [0.05]\n"
         "bank          bank members used, 1..5                    [5]\n"
         "f             quantize input: bank:<i> or grid file      [bank:1]\n"
         "workers       worker threads                             [1]\n"
         "seed          qmc scramble seed                          [20240816]\n"
         "tol           filtration block tolerance                 [1e-6]\n"
         "noise_floor   convergence fit noise floor                [1e-10]\n"
         "slope_min     invariance verdict slope threshold         [0.8]\n"
         "rule          z quadrature rule: tensor | qmc            [tensor]\n"
         "qmc_count     qmc node count                             [200000]\n"
         "out           artifact path; '-' = stdout                [-]\n"
         "x             pansu base point, comma list               [0.3,0.7,0.2]\n"
         "z             pansu direction, comma list                [0.5,-0.4,0.6]\n";
}

} // namespace carnot
