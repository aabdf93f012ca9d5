#include "carnot/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <vector>

#include "carnot/errors.hpp"
#include "carnot/invariance.hpp"
#include "carnot/pansu.hpp"
#include "carnot/quantize.hpp"
#include "carnot/smooth_map.hpp"

namespace carnot {

namespace {

bool looks_like_path(const std::string& spec) {
  if (spec.find('/') != std::string::npos) return true;
  if (spec.size() > 6 && spec.compare(spec.size() - 6, 6, ".group") == 0) return true;
  return false;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

// Source and destination groups. When group_dst is empty both sides are the
// same object, which is what same-group map constructors require.
struct GroupPair {
  Group src;
  std::unique_ptr<Group> dst_store;

  explicit GroupPair(const ExperimentConfig& cfg) : src(open_group(cfg.group)) {
    if (!cfg.group_dst.empty()) dst_store = std::make_unique<Group>(open_group(cfg.group_dst));
  }
  const Group& dst() const { return dst_store ? *dst_store : src; }
};

Box kernel_box(const ExperimentConfig& cfg, int n) {
  if (static_cast<int>(cfg.kernel_center.size()) != n ||
      static_cast<int>(cfg.kernel_half.size()) != n)
    throw ConfigError("kernel_center and kernel_half must have " + std::to_string(n) +
                      " entries for this group");
  Box b;
  b.lo.resize(n);
  b.hi.resize(n);
  for (int i = 0; i < n; ++i) {
    if (!(cfg.kernel_half[i] > 0)) throw ConfigError("kernel_half entries must be positive");
    b.lo[i] = cfg.kernel_center[i] - cfg.kernel_half[i];
    b.hi[i] = cfg.kernel_center[i] + cfg.kernel_half[i];
  }
  return b;
}

GridSpec z_grid(const ExperimentConfig& cfg, int n, double radius) {
  Box zb = Box::cube(n, radius + cfg.z_pad);
  if (cfg.rule == "tensor") return GridSpec::tensor(zb, cfg.z_res);
  if (cfg.rule == "qmc") return GridSpec::qmc(zb, cfg.qmc_count, cfg.seed);
  throw ConfigError("rule must be tensor or qmc, got '" + cfg.rule + "'");
}

SampledFunction input_function(const ExperimentConfig& cfg, int n) {
  const std::string& id = cfg.f;
  if (id.rfind("bank:", 0) == 0) {
    long idx = 0;
    try {
      size_t used = 0;
      idx = std::stol(id.substr(5), &used);
      if (used != id.size() - 5) throw std::invalid_argument(id);
    } catch (const std::exception&) {
      throw ConfigError("f: expected bank:<1..5> or a grid file path, got '" + id + "'");
    }
    auto bank = test_bank(Box::cube(n, cfg.f_box), cfg.f_margin);
    if (idx < 1 || idx > static_cast<long>(bank.size()))
      throw ConfigError("f: bank index out of range 1.." + std::to_string(bank.size()));
    return bank[idx - 1];
  }
  bool csv = id.size() > 4 && id.compare(id.size() - 4, 4, ".csv") == 0;
  std::ifstream in(id, csv ? std::ios::in : std::ios::in | std::ios::binary);
  if (!in) throw ConfigError("f: cannot open grid file '" + id + "'");
  GridFunction g = csv ? read_grid_csv(in) : read_grid_binary(in);
  if (g.spec.dim() != n)
    throw ConfigError("f: grid file has dimension " + std::to_string(g.spec.dim()) +
                      ", the group needs " + std::to_string(n));
  return SampledFunction(std::move(g));
}

// Write the product to cfg.out when it names a file; the returned stdout text
// is then just the product's # summary lines.
std::string emit(const ExperimentConfig& cfg, const std::string& text) {
  if (cfg.out == "-") return text;
  std::ofstream out(cfg.out, std::ios::binary);
  if (!out) throw ConfigError("out: cannot open '" + cfg.out + "' for writing");
  out << text;
  if (!out) throw ConfigError("out: write to '" + cfg.out + "' failed");
  std::string summary;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line))
    if (!line.empty() && line[0] == '#') summary += line + "\n";
  return summary;
}

RunResult run_group_info(const ExperimentConfig& cfg) {
  Group g = open_group(cfg.group);
  std::ostringstream os;
  os << "group = " << g.name() << "\n";
  os << "n = " << g.dim() << "\n";
  os << "step = " << g.step() << "\n";
  os << "Q = " << g.hom_dim() << "\n";
  os << "weights =";
  for (int w : g.algebra().weights()) os << " " << w;
  os << "\n";
  os << "valid = yes\n";
  return {0, emit(cfg, os.str())};
}

RunResult run_law(const ExperimentConfig& cfg) {
  Group g = open_group(cfg.group);
  return {0, emit(cfg, g.law_text())};
}

RunResult run_pansu_check(const ExperimentConfig& cfg) {
  GroupPair gp(cfg);
  SmoothMap map = make_map(gp.src, gp.dst(), cfg.map);
  if (static_cast<int>(cfg.x.size()) != gp.src.dim())
    throw ConfigError("x must have " + std::to_string(gp.src.dim()) + " entries");
  PansuReport rep = check_filtration_preserving(map, cfg.x, cfg.tol);
  return {0, emit(cfg, rep.to_text())};
}

RunResult run_pansu_probe(const ExperimentConfig& cfg) {
  GroupPair gp(cfg);
  SmoothMap map = make_map(gp.src, gp.dst(), cfg.map);
  if (static_cast<int>(cfg.x.size()) != gp.src.dim())
    throw ConfigError("x must have " + std::to_string(gp.src.dim()) + " entries");
  if (static_cast<int>(cfg.z.size()) != gp.src.dim())
    throw ConfigError("z must have " + std::to_string(gp.src.dim()) + " entries");
  // cfg.eps left empty selects the probe's own dyadic default.
  ProbeResult pr = pansu_limit_probe(map, cfg.x, cfg.z, cfg.eps);
  return {0, emit(cfg, pr.to_csv())};
}

RunResult run_quantize(const ExperimentConfig& cfg) {
  Group g = open_group(cfg.group);
  const int n = g.dim();
  Kernel kappa = kernel_preset(g, cfg.kernel, kernel_box(cfg, n));
  SampledFunction f = input_function(cfg, n);
  double eps = cfg.schedule().front();
  GridSpec x_spec = GridSpec::tensor(Box::cube(n, cfg.x_box), cfg.x_res);
  GridSpec z_spec = z_grid(cfg, n, kernel_tail_radius(kappa, 1e-12));

  bool under = false;
  GridFunction out = op_apply(kappa, eps, f, x_spec, z_spec, cfg.workers, &under);
  GridFunction fx = sample_grid(x_spec, [&](const double* y) { return f(y); });

  std::ostringstream sum;
  sum << "# {\"eps\": " << fmt(eps) << ", \"l2_in\": " << fmt(l2_norm(fx))
      << ", \"l2_out\": " << fmt(l2_norm(out));
  try {
    sum << ", \"a0\": " << fmt(a0_seminorm(kappa, z_spec, x_spec));
  } catch (const DomainError&) {
    // the configured grids cannot certify the seminorm; omit it
  }
  sum << ", \"under_resolved\": " << (under ? "true" : "false") << "}\n";
  return {0, emit(cfg, out.to_csv() + sum.str())};
}

RunResult run_invariance(const ExperimentConfig& cfg) {
  GroupPair gp(cfg);
  SmoothMap map = make_map(gp.src, gp.dst(), cfg.map);
  const int n = gp.src.dim();
  Kernel kappa = kernel_preset(gp.dst(), cfg.kernel, kernel_box(cfg, gp.dst().dim()));
  Kernel pulled = pullback_kernel(map, kappa, cfg.tol);

  if (cfg.bank < 1 || cfg.bank > 5) throw ConfigError("bank must be between 1 and 5");
  auto full = test_bank(Box::cube(n, cfg.f_box), cfg.f_margin);
  std::vector<SampledFunction> bank(full.begin(), full.begin() + cfg.bank);

  GridSpec x_spec = GridSpec::tensor(Box::cube(n, cfg.x_box), cfg.x_res);
  double radius = std::max(kernel_tail_radius(kappa, 1e-8), kernel_tail_radius(pulled, 1e-8));
  GridSpec z_spec = z_grid(cfg, n, radius);

  InvarianceResult res =
      invariance_experiment(map, kappa, bank, Box::cube(n, cfg.f_box), cfg.schedule(), x_spec,
                            z_spec, cfg.workers, cfg.slope_min, cfg.tol);
  res.table.noise_floor = cfg.noise_floor;
  res.table.fit();
  res.verdict = res.table.exact ||
                (res.table.fitted_slope >= cfg.slope_min && res.table.monotone_decreasing());
  return {res.verdict ? 0 : 4, emit(cfg, res.to_csv())};
}

} // namespace

Group open_group(const std::string& spec) {
  if (looks_like_path(spec)) return Group(read_algebra_file(spec));
  return Group(builtin_algebra(spec));
}

RunResult run_subcommand(const std::string& cmd, const ExperimentConfig& cfg) {
  if (cmd == "group-info") return run_group_info(cfg);
  if (cmd == "law") return run_law(cfg);
  if (cmd == "pansu-check") return run_pansu_check(cfg);
  if (cmd == "pansu-probe") return run_pansu_probe(cfg);
  if (cmd == "quantize") return run_quantize(cfg);
  if (cmd == "invariance") return run_invariance(cfg);
  throw ConfigError("unknown subcommand '" + cmd + "'");
}

} // namespace carnot
