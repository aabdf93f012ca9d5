// carnot: semiclassical calculus on graded nilpotent groups.
//
// Thin shell over the C API: every subcommand assembles a "key = value"
// config text (file first, then flag overrides, later lines win) and hands
// it to carnot_run. Exit codes: 0 ok, 2 configuration or format problem,
// 3 precondition refused or domain violated, 4 experiment gate failed,
// 70 internal error.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "carnot.h"

namespace {

int fold_exit(carnot_code code) {
  switch (code) {
    case CARNOT_OK: return 0;
    case CARNOT_ERR_CONFIG: return 2;
    case CARNOT_ERR_FORMAT: return 2;
    case CARNOT_ERR_PRECONDITION: return 3;
    case CARNOT_ERR_DOMAIN: return 3;
    case CARNOT_ERR_GATE: return 4;
    default: return 70;
  }
}

struct CommandSpec {
  std::string name;
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides; // applied in order
  std::vector<std::string> raw; // --set key=value lines, appended last
};

int run(const CommandSpec& cmd) {
  std::string text;
  if (!cmd.config_path.empty()) {
    std::ifstream in(cmd.config_path);
    if (!in) {
      std::fprintf(stderr, "error: cannot open config file '%s'\n", cmd.config_path.c_str());
      return 2;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
    if (!text.empty() && text.back() != '\n') text += '\n';
  }
  for (const auto& kv : cmd.overrides) text += kv.first + " = " + kv.second + "\n";
  for (const auto& line : cmd.raw) text += line + "\n";

  char* out = nullptr;
  carnot_code code = carnot_run(cmd.name.c_str(), text.c_str(), &out);
  if (out) {
    std::fputs(out, stdout);
    carnot_free(out);
  }
  if (code != CARNOT_OK && code != CARNOT_ERR_GATE)
    std::fprintf(stderr, "error: %s\n", carnot_last_error());
  return fold_exit(code);
}

// Registers a flag that, when given, appends "key = value" to the config.
void add_override(CLI::App* sub, CommandSpec& cmd, const std::string& flag,
                  const std::string& key, const std::string& help) {
  sub->add_option_function<std::string>(
        flag, [&cmd, key](const std::string& v) { cmd.overrides.emplace_back(key, v); }, help);
}

void add_common(CLI::App* sub, CommandSpec& cmd) {
  sub->add_option("--config", cmd.config_path, "config file of key = value lines");
  sub->add_option("--set", cmd.raw, "extra config line key=value (repeatable)");
  add_override(sub, cmd, "--out", "out", "write the product to this file instead of stdout");
}

void add_experiment_flags(CLI::App* sub, CommandSpec& cmd) {
  add_override(sub, cmd, "--group", "group", "source group id or file");
  add_override(sub, cmd, "--dst", "group_dst", "target group when it differs from the source");
  add_override(sub, cmd, "--map", "map", "registered map id");
  add_override(sub, cmd, "--kernel", "kernel", "kernel preset: default or odd");
  add_override(sub, cmd, "--kernel-center", "kernel_center", "kernel x-support center, comma list");
  add_override(sub, cmd, "--kernel-half", "kernel_half", "kernel x-support half widths, comma list");
  add_override(sub, cmd, "--eps", "eps", "schedule: 2^-a..2^-b or comma list");
  add_override(sub, cmd, "--f", "f", "input: bank:<1..5> or grid file (.csv or binary)");
  add_override(sub, cmd, "--bank", "bank", "number of bank inputs used by invariance");
  add_override(sub, cmd, "--x-box", "x_box", "output box half width");
  add_override(sub, cmd, "--x-res", "x_res", "output grid nodes per axis");
  add_override(sub, cmd, "--z-res", "z_res", "z quadrature nodes per axis");
  add_override(sub, cmd, "--z-pad", "z_pad", "extra z radius beyond the envelope tail");
  add_override(sub, cmd, "--f-box", "f_box", "bank support half width");
  add_override(sub, cmd, "--rule", "rule", "z quadrature: tensor or qmc");
  add_override(sub, cmd, "--qmc-count", "qmc_count", "qmc node count");
  add_override(sub, cmd, "--workers", "workers", "worker threads");
  add_override(sub, cmd, "--seed", "seed", "qmc shift seed");
  add_override(sub, cmd, "--tol", "tol", "filtration gate tolerance");
  add_override(sub, cmd, "--slope-min", "slope_min", "minimum accepted convergence slope");
  add_override(sub, cmd, "--noise-floor", "noise_floor", "errors below this are noise in the fit");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"semiclassical calculus on graded nilpotent groups"};
  app.require_subcommand(1);

  std::vector<CommandSpec> specs(6);
  CommandSpec& info = specs[0];
  CommandSpec& law = specs[1];
  CommandSpec& check = specs[2];
  CommandSpec& probe = specs[3];
  CommandSpec& quant = specs[4];
  CommandSpec& inv = specs[5];

  info.name = "group-info";
  auto* s_info = app.add_subcommand("group-info", "print group dimensions, step, Q, weights");
  std::string info_group, law_group;
  s_info->add_option("group", info_group, "builtin id or .group file")->required();
  add_common(s_info, info);

  law.name = "law";
  auto* s_law = app.add_subcommand("law", "print the synthesized group law");
  s_law->add_option("group", law_group, "builtin id or .group file")->required();
  add_common(s_law, law);

  check.name = "pansu-check";
  auto* s_check = app.add_subcommand("pansu-check", "filtration and Pansu consistency report");
  std::string check_group, check_map, probe_group, probe_map;
  s_check->add_option("group", check_group, "source group")->required();
  s_check->add_option("map", check_map, "registered map id")->required();
  add_override(s_check, check, "--dst", "group_dst", "target group when it differs");
  add_override(s_check, check, "--x", "x", "base point, comma list");
  add_override(s_check, check, "--tol", "tol", "below-diagonal tolerance");
  add_common(s_check, check);

  probe.name = "pansu-probe";
  auto* s_probe = app.add_subcommand("pansu-probe", "rescaled difference quotient table");
  s_probe->add_option("group", probe_group, "source group")->required();
  s_probe->add_option("map", probe_map, "registered map id")->required();
  add_override(s_probe, probe, "--dst", "group_dst", "target group when it differs");
  add_override(s_probe, probe, "--x", "x", "base point, comma list");
  add_override(s_probe, probe, "--z", "z", "probe direction, comma list");
  add_override(s_probe, probe, "--eps", "eps", "schedule: 2^-a..2^-b or comma list");
  add_common(s_probe, probe);

  quant.name = "quantize";
  auto* s_quant = app.add_subcommand("quantize", "apply Op_eps(kappa) to an input on a grid");
  add_experiment_flags(s_quant, quant);
  add_common(s_quant, quant);

  inv.name = "invariance";
  auto* s_inv = app.add_subcommand("invariance", "kernel-side invariance experiment");
  add_experiment_flags(s_inv, inv);
  add_common(s_inv, inv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (s_info->parsed()) info.overrides.emplace_back("group", info_group);
  if (s_law->parsed()) law.overrides.emplace_back("group", law_group);
  if (s_check->parsed()) {
    check.overrides.emplace_back("group", check_group);
    check.overrides.emplace_back("map", check_map);
  }
  if (s_probe->parsed()) {
    probe.overrides.emplace_back("group", probe_group);
    probe.overrides.emplace_back("map", probe_map);
  }

  for (size_t i = 0; i < specs.size(); ++i) {
    CLI::App* subs[] = {s_info, s_law, s_check, s_probe, s_quant, s_inv};
    if (subs[i]->parsed()) return run(specs[i]);
  }
  return 2;
}
