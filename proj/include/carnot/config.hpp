#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace carnot {

/// Experiment settings for the CLI-style runners, parsed from plain-text
/// `key = value` lines. '#' starts a comment, blank lines are skipped,
/// repeated keys overwrite (last one wins), unknown keys are rejected.
/// Every field below carries its documented default.
struct ExperimentConfig {
  std::string group = "heisenberg"; // builtin id or .group file path
  std::string group_dst;            // map target group; empty = same as group
  std::string map = "contact_shear";
  std::string kernel = "default"; // kernel preset: default | odd
  std::vector<double> kernel_center{0.0, 0.45, 0.0};
  std::vector<double> kernel_half{0.5, 0.35, 0.5};
  double x_box = 1.0; // x grid cube half-width
  int x_res = 16;     // x nodes per axis
  int z_res = 32;     // z nodes per axis, tensor rule
  double z_pad = 0.5; // z box radius margin beyond the envelope tail radius
  std::vector<double> eps; // empty = the 2^-2..2^-6 dyadic default
  double f_box = 0.8;      // test bank support cube half-width
  double f_margin = 0.05;  // test bank margin
  int bank = 5;            // bank members used, 1..5
  std::string f = "bank:1"; // quantize input: bank:<i>, or a grid file path
  int workers = 1;
  std::uint64_t seed = 20240816; // qmc scramble seed
  double tol = 1e-6;             // filtration block tolerance
  double noise_floor = 1e-10;
  double slope_min = 0.8;
  std::string rule = "tensor"; // z quadrature: tensor | qmc
  long qmc_count = 200000;
  std::string out = "-";                 // artifact path; '-' = stdout
  std::vector<double> x{0.3, 0.7, 0.2};  // pansu base point
  std::vector<double> z{0.5, -0.4, 0.6}; // pansu direction

  /// eps when set, else the dyadic default.
  std::vector<double> schedule() const;

  /// One assignment, with the same validation as the parser.
  void set(const std::string& key, const std::string& value);

  /// Full `key = value` rendering; parse_config_text(to_text()) round-trips.
  std::string to_text() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_text(const std::string& text);

/// Key table with defaults and one-line docs.
std::string config_documentation();

} // namespace carnot
