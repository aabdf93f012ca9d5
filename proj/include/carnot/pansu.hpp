#pragma once

#include <string>
#include <vector>

#include "carnot/convergence.hpp"
#include "carnot/linalg.hpp"
#include "carnot/smooth_map.hpp"

namespace carnot {

/// Stratum layout of an adapted basis: stratum s (0-based, weight s+1) covers
/// coordinates [offset[s], offset[s] + size[s]). Strata may be empty.
struct Strata {
  std::vector<int> offset;
  std::vector<int> size;

  int count() const { return static_cast<int>(offset.size()); }
};

Strata strata_of(const GradedLieAlgebra& A);

/// Filtration verdict at one base point, with the abstract differential, its
/// worst below-diagonal block and the algebraic Pansu matrix.
struct PansuReport {
  std::vector<double> x;
  Matrix M{0, 0};
  Matrix PM{0, 0};
  double below_diag_norm = 0.0;
  double threshold = 0.0;
  bool verdict = false;
  int witness_row_stratum = 0; // 1-based strata of the worst below-diagonal
  int witness_col_stratum = 0; // block; 0 when every such block is clean
  double morphism_residual = 0.0;
  double jacobian_residual = 0.0;

  std::string to_text() const;
};

/// Matrix of the abstract differential tau_H(map(x))^{-1} D_x(map) tau_G(x).
Matrix abstract_differential(const SmoothMap& map, const std::vector<double>& x);

/// Full report at x. Verdict: every stratum block strictly below the diagonal
/// has max entry < tol * (1 + max entry of M).
PansuReport check_filtration_preserving(const SmoothMap& map, const std::vector<double>& x,
                                        double tol = 1e-6);

/// Block-diagonal part of the abstract differential. In first-kind coordinates
/// this one matrix realizes the Pansu derivative on both the algebra and the
/// group. Throws RefusalError when the filtration verdict fails at x.
Matrix pansu_derivative_algebraic(const SmoothMap& map, const std::vector<double>& x,
                                  double tol = 1e-6);

/// max-abs of PD(z1 * z2) - PD(z1) * PD(z2), source law inside, target law
/// outside. Gated by the filtration verdict.
double morphism_residual(const SmoothMap& map, const std::vector<double>& x,
                         const std::vector<double>& z1, const std::vector<double>& z2,
                         double tol = 1e-6);

/// |det D_x(map) - det PM| / max(1, |det PM|); Haar is Lebesgue on both sides,
/// so no measure ratio enters. Gated by the filtration verdict.
double jacobian_consistency(const SmoothMap& map, const std::vector<double>& x, double tol = 1e-6);

/// max-abs of PD_w(phi o psi)(z) - PD_{psi(w)}phi(PD_w psi(z)). Gated at both
/// base points.
double composition_check(const SmoothMap& phi, const SmoothMap& psi, const std::vector<double>& w,
                         const std::vector<double>& z, double tol = 1e-6);

/// One scheduled difference quotient delta_{1/eps}(f(x)^{-1} f(x delta_eps z)).
struct ProbeRow {
  double eps = 0.0;
  std::vector<double> w;
  double gap = 0.0; // Euclidean Cauchy gap against the previous row; 0 on the first
};

/// Probe of the Pansu limit along a schedule of shrinking eps.
struct ProbeResult {
  std::vector<ProbeRow> rows;
  bool truncated = false;    // schedule shortened by a domain exit
  bool zero_input = false;   // z = 0: defined result 0, no fits
  bool converged = false;
  bool diverged = false;
  std::vector<double> limit; // Richardson estimate 2 w_K - w_{K-1} when converged
  double rate = 0.0;         // gap decay rate if converged, worst coordinate rate if diverged
  std::vector<double> coordinate_rates; // per-coordinate log-log tail fits
  std::string diagnosis;

  std::string to_csv() const;
};

/// Evaluates the difference quotients over the schedule (default 2^-1..2^-10)
/// and classifies the tail. Runs on any map; this is the one Pansu operation
/// that does not require the filtration verdict.
ProbeResult pansu_limit_probe(const SmoothMap& map, const std::vector<double>& x,
                              const std::vector<double>& z,
                              const std::vector<double>& schedule = {});

/// Euclidean length of the group difference between the quotient at eps and
/// PD(V), as a convergence table over the schedule (default 2^-2..2^-8).
/// Gated by the filtration verdict.
ConvergenceTable remainder_rate(const SmoothMap& map, const std::vector<double>& x,
                                const std::vector<double>& V,
                                const std::vector<double>& schedule = {}, double tol = 1e-6);

} // namespace carnot
