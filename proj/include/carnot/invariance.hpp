#pragma once

#include <string>
#include <vector>

#include "carnot/convergence.hpp"
#include "carnot/quantize.hpp"

namespace carnot {

/// (U_Phi f)(x) = J_Phi(x)^{1/2} f(Phi(x)) on the nodes of out_spec, with
/// J_Phi = |det D_x Phi| under the Lebesgue-as-Haar convention. Throws
/// DomainError listing the offending nodes when some image leaves f's box.
GridFunction pullback_unitary(const SmoothMap& map, const GridFunction& f,
                              const GridSpec& out_spec);

/// Kernel pull-back (I_Phi kappa)_x(z) = J_Phi(x) kappa_{Phi(x)}(PD_x Phi z)
/// with the Pansu derivative extracted afresh at every x. The x-support is a
/// padded bounding box of the preimage of kappa's support; the envelope is
/// rescaled by sampled spectral bounds of PD_x Phi. The filtration verdict is
/// checked on a sample of the preimage up front and again at every profile
/// request; failures throw RefusalError. The map and both groups must
/// outlive the returned kernel.
Kernel pullback_kernel(const SmoothMap& map, const Kernel& kappa, double tol = 1e-6);

/// Outcome of the main invariance experiment: per-eps errors for each bank
/// member, their max in a fitted ConvergenceTable, and the pass verdict.
struct InvarianceResult {
  ConvergenceTable table;
  std::vector<std::vector<double>> per_f; // one row per eps, one column per f
  bool under_resolved = false;
  bool verdict = false;
  double slope_min = 0.8;

  /// eps,error_f1,...,error_fN,max_error rows plus a trailing
  /// "# slope=... residual=... verdict=pass|fail" summary line.
  std::string to_csv() const;
};

/// error(eps) = max over the bank of
///   || U_Phi(Op_eps(kappa)(U_Phi^{-1} f)) - Op_eps(I_Phi kappa) f || / ||f||
/// in the quadrature L2 norm of x_spec. Supports are padded by
/// 2 max(eps) (kernel truncation radius): the padded f support must stay in
/// the map's domain, the padded kernel support in the inverse's domain, and
/// both unpadded supports inside the measured grids; violations are hard
/// DomainErrors. The z grid must cover the envelope tails of both kernels.
InvarianceResult invariance_experiment(const SmoothMap& map, const Kernel& kappa,
                                       const std::vector<SampledFunction>& bank,
                                       const Box& f_support,
                                       const std::vector<double>& schedule,
                                       const GridSpec& x_spec, const GridSpec& z_spec,
                                       int workers = 1, double slope_min = 0.8,
                                       double pansu_tol = 1e-6);

/// The two terms bounding the invariance error in the remainder proof,
/// estimated by quadrature at the given x nodes: i1 integrates the increment
/// of J_Phi^{1/2} between x and x delta_eps z^{-1} against |I_Phi kappa|;
/// i2 integrates the kernel increment between the exact rescaled difference
/// quotient and PD_x Phi(z).
struct ErrorDecomposition {
  double i1 = 0.0;
  double i2 = 0.0;
};

ErrorDecomposition error_decomposition(const SmoothMap& map, const Kernel& kappa, double eps,
                                       const std::vector<std::vector<double>>& xs,
                                       const GridSpec& z_spec, double pansu_tol = 1e-6);

} // namespace carnot
