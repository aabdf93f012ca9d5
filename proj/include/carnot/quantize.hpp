#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "carnot/homogeneous.hpp"
#include "carnot/smooth_map.hpp"

namespace carnot {

/// C-infinity bump on (-1,1): equal to 1 on |s| <= plateau, 0 for |s| >= 1.
double bump_c(double s, double plateau = 0.0);

/// C-infinity step: 0 for t <= 0, 1 for t >= 1, strictly increasing between.
double smoothstep_c(double t);

enum class Quadrature { Trapezoid, Halton };

/// Integration grid: tensor-product trapezoid nodes at the given per-axis
/// resolutions, or a Cranley-Patterson shifted Halton set over the same box.
struct GridSpec {
  Box box;
  std::vector<int> res;
  Quadrature rule = Quadrature::Trapezoid;
  long qmc_count = 200000;
  std::uint64_t seed = 20240816u;

  int dim() const { return box.dim(); }
  long node_count() const;
  bool operator==(const GridSpec& o) const;

  static GridSpec tensor(const Box& box, int res_per_axis);
  static GridSpec qmc(const Box& box, long count, std::uint64_t seed);
};

/// Materialized nodes and weights of a GridSpec.
struct QuadNodes {
  int dim = 0;
  std::vector<double> pts; // count x dim, row-major
  std::vector<double> wts;

  long count() const { return static_cast<long>(wts.size()); }
  const double* point(long k) const { return pts.data() + static_cast<size_t>(k) * dim; }
};

QuadNodes make_nodes(const GridSpec& spec);

/// Nodal values on a grid. Tensor grids order nodes with the last axis
/// fastest; Halton grids store one value per sequence point.
struct GridFunction {
  GridSpec spec;
  std::vector<double> values;

  /// Header i1,...,in,value; one row per node; trailing # grid summary that
  /// read_grid_csv uses to rebuild the spec. Tensor grids only.
  std::string to_csv() const;
};

GridFunction sample_grid(const GridSpec& spec, const std::function<double(const double*)>& fn);
GridFunction read_grid_csv(std::istream& in);
void write_grid_binary(const GridFunction& f, std::ostream& out);
GridFunction read_grid_binary(std::istream& in);

/// Convolution kernel kappa_x(z) = x_part(x) * profile_x(z). x_part is a
/// compactly supported bump vanishing outside x_support. The z profile is
/// either the shared z_part or built per x by make_profile (kernel
/// pull-backs). The envelope fields bound every profile uniformly over
/// x_support: |profile_x(z)| <= env_amp * (1+|z|)^env_deg * exp(-env_a |z|^2)
/// with |z| Euclidean; truncation radii are derived from them, never guessed.
struct Kernel {
  const Group* G = nullptr;
  Box x_support;
  std::function<double(const double*)> x_part;
  std::function<double(const double*)> z_part;
  std::function<std::function<double(const double*)>(const double*)> make_profile;
  double env_amp = 1.0;
  int env_deg = 0;
  double env_a = 1.0;

  bool separable() const { return !make_profile; }
  double eval(const std::vector<double>& x, const std::vector<double>& z) const;
};

/// kappa_x(z) = bump(x) * (p_const + p_lin . z) * exp(-a |z|^2); bump is the
/// product of per-axis plateau bumps spanning x_support. p_lin may be empty.
Kernel make_bump_gauss_kernel(const Group& G, const Box& x_support, double a,
                              const std::vector<double>& p_lin, double p_const,
                              double plateau = 0.5);

/// Presets: "default" (a = 2, P = 1) and "odd" (a = 2, P = 1 + 0.6 z1).
Kernel kernel_preset(const Group& G, const std::string& id, const Box& x_support);

/// Euclidean radius R with envelope tail mass beyond R below tol of the total.
double kernel_tail_radius(const Kernel& kappa, double tol);

/// Tensor grid on the envelope-derived cube [-R, R]^n.
GridSpec default_z_grid(const Kernel& kappa, int res, double tol = 1e-12);

/// eps^{-Q} kappa_x(delta_{1/eps} z). Throws DomainError for eps <= 0.
double rescale_kernel(const Kernel& kappa, double eps, const std::vector<double>& x,
                      const std::vector<double>& z);

/// A function evaluable at arbitrary points: either a callable, or a tensor
/// GridFunction read through cubic (Catmull-Rom) interpolation and extended
/// by zero outside its box.
class SampledFunction {
public:
  explicit SampledFunction(std::function<double(const double*)> fn);
  explicit SampledFunction(GridFunction f);

  double operator()(const double* y) const { return m_fn(y); }
  double operator()(const std::vector<double>& y) const { return m_fn(y.data()); }
  const GridSpec* grid() const { return m_grid ? &m_grid->spec : nullptr; }

private:
  std::function<double(const double*)> m_fn;
  std::shared_ptr<const GridFunction> m_grid;
};

/// Op_eps(kappa) applied to a bank of inputs at arbitrary points (row-major,
/// n_pts x dim). out is bank-major: out[b * n_pts + k]. The z integral runs
/// in the substituted form integral f(x delta_eps z^{-1}) kappa_x(z) dz, so
/// the eps^{-Q} factor cancels exactly. Every point's sum is accumulated in
/// schedule order, so results do not depend on the worker count. If
/// under_resolved is given it is set when the dilated z box falls under two
/// grid cells of some grid-backed input.
void op_apply_at(const Kernel& kappa, double eps, const std::vector<const SampledFunction*>& bank,
                 const double* pts, long n_pts, const GridSpec& z_spec, int workers, double* out,
                 bool* under_resolved = nullptr);

/// Op_eps(kappa) f on the nodes of x_spec.
GridFunction op_apply(const Kernel& kappa, double eps, const SampledFunction& f,
                      const GridSpec& x_spec, const GridSpec& z_spec, int workers = 1,
                      bool* under_resolved = nullptr);
GridFunction op_apply(const Kernel& kappa, double eps, const GridFunction& f,
                      const GridSpec& x_spec, const GridSpec& z_spec, int workers = 1,
                      bool* under_resolved = nullptr);

/// Quadrature of z -> max over x nodes of |kappa_x(z)|. Requires the x grid
/// to cover x_support and the z grid to cover the envelope tail at 1e-8.
double a0_seminorm(const Kernel& kappa, const GridSpec& z_spec, const GridSpec& x_spec);

/// Quadrature-weighted inner product; both arguments must share one GridSpec.
double l2_inner(const GridFunction& f, const GridFunction& g);
double l2_norm(const GridFunction& f);

/// l2_inner(op_apply(kappa, eps, u), u) on u's own grid.
double ell_epsilon(const Kernel& kappa, double eps, const GridFunction& u, const GridSpec& z_spec,
                   int workers = 1);

/// L2 distance between Op_eps f and its near-diagonal truncation by the
/// cut-off chi(w): 1 for quasi_norm(w) <= r1, 0 for >= r0.
double diagonal_truncation_residual(const Kernel& kappa, double eps, const SampledFunction& f,
                                    double r1, double r0, const GridSpec& x_spec,
                                    const GridSpec& z_spec, int workers = 1);

/// Five smooth bumps with varied centers and frequencies, all supported in
/// the box shrunk by margin on every side.
std::vector<SampledFunction> test_bank(const Box& box, double margin);

} // namespace carnot
