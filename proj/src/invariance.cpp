#include "carnot/invariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "carnot/errors.hpp"
#include "carnot/homogeneous.hpp"
#include "carnot/pansu.hpp"
#include "carnot/smooth_map.hpp"

namespace carnot {

namespace {

constexpr int kMaxDim = 10;

double jac_det_abs(const SmoothMap& map, const double* x) {
  if (map.jac_det) return std::abs(map.jac_det(x));
  return std::abs(determinant(map_jacobian(map, x)));
}

void require_map(const SmoothMap& map, const char* who) {
  if (!map.src || !map.dst || !map.eval) throw ConfigError(std::string(who) + ": incomplete map");
  if (map.src->dim() != map.dst->dim())
    throw ConfigError(std::string(who) + ": source and target dimensions differ");
  if (map.src->dim() > kMaxDim) throw ConfigError(std::string(who) + ": dimension above 10");
  if (map.domain.dim() != map.src->dim())
    throw ConfigError(std::string(who) + ": map domain dimension mismatch");
}

bool box_inside(const Box& inner, const Box& outer, double pad = 0.0) {
  if (inner.dim() != outer.dim()) return false;
  for (int i = 0; i < inner.dim(); ++i)
    if (inner.lo[i] - pad < outer.lo[i] || inner.hi[i] + pad > outer.hi[i]) return false;
  return true;
}

struct SpectralBounds {
  double smin = 0.0;
  double smax = 0.0;
};

// Largest/smallest singular value of M via power iteration on M^T M.
SpectralBounds spectral_bounds(const Matrix& M) {
  const int n = M.cols;
  Matrix B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < M.rows; ++k) s += M(k, i) * M(k, j);
      B(i, j) = s;
    }
  auto top_eigen = [n](const Matrix& A) {
    std::vector<double> v(n), w(n);
    for (int i = 0; i < n; ++i) v[i] = 1.0 + 0.01 * i;
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
      matvec(A, v.data(), w.data());
      double nrm = 0.0;
      for (double c : w) nrm += c * c;
      nrm = std::sqrt(nrm);
      if (nrm == 0.0) return 0.0;
      lambda = 0.0;
      for (int i = 0; i < n; ++i) lambda += v[i] * w[i];
      for (int i = 0; i < n; ++i) v[i] = w[i] / nrm;
    }
    return std::abs(lambda);
  };
  SpectralBounds out;
  out.smax = std::sqrt(top_eigen(B));
  const double inv_top = top_eigen(inverse(B));
  out.smin = inv_top > 0.0 ? std::sqrt(1.0 / inv_top) : 0.0;
  return out;
}

std::string list_nodes(const std::vector<long>& bad) {
  std::ostringstream os;
  const size_t shown = std::min<size_t>(bad.size(), 8);
  for (size_t i = 0; i < shown; ++i) os << (i ? ", " : "") << bad[i];
  if (bad.size() > shown) os << ", ... (" << bad.size() << " total)";
  return os.str();
}

} // namespace

GridFunction pullback_unitary(const SmoothMap& map, const GridFunction& f,
                              const GridSpec& out_spec) {
  require_map(map, "pullback_unitary");
  const int n = map.src->dim();
  if (f.spec.dim() != n || out_spec.dim() != n)
    throw ConfigError("pullback_unitary: grid dimension mismatch");

  const SampledFunction sf(f);
  const QuadNodes nodes = make_nodes(out_spec);
  const long count = nodes.count();
  std::vector<double> y(n), vals(count);
  std::vector<long> bad;
  for (long k = 0; k < count; ++k) {
    const double* x = nodes.pts.data() + k * n;
    map.eval(x, y.data());
    if (!f.spec.box.contains(y.data())) {
      bad.push_back(k);
      continue;
    }
    vals[k] = std::sqrt(jac_det_abs(map, x)) * sf(y.data());
  }
  if (!bad.empty())
    throw DomainError("pullback_unitary: image leaves the sampled box at nodes " +
                      list_nodes(bad));
  return GridFunction{out_spec, std::move(vals)};
}

Kernel pullback_kernel(const SmoothMap& map, const Kernel& kappa, double tol) {
  require_map(map, "pullback_kernel");
  const int n = map.src->dim();
  if (!kappa.G) throw ConfigError("pullback_kernel: kernel has no group");
  if (kappa.G != map.dst) throw ConfigError("pullback_kernel: kernel group is not the map target");
  if (kappa.x_support.dim() != n) throw ConfigError("pullback_kernel: kernel support dimension");
  if (!kappa.x_part) throw ConfigError("pullback_kernel: kernel has no x part");
  if (!map.inv || !map.inv->eval)
    throw DomainError("pullback_kernel: map has no registered inverse");
  if (!box_inside(kappa.x_support, map.inv->domain))
    throw DomainError("pullback_kernel: kernel support leaves the inverse map domain");

  // Bounding box of the support preimage, padded slightly.
  const QuadNodes pre = make_nodes(GridSpec::tensor(kappa.x_support, 9));
  std::vector<double> lo(n, std::numeric_limits<double>::infinity());
  std::vector<double> hi(n, -std::numeric_limits<double>::infinity());
  std::vector<double> u(n);
  for (long k = 0; k < pre.count(); ++k) {
    map.inv->eval(pre.pts.data() + k * n, u.data());
    for (int i = 0; i < n; ++i) {
      lo[i] = std::min(lo[i], u[i]);
      hi[i] = std::max(hi[i], u[i]);
    }
  }
  Box supp;
  for (int i = 0; i < n; ++i) {
    const double pad = 0.05 * (hi[i] - lo[i]) + 1e-9;
    supp.lo.push_back(lo[i] - pad);
    supp.hi.push_back(hi[i] + pad);
  }
  if (!box_inside(supp, map.domain))
    throw DomainError("pullback_kernel: kernel support preimage leaves the map domain");

  // Filtration gate and spectral scan over a sample of the preimage.
  SpectralBounds scan{std::numeric_limits<double>::infinity(), 0.0};
  const QuadNodes gate = make_nodes(GridSpec::tensor(supp, 3));
  for (long k = 0; k < gate.count(); ++k) {
    const double* x = gate.pts.data() + k * n;
    const Matrix pd = pansu_derivative_algebraic(map, std::vector<double>(x, x + n), tol);
    const SpectralBounds sb = spectral_bounds(pd);
    scan.smin = std::min(scan.smin, sb.smin);
    scan.smax = std::max(scan.smax, sb.smax);
  }
  if (!(scan.smin > 0.0))
    throw DomainError("pullback_kernel: sampled Pansu derivative is singular");

  const auto pm = std::make_shared<const SmoothMap>(map);
  Kernel out;
  out.G = map.src;
  out.x_support = supp;
  out.x_part = [pm, kx = kappa.x_part, ksup = kappa.x_support, box = supp, n](const double* x) {
    if (!box.contains(x)) return 0.0;
    std::vector<double> y(n);
    pm->eval(x, y.data());
    if (!ksup.contains(y.data())) return 0.0;
    const double f = kx(y.data());
    if (f == 0.0) return 0.0;
    return jac_det_abs(*pm, x) * f;
  };
  out.make_profile = [pm, kappa, tol, n](const double* x) {
    Matrix pd = pansu_derivative_algebraic(*pm, std::vector<double>(x, x + n), tol);
    std::function<double(const double*)> inner;
    if (kappa.separable()) {
      inner = kappa.z_part;
    } else {
      std::vector<double> y(n);
      pm->eval(x, y.data());
      inner = kappa.make_profile(y.data());
    }
    return [pd = std::move(pd), inner = std::move(inner), n](const double* z) {
      double w[kMaxDim];
      matvec(pd, z, w);
      return inner(w);
    };
  };
  out.env_amp = kappa.env_amp * std::pow(std::max(1.0, scan.smax), kappa.env_deg);
  out.env_deg = kappa.env_deg;
  const double safe = 0.9 * scan.smin;
  out.env_a = kappa.env_a * safe * safe;
  return out;
}

std::string InvarianceResult::to_csv() const {
  std::ostringstream out;
  out.precision(12);
  const size_t nb = per_f.empty() ? 0 : per_f.front().size();
  out << "eps";
  for (size_t b = 0; b < nb; ++b) out << ",error_f" << b + 1;
  out << ",max_error\n";
  for (size_t r = 0; r < table.rows.size(); ++r) {
    out << table.rows[r].eps;
    for (size_t b = 0; b < nb; ++b) out << "," << per_f[r][b];
    out << "," << table.rows[r].error << "\n";
  }
  out << "# slope=" << table.fitted_slope << " residual=" << table.fit_residual
      << " verdict=" << (verdict ? "pass" : "fail") << (under_resolved ? " under_resolved=1" : "")
      << "\n";
  return out.str();
}

InvarianceResult invariance_experiment(const SmoothMap& map, const Kernel& kappa,
                                       const std::vector<SampledFunction>& bank,
                                       const Box& f_support, const std::vector<double>& schedule,
                                       const GridSpec& x_spec, const GridSpec& z_spec,
                                       int workers, double slope_min, double pansu_tol) {
  require_map(map, "invariance_experiment");
  const int n = map.src->dim();
  if (bank.empty()) throw ConfigError("invariance_experiment: empty test bank");
  if (schedule.empty()) throw ConfigError("invariance_experiment: empty schedule");
  for (size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i] > 0.0)) throw ConfigError("invariance_experiment: eps must be positive");
    if (i > 0 && !(schedule[i] < schedule[i - 1]))
      throw ConfigError("invariance_experiment: schedule must be strictly decreasing");
  }
  if (x_spec.dim() != n || z_spec.dim() != n || f_support.dim() != n)
    throw ConfigError("invariance_experiment: dimension mismatch");

  const Kernel pulled = pullback_kernel(map, kappa, pansu_tol);
  const double r_tr = std::max(kernel_tail_radius(kappa, 1e-8), kernel_tail_radius(pulled, 1e-8));
  const double pad = 2.0 * schedule.front() * r_tr;

  if (!box_inside(f_support, map.domain, pad))
    throw DomainError("invariance_experiment: padded test support leaves the map domain");
  if (!box_inside(f_support, x_spec.box))
    throw DomainError("invariance_experiment: test support leaves the x grid");
  if (!box_inside(kappa.x_support, map.inv->domain, pad))
    throw DomainError("invariance_experiment: padded kernel support leaves the inverse map domain");
  if (!box_inside(pulled.x_support, x_spec.box))
    throw DomainError("invariance_experiment: kernel support preimage leaves the x grid");
  for (int i = 0; i < n; ++i)
    if (z_spec.box.lo[i] > -r_tr || z_spec.box.hi[i] < r_tr)
      throw DomainError("invariance_experiment: z grid does not cover the kernel tails");

  const QuadNodes xn = make_nodes(x_spec);
  const long npts = xn.count();
  const int nb = static_cast<int>(bank.size());

  std::vector<double> phi_pts(static_cast<size_t>(npts) * n), jsqrt(npts);
  for (long k = 0; k < npts; ++k) {
    const double* x = xn.pts.data() + k * n;
    map.eval(x, phi_pts.data() + k * n);
    jsqrt[k] = std::sqrt(jac_det_abs(map, x));
  }

  std::vector<double> fnorm(nb);
  for (int b = 0; b < nb; ++b) {
    const GridFunction fb = sample_grid(x_spec, [&](const double* y) { return bank[b](y); });
    fnorm[b] = l2_norm(fb);
    if (!(fnorm[b] > 0.0))
      throw ConfigError("invariance_experiment: bank function vanishes on the x grid");
  }

  // Conjugated inputs g = U_Phi^{-1} f = J^{-1/2}(Phi^{-1} y) f(Phi^{-1} y).
  std::vector<SampledFunction> gbank;
  gbank.reserve(nb);
  for (int b = 0; b < nb; ++b) {
    gbank.emplace_back(SampledFunction([&map, fb = &bank[b], n](const double* y) {
      if (!map.inv->domain.contains(y))
        throw DomainError("invariance_experiment: operator reach left the inverse map domain");
      std::vector<double> u(n);
      map.inv->eval(y, u.data());
      return (*fb)(u.data()) / std::sqrt(jac_det_abs(map, u.data()));
    }));
  }
  std::vector<const SampledFunction*> gptr(nb), fptr(nb);
  for (int b = 0; b < nb; ++b) {
    gptr[b] = &gbank[b];
    fptr[b] = &bank[b];
  }

  InvarianceResult res;
  res.slope_min = slope_min;
  std::vector<double> out_a(static_cast<size_t>(nb) * npts), out_b(out_a.size());
  for (const double eps : schedule) {
    bool warn_a = false, warn_b = false;
    op_apply_at(kappa, eps, gptr, phi_pts.data(), npts, z_spec, workers, out_a.data(), &warn_a);
    op_apply_at(pulled, eps, fptr, xn.pts.data(), npts, z_spec, workers, out_b.data(), &warn_b);
    res.under_resolved = res.under_resolved || warn_a || warn_b;
    std::vector<double> errs(nb);
    double worst = 0.0;
    for (int b = 0; b < nb; ++b) {
      double acc = 0.0;
      for (long k = 0; k < npts; ++k) {
        const double d = jsqrt[k] * out_a[static_cast<size_t>(b) * npts + k] -
                         out_b[static_cast<size_t>(b) * npts + k];
        acc += xn.wts[k] * d * d;
      }
      errs[b] = std::sqrt(acc) / fnorm[b];
      worst = std::max(worst, errs[b]);
    }
    res.per_f.push_back(std::move(errs));
    res.table.rows.push_back({eps, worst});
  }
  res.table.fit();
  res.verdict = res.table.exact ||
                (res.table.fitted_slope >= slope_min && res.table.monotone_decreasing());
  return res;
}

ErrorDecomposition error_decomposition(const SmoothMap& map, const Kernel& kappa, double eps,
                                       const std::vector<std::vector<double>>& xs,
                                       const GridSpec& z_spec, double pansu_tol) {
  require_map(map, "error_decomposition");
  if (!(eps > 0.0)) throw DomainError("error_decomposition: eps must be positive");
  if (xs.empty()) throw ConfigError("error_decomposition: no probe points");
  const int n = map.src->dim();
  if (z_spec.dim() != n) throw ConfigError("error_decomposition: z grid dimension mismatch");
  if (!kappa.G || kappa.G != map.dst)
    throw ConfigError("error_decomposition: kernel group is not the map target");

  const Group& G = *map.src;
  const Group& H = *map.dst;
  const GradedLieAlgebra& A = G.algebra();
  const GradedLieAlgebra& Ah = H.algebra();

  const QuadNodes zn = make_nodes(z_spec);
  const long nz = zn.count();
  std::vector<double> dz(static_cast<size_t>(nz) * n), dz_inv(dz.size());
  for (long j = 0; j < nz; ++j) {
    dilate(A, eps, zn.pts.data() + j * n, dz.data() + j * n);
    for (int i = 0; i < n; ++i) dz_inv[j * n + i] = -dz[j * n + i];
  }

  ErrorDecomposition out;
  std::vector<double> fx(n), fx_neg(n), y(n), far(n), wq(n), mz(n);
  for (const auto& x : xs) {
    if (static_cast<int>(x.size()) != n)
      throw ConfigError("error_decomposition: probe point dimension mismatch");
    if (!map.domain.contains(x))
      throw DomainError("error_decomposition: probe point outside the map domain");
    const Matrix pd = pansu_derivative_algebraic(map, x, pansu_tol);
    map.eval(x.data(), fx.data());
    for (int i = 0; i < n; ++i) fx_neg[i] = -fx[i];
    const double jx = jac_det_abs(map, x.data());
    const double j12 = std::sqrt(jx);
    const double xamp = kappa.x_support.contains(fx) ? kappa.x_part(fx.data()) : 0.0;
    const auto prof =
        kappa.separable() ? kappa.z_part : kappa.make_profile(fx.data());

    double i1 = 0.0, i2 = 0.0;
    if (xamp != 0.0) {
      for (long j = 0; j < nz; ++j) {
        G.multiply(x.data(), dz_inv.data() + j * n, y.data());
        if (!map.domain.contains(y.data()))
          throw DomainError("error_decomposition: operator reach left the map domain");
        matvec(pd, zn.pts.data() + j * n, mz.data());
        const double pulled = jx * xamp * prof(mz.data());
        i1 += zn.wts[j] * std::abs(std::sqrt(jac_det_abs(map, y.data())) - j12) *
              std::abs(pulled);

        G.multiply(x.data(), dz.data() + j * n, y.data());
        if (!map.domain.contains(y.data()))
          throw DomainError("error_decomposition: operator reach left the map domain");
        map.eval(y.data(), far.data());
        H.multiply(fx_neg.data(), far.data(), wq.data());
        dilate(Ah, 1.0 / eps, wq.data(), wq.data());
        i2 += zn.wts[j] * jx * std::abs(xamp) * std::abs(prof(wq.data()) - prof(mz.data()));
      }
    }
    out.i1 = std::max(out.i1, i1);
    out.i2 = std::max(out.i2, i2);
  }
  return out;
}

} // namespace carnot
