#include "carnot/pansu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "carnot/errors.hpp"
#include "carnot/homogeneous.hpp"

namespace carnot {

namespace {

void require_point(const SmoothMap& map, const std::vector<double>& x, const char* op) {
  if (static_cast<int>(x.size()) != map.src->dim())
    throw DomainError(std::string(op) + ": point dimension does not match the source group");
  if (!map.domain.contains(x))
    throw DomainError(std::string(op) + ": x outside the domain of " + map.id);
}

double euclid(const std::vector<double>& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

double euclid_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double r = 0.0;
  for (size_t i = 0; i < a.size(); ++i) r = std::max(r, std::abs(a[i] - b[i]));
  return r;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string matrix_text(const Matrix& m) {
  std::ostringstream out;
  for (int r = 0; r < m.rows; ++r) {
    out << "  [";
    for (int c = 0; c < m.cols; ++c) out << (c ? ", " : " ") << fmt(m(r, c));
    out << " ]\n";
  }
  return out.str();
}

// Difference quotient delta_{1/eps}(f(x)^{-1} f(x delta_eps z)) with f(x)^{-1}
// precomputed. Returns false when x delta_eps z leaves the domain.
bool quotient(const SmoothMap& map, const std::vector<double>& x, const std::vector<double>& fx_inv,
              const std::vector<double>& z, double eps, std::vector<double>& w) {
  const Group& G = *map.src;
  const Group& H = *map.dst;
  std::vector<double> xz = G.multiply(x, dilate(G.algebra(), eps, z));
  if (!map.domain.contains(xz)) return false;
  std::vector<double> fxz(H.dim());
  map.eval(xz.data(), fxz.data());
  w = dilate(H.algebra(), 1.0 / eps, H.multiply(fx_inv, fxz));
  return true;
}

double morphism_residual_pm(const SmoothMap& map, const Matrix& PM, const std::vector<double>& z1,
                            const std::vector<double>& z2) {
  const Group& G = *map.src;
  const Group& H = *map.dst;
  std::vector<double> lhs = matvec(PM, G.multiply(z1, z2));
  std::vector<double> rhs = H.multiply(matvec(PM, z1), matvec(PM, z2));
  return max_abs_diff(lhs, rhs);
}

double jacobian_residual_pm(const SmoothMap& map, const std::vector<double>& x, const Matrix& PM) {
  if (PM.rows != PM.cols) return std::numeric_limits<double>::quiet_NaN();
  double det_j =
      map.jac_det ? map.jac_det(x.data()) : determinant(map_jacobian(map, x.data()));
  double det_pm = determinant(PM);
  return std::abs(det_j - det_pm) / std::max(1.0, std::abs(det_pm));
}

} // namespace

Strata strata_of(const GradedLieAlgebra& A) {
  Strata s;
  s.offset.assign(A.step(), 0);
  s.size.assign(A.step(), 0);
  int pos = 0;
  for (int w = 1; w <= A.step(); ++w) {
    s.offset[w - 1] = pos;
    while (pos < A.dim() && A.weight(pos) == w) ++pos;
    s.size[w - 1] = pos - s.offset[w - 1];
  }
  return s;
}

Matrix abstract_differential(const SmoothMap& map, const std::vector<double>& x) {
  require_point(map, x, "abstract_differential");
  const Group& G = *map.src;
  const Group& H = *map.dst;
  Matrix D = map_jacobian(map, x.data());
  std::vector<double> fx(H.dim());
  map.eval(x.data(), fx.data());
  Matrix tau_h_inv = inverse(H.tau(fx.data()));
  return matmul(tau_h_inv, matmul(D, G.tau(x.data())));
}

PansuReport check_filtration_preserving(const SmoothMap& map, const std::vector<double>& x,
                                        double tol) {
  PansuReport rep;
  rep.x = x;
  rep.M = abstract_differential(map, x);
  const Strata row_strata = strata_of(map.dst->algebra());
  const Strata col_strata = strata_of(map.src->algebra());

  rep.threshold = tol * (1.0 + max_abs(rep.M));
  for (int i = 0; i < row_strata.count(); ++i)
    for (int j = 0; j < col_strata.count(); ++j) {
      if (i <= j) continue;
      for (int r = row_strata.offset[i]; r < row_strata.offset[i] + row_strata.size[i]; ++r)
        for (int c = col_strata.offset[j]; c < col_strata.offset[j] + col_strata.size[j]; ++c) {
          double v = std::abs(rep.M(r, c));
          if (v > rep.below_diag_norm) {
            rep.below_diag_norm = v;
            rep.witness_row_stratum = i + 1;
            rep.witness_col_stratum = j + 1;
          }
        }
    }
  rep.verdict = rep.below_diag_norm < rep.threshold;
  if (rep.verdict) {
    rep.witness_row_stratum = 0;
    rep.witness_col_stratum = 0;
  }

  rep.PM = Matrix(rep.M.rows, rep.M.cols);
  const int shared = std::min(row_strata.count(), col_strata.count());
  for (int s = 0; s < shared; ++s)
    for (int r = row_strata.offset[s]; r < row_strata.offset[s] + row_strata.size[s]; ++r)
      for (int c = col_strata.offset[s]; c < col_strata.offset[s] + col_strata.size[s]; ++c)
        rep.PM(r, c) = rep.M(r, c);

  std::mt19937_64 rng(0x5eedULL);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> z1(map.src->dim()), z2(map.src->dim());
  for (int t = 0; t < 3; ++t) {
    for (auto& v : z1) v = U(rng);
    for (auto& v : z2) v = U(rng);
    rep.morphism_residual =
        std::max(rep.morphism_residual, morphism_residual_pm(map, rep.PM, z1, z2));
  }
  rep.jacobian_residual = jacobian_residual_pm(map, x, rep.PM);
  return rep;
}

std::string PansuReport::to_text() const {
  std::ostringstream out;
  out << "x = (";
  for (size_t i = 0; i < x.size(); ++i) out << (i ? ", " : "") << fmt(x[i]);
  out << ")\n";
  out << "abstract differential M:\n" << matrix_text(M);
  out << "below-diagonal max = " << fmt(below_diag_norm) << " (threshold " << fmt(threshold)
      << ")\n";
  if (verdict) {
    out << "verdict: filtration preserving\n";
  } else {
    out << "verdict: NOT filtration preserving, worst stratum block (" << witness_row_stratum
        << "," << witness_col_stratum << ")\n";
  }
  out << "Pansu matrix PM (block-diagonal part):\n" << matrix_text(PM);
  out << "morphism residual = " << fmt(morphism_residual) << "\n";
  out << "jacobian residual = " << fmt(jacobian_residual) << "\n";
  return out.str();
}

Matrix pansu_derivative_algebraic(const SmoothMap& map, const std::vector<double>& x, double tol) {
  PansuReport rep = check_filtration_preserving(map, x, tol);
  if (!rep.verdict) {
    std::ostringstream msg;
    msg << "Pansu derivative refused: " << map.id << " is not filtration preserving at x; "
        << "stratum block (" << rep.witness_row_stratum << "," << rep.witness_col_stratum
        << ") has magnitude " << fmt(rep.below_diag_norm) << ", threshold "
        << fmt(rep.threshold);
    throw RefusalError(msg.str());
  }
  return rep.PM;
}

double morphism_residual(const SmoothMap& map, const std::vector<double>& x,
                         const std::vector<double>& z1, const std::vector<double>& z2,
                         double tol) {
  Matrix PM = pansu_derivative_algebraic(map, x, tol);
  return morphism_residual_pm(map, PM, z1, z2);
}

double jacobian_consistency(const SmoothMap& map, const std::vector<double>& x, double tol) {
  if (map.src->dim() != map.dst->dim())
    throw DomainError("jacobian_consistency: source and target dimensions differ");
  Matrix PM = pansu_derivative_algebraic(map, x, tol);
  return jacobian_residual_pm(map, x, PM);
}

double composition_check(const SmoothMap& phi, const SmoothMap& psi, const std::vector<double>& w,
                         const std::vector<double>& z, double tol) {
  require_point(psi, w, "composition_check");
  std::vector<double> pw = psi(w);
  if (!phi.domain.contains(pw))
    throw DomainError("composition_check: psi(w) outside the domain of " + phi.id);
  SmoothMap comp = compose(phi, psi);
  Matrix pm_comp = pansu_derivative_algebraic(comp, w, tol);
  Matrix pm_psi = pansu_derivative_algebraic(psi, w, tol);
  Matrix pm_phi = pansu_derivative_algebraic(phi, pw, tol);
  std::vector<double> lhs = matvec(pm_comp, z);
  std::vector<double> rhs = matvec(pm_phi, matvec(pm_psi, z));
  return max_abs_diff(lhs, rhs);
}

ProbeResult pansu_limit_probe(const SmoothMap& map, const std::vector<double>& x,
                              const std::vector<double>& z, const std::vector<double>& schedule) {
  require_point(map, x, "pansu_limit_probe");
  if (static_cast<int>(z.size()) != map.src->dim())
    throw DomainError("pansu_limit_probe: z dimension does not match the source group");
  const Group& H = *map.dst;
  const int n_h = H.dim();
  const std::vector<double> eps = schedule.empty() ? dyadic_schedule(1, 10) : schedule;

  ProbeResult res;
  if (std::all_of(z.begin(), z.end(), [](double v) { return v == 0.0; })) {
    res.zero_input = true;
    res.converged = true;
    res.limit.assign(n_h, 0.0);
    for (double e : eps) res.rows.push_back({e, std::vector<double>(n_h, 0.0), 0.0});
    res.diagnosis = "converged: z = 0, defined result 0 (excluded from rate fits)";
    return res;
  }

  std::vector<double> fx(n_h);
  map.eval(x.data(), fx.data());
  const std::vector<double> fx_inv = H.inverse(fx);
  for (double e : eps) {
    std::vector<double> w;
    if (!quotient(map, x, fx_inv, z, e, w)) {
      res.truncated = true;
      continue;
    }
    res.rows.push_back({e, std::move(w), 0.0});
  }

  const int K = static_cast<int>(res.rows.size());
  double scale = 0.0;
  for (const auto& r : res.rows) scale = std::max(scale, euclid(r.w));
  const double floor = 1e-12 * (1.0 + scale);
  for (int k = 1; k < K; ++k) res.rows[k].gap = euclid_gap(res.rows[k].w, res.rows[k - 1].w);

  res.coordinate_rates.assign(n_h, 0.0);
  const int tail = std::min(K, 6);
  for (int i = 0; i < n_h; ++i) {
    std::vector<std::pair<double, double>> pts;
    for (int k = K - tail; k < K; ++k)
      pts.emplace_back(res.rows[k].eps, std::abs(res.rows[k].w[i]));
    double slope = 0.0, resid = 0.0;
    if (fit_loglog(pts, floor, slope, resid) >= 2) res.coordinate_rates[i] = slope;
  }

  if (K < 5) {
    res.diagnosis = res.rows.empty() ? "no in-domain rows" : "inconclusive: schedule too short";
    if (res.truncated) res.diagnosis += " (schedule truncated by domain exits)";
    return res;
  }

  auto gap = [&](int k) { return res.rows[k].gap; };
  auto shrinks = [&](double prev, double next) { return next <= floor || prev >= 1.5 * next; };
  auto grows = [&](double prev, double next) { return next > floor && next >= 1.5 * prev; };
  res.converged = shrinks(gap(K - 4), gap(K - 3)) && shrinks(gap(K - 3), gap(K - 2)) &&
                  shrinks(gap(K - 2), gap(K - 1));
  res.diverged = grows(gap(K - 4), gap(K - 3)) && grows(gap(K - 3), gap(K - 2)) &&
                 grows(gap(K - 2), gap(K - 1));

  std::ostringstream d;
  if (res.converged) {
    res.limit.resize(n_h);
    for (int i = 0; i < n_h; ++i)
      res.limit[i] = 2.0 * res.rows[K - 1].w[i] - res.rows[K - 2].w[i];
    std::vector<std::pair<double, double>> pts;
    for (int k = std::max(1, K - 6); k < K; ++k) pts.emplace_back(res.rows[k].eps, gap(k));
    double slope = 0.0, resid = 0.0;
    if (fit_loglog(pts, floor, slope, resid) >= 2) {
      res.rate = slope;
      d << "converged: Cauchy gaps decay like eps^" << fmt(res.rate);
    } else {
      d << "converged: exact to rounding";
    }
  } else if (res.diverged) {
    int worst = 0;
    for (int i = 1; i < n_h; ++i)
      if (res.coordinate_rates[i] < res.coordinate_rates[worst]) worst = i;
    res.rate = res.coordinate_rates[worst];
    d << "diverged: coordinate " << (worst + 1) << " grows like eps^" << fmt(res.rate);
  } else {
    d << "inconclusive: Cauchy gaps neither settle nor grow steadily";
  }
  if (res.truncated) d << " (schedule truncated by domain exits)";
  res.diagnosis = d.str();
  return res;
}

std::string ProbeResult::to_csv() const {
  std::ostringstream out;
  out.precision(12);
  const int n = rows.empty() ? static_cast<int>(limit.size()) : static_cast<int>(rows[0].w.size());
  out << "eps";
  for (int i = 1; i <= n; ++i) out << ",coord_" << i;
  out << ",error\n";
  for (const auto& r : rows) {
    out << r.eps;
    for (double v : r.w) out << "," << v;
    out << "," << r.gap << "\n";
  }
  out << "# converged=" << (converged ? 1 : 0) << " diverged=" << (diverged ? 1 : 0)
      << " rate=" << rate << " truncated=" << (truncated ? 1 : 0) << " diagnosis=" << diagnosis
      << "\n";
  return out.str();
}

ConvergenceTable remainder_rate(const SmoothMap& map, const std::vector<double>& x,
                                const std::vector<double>& V, const std::vector<double>& schedule,
                                double tol) {
  Matrix PM = pansu_derivative_algebraic(map, x, tol);
  const Group& H = *map.dst;
  const std::vector<double> eps = schedule.empty() ? dyadic_schedule(2, 8) : schedule;

  std::vector<double> fx(H.dim());
  map.eval(x.data(), fx.data());
  const std::vector<double> fx_inv = H.inverse(fx);
  const std::vector<double> pdv_inv = H.inverse(matvec(PM, V));

  ConvergenceTable table;
  for (double e : eps) {
    std::vector<double> w;
    if (!quotient(map, x, fx_inv, V, e, w)) continue;
    table.rows.push_back({e, euclid(H.multiply(pdv_inv, w))});
  }
  table.fit();
  return table;
}

} // namespace carnot
