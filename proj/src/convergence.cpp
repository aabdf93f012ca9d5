#include "carnot/convergence.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace carnot {

int fit_loglog(const std::vector<std::pair<double, double>>& rows, double floor, double& slope,
               double& residual) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [eps, err] : rows)
    if (err > floor && eps > 0.0) pts.emplace_back(std::log(eps), std::log(err));
  slope = 0.0;
  residual = 0.0;
  if (pts.size() < 2) return static_cast<int>(pts.size());

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(pts.size());
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return 0;
  slope = (n * sxy - sx * sy) / denom;
  const double icpt = (sy - slope * sx) / n;
  double rss = 0.0;
  for (auto [x, y] : pts) {
    double d = y - (icpt + slope * x);
    rss += d * d;
  }
  residual = std::sqrt(rss / n);
  return static_cast<int>(pts.size());
}

void ConvergenceTable::fit() {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) pts.emplace_back(r.eps, r.error);
  rows_used = fit_loglog(pts, noise_floor, fitted_slope, fit_residual);
  exact = true;
  for (const auto& r : rows)
    if (r.error > noise_floor) exact = false;
  if (rows.empty()) exact = false;
  if (exact) fitted_slope = std::numeric_limits<double>::infinity();
}

bool ConvergenceTable::monotone_decreasing(double slack) const {
  for (size_t i = 1; i < rows.size(); ++i) {
    // rows are ordered by decreasing eps; errors at the floor are not compared
    if (rows[i].error <= noise_floor || rows[i - 1].error <= noise_floor) continue;
    if (rows[i].error > rows[i - 1].error + slack) return false;
  }
  return true;
}

std::string ConvergenceTable::to_csv() const {
  std::ostringstream out;
  out.precision(12);
  out << "eps,error\n";
  for (const auto& r : rows) out << r.eps << "," << r.error << "\n";
  out << "# slope=" << fitted_slope << " residual=" << fit_residual << " rows_used=" << rows_used
      << (exact ? " exact=1" : "") << "\n";
  return out.str();
}

std::vector<double> dyadic_schedule(int k_from, int k_to) {
  if (k_from > k_to) throw std::invalid_argument("empty dyadic schedule");
  std::vector<double> eps;
  for (int k = k_from; k <= k_to; ++k) eps.push_back(std::ldexp(1.0, -k));
  return eps;
}

} // namespace carnot
