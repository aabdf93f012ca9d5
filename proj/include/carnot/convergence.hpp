#pragma once

#include <string>
#include <vector>

namespace carnot {

/// eps -> error rows plus a log-log least-squares fit. Rows at or below the
/// noise floor are excluded from the fit; if every row sits below the floor
/// the data is flagged exact and the slope is +infinity by convention.
struct ConvergenceTable {
  struct Row {
    double eps;
    double error;
  };

  std::vector<Row> rows;
  double noise_floor = 1e-10;

  double fitted_slope = 0.0;
  double fit_residual = 0.0;
  int rows_used = 0;
  bool exact = false;

  void fit();
  bool monotone_decreasing(double slack = 0.0) const;
  std::string to_csv() const;
};

/// Least-squares slope of log(error) against log(eps) over rows with
/// error > floor. Returns the number of rows used; slope/residual are zero
/// when fewer than two rows survive.
int fit_loglog(const std::vector<std::pair<double, double>>& rows, double floor, double& slope,
               double& residual);

/// Dyadic schedule 2^-k for k in [k_from, k_to].
std::vector<double> dyadic_schedule(int k_from, int k_to);

} // namespace carnot
