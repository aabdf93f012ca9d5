#pragma once

#include <cstdint>
#include <vector>

#include "carnot/graded_algebra.hpp"
#include "carnot/group_law.hpp"

namespace carnot {

/// delta_r in coordinates: x_i -> r^{w_i} x_i. Requires r > 0.
void dilate(const GradedLieAlgebra& A, double r, const double* x, double* out);
std::vector<double> dilate(const GradedLieAlgebra& A, double r, const std::vector<double>& x);
std::vector<Rational> dilate(const GradedLieAlgebra& A, const Rational& r,
                             const std::vector<Rational>& x);

/// Homogeneous quasi-norm sum_i |x_i|^{1/w_i}; 1-homogeneous for the dilations.
double quasi_norm(const GradedLieAlgebra& A, const double* x);
double quasi_norm(const GradedLieAlgebra& A, const std::vector<double>& x);

/// Monte-Carlo estimate of the smallest C with |x*y| <= C(|x| + |y|).
struct TriangleEstimate {
  double constant = 0.0;
  long pairs_used = 0;
  long pairs_skipped = 0;
};
TriangleEstimate triangle_constant_estimate(const Group& G, long samples, std::uint64_t seed);

} // namespace carnot
