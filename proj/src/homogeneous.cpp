#include "carnot/homogeneous.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace carnot {

void dilate(const GradedLieAlgebra& A, double r, const double* x, double* out) {
  if (!(r > 0.0)) throw std::invalid_argument("dilation factor must be positive");
  for (int i = 0; i < A.dim(); ++i) {
    double f = r;
    for (int w = 1; w < A.weight(i); ++w) f *= r;
    out[i] = f * x[i];
  }
}

std::vector<double> dilate(const GradedLieAlgebra& A, double r, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != A.dim()) throw std::invalid_argument("dilate arity mismatch");
  std::vector<double> out(x.size());
  dilate(A, r, x.data(), out.data());
  return out;
}

std::vector<Rational> dilate(const GradedLieAlgebra& A, const Rational& r,
                             const std::vector<Rational>& x) {
  if (static_cast<int>(x.size()) != A.dim()) throw std::invalid_argument("dilate arity mismatch");
  if (!(r > 0)) throw std::invalid_argument("dilation factor must be positive");
  std::vector<Rational> out(x.size());
  for (int i = 0; i < A.dim(); ++i) {
    Rational f = r;
    for (int w = 1; w < A.weight(i); ++w) f *= r;
    out[i] = f * x[i];
  }
  return out;
}

double quasi_norm(const GradedLieAlgebra& A, const double* x) {
  double s = 0.0;
  for (int i = 0; i < A.dim(); ++i) {
    int w = A.weight(i);
    s += (w == 1) ? std::fabs(x[i]) : std::pow(std::fabs(x[i]), 1.0 / w);
  }
  return s;
}

double quasi_norm(const GradedLieAlgebra& A, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != A.dim())
    throw std::invalid_argument("quasi_norm arity mismatch");
  return quasi_norm(A, x.data());
}

TriangleEstimate triangle_constant_estimate(const Group& G, long samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("need at least one sample");
  const auto& A = G.algebra();
  const int n = A.dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  TriangleEstimate est;
  std::vector<double> x(n), y(n), xy(n);
  for (long s = 0; s < samples; ++s) {
    for (int i = 0; i < n; ++i) x[i] = u(rng), y[i] = u(rng);
    double denom = quasi_norm(A, x.data()) + quasi_norm(A, y.data());
    if (denom < 1e-12) {
      ++est.pairs_skipped;
      continue;
    }
    G.multiply(x.data(), y.data(), xy.data());
    double ratio = quasi_norm(A, xy.data()) / denom;
    if (ratio > est.constant) est.constant = ratio;
    ++est.pairs_used;
  }
  return est;
}

} // namespace carnot
