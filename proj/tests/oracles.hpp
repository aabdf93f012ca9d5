#pragma once

// Independent reference implementations used only by tests. Kept deliberately
// naive: correctness over speed, no sharing with the library code paths.

#include <cmath>
#include <functional>
#include <vector>

#include "carnot/graded_algebra.hpp"
#include "carnot/rational.hpp"

namespace oracle {

using carnot::GradedLieAlgebra;
using carnot::Rational;

// Dynkin series evaluated term by term with explicit composition loops and a
// letter cap that deliberately overshoots the step; pruned terms must then
// vanish on their own through the grading.
inline std::vector<Rational> naive_dynkin(const GradedLieAlgebra& A,
                                          const std::vector<Rational>& X,
                                          const std::vector<Rational>& Y, int letter_cap) {
  const int n = A.dim();
  std::vector<Rational> acc(n, Rational(0));

  auto fact = [](int k) {
    long f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return Rational(f);
  };

  // enumerate compositions of (r,s) slot lists with sum of letters <= cap
  std::vector<std::pair<int, int>> slots;
  std::function<void(int)> walk = [&](int used) {
    if (!slots.empty()) {
      const auto [rl, sl] = slots.back();
      bool end_y = false, dead = false;
      if (sl == 1)
        end_y = true;
      else if (!(sl == 0 && rl == 1))
        dead = true;
      if (!dead) {
        const int l = static_cast<int>(slots.size());
        long m = 0;
        Rational denom(l);
        for (auto [r, s] : slots) {
          m += r + s;
          denom *= fact(r) * fact(s);
        }
        denom *= Rational(m);
        Rational coef = Rational((l % 2) ? 1 : -1) / denom;

        std::vector<char> ops;
        for (int q = 0; q + 1 < l; ++q) {
          for (int t = 0; t < slots[q].first; ++t) ops.push_back('x');
          for (int t = 0; t < slots[q].second; ++t) ops.push_back('y');
        }
        if (end_y)
          for (int t = 0; t < rl; ++t) ops.push_back('x');

        std::vector<Rational> cur = end_y ? Y : X;
        for (int p = static_cast<int>(ops.size()) - 1; p >= 0; --p)
          cur = A.bracket(ops[p] == 'x' ? X : Y, cur);
        for (int i = 0; i < n; ++i) acc[i] += coef * cur[i];
      }
    }
    for (int r = 0; r <= letter_cap - used; ++r)
      for (int s = (r == 0 ? 1 : 0); r + s <= letter_cap - used; ++s) {
        slots.emplace_back(r, s);
        walk(used + r + s);
        slots.pop_back();
      }
  };
  walk(0);
  return acc;
}

// Plain Euclidean mollification on R^n: (f * g_eps)(x) with
// g_eps(y) = eps^-n g(y/eps), tensor-trapezoid over [-R,R]^n.
inline double euclid_convolution(const std::function<double(const std::vector<double>&)>& f,
                                 const std::function<double(const std::vector<double>&)>& g,
                                 const std::vector<double>& x, double eps, double R, int res) {
  const int n = static_cast<int>(x.size());
  const double h = 2.0 * R / (res - 1);
  std::vector<int> idx(n, 0);
  std::vector<double> z(n), arg(n);
  double acc = 0.0;
  for (;;) {
    double w = 1.0;
    for (int i = 0; i < n; ++i) {
      z[i] = -R + h * idx[i];
      w *= (idx[i] == 0 || idx[i] == res - 1) ? 0.5 * h : h;
    }
    for (int i = 0; i < n; ++i) arg[i] = x[i] - eps * z[i];
    acc += w * f(arg) * g(z);
    int ax = 0;
    while (ax < n && ++idx[ax] == res) idx[ax++] = 0;
    if (ax == n) break;
  }
  return acc;
}

} // namespace oracle
