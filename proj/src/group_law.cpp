#include "carnot/group_law.hpp"

#include <sstream>

#include "carnot/errors.hpp"

namespace carnot {

namespace {

Rational factorial(int k) {
  Rational f(1);
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

template <class T>
bool all_zero(const std::vector<T>& v) {
  for (const auto& e : v)
    if (!(e == T(0))) return false;
  return true;
}

bool all_zero(const std::vector<Poly>& v) {
  for (const auto& e : v)
    if (!e.is_zero()) return false;
  return true;
}

template <class T>
void axpy(std::vector<T>& acc, const Rational& c, const std::vector<T>& v);

void axpy(std::vector<double>& acc, const Rational& c, const std::vector<double>& v) {
  double cd = c.get_d();
  for (size_t i = 0; i < acc.size(); ++i) acc[i] += cd * v[i];
}
void axpy(std::vector<Rational>& acc, const Rational& c, const std::vector<Rational>& v) {
  for (size_t i = 0; i < acc.size(); ++i) acc[i] += c * v[i];
}
void axpy(std::vector<Poly>& acc, const Rational& c, const std::vector<Poly>& v) {
  for (size_t i = 0; i < acc.size(); ++i) acc[i] += v[i] * c;
}

// One Dynkin composition ((r_1,s_1),...,(r_l,s_l)). The degenerate tail rules:
// s_l = 1 ends in y, s_l = 0 & r_l = 1 ends in x, anything else vanishes.
template <class T>
void dynkin_term(const GradedLieAlgebra& A, const std::vector<std::pair<int, int>>& slots,
                 const std::vector<T>& X, const std::vector<T>& Y, const T& zero,
                 std::vector<T>& acc) {
  const int l = static_cast<int>(slots.size());
  const auto [rl, sl] = slots.back();
  bool end_y;
  if (sl == 1)
    end_y = true;
  else if (sl == 0 && rl == 1)
    end_y = false;
  else
    return;

  long m = 0;
  Rational denom(l);
  for (auto [r, s] : slots) {
    m += r + s;
    denom *= factorial(r);
    denom *= factorial(s);
  }
  denom *= m;
  Rational coef = Rational((l % 2) ? 1 : -1) / denom;

  // ad-operators left of the final letter, in application order.
  std::vector<bool> ops; // true = ad X, false = ad Y
  for (int q = 0; q + 1 < l; ++q) {
    for (int t = 0; t < slots[q].first; ++t) ops.push_back(true);
    for (int t = 0; t < slots[q].second; ++t) ops.push_back(false);
  }
  if (end_y)
    for (int t = 0; t < rl; ++t) ops.push_back(true);

  std::vector<T> cur = end_y ? Y : X;
  for (int p = static_cast<int>(ops.size()) - 1; p >= 0; --p) {
    cur = A.bracket(ops[p] ? X : Y, cur, zero);
    if (all_zero(cur)) return;
  }
  axpy(acc, coef, cur);
}

template <class T>
void dynkin_recurse(const GradedLieAlgebra& A, int max_letters, int used,
                    std::vector<std::pair<int, int>>& slots, const std::vector<T>& X,
                    const std::vector<T>& Y, const T& zero, std::vector<T>& acc) {
  if (!slots.empty()) dynkin_term(A, slots, X, Y, zero, acc);
  if (used >= max_letters) return;
  for (int r = 0; r <= max_letters - used; ++r)
    for (int s = (r == 0 ? 1 : 0); r + s <= max_letters - used; ++s) {
      slots.emplace_back(r, s);
      dynkin_recurse(A, max_letters, used + r + s, slots, X, Y, zero, acc);
      slots.pop_back();
    }
}

template <class T>
std::vector<T> dynkin_product(const GradedLieAlgebra& A, const std::vector<T>& X,
                              const std::vector<T>& Y, const T& zero, int max_letters) {
  if (max_letters < 1) throw std::invalid_argument("max_letters must be >= 1");
  std::vector<T> acc(static_cast<size_t>(A.dim()), zero);
  std::vector<std::pair<int, int>> slots;
  dynkin_recurse(A, max_letters, 0, slots, X, Y, zero, acc);
  return acc;
}

} // namespace

std::vector<Poly> dynkin_law(const GradedLieAlgebra& A, int max_letters) {
  const int n = A.dim();
  std::vector<Poly> X, Y;
  for (int i = 0; i < n; ++i) X.push_back(Poly::variable(2 * n, i));
  for (int i = 0; i < n; ++i) Y.push_back(Poly::variable(2 * n, n + i));
  return dynkin_product(A, X, Y, Poly(2 * n), max_letters);
}

template <class T>
std::vector<T> dynkin_star(const GradedLieAlgebra& A, const std::vector<T>& X,
                           const std::vector<T>& Y, int max_letters) {
  if (static_cast<int>(X.size()) != A.dim() || static_cast<int>(Y.size()) != A.dim())
    throw std::invalid_argument("dynkin_star arity mismatch");
  return dynkin_product(A, X, Y, T(0), max_letters);
}

template std::vector<double> dynkin_star(const GradedLieAlgebra&, const std::vector<double>&,
                                         const std::vector<double>&, int);
template std::vector<Rational> dynkin_star(const GradedLieAlgebra&, const std::vector<Rational>&,
                                           const std::vector<Rational>&, int);

Group::Group(GradedLieAlgebra alg) : m_alg(std::move(alg)) {
  auto report = validate_algebra(m_alg);
  if (!report.valid())
    throw DomainError("law synthesis refused, algebra axioms violated:\n" + report.to_string());

  const int n = m_alg.dim();
  m_law = dynkin_law(m_alg, m_alg.step());

  // Internal sanity: each coordinate is homogeneous of its own weight, and
  // the law restricted to y = 0 (x = 0) is the identity.
  std::vector<int> xyw(2 * n);
  for (int i = 0; i < n; ++i) xyw[i] = xyw[n + i] = m_alg.weight(i);
  std::vector<int> xvars, yvars;
  for (int i = 0; i < n; ++i) xvars.push_back(i), yvars.push_back(n + i);
  for (int k = 0; k < n; ++k) {
    long d = m_law[k].weighted_degree(xyw);
    if (d != m_alg.weight(k)) throw std::logic_error("law coordinate not weighted-homogeneous");
    if (!(m_law[k].with_vars_zeroed(yvars) == Poly::variable(2 * n, k)))
      throw std::logic_error("law(x,0) != x");
    if (!(m_law[k].with_vars_zeroed(xvars) == Poly::variable(2 * n, n + k)))
      throw std::logic_error("law(0,y) != y");
  }

  m_jy.assign(n, std::vector<Poly>());
  m_tau.assign(n, std::vector<Poly>());
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      m_jy[k].push_back(m_law[k].derivative(n + i));
      m_tau[k].push_back(m_jy[k][i].with_vars_zeroed(yvars));
    }

  for (int k = 0; k < n; ++k) m_flat_law.emplace_back(m_law[k]);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      m_flat_jy.emplace_back(m_jy[k][i]);
      m_flat_tau.emplace_back(m_tau[k][i]);
    }
}

std::vector<Rational> Group::multiply(const std::vector<Rational>& x,
                                      const std::vector<Rational>& y) const {
  const int n = dim();
  if (static_cast<int>(x.size()) != n || static_cast<int>(y.size()) != n)
    throw std::invalid_argument("multiply arity mismatch");
  std::vector<Rational> pt;
  pt.reserve(2 * n);
  pt.insert(pt.end(), x.begin(), x.end());
  pt.insert(pt.end(), y.begin(), y.end());
  std::vector<Rational> out;
  for (int k = 0; k < n; ++k) out.push_back(m_law[k].eval(pt));
  return out;
}

std::vector<double> Group::multiply(const std::vector<double>& x,
                                    const std::vector<double>& y) const {
  const int n = dim();
  if (static_cast<int>(x.size()) != n || static_cast<int>(y.size()) != n)
    throw std::invalid_argument("multiply arity mismatch");
  std::vector<double> out(n);
  multiply(x.data(), y.data(), out.data());
  return out;
}

void Group::multiply(const double* x, const double* y, double* out) const {
  const int n = dim();
  double pt[32];
  if (n <= 16) {
    for (int i = 0; i < n; ++i) pt[i] = x[i], pt[n + i] = y[i];
    for (int k = 0; k < n; ++k) out[k] = m_flat_law[k].eval(pt);
    return;
  }
  std::vector<double> big(2 * n);
  for (int i = 0; i < n; ++i) big[i] = x[i], big[n + i] = y[i];
  for (int k = 0; k < n; ++k) out[k] = m_flat_law[k].eval(big.data());
}

Matrix Group::tau(const double* x) const {
  const int n = dim();
  Matrix M(n, n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) M(k, i) = m_flat_tau[static_cast<size_t>(k) * n + i].eval(x);
  return M;
}

std::vector<std::vector<Rational>> Group::tau_exact(const std::vector<Rational>& x) const {
  const int n = dim();
  std::vector<std::vector<Rational>> M(n, std::vector<Rational>(n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) M[k][i] = m_tau[k][i].eval(x);
  return M;
}

Matrix Group::law_jacobian_y(const double* xy) const {
  const int n = dim();
  Matrix M(n, n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) M(k, i) = m_flat_jy[static_cast<size_t>(k) * n + i].eval(xy);
  return M;
}

std::string Group::law_text() const {
  const int n = dim();
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("x" + std::to_string(i + 1));
  for (int i = 0; i < n; ++i) names.push_back("y" + std::to_string(i + 1));
  std::ostringstream out;
  for (int k = 0; k < n; ++k) out << "z" << k + 1 << " = " << m_law[k].to_string(names) << "\n";
  return out.str();
}

} // namespace carnot
