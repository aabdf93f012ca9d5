#include "carnot/polynomial.hpp"

#include <sstream>
#include <stdexcept>

namespace carnot {

Poly Poly::variable(int nvars, int i) {
  if (i < 0 || i >= nvars) throw std::invalid_argument("variable index out of range");
  Poly p(nvars);
  Mono m(nvars, 0);
  m[i] = 1;
  p.m_terms.emplace(std::move(m), Rational(1));
  return p;
}

Poly Poly::constant(int nvars, const Rational& c) {
  Poly p(nvars);
  if (c != 0) p.m_terms.emplace(Mono(nvars, 0), c);
  return p;
}

void Poly::add_term(const Mono& mono, const Rational& c) {
  if (c == 0) return;
  auto [it, fresh] = m_terms.emplace(mono, c);
  if (!fresh) {
    it->second += c;
    if (it->second == 0) m_terms.erase(it);
  }
}

Rational Poly::coeff(const Mono& mono) const {
  auto it = m_terms.find(mono);
  return it == m_terms.end() ? Rational(0) : it->second;
}

Poly& Poly::operator+=(const Poly& o) {
  if (m_nvars != o.m_nvars) throw std::invalid_argument("polynomial arity mismatch");
  for (const auto& [m, c] : o.m_terms) add_term(m, c);
  return *this;
}

Poly& Poly::operator-=(const Poly& o) {
  if (m_nvars != o.m_nvars) throw std::invalid_argument("polynomial arity mismatch");
  for (const auto& [m, c] : o.m_terms) add_term(m, -c);
  return *this;
}

Poly Poly::operator+(const Poly& o) const {
  Poly r = *this;
  r += o;
  return r;
}

Poly Poly::operator-(const Poly& o) const {
  Poly r = *this;
  r -= o;
  return r;
}

Poly Poly::operator*(const Poly& o) const {
  if (m_nvars != o.m_nvars) throw std::invalid_argument("polynomial arity mismatch");
  Poly r(m_nvars);
  for (const auto& [ma, ca] : m_terms)
    for (const auto& [mb, cb] : o.m_terms) {
      Mono m(m_nvars);
      for (int v = 0; v < m_nvars; ++v) m[v] = ma[v] + mb[v];
      r.add_term(m, ca * cb);
    }
  return r;
}

Poly Poly::operator*(const Rational& c) const {
  Poly r(m_nvars);
  if (c == 0) return r;
  for (const auto& [m, k] : m_terms) r.m_terms.emplace(m, k * c);
  return r;
}

Poly Poly::operator-() const { return *this * Rational(-1); }

Poly Poly::derivative(int var) const {
  Poly r(m_nvars);
  for (const auto& [m, c] : m_terms) {
    if (m[var] == 0) continue;
    Mono d = m;
    d[var] -= 1;
    r.add_term(d, c * Rational(static_cast<long>(m[var])));
  }
  return r;
}

Poly Poly::with_vars_zeroed(const std::vector<int>& vars) const {
  Poly r(m_nvars);
  for (const auto& [m, c] : m_terms) {
    bool keep = true;
    for (int v : vars)
      if (m[v] != 0) {
        keep = false;
        break;
      }
    if (keep) r.m_terms.emplace(m, c);
  }
  return r;
}

long Poly::weighted_degree(const std::vector<int>& weights) const {
  if (m_terms.empty()) return -1;
  long deg = -1;
  for (const auto& [m, c] : m_terms) {
    (void)c;
    long d = 0;
    for (int v = 0; v < m_nvars; ++v) d += static_cast<long>(m[v]) * weights[v];
    if (deg == -1)
      deg = d;
    else if (deg != d)
      return -2;
  }
  return deg;
}

std::string Poly::to_string(const std::vector<std::string>& names) const {
  if (m_terms.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  for (const auto& [m, c] : m_terms) {
    Rational a = c;
    if (first) {
      if (a < 0) {
        out << "-";
        a = -a;
      }
    } else {
      out << (a < 0 ? " - " : " + ");
      if (a < 0) a = -a;
    }
    first = false;

    bool has_vars = false;
    for (int v = 0; v < m_nvars; ++v)
      if (m[v]) has_vars = true;

    bool wrote = false;
    if (a != 1 || !has_vars) {
      out << rational_str(a);
      wrote = true;
    }
    for (int v = 0; v < m_nvars; ++v) {
      if (!m[v]) continue;
      if (wrote) out << "*";
      out << names[v];
      if (m[v] > 1) out << "^" << m[v];
      wrote = true;
    }
  }
  return out.str();
}

FlatPoly::FlatPoly(const Poly& p) : m_nvars(p.nvars()) {
  for (const auto& [m, c] : p.terms()) {
    m_coef.push_back(c.get_d());
    for (int v = 0; v < m_nvars; ++v) m_exp.push_back(static_cast<unsigned char>(m[v]));
    ++m_nterms;
  }
}

double FlatPoly::eval(const double* point) const {
  double acc = 0.0;
  const unsigned char* e = m_exp.data();
  for (int t = 0; t < m_nterms; ++t, e += m_nvars) {
    double term = m_coef[t];
    for (int v = 0; v < m_nvars; ++v) {
      switch (e[v]) {
        case 0: break;
        case 1: term *= point[v]; break;
        case 2: term *= point[v] * point[v]; break;
        default: {
          double pw = point[v];
          for (unsigned char k = 1; k < e[v]; ++k) pw *= point[v];
          term *= pw;
        }
      }
    }
    acc += term;
  }
  return acc;
}

} // namespace carnot
