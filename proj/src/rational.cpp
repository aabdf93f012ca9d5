#include "carnot/rational.hpp"

#include "carnot/errors.hpp"

namespace carnot {

Rational parse_rational(const std::string& text) {
  std::string num = text, den = "1";
  if (auto slash = text.find('/'); slash != std::string::npos) {
    num = text.substr(0, slash);
    den = text.substr(slash + 1);
  }
  mpz_class n, d;
  try {
    n = mpz_class(num);
    d = mpz_class(den);
  } catch (const std::invalid_argument&) {
    throw FormatError("bad rational '" + text + "'");
  }
  if (d == 0) throw FormatError("zero denominator in rational '" + text + "'");
  Rational q(n, d);
  q.canonicalize();
  return q;
}

std::string rational_str(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

RationalSampler::RationalSampler(std::uint64_t seed, long num_range, long den_range)
    : m_rng(seed), m_num(num_range), m_den(den_range) {}

Rational RationalSampler::next() {
  std::uniform_int_distribution<long> num(-m_num, m_num);
  std::uniform_int_distribution<long> den(1, m_den);
  Rational q(num(m_rng), den(m_rng));
  q.canonicalize();
  return q;
}

Rational RationalSampler::next_nonzero() {
  for (;;) {
    Rational q = next();
    if (q != 0) return q;
  }
}

} // namespace carnot
