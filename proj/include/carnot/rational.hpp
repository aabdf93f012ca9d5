#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <random>
#include <string>

namespace carnot {

/// Exact rational scalar. Always kept in reduced canonical form.
using Rational = mpq_class;

/// Parses "p" or "p/q" with arbitrary-size integers. Throws FormatError on
/// malformed text or zero denominator.
Rational parse_rational(const std::string& text);

/// Canonical text form, "p" or "p/q".
std::string rational_str(const Rational& q);

inline double to_double(const Rational& q) { return q.get_d(); }

/// Deterministic stream of small rationals for property tests.
class RationalSampler {
public:
  explicit RationalSampler(std::uint64_t seed, long num_range = 6, long den_range = 4);

  /// Next sample, numerator in [-num_range, num_range], denominator in [1, den_range].
  Rational next();

  /// Next nonzero sample.
  Rational next_nonzero();

private:
  std::mt19937_64 m_rng;
  long m_num;
  long m_den;
};

} // namespace carnot
