#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace hedge {

// Exact arithmetic used by the optional rational solve mode and by test
// oracles that pin golden values.
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline Rational rational_of(double d) { return Rational(d); }

inline Rational rational_frac(long long num, long long den) {
    return Rational(num) / Rational(den);
}

} // namespace hedge
