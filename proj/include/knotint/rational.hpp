#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>

#include "knotint/errors.hpp"

namespace knotint {

using Rational = boost::multiprecision::cpp_rational;

// "p/q" or "p"; throws ParseError on garbage or zero denominator.
Rational parse_rational(const std::string& s);

// canonical form: "p" when q==1, else "p/q" with q>0.
std::string format_rational(const Rational& r);

inline double to_double(const Rational& r) { return static_cast<double>(r); }

}  // namespace knotint
