#include "knotint/rational.hpp"

#include <cctype>

namespace knotint {

namespace {

bool valid_int_token(const std::string& t) {
  if (t.empty()) return false;
  size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
  if (i == t.size()) return false;
  for (; i < t.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
  return true;
}

}  // namespace

Rational parse_rational(const std::string& s) {
  auto slash = s.find('/');
  std::string num = s.substr(0, slash);
  std::string den = slash == std::string::npos ? std::string("1") : s.substr(slash + 1);
  if (!valid_int_token(num) || !valid_int_token(den))
    throw ParseError("bad rational literal: '" + s + "'");
  boost::multiprecision::cpp_int p(num), q(den);
  if (q == 0) throw ParseError("zero denominator in rational literal: '" + s + "'");
  return Rational(p, q);
}

std::string format_rational(const Rational& r) {
  std::string num = numerator(r).str();
  if (denominator(r) == 1) return num;
  return num + "/" + denominator(r).str();
}

}  // namespace knotint
