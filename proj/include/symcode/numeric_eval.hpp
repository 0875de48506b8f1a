#pragma once

#include "symcode/math_expr.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <map>
#include <optional>
#include <string>

namespace symcode::math {

// 100 significant decimal digits; comfortably above the 50-digit floor the
// numeric equivalence stage needs.
using HighFloat = boost::multiprecision::cpp_bin_float_100;

using Assignment = std::map<std::string, HighFloat>;

// Real-valued evaluation. Returns nullopt when the value is undefined over
// the reals (even root or log of a negative, division by zero, overflow) or
// when a free symbol has no assignment.
//
// Rational powers follow the real odd-root convention: for q odd,
// x^(p/q) = sign(x)^p * |x|^(p/q).
std::optional<HighFloat> evaluate(const Expr& e, const Assignment& at = {});

// |a - b| <= rel * max(|a|, |b|), with an absolute floor of 1e-60 so values
// that are zero up to working-precision noise compare equal.
bool agree_within(const HighFloat& a, const HighFloat& b, const HighFloat& rel);

}  // namespace symcode::math
