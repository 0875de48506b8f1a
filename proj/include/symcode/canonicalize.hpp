#pragma once

#include "symcode/math_expr.hpp"

namespace symcode::math {

// Rewrites an expression into a normal form so that equal answers written
// differently tend to become structurally identical.
//
// The result uses only integer, rational, symbol, constant, add, mul, pow and
// the functions abs/sin/cos/tan/log(natural)/binom/factorial:
//   - decimals become rationals, neg(x) becomes mul(-1, x),
//   - sqrt/root/exp become powers, log_b(x) becomes log(x) * log(b)^-1,
//   - numbers fold exactly; like terms and equal bases are collected,
//   - radicals of rationals are reduced to c * t^(1/q) with t a positive
//     integer free of q-th powers (sqrt(40) -> 2 * 10^(1/2)),
//   - commutative operands are sorted by compare(), coefficient first.
//
// Every rewrite preserves the real value wherever the input is defined.
// Simplification is partial by design; it never throws on well-formed input
// and canonicalize(canonicalize(x)) equals canonicalize(x).
ExprPtr canonicalize(const ExprPtr& e);

}  // namespace symcode::math
