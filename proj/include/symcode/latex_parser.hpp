#pragma once

#include "symcode/math_expr.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace symcode::math {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& what);

    std::size_t offset() const { return offset_; }
    const std::vector<std::string>& expected() const { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

// Parses the answer subset of LaTeX used by competition benchmarks:
// integers, decimals, \frac/\dfrac/\tfrac, \sqrt and \sqrt[n], \pi, e,
// \cdot/\times/juxtaposition, ^, parentheses and \left/\right delimiters,
// |x|, unary minus, \binom, postfix !, and \sin \cos \tan \log \ln \exp
// plus their ascii spellings. Spacing commands (\, \; \! \quad ...) and '$'
// are ignored. Subtraction is kept as add(..., neg(...)); a minus applied
// directly to a numeric literal folds into the literal.
ExprPtr parse_latex(std::string_view text);

}  // namespace symcode::math
