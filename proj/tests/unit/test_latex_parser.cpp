#include "symcode/latex_parser.hpp"

#include "../support/random_expr.hpp"

#include <doctest.h>

using namespace symcode::math;

namespace {

std::string tree(std::string_view latex) { return to_debug_string(*parse_latex(latex)); }

}  // namespace

TEST_CASE("answer forms from the sample problems")
{
    CHECK(tree("2\\sqrt{10}") == "mul(2, sqrt(10))");
    CHECK(tree("468") == "468");
    CHECK(tree("4") == "4");
    CHECK(tree("2\\sqrt{2}\\sqrt{10+3\\sqrt{15}}") == "mul(2, sqrt(2), sqrt(add(10, mul(3, sqrt(15)))))");
    CHECK(tree("2 \\sqrt{10}") == "mul(2, sqrt(10))");
}

TEST_CASE("fractions, roots and powers")
{
    CHECK(tree("\\frac{1}{2}") == "mul(1, pow(2, -1))");
    CHECK(tree("\\dfrac{\\pi}{4}") == "mul(pi, pow(4, -1))");
    CHECK(tree("\\sqrt[3]{2}") == "root(2, 3)");
    CHECK(tree("x^{2}") == "pow(x, 2)");
    CHECK(tree("x^2y") == "mul(pow(x, 2), y)");
    CHECK(tree("2^{-1}") == "pow(2, -1)");
    CHECK(tree("2**3") == "pow(2, 3)");
    CHECK(tree("\\frac12") == "mul(1, pow(2, -1))");
}

TEST_CASE("signs, decimals and spacing")
{
    CHECK(tree("-3") == "-3");
    CHECK(tree("-0.5") == "dec(-0.5)");
    CHECK(tree("1 - x") == "add(1, neg(x))");
    CHECK(tree("$12345$") == "12345");
    CHECK(tree("12\\,345") == "mul(12, 345)");
    CHECK(tree("\\left( 1 + 2 \\right) \\cdot 3") == "mul(add(1, 2), 3)");
    CHECK(tree("3 \\times 4 \\div 2") == "mul(3, 4, pow(2, -1))");
    CHECK(tree("\\displaystyle \\, 7 \\;") == "7");
}

TEST_CASE("functions, constants and postfix")
{
    CHECK(tree("\\binom{5}{2}") == "binom(5, 2)");
    CHECK(tree("5!") == "factorial(5)");
    CHECK(tree("|x-1|") == "abs(add(x, -1))");
    CHECK(tree("\\left|x\\right|") == "abs(x)");
    CHECK(tree("\\sin x") == "sin(x)");
    CHECK(tree("\\log_{2} 8") == "log(8, 2)");
    CHECK(tree("\\ln(e)") == "log(e)");
    CHECK(tree("sqrt(2)") == "sqrt(2)");
    CHECK(tree("\\pi") == "pi");
    CHECK(tree("\\alpha") == "\\alpha");
}

TEST_CASE("parse errors carry an offset and what was expected")
{
    try {
        parse_latex("1 + ");
        FAIL("expected a ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 4);
        CHECK_FALSE(e.expected().empty());
    }
    CHECK_THROWS_AS(parse_latex(""), ParseError);
    CHECK_THROWS_AS(parse_latex("\\frac{1}"), ParseError);
    CHECK_THROWS_AS(parse_latex("(1, 2)"), ParseError);
    CHECK_THROWS_AS(parse_latex("\\text{yes}"), ParseError);
    CHECK_THROWS_AS(parse_latex("x = 3"), ParseError);
}

TEST_CASE("deep nesting is rejected rather than overflowing the stack")
{
    std::string deep(5000, '(');
    deep += "1";
    deep += std::string(5000, ')');
    CHECK_THROWS_AS(parse_latex(deep), ParseError);
}

TEST_CASE("printing a parsed tree and reparsing yields the same tree")
{
    symcode::testing::RandomExpr gen(20240601, "x");
    for (int i = 0; i < 500; ++i) {
        ExprPtr original = gen(4);
        ExprPtr parsed = parse_latex(to_latex(*original));
        ExprPtr reparsed = parse_latex(to_latex(*parsed));
        INFO(to_latex(*original));
        REQUIRE(equal(parsed, reparsed));
    }
}
