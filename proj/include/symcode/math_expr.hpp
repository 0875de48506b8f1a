#pragma once

// Exact-arithmetic expression tree for competition-math answers.
//
// Nodes are immutable and shared. The factory functions keep the structural
// invariants that every consumer relies on:
//   - rationals are reduced with a positive denominator,
//   - add/mul hold at least two operands and never directly nest themselves.
// Anything beyond that (folding, ordering, radical extraction) is the job of
// canonicalize().

#include <boost/multiprecision/cpp_int.hpp>

#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace symcode::math {

using BigInt = boost::multiprecision::cpp_int;

enum class ConstantKind { pi, e };

enum class FunctionKind { sqrt, root, abs, sin, cos, tan, log, exp, binom, factorial };

std::string_view to_string(FunctionKind fn);

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct IntegerNode {
    BigInt value;
};

struct RationalNode {
    BigInt num;
    BigInt den;  // > 1 once built through make_rational
};

// value = (negative ? -1 : 1) * digits * 10^-scale; digits keeps the
// literal's spelling, trailing zeros included.
struct DecimalNode {
    bool negative = false;
    std::string digits;
    int scale = 0;
};

struct SymbolNode {
    std::string name;
};

struct ConstantNode {
    ConstantKind kind;
};

struct AddNode {
    std::vector<ExprPtr> terms;
};

struct MulNode {
    std::vector<ExprPtr> factors;
};

struct PowNode {
    ExprPtr base;
    ExprPtr exponent;
};

struct NegNode {
    ExprPtr operand;
};

// root(x, n) is the n-th root; log(x) is natural, log(x, b) is base b.
struct FunctionNode {
    FunctionKind fn;
    std::vector<ExprPtr> args;
};

class Expr {
public:
    using Node = std::variant<IntegerNode, RationalNode, DecimalNode, SymbolNode, ConstantNode,
                              AddNode, MulNode, PowNode, NegNode, FunctionNode>;

    explicit Expr(Node node) : node_(std::move(node)) {}

    const Node& node() const { return node_; }

    template <typename T>
    const T* as() const { return std::get_if<T>(&node_); }

    template <typename T>
    bool is() const { return std::holds_alternative<T>(node_); }

private:
    Node node_;
};

ExprPtr make_integer(BigInt value);
ExprPtr make_integer(long long value);
// Reduces; returns an integer node when the denominator divides out.
// Throws std::domain_error on a zero denominator.
ExprPtr make_rational(BigInt num, BigInt den);
ExprPtr make_decimal(bool negative, std::string digits, int scale);
ExprPtr make_symbol(std::string name);
ExprPtr make_constant(ConstantKind kind);
// Flattens nested adds. One operand returns it unchanged, none returns 0.
ExprPtr make_add(std::vector<ExprPtr> terms);
// Flattens nested muls. One operand returns it unchanged, none returns 1.
ExprPtr make_mul(std::vector<ExprPtr> factors);
ExprPtr make_pow(ExprPtr base, ExprPtr exponent);
ExprPtr make_neg(ExprPtr operand);
ExprPtr make_function(FunctionKind fn, std::vector<ExprPtr> args);

// Structural equality (exact, node by node).
bool equal(const Expr& a, const Expr& b);
inline bool equal(const ExprPtr& a, const ExprPtr& b) { return equal(*a, *b); }

// Fixed total order used to sort commutative operands: <0, 0, >0.
int compare(const Expr& a, const Expr& b);

struct ExprLess {
    bool operator()(const ExprPtr& a, const ExprPtr& b) const { return compare(*a, *b) < 0; }
};

// Value of a run of decimal digits. Leading zeros are plain zeros, not an
// octal prefix.
BigInt digits_value(std::string_view digits);

// A literal number node (integer, rational, or decimal).
bool is_number(const Expr& e);

// Free symbol names, sorted and unique.
std::vector<std::string> free_symbols(const Expr& e);

// LaTeX rendering that parse_latex() reads back into the same tree.
std::string to_latex(const Expr& e);

// Compact debug form such as mul(2, pow(10, 1/2)).
std::string to_debug_string(const Expr& e);

}  // namespace symcode::math
