#include "symcode/math_expr.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace symcode::math {

std::string_view to_string(FunctionKind fn)
{
    switch (fn) {
    case FunctionKind::sqrt: return "sqrt";
    case FunctionKind::root: return "root";
    case FunctionKind::abs: return "abs";
    case FunctionKind::sin: return "sin";
    case FunctionKind::cos: return "cos";
    case FunctionKind::tan: return "tan";
    case FunctionKind::log: return "log";
    case FunctionKind::exp: return "exp";
    case FunctionKind::binom: return "binom";
    case FunctionKind::factorial: return "factorial";
    }
    return "?";
}

ExprPtr make_integer(BigInt value)
{
    return std::make_shared<const Expr>(IntegerNode{std::move(value)});
}

ExprPtr make_integer(long long value) { return make_integer(BigInt(value)); }

ExprPtr make_rational(BigInt num, BigInt den)
{
    if (den == 0) throw std::domain_error("rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    BigInt g = boost::multiprecision::gcd(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    if (den == 1) return make_integer(std::move(num));
    return std::make_shared<const Expr>(RationalNode{std::move(num), std::move(den)});
}

ExprPtr make_decimal(bool negative, std::string digits, int scale)
{
    if (digits.empty() || scale < 0) throw std::invalid_argument("malformed decimal literal");
    return std::make_shared<const Expr>(DecimalNode{negative, std::move(digits), scale});
}

ExprPtr make_symbol(std::string name) { return std::make_shared<const Expr>(SymbolNode{std::move(name)}); }

ExprPtr make_constant(ConstantKind kind) { return std::make_shared<const Expr>(ConstantNode{kind}); }

ExprPtr make_add(std::vector<ExprPtr> terms)
{
    std::vector<ExprPtr> flat;
    flat.reserve(terms.size());
    for (auto& t : terms) {
        if (const auto* inner = t->as<AddNode>()) {
            flat.insert(flat.end(), inner->terms.begin(), inner->terms.end());
        } else {
            flat.push_back(std::move(t));
        }
    }
    if (flat.empty()) return make_integer(0);
    if (flat.size() == 1) return flat.front();
    return std::make_shared<const Expr>(AddNode{std::move(flat)});
}

ExprPtr make_mul(std::vector<ExprPtr> factors)
{
    std::vector<ExprPtr> flat;
    flat.reserve(factors.size());
    for (auto& f : factors) {
        if (const auto* inner = f->as<MulNode>()) {
            flat.insert(flat.end(), inner->factors.begin(), inner->factors.end());
        } else {
            flat.push_back(std::move(f));
        }
    }
    if (flat.empty()) return make_integer(1);
    if (flat.size() == 1) return flat.front();
    return std::make_shared<const Expr>(MulNode{std::move(flat)});
}

ExprPtr make_pow(ExprPtr base, ExprPtr exponent)
{
    return std::make_shared<const Expr>(PowNode{std::move(base), std::move(exponent)});
}

ExprPtr make_neg(ExprPtr operand) { return std::make_shared<const Expr>(NegNode{std::move(operand)}); }

ExprPtr make_function(FunctionKind fn, std::vector<ExprPtr> args)
{
    return std::make_shared<const Expr>(FunctionNode{fn, std::move(args)});
}

BigInt digits_value(std::string_view digits)
{
    const auto first = digits.find_first_not_of('0');
    if (first == std::string_view::npos) return BigInt(0);
    return BigInt(std::string(digits.substr(first)));
}

bool is_number(const Expr& e)
{
    return e.is<IntegerNode>() || e.is<RationalNode>() || e.is<DecimalNode>();
}

namespace {

int kind_rank(const Expr& e)
{
    return std::visit(
        [](const auto& n) -> int {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, IntegerNode> || std::is_same_v<T, RationalNode> ||
                          std::is_same_v<T, DecimalNode>)
                return 0;
            else if constexpr (std::is_same_v<T, ConstantNode>)
                return 1;
            else if constexpr (std::is_same_v<T, SymbolNode>)
                return 2;
            else if constexpr (std::is_same_v<T, PowNode>)
                return 3;
            else if constexpr (std::is_same_v<T, FunctionNode>)
                return 4;
            else if constexpr (std::is_same_v<T, MulNode>)
                return 5;
            else if constexpr (std::is_same_v<T, AddNode>)
                return 6;
            else
                return 7;
        },
        e.node());
}

// Exact value of a number node as num/den with den > 0.
std::pair<BigInt, BigInt> number_value(const Expr& e)
{
    if (const auto* i = e.as<IntegerNode>()) return {i->value, BigInt(1)};
    if (const auto* r = e.as<RationalNode>()) return {r->num, r->den};
    const auto& d = *e.as<DecimalNode>();
    BigInt num = digits_value(d.digits);
    if (d.negative) num = -num;
    BigInt den = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(d.scale));
    return {num, den};
}

template <typename T>
int three_way(const T& a, const T& b)
{
    return a < b ? -1 : (b < a ? 1 : 0);
}

int compare_lists(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b)
{
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (int c = compare(*a[i], *b[i]); c != 0) return c;
    }
    return three_way(a.size(), b.size());
}

}  // namespace

int compare(const Expr& a, const Expr& b)
{
    if (&a == &b) return 0;
    if (int c = three_way(kind_rank(a), kind_rank(b)); c != 0) return c;

    if (is_number(a)) {
        auto [an, ad] = number_value(a);
        auto [bn, bd] = number_value(b);
        if (int c = three_way(BigInt(an * bd), BigInt(bn * ad)); c != 0) return c;
        if (int c = three_way(a.node().index(), b.node().index()); c != 0) return c;
        if (const auto* da = a.as<DecimalNode>()) {
            const auto* db = b.as<DecimalNode>();
            if (int c = three_way(da->scale, db->scale); c != 0) return c;
            return three_way(da->digits, db->digits);
        }
        return 0;
    }
    if (const auto* ca = a.as<ConstantNode>()) {
        return three_way(static_cast<int>(ca->kind), static_cast<int>(b.as<ConstantNode>()->kind));
    }
    if (const auto* sa = a.as<SymbolNode>()) return three_way(sa->name, b.as<SymbolNode>()->name);
    if (const auto* pa = a.as<PowNode>()) {
        const auto* pb = b.as<PowNode>();
        if (int c = compare(*pa->base, *pb->base); c != 0) return c;
        return compare(*pa->exponent, *pb->exponent);
    }
    if (const auto* fa = a.as<FunctionNode>()) {
        const auto* fb = b.as<FunctionNode>();
        if (int c = three_way(static_cast<int>(fa->fn), static_cast<int>(fb->fn)); c != 0) return c;
        return compare_lists(fa->args, fb->args);
    }
    if (const auto* ma = a.as<MulNode>()) return compare_lists(ma->factors, b.as<MulNode>()->factors);
    if (const auto* aa = a.as<AddNode>()) return compare_lists(aa->terms, b.as<AddNode>()->terms);
    return compare(*a.as<NegNode>()->operand, *b.as<NegNode>()->operand);
}

bool equal(const Expr& a, const Expr& b)
{
    if (&a == &b) return true;
    if (a.node().index() != b.node().index()) return false;
    return compare(a, b) == 0;
}

namespace {

void collect_symbols(const Expr& e, std::set<std::string>& out)
{
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, SymbolNode>) {
                out.insert(n.name);
            } else if constexpr (std::is_same_v<T, AddNode>) {
                for (const auto& t : n.terms) collect_symbols(*t, out);
            } else if constexpr (std::is_same_v<T, MulNode>) {
                for (const auto& f : n.factors) collect_symbols(*f, out);
            } else if constexpr (std::is_same_v<T, PowNode>) {
                collect_symbols(*n.base, out);
                collect_symbols(*n.exponent, out);
            } else if constexpr (std::is_same_v<T, NegNode>) {
                collect_symbols(*n.operand, out);
            } else if constexpr (std::is_same_v<T, FunctionNode>) {
                for (const auto& a : n.args) collect_symbols(*a, out);
            }
        },
        e.node());
}

}  // namespace

std::vector<std::string> free_symbols(const Expr& e)
{
    std::set<std::string> names;
    collect_symbols(e, names);
    return {names.begin(), names.end()};
}

// ---------------------------------------------------------------------------
// Printing

namespace {

enum class Slot { top, factor, base };

std::string decimal_text(const DecimalNode& d)
{
    std::string digits = d.digits;
    const auto scale = static_cast<std::size_t>(d.scale);
    if (digits.size() <= scale) digits.insert(0, scale - digits.size() + 1, '0');
    std::string out = d.negative ? "-" : "";
    out += digits.substr(0, digits.size() - scale);
    if (scale > 0) {
        out += '.';
        out += digits.substr(digits.size() - scale);
    }
    return out;
}

bool is_negative_literal(const Expr& e)
{
    if (const auto* i = e.as<IntegerNode>()) return i->value < 0;
    if (const auto* r = e.as<RationalNode>()) return r->num < 0;
    if (const auto* d = e.as<DecimalNode>()) return d->negative;
    return false;
}

std::string print(const Expr& e, Slot slot);

std::string paren(const std::string& s) { return "\\left(" + s + "\\right)"; }

std::string print_function(const FunctionNode& f)
{
    auto arg = [&](std::size_t i) { return print(*f.args.at(i), Slot::top); };
    switch (f.fn) {
    case FunctionKind::sqrt: return "\\sqrt{" + arg(0) + "}";
    case FunctionKind::root: return "\\sqrt[" + arg(1) + "]{" + arg(0) + "}";
    case FunctionKind::abs: return "\\left|" + arg(0) + "\\right|";
    case FunctionKind::sin: return "\\sin" + paren(arg(0));
    case FunctionKind::cos: return "\\cos" + paren(arg(0));
    case FunctionKind::tan: return "\\tan" + paren(arg(0));
    case FunctionKind::exp: return "\\exp" + paren(arg(0));
    case FunctionKind::log:
        if (f.args.size() == 2) return "\\log_{" + arg(1) + "}" + paren(arg(0));
        return "\\log" + paren(arg(0));
    case FunctionKind::binom: return "\\binom{" + arg(0) + "}{" + arg(1) + "}";
    case FunctionKind::factorial: {
        const Expr& x = *f.args.at(0);
        const bool atom = (x.is<IntegerNode>() && !is_negative_literal(x)) || x.is<SymbolNode>();
        return (atom ? print(x, Slot::top) : paren(print(x, Slot::top))) + "!";
    }
    }
    return {};
}

std::string print(const Expr& e, Slot slot)
{
    return std::visit(
        [&](const auto& n) -> std::string {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, IntegerNode>) {
                std::string s = n.value.str();
                return (n.value < 0 && slot != Slot::top) ? paren(s) : s;
            } else if constexpr (std::is_same_v<T, RationalNode>) {
                std::string s = "\\frac{" + BigInt(abs(n.num)).str() + "}{" + n.den.str() + "}";
                if (n.num < 0) s = "-" + s;
                return slot == Slot::top ? s : paren(s);
            } else if constexpr (std::is_same_v<T, DecimalNode>) {
                std::string s = decimal_text(n);
                return (n.negative && slot != Slot::top) ? paren(s) : s;
            } else if constexpr (std::is_same_v<T, SymbolNode>) {
                return n.name;
            } else if constexpr (std::is_same_v<T, ConstantNode>) {
                return n.kind == ConstantKind::pi ? "\\pi" : "e";
            } else if constexpr (std::is_same_v<T, AddNode>) {
                std::string s;
                for (std::size_t i = 0; i < n.terms.size(); ++i) {
                    const Expr& t = *n.terms[i];
                    if (i == 0) {
                        s += print(t, Slot::top);
                    } else if (const auto* neg = t.as<NegNode>()) {
                        const Expr& inner = *neg->operand;
                        const bool wrap = inner.is<AddNode>() || inner.is<NegNode>() ||
                                          is_negative_literal(inner) || is_number(inner);
                        s += " - " + (wrap ? paren(print(inner, Slot::top)) : print(inner, Slot::top));
                    } else if (is_negative_literal(t) && !t.is<RationalNode>()) {
                        s += " - " + print(t, Slot::top).substr(1);
                    } else {
                        s += " + " + print(t, Slot::factor);
                    }
                }
                return slot == Slot::top ? s : paren(s);
            } else if constexpr (std::is_same_v<T, MulNode>) {
                std::string s;
                for (std::size_t i = 0; i < n.factors.size(); ++i) {
                    if (i) s += " \\cdot ";
                    s += print(*n.factors[i], Slot::factor);
                }
                return slot == Slot::base ? paren(s) : s;
            } else if constexpr (std::is_same_v<T, PowNode>) {
                if (const auto* r = n.exponent->template as<RationalNode>(); r && r->num == 1) {
                    if (r->den == 2) return "\\sqrt{" + print(*n.base, Slot::top) + "}";
                    return "\\sqrt[" + r->den.str() + "]{" + print(*n.base, Slot::top) + "}";
                }
                const Expr& b = *n.base;
                const bool atom = b.is<SymbolNode>() || b.is<ConstantNode>() ||
                                  ((b.is<IntegerNode>() || b.is<DecimalNode>()) && !is_negative_literal(b)) ||
                                  (b.is<FunctionNode>() && b.as<FunctionNode>()->fn != FunctionKind::factorial);
                std::string bs = atom ? print(b, Slot::top) : paren(print(b, Slot::top));
                return bs + "^{" + print(*n.exponent, Slot::top) + "}";
            } else if constexpr (std::is_same_v<T, NegNode>) {
                const Expr& inner = *n.operand;
                const bool wrap = inner.is<AddNode>() || inner.is<NegNode>() || is_negative_literal(inner);
                std::string s = "-" + (wrap ? paren(print(inner, Slot::top)) : print(inner, Slot::top));
                return slot == Slot::top ? s : paren(s);
            } else {
                return print_function(n);
            }
        },
        e.node());
}

std::string debug(const Expr& e)
{
    auto list = [](const char* head, const std::vector<ExprPtr>& items) {
        std::string s = std::string(head) + "(";
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (i) s += ", ";
            s += debug(*items[i]);
        }
        return s + ")";
    };
    return std::visit(
        [&](const auto& n) -> std::string {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, IntegerNode>) return n.value.str();
            else if constexpr (std::is_same_v<T, RationalNode>) return n.num.str() + "/" + n.den.str();
            else if constexpr (std::is_same_v<T, DecimalNode>) return "dec(" + decimal_text(n) + ")";
            else if constexpr (std::is_same_v<T, SymbolNode>) return n.name;
            else if constexpr (std::is_same_v<T, ConstantNode>) return n.kind == ConstantKind::pi ? "pi" : "e";
            else if constexpr (std::is_same_v<T, AddNode>) return list("add", n.terms);
            else if constexpr (std::is_same_v<T, MulNode>) return list("mul", n.factors);
            else if constexpr (std::is_same_v<T, PowNode>) return "pow(" + debug(*n.base) + ", " + debug(*n.exponent) + ")";
            else if constexpr (std::is_same_v<T, NegNode>) return "neg(" + debug(*n.operand) + ")";
            else return list(std::string(to_string(n.fn)).c_str(), n.args);
        },
        e.node());
}

}  // namespace

std::string to_latex(const Expr& e) { return print(e, Slot::top); }

std::string to_debug_string(const Expr& e) { return debug(e); }

}  // namespace symcode::math
