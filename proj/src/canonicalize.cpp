#include "symcode/canonicalize.hpp"

#include "symcode/numeric_eval.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <map>
#include <numeric>
#include <optional>

namespace symcode::math {

namespace {

using Rational = boost::multiprecision::cpp_rational;

// Size caps keep exact arithmetic from exploding on inputs like 10^{10^{10}}.
constexpr std::size_t k_max_result_bits = 40000;
constexpr std::size_t k_max_radicand_bits = 2000;
constexpr unsigned k_trial_division_limit = 65536;
constexpr int k_max_passes = 16;

std::size_t bit_length(const BigInt& v)
{
    if (v == 0) return 0;
    return boost::multiprecision::msb(boost::multiprecision::abs(v)) + 1;
}

std::optional<Rational> rational_of(const Expr& e)
{
    if (const auto* i = e.as<IntegerNode>()) return Rational(i->value);
    if (const auto* r = e.as<RationalNode>()) return Rational(r->num, r->den);
    return std::nullopt;
}

std::optional<BigInt> integer_of(const Expr& e)
{
    if (const auto* i = e.as<IntegerNode>()) return i->value;
    return std::nullopt;
}

ExprPtr number(const Rational& q)
{
    return make_rational(boost::multiprecision::numerator(q), boost::multiprecision::denominator(q));
}

bool is_value(const Expr& e, long long v)
{
    const auto* i = e.as<IntegerNode>();
    return i && i->value == v;
}

std::optional<Rational> checked_power(const Rational& base, const BigInt& exponent)
{
    if (base == 0) {
        if (exponent < 0) return std::nullopt;
        return Rational(exponent == 0 ? 1 : 0);
    }
    const BigInt mag = boost::multiprecision::abs(exponent);
    const BigInt n = boost::multiprecision::numerator(base);
    const BigInt d = boost::multiprecision::denominator(base);
    const std::size_t bits = std::max(bit_length(n), bit_length(d));
    if (mag > BigInt(k_max_result_bits) || BigInt(bits) * mag > BigInt(k_max_result_bits)) return std::nullopt;
    const auto k = mag.convert_to<unsigned>();
    BigInt pn = boost::multiprecision::pow(n, k);
    BigInt pd = boost::multiprecision::pow(d, k);
    if (exponent < 0) std::swap(pn, pd);
    return Rational(pn) / Rational(pd);
}

// floor(n^(1/k)) for n >= 0, k >= 1.
BigInt integer_root(const BigInt& n, unsigned k)
{
    if (n < 2 || k == 1) return n;
    BigInt x = BigInt(1) << ((bit_length(n) + k - 1) / k);
    for (;;) {
        BigInt y = ((k - 1) * x + n / boost::multiprecision::pow(x, k - 1)) / k;
        if (y >= x) return x;
        x = y;
    }
}

struct Radical {
    BigInt outside;   // s
    BigInt radicand;  // t
    unsigned index;   // q'
};

// m^(1/q) = s * t^(1/q') with t free of q'-th powers as far as trial
// division (plus a perfect-power test on the cofactor) can tell.
Radical extract_radical(BigInt m, unsigned q)
{
    std::vector<std::pair<BigInt, unsigned>> factors;
    auto take = [&](const BigInt& p) {
        unsigned e = 0;
        while (m % p == 0) {
            m /= p;
            ++e;
        }
        if (e) factors.emplace_back(p, e);
    };
    take(2);
    for (unsigned p = 3; p <= k_trial_division_limit && BigInt(p) * p <= m; p += 2) take(p);
    if (m > 1) {
        bool found = false;
        for (unsigned j = q; j >= 2 && !found; --j) {
            if (q % j) continue;
            BigInt r = integer_root(m, j);
            if (boost::multiprecision::pow(r, j) == m) {
                factors.emplace_back(r, j);
                found = true;
            }
        }
        if (!found) factors.emplace_back(m, 1);
    }

    Radical out{1, 1, 1};
    unsigned g = q;
    bool any = false;
    for (auto& [p, e] : factors) {
        out.outside *= boost::multiprecision::pow(p, e / q);
        e %= q;
        if (e) {
            g = std::gcd(g, e);
            any = true;
        }
    }
    if (!any) return out;
    for (const auto& [p, e] : factors) {
        if (e) out.radicand *= boost::multiprecision::pow(p, e / g);
    }
    out.index = q / g;
    return out;
}

ExprPtr radical_expr(const Rational& coef, const BigInt& radicand, unsigned index)
{
    if (coef == 0) return make_integer(0);
    if (index == 1) return number(coef * Rational(radicand));
    if (radicand == 1) return number(coef);
    ExprPtr root = make_pow(make_integer(radicand), make_rational(1, index));
    if (coef == 1) return root;
    return make_mul({number(coef), root});
}

// base^(p/q) for rational base and exponent, in the radical normal form.
// nullopt means "leave it alone" (undefined over the reals or too large).
std::optional<ExprPtr> rational_power(Rational base, const Rational& exponent)
{
    const BigInt p = boost::multiprecision::numerator(exponent);
    const BigInt qb = boost::multiprecision::denominator(exponent);
    if (qb == 1) {
        auto v = checked_power(base, p);
        if (!v) return std::nullopt;
        return number(*v);
    }
    if (qb > 1000) return std::nullopt;
    const auto q = qb.convert_to<unsigned>();
    if (base == 0) {
        if (p < 0) return std::nullopt;
        return make_integer(0);
    }
    Rational sign = 1;
    if (base < 0) {
        if (q % 2 == 0) return std::nullopt;
        if (p % 2 != 0) sign = -1;
        base = -base;
    }
    // p/q = k + f/q with 0 < f < q.
    BigInt k = p / qb;
    if (p < 0 && k * qb != p) k -= 1;
    const auto f = BigInt(p - k * qb).convert_to<unsigned>();

    auto whole = checked_power(base, k);
    if (!whole) return std::nullopt;
    const BigInt n = boost::multiprecision::numerator(base);
    const BigInt d = boost::multiprecision::denominator(base);
    if (bit_length(n) * f + bit_length(d) * (q - f) > k_max_radicand_bits) return std::nullopt;
    // (n/d)^(f/q) = (n^f * d^(q-f))^(1/q) / d
    const BigInt m = boost::multiprecision::pow(n, f) * boost::multiprecision::pow(d, q - f);
    Radical r = extract_radical(m, q);
    const Rational coef = sign * *whole * Rational(r.outside, d);
    return radical_expr(coef, r.radicand, r.index);
}

bool is_positive_atom(const Expr& e)
{
    if (e.is<ConstantNode>()) return true;
    auto q = rational_of(e);
    return q && *q > 0;
}

// t^(1/q) with t a positive integer: the shape radical_expr produces.
std::optional<std::pair<BigInt, unsigned>> as_integer_radical(const Expr& e)
{
    const auto* p = e.as<PowNode>();
    if (!p) return std::nullopt;
    auto t = integer_of(*p->base);
    const auto* r = p->exponent->as<RationalNode>();
    if (!t || *t < 2 || !r || r->num != 1 || r->den > 1000) return std::nullopt;
    return std::pair{*t, r->den.convert_to<unsigned>()};
}

class Simplifier {
public:
    ExprPtr run(const ExprPtr& e)
    {
        return std::visit([&](const auto& n) { return visit(e, n); }, e->node());
    }

private:
    ExprPtr visit(const ExprPtr& e, const IntegerNode&) { return e; }
    ExprPtr visit(const ExprPtr& e, const RationalNode&) { return e; }
    ExprPtr visit(const ExprPtr&, const DecimalNode& d)
    {
        BigInt num = digits_value(d.digits);
        if (d.negative) num = -num;
        return make_rational(num, boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(d.scale)));
    }
    ExprPtr visit(const ExprPtr& e, const SymbolNode&) { return e; }
    ExprPtr visit(const ExprPtr& e, const ConstantNode&) { return e; }
    ExprPtr visit(const ExprPtr&, const AddNode& n)
    {
        std::vector<ExprPtr> terms;
        for (const auto& t : n.terms) terms.push_back(run(t));
        return add(std::move(terms));
    }
    ExprPtr visit(const ExprPtr&, const MulNode& n)
    {
        std::vector<ExprPtr> factors;
        for (const auto& f : n.factors) factors.push_back(run(f));
        return mul(std::move(factors));
    }
    ExprPtr visit(const ExprPtr&, const PowNode& n) { return pow(run(n.base), run(n.exponent)); }
    ExprPtr visit(const ExprPtr&, const NegNode& n) { return mul({make_integer(-1), run(n.operand)}); }
    ExprPtr visit(const ExprPtr&, const FunctionNode& n)
    {
        std::vector<ExprPtr> args;
        for (const auto& a : n.args) args.push_back(run(a));
        return function(n.fn, std::move(args));
    }

    static std::pair<Rational, ExprPtr> split_coefficient(const ExprPtr& term)
    {
        if (const auto* m = term->as<MulNode>()) {
            if (auto c = rational_of(*m->factors.front())) {
                std::vector<ExprPtr> rest(m->factors.begin() + 1, m->factors.end());
                return {*c, make_mul(std::move(rest))};
            }
        }
        return {Rational(1), term};
    }

    ExprPtr add(std::vector<ExprPtr> terms)
    {
        Rational constant = 0;
        std::map<ExprPtr, Rational, ExprLess> like;
        std::vector<ExprPtr> flat;
        for (auto& t : terms) {
            if (const auto* a = t->as<AddNode>()) {
                flat.insert(flat.end(), a->terms.begin(), a->terms.end());
            } else {
                flat.push_back(t);
            }
        }
        for (const auto& t : flat) {
            if (auto c = rational_of(*t)) {
                constant += *c;
                continue;
            }
            auto [coef, rest] = split_coefficient(t);
            like[rest] += coef;
        }
        std::vector<ExprPtr> out;
        if (constant != 0) out.push_back(number(constant));
        for (const auto& [rest, coef] : like) {
            if (coef == 0) continue;
            out.push_back(coef == 1 ? rest : make_mul({number(coef), rest}));
        }
        std::sort(out.begin(), out.end(), ExprLess{});
        return make_add(std::move(out));
    }

    ExprPtr mul(std::vector<ExprPtr> factors)
    {
        Rational coef = 1;
        std::map<ExprPtr, std::vector<ExprPtr>, ExprLess> bases;
        std::vector<ExprPtr> pending = std::move(factors);
        while (!pending.empty()) {
            ExprPtr f = pending.back();
            pending.pop_back();
            if (const auto* m = f->as<MulNode>()) {
                pending.insert(pending.end(), m->factors.begin(), m->factors.end());
            } else if (auto c = rational_of(*f)) {
                coef *= *c;
            } else if (const auto* p = f->as<PowNode>()) {
                bases[p->base].push_back(p->exponent);
            } else {
                bases[f].push_back(make_integer(1));
            }
        }
        if (coef == 0) return make_integer(0);

        std::vector<ExprPtr> rest;
        auto absorb = [&](const ExprPtr& piece) {
            std::vector<ExprPtr> parts{piece};
            if (const auto* m = piece->as<MulNode>()) parts = m->factors;
            for (const auto& part : parts) {
                if (auto c = rational_of(*part)) {
                    coef *= *c;
                } else {
                    rest.push_back(part);
                }
            }
        };
        for (auto& [base, exponents] : bases) {
            ExprPtr exponent = exponents.size() == 1 ? exponents.front() : add(exponents);
            absorb(pow(base, exponent));
        }
        if (coef == 0) return make_integer(0);

        // Radicals of integers with a common index combine under one root.
        std::map<unsigned, BigInt> by_index;
        std::map<unsigned, int> index_count;
        std::vector<ExprPtr> others;
        for (const auto& f : rest) {
            if (auto r = as_integer_radical(*f)) {
                auto [it, inserted] = by_index.try_emplace(r->second, 1);
                it->second *= r->first;
                ++index_count[r->second];
            } else {
                others.push_back(f);
            }
        }
        rest = std::move(others);
        for (const auto& [index, radicand] : by_index) {
            if (index_count[index] == 1 || bit_length(radicand) > k_max_radicand_bits) {
                rest.push_back(make_pow(make_integer(radicand), make_rational(1, index)));
                continue;
            }
            Radical r = extract_radical(radicand, index);
            coef *= Rational(r.outside);
            ExprPtr piece = radical_expr(1, r.radicand, r.index);
            if (auto c = rational_of(*piece)) {
                coef *= *c;
            } else {
                rest.push_back(piece);
            }
        }

        if (rest.empty()) return number(coef);
        if (rest.size() == 1 && rest.front()->is<AddNode>() && coef != 1) {
            std::vector<ExprPtr> terms;
            for (const auto& t : rest.front()->as<AddNode>()->terms) terms.push_back(mul({number(coef), t}));
            return add(std::move(terms));
        }
        std::sort(rest.begin(), rest.end(), ExprLess{});
        if (coef != 1) rest.insert(rest.begin(), number(coef));
        return make_mul(std::move(rest));
    }

    ExprPtr pow(const ExprPtr& base, const ExprPtr& exponent)
    {
        if (is_value(*exponent, 0)) return make_integer(1);
        if (is_value(*exponent, 1)) return base;
        if (is_value(*base, 1)) return make_integer(1);

        const auto qb = rational_of(*base);
        const auto qe = rational_of(*exponent);
        if (qb && qe) {
            if (auto v = rational_power(*qb, *qe)) return *v;
            return make_pow(base, exponent);
        }
        if (qb && *qb == 0) return make_pow(base, exponent);

        const bool integer_exponent = exponent->is<IntegerNode>();
        if (const auto* p = base->as<PowNode>()) {
            if (integer_exponent || is_positive_atom(*p->base)) {
                return pow(p->base, mul({p->exponent, exponent}));
            }
        }
        if (const auto* m = base->as<MulNode>()) {
            if (integer_exponent) {
                std::vector<ExprPtr> parts;
                for (const auto& f : m->factors) parts.push_back(pow(f, exponent));
                return mul(std::move(parts));
            }
            if (auto c = rational_of(*m->factors.front()); c && *c > 0) {
                std::vector<ExprPtr> rest(m->factors.begin() + 1, m->factors.end());
                return mul({pow(m->factors.front(), exponent), pow(make_mul(std::move(rest)), exponent)});
            }
        }
        return make_pow(base, exponent);
    }

    static std::optional<BigInt> multiple_of_pi(const Expr& e)
    {
        const auto* c = e.as<ConstantNode>();
        if (c && c->kind == ConstantKind::pi) return BigInt(1);
        const auto* m = e.as<MulNode>();
        if (!m || m->factors.size() != 2) return std::nullopt;
        auto k = integer_of(*m->factors[0]);
        const auto* pi = m->factors[1]->as<ConstantNode>();
        if (k && pi && pi->kind == ConstantKind::pi) return *k;
        return std::nullopt;
    }

    ExprPtr natural_log(const ExprPtr& x)
    {
        if (is_value(*x, 1)) return make_integer(0);
        if (const auto* c = x->as<ConstantNode>(); c && c->kind == ConstantKind::e) return make_integer(1);
        if (const auto* p = x->as<PowNode>()) {
            const auto* c = p->base->as<ConstantNode>();
            if (c && c->kind == ConstantKind::e) return p->exponent;
        }
        return make_function(FunctionKind::log, {x});
    }

    ExprPtr absolute(const ExprPtr& x)
    {
        if (auto q = rational_of(*x)) return number(boost::multiprecision::abs(*q));
        if (const auto* f = x->as<FunctionNode>(); f && f->fn == FunctionKind::abs) return x;
        if (free_symbols(*x).empty()) {
            if (auto v = evaluate(*x)) {
                static const HighFloat tiny("1e-40");
                if (*v > tiny) return x;
                if (*v < -tiny) return mul({make_integer(-1), x});
            }
        }
        if (const auto* m = x->as<MulNode>()) {
            if (auto c = rational_of(*m->factors.front())) {
                std::vector<ExprPtr> rest(m->factors.begin() + 1, m->factors.end());
                return mul({number(boost::multiprecision::abs(*c)), absolute(make_mul(std::move(rest)))});
            }
        }
        return make_function(FunctionKind::abs, {x});
    }

    ExprPtr function(FunctionKind fn, std::vector<ExprPtr> args)
    {
        const ExprPtr& x = args.at(0);
        switch (fn) {
        case FunctionKind::sqrt: return pow(x, make_rational(1, 2));
        case FunctionKind::root: return pow(x, pow(args.at(1), make_integer(-1)));
        case FunctionKind::exp: return pow(make_constant(ConstantKind::e), x);
        case FunctionKind::log:
            if (args.size() == 2) return mul({natural_log(x), pow(natural_log(args[1]), make_integer(-1))});
            return natural_log(x);
        case FunctionKind::abs: return absolute(x);
        case FunctionKind::sin:
        case FunctionKind::tan:
            if (is_value(*x, 0) || multiple_of_pi(*x)) return make_integer(0);
            break;
        case FunctionKind::cos:
            if (is_value(*x, 0)) return make_integer(1);
            if (auto k = multiple_of_pi(*x)) return make_integer(*k % 2 == 0 ? 1 : -1);
            break;
        case FunctionKind::factorial:
            if (auto n = integer_of(*x); n && *n >= 0 && *n <= 1000) {
                BigInt acc = 1;
                for (unsigned i = 2; i <= n->convert_to<unsigned>(); ++i) acc *= i;
                return make_integer(acc);
            }
            break;
        case FunctionKind::binom: {
            auto n = integer_of(*x);
            auto k = integer_of(*args.at(1));
            if (n && k && *n >= 0 && *n <= 10000) {
                if (*k < 0 || *k > *n) return make_integer(0);
                BigInt acc = 1;
                const auto kk = k->convert_to<unsigned>();
                for (unsigned i = 0; i < kk; ++i) acc = acc * (*n - i) / (i + 1);
                return make_integer(acc);
            }
            break;
        }
        }
        return make_function(fn, std::move(args));
    }
};

}  // namespace

ExprPtr canonicalize(const ExprPtr& e)
{
    Simplifier s;
    ExprPtr current = s.run(e);
    for (int pass = 1; pass < k_max_passes; ++pass) {
        ExprPtr next = s.run(current);
        if (equal(next, current)) break;
        current = next;
    }
    return current;
}

}  // namespace symcode::math
