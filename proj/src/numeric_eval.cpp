#include "symcode/numeric_eval.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace symcode::math {

namespace {

using std::optional;

const HighFloat& absolute_floor()
{
    static const HighFloat floor("1e-60");
    return floor;
}

bool is_integral(const HighFloat& x) { return boost::multiprecision::trunc(x) == x; }

optional<HighFloat> finite(HighFloat x)
{
    if (boost::multiprecision::isfinite(x)) return x;
    return std::nullopt;
}

HighFloat to_float(const BigInt& v) { return HighFloat(v); }

// Exact rational value of a literal exponent, if it is one.
optional<std::pair<BigInt, BigInt>> literal_rational(const Expr& e)
{
    if (const auto* i = e.as<IntegerNode>()) return std::pair{i->value, BigInt(1)};
    if (const auto* r = e.as<RationalNode>()) return std::pair{r->num, r->den};
    if (const auto* d = e.as<DecimalNode>()) {
        BigInt num = digits_value(d->digits);
        if (d->negative) num = -num;
        BigInt den = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(d->scale));
        BigInt g = boost::multiprecision::gcd(num, den);
        return std::pair{BigInt(num / g), BigInt(den / g)};
    }
    return std::nullopt;
}

optional<HighFloat> integer_power(const HighFloat& base, const BigInt& exponent)
{
    if (base == 0) {
        if (exponent < 0) return std::nullopt;
        if (exponent == 0) return HighFloat(1);
        return HighFloat(0);
    }
    if (abs(exponent) <= 1000000) {
        return finite(boost::multiprecision::pow(base, exponent.convert_to<long long>()));
    }
    HighFloat magnitude = boost::multiprecision::pow(boost::multiprecision::abs(base), to_float(exponent));
    const bool odd = (exponent % 2) != 0;
    return finite(base < 0 && odd ? HighFloat(-magnitude) : magnitude);
}

optional<HighFloat> rational_power(const HighFloat& base, const BigInt& p, const BigInt& q)
{
    if (q == 1) return integer_power(base, p);
    const HighFloat exponent = to_float(p) / to_float(q);
    if (base == 0) {
        if (p < 0) return std::nullopt;
        return HighFloat(0);
    }
    if (base > 0) return finite(boost::multiprecision::pow(base, exponent));
    if (q % 2 == 0) return std::nullopt;
    HighFloat magnitude = boost::multiprecision::pow(-base, exponent);
    return finite(p % 2 != 0 ? HighFloat(-magnitude) : magnitude);
}

optional<HighFloat> general_power(const HighFloat& base, const HighFloat& exponent)
{
    if (is_integral(exponent) && boost::multiprecision::abs(exponent) < HighFloat("1e15")) {
        return integer_power(base, BigInt(exponent.convert_to<long long>()));
    }
    if (base > 0) return finite(boost::multiprecision::pow(base, exponent));
    if (base == 0 && exponent > 0) return HighFloat(0);
    return std::nullopt;
}

optional<HighFloat> factorial_of(const HighFloat& x)
{
    if (is_integral(x)) {
        if (x < 0) return std::nullopt;
        if (x > 5000) return finite(boost::math::tgamma(HighFloat(x + 1)));
        BigInt acc = 1;
        const long long n = x.convert_to<long long>();
        for (long long i = 2; i <= n; ++i) acc *= i;
        return finite(to_float(acc));
    }
    try {
        return finite(boost::math::tgamma(HighFloat(x + 1)));
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

// n(n-1)...(n-k+1)/k! for integer k >= 0, zero for negative integer k, the
// gamma form otherwise.
optional<HighFloat> binomial_of(const HighFloat& n, const HighFloat& k)
{
    if (is_integral(k)) {
        if (k < 0) return HighFloat(0);
        if (k > 100000) return std::nullopt;
        const long long kk = k.convert_to<long long>();
        if (is_integral(n) && n >= 0 && k > n) return HighFloat(0);
        HighFloat acc = 1;
        for (long long i = 0; i < kk; ++i) acc = acc * (n - i) / (i + 1);
        return finite(acc);
    }
    try {
        return finite(boost::math::tgamma(HighFloat(n + 1)) /
                      (boost::math::tgamma(HighFloat(k + 1)) * boost::math::tgamma(HighFloat(n - k + 1))));
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

class Evaluator {
public:
    explicit Evaluator(const Assignment& at) : at_(at) {}

    optional<HighFloat> operator()(const Expr& e) const
    {
        return std::visit([&](const auto& n) { return eval(n); }, e.node());
    }

private:
    optional<HighFloat> eval(const IntegerNode& n) const { return to_float(n.value); }
    optional<HighFloat> eval(const RationalNode& n) const { return to_float(n.num) / to_float(n.den); }
    optional<HighFloat> eval(const DecimalNode& n) const
    {
        auto [num, den] = *literal_rational(Expr(n));
        return to_float(num) / to_float(den);
    }
    optional<HighFloat> eval(const SymbolNode& n) const
    {
        auto it = at_.find(n.name);
        if (it == at_.end()) return std::nullopt;
        return it->second;
    }
    optional<HighFloat> eval(const ConstantNode& n) const
    {
        if (n.kind == ConstantKind::pi) return boost::math::constants::pi<HighFloat>();
        return boost::math::constants::e<HighFloat>();
    }
    optional<HighFloat> eval(const AddNode& n) const
    {
        HighFloat sum = 0;
        for (const auto& t : n.terms) {
            auto v = (*this)(*t);
            if (!v) return std::nullopt;
            sum += *v;
        }
        return finite(sum);
    }
    optional<HighFloat> eval(const MulNode& n) const
    {
        HighFloat product = 1;
        for (const auto& f : n.factors) {
            auto v = (*this)(*f);
            if (!v) return std::nullopt;
            product *= *v;
        }
        return finite(product);
    }
    optional<HighFloat> eval(const PowNode& n) const
    {
        auto base = (*this)(*n.base);
        if (!base) return std::nullopt;
        if (auto q = literal_rational(*n.exponent)) return rational_power(*base, q->first, q->second);
        auto exponent = (*this)(*n.exponent);
        if (!exponent) return std::nullopt;
        return general_power(*base, *exponent);
    }
    optional<HighFloat> eval(const NegNode& n) const
    {
        auto v = (*this)(*n.operand);
        if (!v) return std::nullopt;
        return HighFloat(-*v);
    }
    optional<HighFloat> eval(const FunctionNode& f) const
    {
        std::vector<HighFloat> args;
        for (const auto& a : f.args) {
            auto v = (*this)(*a);
            if (!v) return std::nullopt;
            args.push_back(*v);
        }
        const HighFloat& x = args.at(0);
        switch (f.fn) {
        case FunctionKind::sqrt:
            if (x < 0) return std::nullopt;
            return HighFloat(boost::multiprecision::sqrt(x));
        case FunctionKind::root: {
            const HighFloat& index = args.at(1);
            if (index == 0) return std::nullopt;
            if (x < 0) {
                if (!is_integral(index) || boost::multiprecision::fmod(index, HighFloat(2)) == 0) return std::nullopt;
                return finite(-boost::multiprecision::pow(-x, HighFloat(1 / index)));
            }
            if (x == 0) {
                if (index < 0) return std::nullopt;
                return HighFloat(0);
            }
            return finite(boost::multiprecision::pow(x, HighFloat(1 / index)));
        }
        case FunctionKind::abs: return HighFloat(boost::multiprecision::abs(x));
        case FunctionKind::sin: return HighFloat(boost::multiprecision::sin(x));
        case FunctionKind::cos: return HighFloat(boost::multiprecision::cos(x));
        case FunctionKind::tan: {
            HighFloat c = boost::multiprecision::cos(x);
            if (c == 0) return std::nullopt;
            return finite(boost::multiprecision::sin(x) / c);
        }
        case FunctionKind::log: {
            if (x <= 0) return std::nullopt;
            HighFloat value = boost::multiprecision::log(x);
            if (args.size() == 2) {
                const HighFloat& b = args[1];
                if (b <= 0 || b == 1) return std::nullopt;
                value /= boost::multiprecision::log(b);
            }
            return finite(value);
        }
        case FunctionKind::exp: return finite(boost::multiprecision::exp(x));
        case FunctionKind::binom: return binomial_of(x, args.at(1));
        case FunctionKind::factorial: return factorial_of(x);
        }
        return std::nullopt;
    }

    const Assignment& at_;
};

}  // namespace

std::optional<HighFloat> evaluate(const Expr& e, const Assignment& at)
{
    try {
        return Evaluator(at)(e);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

bool agree_within(const HighFloat& a, const HighFloat& b, const HighFloat& rel)
{
    const HighFloat diff = boost::multiprecision::abs(a - b);
    if (diff <= absolute_floor()) return true;
    const HighFloat aa = boost::multiprecision::abs(a);
    const HighFloat ab = boost::multiprecision::abs(b);
    const HighFloat& scale = aa < ab ? ab : aa;
    return diff <= rel * scale;
}

}  // namespace symcode::math
