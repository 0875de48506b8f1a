#include "symcode/latex_parser.hpp"

#include <array>
#include <cctype>
#include <optional>

namespace symcode::math {

ParseError::ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& what)
    : std::runtime_error("parse error at byte " + std::to_string(offset) + ": " + what),
      offset_(offset),
      expected_(std::move(expected))
{
}

namespace {

enum class Tok { end, number, letter, command, punct };

struct Token {
    Tok kind = Tok::end;
    std::string_view text;  // command name without the backslash
    std::size_t offset = 0;
    std::size_t end = 0;
};

constexpr std::array k_ignored_commands = {",", ";", "!", ":", " ", "quad", "qquad", "displaystyle", "textstyle"};

constexpr std::array k_greek = {"alpha", "beta",   "gamma", "delta", "epsilon", "varepsilon", "zeta",
                                "eta",   "theta",  "vartheta", "iota", "kappa", "lambda",    "mu",
                                "nu",    "xi",     "rho",   "sigma", "tau",   "upsilon",    "phi",
                                "varphi", "chi",   "psi",   "omega"};

struct NamedFunction {
    std::string_view name;
    FunctionKind fn;
};

constexpr std::array k_command_functions = {
    NamedFunction{"sin", FunctionKind::sin}, NamedFunction{"cos", FunctionKind::cos},
    NamedFunction{"tan", FunctionKind::tan}, NamedFunction{"log", FunctionKind::log},
    NamedFunction{"ln", FunctionKind::log},  NamedFunction{"exp", FunctionKind::exp},
};

constexpr std::array k_ascii_functions = {
    NamedFunction{"sqrt", FunctionKind::sqrt},   NamedFunction{"abs", FunctionKind::abs},
    NamedFunction{"sin", FunctionKind::sin},     NamedFunction{"cos", FunctionKind::cos},
    NamedFunction{"tan", FunctionKind::tan},     NamedFunction{"log", FunctionKind::log},
    NamedFunction{"ln", FunctionKind::log},      NamedFunction{"exp", FunctionKind::exp},
    NamedFunction{"binom", FunctionKind::binom}, NamedFunction{"factorial", FunctionKind::factorial},
};

const std::vector<std::string> k_operand_expected = {"number", "letter", "(", "{", "|", "\\frac", "\\sqrt",
                                                     "\\pi",   "\\left", "\\binom"};

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

template <std::size_t N>
bool contains(const std::array<const char*, N>& names, std::string_view name)
{
    for (const char* n : names)
        if (name == n) return true;
    return false;
}

ExprPtr negate(const ExprPtr& e)
{
    if (const auto* i = e->as<IntegerNode>()) return make_integer(-i->value);
    if (const auto* d = e->as<DecimalNode>()) return make_decimal(!d->negative, d->digits, d->scale);
    return make_neg(e);
}

ExprPtr number_from_text(std::string_view text)
{
    const auto dot = text.find('.');
    if (dot == std::string_view::npos) return make_integer(digits_value(text));
    std::string int_part(text.substr(0, dot));
    std::string frac_part(text.substr(dot + 1));
    if (int_part.empty()) int_part = "0";
    return make_decimal(false, int_part + frac_part, static_cast<int>(frac_part.size()));
}

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    ExprPtr parse()
    {
        if (peek().kind == Tok::end) fail(peek(), k_operand_expected, "empty expression");
        ExprPtr e = parse_expr();
        if (Token t = peek(); t.kind != Tok::end) fail(t, {"end of input"}, "unexpected '" + std::string(t.text) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const Token& at, std::vector<std::string> expected, const std::string& what) const
    {
        throw ParseError(at.offset, std::move(expected), what);
    }

    Token lex_at(std::size_t pos) const
    {
        while (pos < src_.size()) {
            const char c = src_[pos];
            if (std::isspace(static_cast<unsigned char>(c)) || c == '$') {
                ++pos;
                continue;
            }
            if (c == '\\') {
                Token t = lex_command(pos);
                if (contains(k_ignored_commands, t.text)) {
                    pos = t.end;
                    continue;
                }
                return t;
            }
            break;
        }
        if (pos >= src_.size()) return Token{Tok::end, {}, src_.size(), src_.size()};

        const char c = src_[pos];
        if (is_digit(c) || (c == '.' && pos + 1 < src_.size() && is_digit(src_[pos + 1]))) {
            std::size_t end = pos;
            while (end < src_.size() && is_digit(src_[end])) ++end;
            if (end + 1 < src_.size() && src_[end] == '.' && is_digit(src_[end + 1])) {
                ++end;
                while (end < src_.size() && is_digit(src_[end])) ++end;
            }
            return Token{Tok::number, src_.substr(pos, end - pos), pos, end};
        }
        if (is_alpha(c)) return Token{Tok::letter, src_.substr(pos, 1), pos, pos + 1};
        if (c == '*' && pos + 1 < src_.size() && src_[pos + 1] == '*') {
            return Token{Tok::punct, src_.substr(pos, 2), pos, pos + 2};
        }
        return Token{Tok::punct, src_.substr(pos, 1), pos, pos + 1};
    }

    Token lex_command(std::size_t pos) const
    {
        std::size_t end = pos + 1;
        if (end >= src_.size()) return Token{Tok::command, {}, pos, end};
        if (is_alpha(src_[end])) {
            while (end < src_.size() && is_alpha(src_[end])) ++end;
        } else {
            ++end;
        }
        return Token{Tok::command, src_.substr(pos + 1, end - pos - 1), pos, end};
    }

    Token peek() const { return lex_at(pos_); }
    void take(const Token& t) { pos_ = t.end; }

    bool peek_punct(std::string_view p) const
    {
        Token t = peek();
        return t.kind == Tok::punct && t.text == p;
    }

    bool peek_command(std::string_view name) const
    {
        Token t = peek();
        return t.kind == Tok::command && t.text == name;
    }

    void expect_punct(std::string_view p)
    {
        Token t = peek();
        if (t.kind != Tok::punct || t.text != p) fail(t, {std::string(p)}, "expected '" + std::string(p) + "'");
        take(t);
    }

    struct DepthGuard {
        Parser& p;
        explicit DepthGuard(Parser& parser) : p(parser)
        {
            if (++p.depth_ > 200) p.fail(p.peek(), {}, "nesting too deep");
        }
        ~DepthGuard() { --p.depth_; }
    };

    ExprPtr parse_expr()
    {
        DepthGuard guard(*this);
        std::vector<ExprPtr> terms;
        bool negative = false;
        if (peek_punct("-") || peek_punct("+")) {
            negative = peek_punct("-");
            take(peek());
        }
        ExprPtr first = parse_term();
        terms.push_back(negative ? negate(first) : first);
        while (peek_punct("+") || peek_punct("-")) {
            const bool minus = peek_punct("-");
            take(peek());
            ExprPtr t = parse_term();
            terms.push_back(minus ? negate(t) : t);
        }
        return make_add(std::move(terms));
    }

    ExprPtr parse_term()
    {
        std::vector<ExprPtr> factors{parse_signed_factor()};
        for (;;) {
            Token t = peek();
            if ((t.kind == Tok::command && (t.text == "cdot" || t.text == "times")) ||
                (t.kind == Tok::punct && t.text == "*")) {
                take(t);
                factors.push_back(parse_signed_factor());
            } else if ((t.kind == Tok::command && t.text == "div") || (t.kind == Tok::punct && t.text == "/")) {
                take(t);
                factors.push_back(make_pow(parse_signed_factor(), make_integer(-1)));
            } else if (starts_operand(t)) {
                factors.push_back(parse_power());
            } else {
                break;
            }
        }
        return make_mul(std::move(factors));
    }

    ExprPtr parse_signed_factor()
    {
        DepthGuard guard(*this);
        if (peek_punct("-")) {
            take(peek());
            return negate(parse_signed_factor());
        }
        if (peek_punct("+")) {
            take(peek());
            return parse_signed_factor();
        }
        return parse_power();
    }

    ExprPtr parse_power()
    {
        ExprPtr base = parse_postfix();
        if (peek_punct("^")) {
            take(peek());
            return make_pow(base, parse_script_arg());
        }
        if (peek_punct("**")) {
            take(peek());
            return make_pow(base, parse_signed_factor());
        }
        return base;
    }

    ExprPtr parse_postfix()
    {
        ExprPtr e = parse_primary();
        while (peek_punct("!")) {
            take(peek());
            e = make_function(FunctionKind::factorial, {e});
        }
        return e;
    }

    bool starts_operand(const Token& t) const
    {
        switch (t.kind) {
        case Tok::number:
        case Tok::letter: return true;
        case Tok::punct: return t.text == "(" || t.text == "[" || t.text == "{" || (t.text == "|" && abs_depth_ == 0);
        case Tok::command:
            return t.text == "frac" || t.text == "dfrac" || t.text == "tfrac" || t.text == "sqrt" ||
                   t.text == "binom" || t.text == "dbinom" || t.text == "tbinom" || t.text == "pi" ||
                   t.text == "left" || contains(k_greek, t.text) || command_function(t.text).has_value();
        case Tok::end: return false;
        }
        return false;
    }

    static std::optional<FunctionKind> command_function(std::string_view name)
    {
        for (const auto& f : k_command_functions)
            if (f.name == name) return f.fn;
        return std::nullopt;
    }

    // Single-token or braced argument of a macro or a sub/superscript.
    ExprPtr parse_script_arg()
    {
        DepthGuard guard(*this);
        Token t = peek();
        if (t.kind == Tok::punct && t.text == "{") return parse_group("{", "}");
        if (t.kind == Tok::number && is_digit(t.text.front())) {
            pos_ = t.offset + 1;
            return make_integer(digits_value(t.text.substr(0, 1)));
        }
        if (t.kind == Tok::letter) {
            take(t);
            return t.text == "e" ? make_constant(ConstantKind::e) : make_symbol(std::string(t.text));
        }
        if (t.kind == Tok::punct && t.text == "-") {
            take(t);
            return negate(parse_script_arg());
        }
        if (t.kind == Tok::command) return parse_primary();
        fail(t, {"{", "digit", "letter"}, "expected an argument");
    }

    ExprPtr parse_group(std::string_view open, std::string_view close)
    {
        expect_punct(open);
        if (Token t = peek(); t.kind == Tok::punct && t.text == close) fail(t, k_operand_expected, "empty group");
        const int saved_abs = abs_depth_;
        abs_depth_ = 0;
        ExprPtr e = parse_expr();
        abs_depth_ = saved_abs;
        expect_punct(close);
        return e;
    }

    ExprPtr parse_abs_bars()
    {
        expect_punct("|");
        ++abs_depth_;
        ExprPtr e = parse_expr();
        --abs_depth_;
        expect_punct("|");
        return make_function(FunctionKind::abs, {e});
    }

    void expect_right(std::string_view delim)
    {
        Token t = peek();
        if (!(t.kind == Tok::command && t.text == "right")) fail(t, {"\\right"}, "expected \\right");
        take(t);
        Token d = peek();
        const bool ok = (delim == "\\}") ? (d.kind == Tok::command && d.text == "}")
                                         : (d.kind == Tok::punct && d.text == delim);
        if (!ok) fail(d, {std::string(delim)}, "mismatched \\right delimiter");
        take(d);
    }

    ExprPtr parse_left()
    {
        take(peek());  // \left
        Token d = peek();
        const int saved_abs = abs_depth_;
        ExprPtr inner;
        if (d.kind == Tok::punct && (d.text == "(" || d.text == "[" || d.text == "|")) {
            take(d);
            abs_depth_ = d.text == "|" ? 1 : 0;
            inner = parse_expr();
            abs_depth_ = saved_abs;
            const std::string_view close = d.text == "(" ? ")" : (d.text == "[" ? "]" : "|");
            expect_right(close);
            if (d.text == "|") return make_function(FunctionKind::abs, {inner});
            return inner;
        }
        if (d.kind == Tok::command && d.text == "{") {
            take(d);
            abs_depth_ = 0;
            inner = parse_expr();
            abs_depth_ = saved_abs;
            expect_right("\\}");
            return inner;
        }
        fail(d, {"(", "[", "|", "\\{"}, "unsupported \\left delimiter");
    }

    // Argument of \sin, \log, ...: parenthesised, braced, or a single power.
    ExprPtr parse_function_argument()
    {
        Token t = peek();
        if (t.kind == Tok::punct && t.text == "(") return parse_group("(", ")");
        if (t.kind == Tok::punct && t.text == "{") return parse_group("{", "}");
        if (t.kind == Tok::command && t.text == "left") return parse_left();
        return parse_power();
    }

    ExprPtr parse_command_function(FunctionKind fn)
    {
        ExprPtr power;
        ExprPtr log_base;
        for (int i = 0; i < 2; ++i) {
            if (!power && peek_punct("^")) {
                take(peek());
                power = parse_script_arg();
            } else if (!log_base && fn == FunctionKind::log && peek_punct("_")) {
                take(peek());
                log_base = parse_script_arg();
            }
        }
        ExprPtr arg = parse_function_argument();
        std::vector<ExprPtr> args{arg};
        if (log_base) args.push_back(log_base);
        ExprPtr f = make_function(fn, std::move(args));
        return power ? make_pow(f, power) : f;
    }

    // ascii spelling such as sqrt(10) or log(8, 2); the caller has matched
    // `word` followed by '('.
    ExprPtr parse_ascii_call(FunctionKind fn, const Token& at)
    {
        expect_punct("(");
        std::vector<ExprPtr> args{parse_expr()};
        while (peek_punct(",")) {
            take(peek());
            args.push_back(parse_expr());
        }
        expect_punct(")");
        const std::size_t want = (fn == FunctionKind::binom) ? 2 : 1;
        const bool ok = args.size() == want || (fn == FunctionKind::log && args.size() == 2);
        if (!ok) fail(at, {}, "wrong number of arguments to " + std::string(to_string(fn)));
        return make_function(fn, std::move(args));
    }

    std::optional<ExprPtr> try_ascii_word(const Token& t)
    {
        std::size_t end = t.offset;
        while (end < src_.size() && is_alpha(src_[end])) ++end;
        const std::string_view word = src_.substr(t.offset, end - t.offset);
        std::size_t after = end;
        while (after < src_.size() && std::isspace(static_cast<unsigned char>(src_[after]))) ++after;
        const bool call = after < src_.size() && src_[after] == '(';
        if (call) {
            for (const auto& f : k_ascii_functions) {
                if (f.name == word) {
                    pos_ = end;
                    return parse_ascii_call(f.fn, t);
                }
            }
        }
        if (word == "pi") {
            pos_ = end;
            return make_constant(ConstantKind::pi);
        }
        return std::nullopt;
    }

    ExprPtr parse_primary()
    {
        DepthGuard guard(*this);
        Token t = peek();
        switch (t.kind) {
        case Tok::number:
            take(t);
            return number_from_text(t.text);
        case Tok::letter:
            if (auto call = try_ascii_word(t)) return *call;
            take(t);
            if (t.text == "e") return make_constant(ConstantKind::e);
            return make_symbol(std::string(t.text));
        case Tok::punct:
            if (t.text == "(") return parse_group("(", ")");
            if (t.text == "[") return parse_group("[", "]");
            if (t.text == "{") return parse_group("{", "}");
            if (t.text == "|") return parse_abs_bars();
            break;
        case Tok::command: {
            const std::string_view name = t.text;
            if (name == "left") return parse_left();
            if (name == "frac" || name == "dfrac" || name == "tfrac") {
                take(t);
                ExprPtr num = parse_script_arg();
                ExprPtr den = parse_script_arg();
                return make_mul({num, make_pow(den, make_integer(-1))});
            }
            if (name == "sqrt") {
                take(t);
                if (peek_punct("[")) {
                    ExprPtr index = parse_group("[", "]");
                    return make_function(FunctionKind::root, {parse_script_arg(), index});
                }
                return make_function(FunctionKind::sqrt, {parse_script_arg()});
            }
            if (name == "binom" || name == "dbinom" || name == "tbinom") {
                take(t);
                ExprPtr n = parse_script_arg();
                ExprPtr k = parse_script_arg();
                return make_function(FunctionKind::binom, {n, k});
            }
            if (name == "pi") {
                take(t);
                return make_constant(ConstantKind::pi);
            }
            if (contains(k_greek, name)) {
                take(t);
                return make_symbol("\\" + std::string(name));
            }
            if (auto fn = command_function(name)) {
                take(t);
                return parse_command_function(*fn);
            }
            fail(t, k_operand_expected, "unsupported command \\" + std::string(name));
        }
        case Tok::end: break;
        }
        fail(t, k_operand_expected, t.kind == Tok::end ? "unexpected end of input"
                                                       : "unexpected '" + std::string(t.text) + "'");
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int abs_depth_ = 0;
    int depth_ = 0;
};

}  // namespace

ExprPtr parse_latex(std::string_view text) { return Parser(text).parse(); }

}  // namespace symcode::math
