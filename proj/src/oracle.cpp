#include "symcode/oracle.hpp"

#include "symcode/text_util.hpp"

#include <json.hpp>

#include <sstream>

namespace symcode {

namespace {

// parse_latex needs the antlr runtime, which is often missing; the fallback
// rewrites the handful of macros that show up in final answers.
constexpr std::string_view k_oracle_body = R"py(import json
import re
import sympy as sp

lhs, rhs = json.loads({payload})


def plain(s):
    s = s.replace("\\left", "").replace("\\right", "").replace("\\!", "").replace("\\,", "")
    s = s.replace("\\dfrac", "\\frac").replace("\\tfrac", "\\frac")
    for _ in range(8):
        s = re.sub(r"\\frac\{([^{}]*)\}\{([^{}]*)\}", r"((\1)/(\2))", s)
        s = re.sub(r"\\sqrt\[([^{}\]]*)\]\{([^{}]*)\}", r"((\2)**(1/(\1)))", s)
        s = re.sub(r"\\sqrt\{([^{}]*)\}", r"sqrt(\1)", s)
    s = s.replace("\\pi", "pi").replace("\\cdot", "*").replace("\\times", "*")
    s = s.replace("^", "**").replace("{", "(").replace("}", ")")
    return s


def convert(s):
    try:
        from sympy.parsing.latex import parse_latex
        return parse_latex(s)
    except Exception:
        from sympy.parsing.sympy_parser import parse_expr, standard_transformations, implicit_multiplication_application
        return parse_expr(plain(s), transformations=standard_transformations + (implicit_multiplication_application,))


try:
    diff = sp.simplify(convert(lhs) - convert(rhs))
    if diff == 0:
        verdict = "equivalent"
    elif diff.is_zero is False:
        verdict = "distinct"
    else:
        verdict = "indeterminate"
except Exception:
    verdict = "indeterminate"
print("ORACLE_VERDICT: " + verdict)
)py";

}  // namespace

std::string oracle_script(std::string_view candidate, std::string_view truth)
{
    // Pure-ASCII JSON, then quoted once more: a JSON string literal with only
    // \" \\ \n \uXXXX escapes is also a valid Python string literal.
    const nlohmann::json pair = {std::string(candidate), std::string(truth)};
    const std::string inner = pair.dump(-1, ' ', true, nlohmann::json::error_handler_t::replace);
    const std::string literal = nlohmann::json(inner).dump(-1, ' ', true);
    return std::string(k_oracle_header) + "\n" + substitute(k_oracle_body, {{"payload", literal}});
}

Verdict parse_oracle_output(const ExecutionOutcome& outcome)
{
    if (outcome.status != ExecutionStatus::success) return Verdict::indeterminate;
    constexpr std::string_view prefix = "ORACLE_VERDICT: ";
    std::optional<std::string> last;
    std::istringstream in(outcome.stdout_text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(prefix, 0) == 0) last = std::string(trim(std::string_view(line).substr(prefix.size())));
    }
    if (!last) return Verdict::indeterminate;
    try {
        return verdict_from_string(*last);
    } catch (const std::exception&) {
        return Verdict::indeterminate;
    }
}

Verdict ShimOracle::judge(std::string_view candidate, std::string_view truth)
{
    return parse_oracle_output(executor_.execute(oracle_script(candidate, truth), limits_));
}

}  // namespace symcode
