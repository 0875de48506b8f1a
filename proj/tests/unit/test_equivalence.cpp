#include "symcode/equivalence.hpp"

#include <doctest.h>

#include <atomic>

using namespace symcode;

namespace {

class CountingOracle : public EquivalenceOracle {
public:
    explicit CountingOracle(Verdict answer) : answer_(answer) {}
    Verdict judge(std::string_view, std::string_view) override
    {
        ++calls;
        return answer_;
    }
    std::atomic<int> calls{0};

private:
    Verdict answer_;
};

}  // namespace

TEST_CASE("extract_boxed takes the last balanced span")
{
    CHECK(extract_boxed("\\boxed{2 \\sqrt{10}}\n") == "2 \\sqrt{10}");
    CHECK(extract_boxed("\\boxed{\\frac{1}{2}}") == "\\frac{1}{2}");
    CHECK(extract_boxed("log line\n\\boxed{3}\n\\boxed{7}") == "7");
    CHECK(extract_boxed("\\boxed {5}") == "5");
    CHECK(extract_boxed("\\boxed{\\{1\\}}") == "\\{1\\}");
    // The trailing span never closes, so the earlier one wins.
    CHECK(extract_boxed("\\boxed{1} then \\boxed{2") == "1");
    CHECK_THROWS_AS(extract_boxed("no answer here"), NoBoxedAnswer);
    CHECK_THROWS_AS(extract_boxed("\\boxed{unbalanced"), NoBoxedAnswer);
}

TEST_CASE("staged verdicts")
{
    auto v = check_equivalence("468", "468");
    CHECK(v.verdict == Verdict::equivalent);
    CHECK(v.method == VerdictMethod::structural);

    v = check_equivalence("2\\sqrt{10}", "\\sqrt{40}");
    CHECK(v.verdict == Verdict::equivalent);
    CHECK(v.method == VerdictMethod::structural);

    v = check_equivalence("12", "2\\sqrt{10}");
    CHECK(v.verdict == Verdict::distinct);

    v = check_equivalence("468.0", "468");
    CHECK(v.verdict == Verdict::equivalent);
    CHECK(v.method == VerdictMethod::structural);

    v = check_equivalence("156", "468");
    CHECK(v.verdict == Verdict::distinct);
    CHECK(v.method == VerdictMethod::structural);

    v = check_equivalence("2\\sqrt{2}\\sqrt{10+3\\sqrt{15}}", "2\\sqrt{10}");
    CHECK(v.verdict == Verdict::distinct);
    CHECK(v.method == VerdictMethod::numeric);

    v = check_equivalence("\\sqrt{2}+\\sqrt{3}", "\\sqrt{5+2\\sqrt{6}}");
    CHECK(v.verdict == Verdict::equivalent);
    CHECK(v.method == VerdictMethod::numeric);
}

TEST_CASE("free symbols compare at sample points")
{
    auto v = check_equivalence("(x+1)^2", "x^2 + 2x + 1");
    CHECK(v.verdict == Verdict::equivalent);
    CHECK(v.method == VerdictMethod::numeric);

    v = check_equivalence("(x+1)^2", "x^2 + 1");
    CHECK(v.verdict == Verdict::distinct);
}

TEST_CASE("gray zone and parse failures escalate only when allowed")
{
    // Exact rationals never need the numeric stage.
    auto v = check_equivalence("1 + 10^{-20}", "1");
    CHECK(v.verdict == Verdict::distinct);
    CHECK(v.method == VerdictMethod::structural);

    // Differ by about 1e-20 relative: inside neither threshold.
    const std::string close = "\\sqrt{2} + 10^{-20}";
    v = check_equivalence(close, "\\sqrt{2}");
    CHECK(v.verdict == Verdict::indeterminate);

    CountingOracle oracle(Verdict::distinct);
    v = check_equivalence(close, "\\sqrt{2}", {&oracle});
    CHECK(v.verdict == Verdict::distinct);
    CHECK(v.method == VerdictMethod::oracle);
    CHECK(oracle.calls == 1);

    v = check_equivalence("\\text{seven}", "7");
    CHECK(v.verdict == Verdict::indeterminate);
    CHECK(v.detail.find("candidate") != std::string::npos);

    // Decided pairs never reach the oracle.
    check_equivalence("4", "4.0", {&oracle});
    check_equivalence("3", "4", {&oracle});
    CHECK(oracle.calls == 1);
}

TEST_CASE("identical text is never indeterminate even when unparseable")
{
    auto v = check_equivalence("\\text{seven}", " \\text{seven} ");
    CHECK(v.verdict == Verdict::equivalent);
}

TEST_CASE("verdict names round-trip")
{
    for (auto v : {Verdict::equivalent, Verdict::distinct, Verdict::indeterminate}) {
        CHECK(verdict_from_string(to_string(v)) == v);
    }
    for (auto m : {VerdictMethod::structural, VerdictMethod::numeric, VerdictMethod::oracle}) {
        CHECK(verdict_method_from_string(to_string(m)) == m);
    }
}
