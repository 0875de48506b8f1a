#include "symcode/prompting.hpp"

#include "symcode/text_util.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace symcode;

namespace {

std::string read_fixture(const std::string& name)
{
    std::ifstream in(std::string(SYMCODE_FIXTURE_DIR) + "/" + name, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Problem qt_problem()
{
    auto ps = load_corpus(std::string(SYMCODE_FIXTURE_DIR) + "/sample_corpus.jsonl", Dataset::olympiadbench);
    return ps.at(1);
}

std::string joined(const RenderedPrompt& p)
{
    std::string s;
    for (std::size_t i = 0; i < p.messages.size(); ++i) {
        if (i) s += "\n";
        s += p.messages[i].content;
    }
    return s + "\n";
}

ExecutionOutcome failure(ExecutionStatus status, std::string tb = {}, std::string stderr_text = {},
                         std::string detail = {})
{
    ExecutionOutcome o;
    o.status = status;
    if (!tb.empty()) o.traceback = tb;
    o.stderr_text = std::move(stderr_text);
    o.detail = std::move(detail);
    return o;
}

}  // namespace

TEST_CASE("unablated prompt differs from the golden template only at the problem slot")
{
    const Problem p = qt_problem();
    const RenderedPrompt r = render_symcode(p, {});
    REQUIRE(r.messages.size() == 2);
    CHECK(r.messages[0].role == Role::system);
    CHECK(r.messages[1].role == Role::user);
    CHECK(r.kind == PromptKind::symcode);
    CHECK(r.problem_id == p.id);

    std::string golden = read_fixture("listing_golden.txt");
    const auto slot = golden.find("{problem_text}");
    REQUIRE(slot != std::string::npos);
    golden.replace(slot, std::string("{problem_text}").size(), p.statement);
    CHECK(joined(r) == golden);

    CHECK(r.messages[1].content.rfind("# PROBLEM\n", 0) == 0);
    CHECK(r.messages[1].content.find("Squares $ABQR$ and $BCST$") != std::string::npos);
    CHECK(r.messages[1].content.substr(r.messages[1].content.size() - 13) == "# END PROBLEM");
}

TEST_CASE("statements with fences and braces are substituted verbatim")
{
    Problem p{"fence", Dataset::custom, "Compute ```python\nprint(1)\n``` and {problem_text} {x}.", "1", {},
              AnswerKind::numeric};
    const RenderedPrompt r = render_symcode(p, {});
    CHECK(r.messages[1].content == "# PROBLEM\n" + p.statement + "\n# END PROBLEM");
    CHECK(r.messages[0].content == render_symcode(qt_problem(), {}).messages[0].content);
}

TEST_CASE("verification ablation drops block 5 and renumbers")
{
    AblationFlags flags;
    flags.verification = false;
    const RenderedPrompt r = render_symcode(qt_problem(), flags);
    const std::string& sys = r.messages[0].content;
    CHECK(sys.find("assert") == std::string::npos);
    CHECK(sys.find("Substitute solutions back") == std::string::npos);
    CHECK(sys.find("For verification") == std::string::npos);
    CHECK(sys.find("Filter invalid solutions") == std::string::npos);
    CHECK(sys.find("\n5. Print ONLY the final answer in LaTeX boxed form:\n") != std::string::npos);
    CHECK(sys.find("\n6. ") == std::string::npos);
    CHECK(sys.find("Show the algebraic manipulations clearly\n5. Print") != std::string::npos);
}

TEST_CASE("symbolic ablation swaps the CAS import instruction")
{
    AblationFlags flags;
    flags.symbolic = false;
    const std::string sys = render_symcode(qt_problem(), flags).messages[0].content;
    CHECK(sys.find("import sympy as sp") == std::string::npos);
    CHECK(sys.find("1. Do not import SymPy") != std::string::npos);
    CHECK(sys.find("5. For verification:") != std::string::npos);
    // Everything outside block 1 is untouched.
    const std::string full = render_symcode(qt_problem(), {}).messages[0].content;
    CHECK(sys.substr(sys.find("\n2. ")) == full.substr(full.find("\n2. ")));
}

TEST_CASE("repair prompts carry the error and extend history")
{
    const RenderedPrompt first = render_symcode(qt_problem(), {});
    const std::string script = "solutions = [(12, 18), (18, 12)]\ncheck_sum = sum(solutions) == 30\n";
    const std::string completion = "```python\n" + script + "```";

    SUBCASE("exception traceback")
    {
        auto r = render_repair(first, completion, script,
                               failure(ExecutionStatus::exception, read_fixture("tuple_type_error_traceback.txt")));
        REQUIRE(r.messages.size() == 4);
        CHECK(std::equal(first.messages.begin(), first.messages.end(), r.messages.begin()));
        CHECK(r.kind == PromptKind::symcode_repair);
        CHECK(r.messages[2].role == Role::assistant);
        CHECK(r.messages[2].content == completion);
        const std::string& user = r.messages[3].content;
        CHECK(user.find("debug the following code based on the provided error message") != std::string::npos);
        CHECK(user.find("TypeError: unsupported operand type(s)") != std::string::npos);
        CHECK(user.find("Status: exception") != std::string::npos);
        CHECK(user.find("check_sum = sum(solutions) == 30\n```") != std::string::npos);
    }
    SUBCASE("assertion failure")
    {
        auto r = render_repair(first, completion, script,
                               failure(ExecutionStatus::assertion_failure,
                                       "Traceback (most recent call last):\n  File \"<guest>\", line 3\nAssertionError\n"));
        CHECK(r.messages.back().content.find("AssertionError") != std::string::npos);
        CHECK(r.messages.back().content.find("Status: assertion_failure") != std::string::npos);
    }
    SUBCASE("stderr is the fallback")
    {
        auto r = render_repair(first, completion, script, failure(ExecutionStatus::exception, {}, "SyntaxError: bad"));
        CHECK(r.messages.back().content.find("SyntaxError: bad") != std::string::npos);
    }
    SUBCASE("empty completion gets a placeholder assistant turn")
    {
        auto r = render_repair(first, "", script, failure(ExecutionStatus::exception, "Traceback\nValueError\n"));
        CHECK(r.messages[2].content == "(empty response)");
    }
    SUBCASE("repairs chain monotonically")
    {
        auto second = render_repair(first, completion, script, failure(ExecutionStatus::exception, "E1"));
        auto third = render_repair(second, completion, script, failure(ExecutionStatus::exception, "E2"));
        REQUIRE(third.messages.size() == 6);
        CHECK(std::equal(second.messages.begin(), second.messages.end(), third.messages.begin()));
    }
    SUBCASE("success is not repairable")
    {
        ExecutionOutcome ok;
        ok.status = ExecutionStatus::success;
        CHECK_THROWS_AS(render_repair(first, completion, script, ok), InvalidState);
    }
    SUBCASE("format violation")
    {
        auto r = render_format_repair(first, "I think the answer is 4.");
        REQUIRE(r.messages.size() == 4);
        CHECK(r.messages[2].content == "I think the answer is 4.");
        CHECK(r.messages[3].content.find("no Python code block") != std::string::npos);
        CHECK(r.messages[3].content.find("ONLY a single Python code block") != std::string::npos);
    }
}

TEST_CASE("placeholders inside substituted text are not expanded")
{
    const RenderedPrompt first = render_symcode(qt_problem(), {});
    auto r = render_repair(first, "x", "print('{error}')", failure(ExecutionStatus::exception, "boom {script}"));
    const std::string& user = r.messages.back().content;
    CHECK(user.find("print('{error}')") != std::string::npos);
    CHECK(user.find("boom {script}") != std::string::npos);
}

TEST_CASE("long tracebacks keep their tail within the budget")
{
    std::string tb = "Traceback (most recent call last):\n";
    for (int i = 0; i < 2000; ++i) tb += "  File \"<guest>\", line " + std::to_string(i) + ", in f\n";
    tb += "RecursionError: maximum recursion depth exceeded\n";
    const std::string cut = truncate_error_text(tb, 4096);
    CHECK(cut.size() <= 4096);
    CHECK(cut.rfind("[earlier output truncated]\n", 0) == 0);
    CHECK(cut.find("RecursionError: maximum recursion depth exceeded") != std::string::npos);

    // Never split a multi-byte code point.
    std::string wide;
    for (int i = 0; i < 3000; ++i) wide += "\xCE\xB1";  // U+03B1
    const std::string w = truncate_error_text(wide, 101);
    const std::string tail = w.substr(std::string("[earlier output truncated]\n").size());
    CHECK(tail.size() % 2 == 0);
    CHECK(static_cast<unsigned char>(tail.front()) == 0xCE);

    CHECK(truncate_error_text("short", 4096) == "short");
}

TEST_CASE("timeout repair states the configured limit")
{
    const RenderedPrompt first = render_symcode(qt_problem(), {});
    auto r = render_repair(first, "x", "while True: pass",
                           failure(ExecutionStatus::timeout, {}, {},
                                   "Execution exceeded the wall-clock limit of 1000 ms and was terminated."));
    CHECK(r.messages.back().content.find("Status: timeout") != std::string::npos);
    CHECK(r.messages.back().content.find("limit of 1000 ms") != std::string::npos);
}

TEST_CASE("chain-of-thought prompt")
{
    auto ps = load_corpus(std::string(SYMCODE_FIXTURE_DIR) + "/sample_corpus.jsonl", Dataset::math500);
    Problem p = ps.at(0);
    const RenderedPrompt r = render_cot(p);
    REQUIRE(r.messages.size() == 1);
    CHECK(r.kind == PromptKind::cot_baseline);
    CHECK(r.messages[0].role == Role::user);
    CHECK(r.messages[0].content.find(p.statement) != std::string::npos);
    CHECK(r.messages[0].content.find("\\boxed{") != std::string::npos);
    CHECK(r.messages[0].content.find("step-by-step") != std::string::npos);

    Problem no_subject = p;
    no_subject.subject.reset();
    CHECK(render_cot(no_subject).messages == r.messages);
    CHECK(render_cot(p) == r);
}
