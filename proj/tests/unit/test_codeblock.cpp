#include "symcode/codeblock.hpp"

#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

using namespace symcode;

namespace {

std::string qt_squares_script()
{
    std::ifstream in(std::string(SYMCODE_FIXTURE_DIR) + "/qt_squares_script.py", std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("a reply that is exactly one block is clean")
{
    const std::string script = qt_squares_script();
    REQUIRE_FALSE(script.empty());
    const GuestScript g = extract_script(wrap_in_single_fence(script));
    CHECK(g.source == script);
    CHECK(g.contract_clean);
    CHECK(g.fence_count_seen == 1);

    // Surrounding whitespace is not prose.
    CHECK(extract_script("\n\n" + wrap_in_single_fence("x = 1") + "\n\n").contract_clean);
}

TEST_CASE("prose around the block is flagged")
{
    const GuestScript g = extract_script("Here is my solution:\n```python\nprint(1)\n```");
    CHECK(g.source == "print(1)");
    CHECK_FALSE(g.contract_clean);
    CHECK(g.fence_count_seen == 1);

    CHECK_FALSE(extract_script("```python\nprint(1)\n```\nHope this helps.").contract_clean);
}

TEST_CASE("two blocks: first wins and the reply is unclean")
{
    // Reference scan by hand: fences at lines 0 and 2 (first block) and
    // lines 3 and 5 (second block).
    const std::string text = "```python\na = 1\n```\n```python\nb = 2\n```\n";
    const GuestScript g = extract_script(text);
    CHECK(g.source == "a = 1");
    CHECK(g.fence_count_seen == 2);
    CHECK_FALSE(g.contract_clean);
}

TEST_CASE("fence dialect details")
{
    CHECK(extract_script("```py\nx\n```").source == "x");
    CHECK(extract_script("```python3\nx\n```").source == "x");
    CHECK(extract_script("```python  \nx\n```   \n").source == "x");
    // Indented fences are ordinary lines.
    CHECK(extract_script("```python\nif a:\n    ```\n    pass\n```").source == "if a:\n    ```\n    pass");
    // An opening-looking line inside the block is content.
    CHECK(extract_script("```python\ns = '''\n```python\n'''\n```").source == "s = '''\n```python\n'''");
    // Windows line endings.
    CHECK(extract_script("```python\r\nx = 1\r\n```\r\n").source == "x = 1\r");
    // A non-guest block is prose; its content is not scanned for fences.
    const GuestScript g = extract_script("```text\n```python\n```\n```python\nok\n```");
    CHECK(g.source == "ok");
    CHECK(g.fence_count_seen == 1);
    CHECK_FALSE(g.contract_clean);
}

TEST_CASE("an unclosed block runs to the end of the text")
{
    const GuestScript g = extract_script("```python\nprint(1)\nprint(2)");
    CHECK(g.source == "print(1)\nprint(2)");
    CHECK_FALSE(g.contract_clean);
}

TEST_CASE("no guest block is a format violation")
{
    CHECK_THROWS_AS(extract_script("The answer is \\boxed{4}."), NoCodeBlock);
    CHECK_THROWS_AS(extract_script("```\nprint(1)\n```"), NoCodeBlock);
    CHECK_THROWS_AS(extract_script("```python\n\n```"), NoCodeBlock);
    CHECK_THROWS_AS(extract_script("```python\n```"), NoCodeBlock);
    CHECK_THROWS_AS(extract_script("   ```python\nx\n   ```"), NoCodeBlock);
}

TEST_CASE("wrap then extract is the identity on fence-free sources")
{
    std::mt19937_64 rng(99);
    const std::string alphabet = "ab `\n\t{}\\\"'#=()xyz\xCE\xB1";
    int checked = 0;
    for (int i = 0; i < 2000; ++i) {
        std::string s;
        const auto len = 1 + rng() % 60;
        for (std::size_t k = 0; k < len; ++k) s += alphabet[rng() % alphabet.size()];
        // Skip sources with a bare closing fence at a line start, and blank
        // ones (not a usable script).
        bool bare = false;
        std::size_t start = 0;
        while (start <= s.size()) {
            auto nl = s.find('\n', start);
            std::string line = s.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
            if (line.rfind("```", 0) == 0) bare = true;
            if (nl == std::string::npos) break;
            start = nl + 1;
        }
        if (bare || s.find_first_not_of(" \t\n") == std::string::npos) continue;
        const GuestScript g = extract_script(wrap_in_single_fence(s));
        REQUIRE(g.source == s);
        CHECK(g.contract_clean);
        // Re-fencing the extracted source yields the same source.
        CHECK(extract_script(wrap_in_single_fence(g.source)).source == g.source);
        ++checked;
    }
    CHECK(checked > 1000);
}
