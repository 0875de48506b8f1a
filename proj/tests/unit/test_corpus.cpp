#include "symcode/corpus.hpp"

#include <doctest.h>

#include <sstream>

using namespace symcode;

namespace {

const std::string k_fixtures = SYMCODE_FIXTURE_DIR;

std::vector<Problem> parse(const std::string& text, Dataset d = Dataset::custom)
{
    std::istringstream in(text);
    return parse_corpus(in, d);
}

std::size_t schema_error_line(const std::string& text)
{
    try {
        parse(text);
    } catch (const SchemaError& e) {
        return e.line();
    }
    return 0;
}

}  // namespace

TEST_CASE("sample corpus loads in file order")
{
    auto problems = load_corpus(k_fixtures + "/sample_corpus.jsonl", Dataset::custom);
    REQUIRE(problems.size() == 3);
    CHECK(problems[0].ground_truth == "4");
    CHECK(problems[1].ground_truth == "2\\sqrt{10}");
    CHECK(problems[2].ground_truth == "468");
    CHECK(problems[0].answer_kind == AnswerKind::numeric);
    CHECK(problems[1].answer_kind == AnswerKind::expression);
    CHECK(problems[1].statement.find("Squares $ABQR$ and $BCST$") != std::string::npos);
    CHECK(problems[1].subject == std::optional<std::string>("geometry"));
}

TEST_CASE("empty input gives an empty corpus")
{
    CHECK(parse("").empty());
    CHECK(parse("\n  \n").empty());
}

TEST_CASE("schema violations name the line")
{
    CHECK(schema_error_line("{\"id\":\"p1\",\"statement\":\"s\",\"answer\":\"1\"}\n"
                            "{\"id\":\"p1\",\"statement\":\"t\",\"answer\":\"2\"}\n") == 2);
    CHECK(schema_error_line("{\"id\":\"p1\",\"statement\":\"s\"}") == 1);
    CHECK(schema_error_line("\n{\"id\":\"\",\"statement\":\"s\",\"answer\":\"1\"}") == 2);
    CHECK(schema_error_line("{\"id\":\"p1\",\"statement\":\"  \",\"answer\":\"1\"}") == 1);
    CHECK(schema_error_line("not json") == 1);
    CHECK(schema_error_line("[1,2]") == 1);
    CHECK(schema_error_line("{\"id\":\"p1\",\"statement\":\"s\",\"answer\":\"1\",\"answer_kind\":\"vague\"}") == 1);
    CHECK(schema_error_line("{\"id\":7,\"statement\":\"s\",\"answer\":\"1\"}") == 1);
}

TEST_CASE("missing file is an IO error")
{
    CHECK_THROWS_AS(load_corpus(k_fixtures + "/does_not_exist.jsonl", Dataset::aime), CorpusIOError);
}

TEST_CASE("answer kind defaults from the ground truth")
{
    auto ps = parse("{\"id\":\"a\",\"statement\":\"s\",\"answer\":\"033\"}\n"
                    "{\"id\":\"b\",\"statement\":\"s\",\"answer\":\"-2.5\"}\n"
                    "{\"id\":\"c\",\"statement\":\"s\",\"answer\":\"\\\\frac{1}{2}\"}\n"
                    "{\"id\":\"d\",\"statement\":\"s\",\"answer\":\"7\",\"answer_kind\":\"expression\"}\n"
                    "{\"id\":\"e\",\"statement\":\"s\",\"answer\":204}\n");
    REQUIRE(ps.size() == 5);
    CHECK(ps[0].answer_kind == AnswerKind::numeric);
    CHECK(ps[1].answer_kind == AnswerKind::numeric);
    CHECK(ps[2].answer_kind == AnswerKind::expression);
    CHECK(ps[3].answer_kind == AnswerKind::expression);
    CHECK(ps[4].ground_truth == "204");
}

TEST_CASE("statements are kept verbatim")
{
    auto ps = parse("{\"id\":\"a\",\"statement\":\"  keep ```python\\n fences\\t \",\"answer\":\"1\",\"extra\":true}");
    REQUIRE(ps.size() == 1);
    CHECK(ps[0].statement == "  keep ```python\n fences\t ");
}

TEST_CASE("save then load round-trips and loading is deterministic")
{
    auto original = load_corpus(k_fixtures + "/sample_corpus.jsonl", Dataset::olympiadbench);
    std::ostringstream out;
    save_corpus(original, out);
    auto reloaded = parse(out.str(), Dataset::olympiadbench);
    CHECK(reloaded == original);
    CHECK(load_corpus(k_fixtures + "/sample_corpus.jsonl", Dataset::olympiadbench) == original);
}

TEST_CASE("enum names round-trip")
{
    for (auto d : {Dataset::math500, Dataset::olympiadbench, Dataset::aime, Dataset::custom}) {
        CHECK(dataset_from_string(to_string(d)) == d);
    }
    CHECK_THROWS(dataset_from_string("gsm8k"));
}
