#include "symcode/cli.hpp"

#include "symcode/episode.hpp"

#include "../support/fake_llm_server.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace symcode;
using symcode::testing::chat_reply;
using symcode::testing::FakeLlmServer;
using symcode::testing::FakeReply;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir()
    {
        std::random_device rd;
        path = fs::temp_directory_path() / ("symcode-cli-" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_count(const std::string& path)
{
    std::size_t n = 0;
    for (char ch : read_file(path)) n += ch == '\n';
    return n;
}

struct Invocation {
    int code;
    std::string out, err;
};

Invocation cli(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

// Answers each problem by its statement: two right, one wrong.
FakeReply answer_by_statement(const nlohmann::json& req, const std::string&)
{
    const std::string user = req["messages"].back()["content"].get<std::string>();
    auto script = [](const std::string& box) { return "```python\nprint(r'\\boxed{" + box + "}')\n```"; };
    if (user.find("parentheses") != std::string::npos) return chat_reply(script("4"), 300, 40);
    if (user.find("Squares") != std::string::npos) return chat_reply(script("\\sqrt{40}"), 300, 60);
    return chat_reply(script("467"), 300, 80);
}

nlohmann::json base_config(const TempDir& dir)
{
    return {{"corpus", std::string(SYMCODE_FIXTURE_DIR) + "/sample_corpus.jsonl"},
            {"dataset", "custom"},
            {"backend", {{"kind", "replay"}, {"model", "gpt-4.1"}, {"cassette", dir / "cassette.jsonl"}}},
            {"limits", {{"wall_timeout_ms", 5000}}},
            {"sandbox", {{"worker", {SYMCODE_STUB_WORKER}}, {"pool_size", 2}}},
            {"parallelism", 2},
            {"output", {{"episode_log", "episodes.jsonl"}}}};
}

}  // namespace

TEST_CASE("config parsing resolves paths and applies overrides")
{
    TempDir dir;
    write_file(dir / "cassette.jsonl", "");
    const RunConfig c = parse_run_config(base_config(dir).dump(), dir.path,
                                         {"loop.max_attempts=2", "flags.symbolic=false", "dataset=aime"});
    CHECK(c.loop.max_attempts == 2);
    CHECK_FALSE(c.flags.symbolic);
    CHECK(c.flags.self_debug);
    CHECK(c.dataset == Dataset::aime);
    CHECK(c.episode_log == dir / "episodes.jsonl");
    CHECK(c.loop.limits.wall_timeout_ms == 5000);
    CHECK(c.parallelism == 2);
}

TEST_CASE("config errors name the offending field")
{
    TempDir dir;
    write_file(dir / "cassette.jsonl", "");
    auto field_of = [&](const std::vector<std::string>& overrides) -> std::string {
        try {
            parse_run_config(base_config(dir).dump(), dir.path, overrides);
        } catch (const ConfigError& e) {
            return e.path();
        }
        return "(accepted)";
    };
    CHECK(field_of({}) == "(accepted)");
    CHECK(field_of({"loop.max_attempts=0"}) == "loop.max_attempts");
    CHECK(field_of({"loop.max_attempts=6"}) == "loop.max_attempts");
    CHECK(field_of({"loop.retries=3"}) == "loop.retries");
    CHECK(field_of({"surprise=1"}) == "surprise");
    CHECK(field_of({"record.enabled=true", "record.cassette=out.jsonl"}) == "record.enabled");
    CHECK(field_of({"backend.kind=live"}) == "backend.base_url");
    CHECK(field_of({"backend.kind=psychic"}) == "backend.kind");
    CHECK(field_of({"corpus=missing.jsonl"}) == "corpus");
    CHECK(field_of({"parallelism=0"}) == "parallelism");
    CHECK(field_of({"limits.stdout_cap_bytes=100"}) == "limits.stdout_cap_bytes");
    CHECK(field_of({"sandbox.worker=[]"}) == "sandbox.worker");
    CHECK(field_of({"method=cot", "sandbox.worker=[]"}) == "(accepted)");
    CHECK(field_of({"method=guess"}) == "method");
    CHECK(field_of({"flags.self_debug=1"}) == "flags.self_debug");

    CHECK_THROWS_AS(parse_run_config("{not json", dir.path), ConfigError);
}

TEST_CASE("variant labels follow the ablation ladder")
{
    const auto ladder = ablation_ladder();
    REQUIRE(ladder.size() == 4);
    CHECK(variant_label(ladder[0]) == "SymCode+");
    CHECK(variant_label(ladder[1]) == "No Self-Debug");
    CHECK(variant_label(ladder[2]) == "No Verification");
    CHECK(variant_label(ladder[3]) == "No SymPy (Numeric Python)");
    CHECK(variant_label({true, true, true}, Method::cot) == "CoT");
}

TEST_CASE("record against a live endpoint, then replay offline")
{
    TempDir dir;
    FakeLlmServer server(answer_by_statement);
    ::setenv("SYMCODE_CLI_TEST_KEY", "sk-test", 1);

    nlohmann::json live = base_config(dir);
    live["backend"] = {{"kind", "live"},
                       {"model", "gpt-4.1"},
                       {"base_url", server.base_url()},
                       {"api_key_env", "SYMCODE_CLI_TEST_KEY"},
                       {"rate_capacity", 100},
                       {"rate_per_second", 1000}};
    live["record"] = {{"cassette", "cassette.jsonl"}};
    live["output"]["episode_log"] = "recorded.jsonl";
    write_file(dir / "live.json", live.dump());

    const auto rec = cli({"record", "-c", dir / "live.json"});
    CAPTURE(rec.err);
    REQUIRE(rec.code == exit_code::ok);
    CHECK(server.hits() == 3);
    CHECK(line_count(dir / "cassette.jsonl") == 3);
    CHECK(rec.out.find("accuracy: 66.7% (2/3)") != std::string::npos);

    write_file(dir / "replay.json", base_config(dir).dump());
    const auto rep = cli({"run", "-c", dir / "replay.json", "--report", dir / "report.md"});
    CAPTURE(rep.err);
    REQUIRE(rep.code == exit_code::ok);
    CHECK(server.hits() == 3);
    CHECK(rep.out.find("accuracy: 66.7% (2/3)") != std::string::npos);
    CHECK(line_count(dir / "episodes.jsonl") == 3);
    CHECK(read_file(dir / "report.md").find("| SymCode+ |") != std::string::npos);

    // Replayed logs carry no timings, so they match the recorded run apart
    // from the backend tag.
    const auto recorded = read_episode_log(dir / "recorded.jsonl");
    const auto replayed = read_episode_log(dir / "episodes.jsonl");
    REQUIRE(recorded.size() == replayed.size());
    for (std::size_t i = 0; i < recorded.size(); ++i) {
        CHECK(recorded[i].final_status == replayed[i].final_status);
        CHECK(recorded[i].attempts[0].completion.text == replayed[i].attempts[0].completion.text);
        CHECK(replayed[i].attempts[0].completion.backend == BackendKind::replay);
    }

    // A second run resumes: nothing new is appended.
    const auto again = cli({"run", "-c", dir / "replay.json"});
    CHECK(again.code == exit_code::ok);
    CHECK(again.err.find("resumed: 3") != std::string::npos);
    CHECK(line_count(dir / "episodes.jsonl") == 3);

    // Record is refused for a replay backend.
    const auto refused = cli({"record", "-c", dir / "replay.json", "--record-cassette", dir / "x.jsonl"});
    CHECK(refused.code == exit_code::config);
    CHECK(refused.err.find("record") != std::string::npos);

    // Re-scoring reproduces the run, and labels feed the breakdown.
    write_file(dir / "labels.jsonl", "{\"episode_id\":\"aime-circumcenter-incenter\",\"label\":\"arithmetic_mistake\"}\n");
    const auto scored = cli({"score", "--log", dir / "episodes.jsonl", "--corpus",
                             std::string(SYMCODE_FIXTURE_DIR) + "/sample_corpus.jsonl", "--labels",
                             dir / "labels.jsonl"});
    CAPTURE(scored.err);
    CHECK(scored.code == exit_code::ok);
    CHECK(scored.out.find("accuracy: 66.7% (2/3)") != std::string::npos);
    CHECK(scored.out.find("arithmetic_mistake: 1 (100.0%)") != std::string::npos);

    // An episode whose problem is not in the corpus is a data error.
    std::string first_problem = read_file(std::string(SYMCODE_FIXTURE_DIR) + "/sample_corpus.jsonl");
    first_problem = first_problem.substr(0, first_problem.find('\n') + 1);
    write_file(dir / "one.jsonl", first_problem);
    const auto unknown = cli({"score", "--log", dir / "episodes.jsonl", "--corpus", dir / "one.jsonl"});
    CHECK(unknown.code == exit_code::data);
    CHECK(unknown.err.find("olympiad-qt-squares") != std::string::npos);

    ::unsetenv("SYMCODE_CLI_TEST_KEY");
}

TEST_CASE("ablate runs the four variants in table order")
{
    TempDir dir;
    FakeLlmServer server(answer_by_statement);
    ::setenv("SYMCODE_CLI_TEST_KEY", "sk-test", 1);
    nlohmann::json live = base_config(dir);
    live["backend"] = {{"kind", "live"},
                       {"model", "gpt-4.1"},
                       {"base_url", server.base_url()},
                       {"api_key_env", "SYMCODE_CLI_TEST_KEY"},
                       {"rate_capacity", 100},
                       {"rate_per_second", 1000}};
    live["record"] = {{"enabled", true}, {"cassette", "cassette.jsonl"}};
    write_file(dir / "live.json", live.dump());

    const auto r = cli({"ablate", "-c", dir / "live.json"});
    CAPTURE(r.err);
    REQUIRE(r.code == exit_code::ok);
    const auto a = r.out.find("| SymCode+ |");
    const auto b = r.out.find("| No Self-Debug |");
    const auto c = r.out.find("| No Verification |");
    const auto d = r.out.find("| No SymPy (Numeric Python) |");
    REQUIRE(a != std::string::npos);
    REQUIRE(d != std::string::npos);
    CHECK(a < b);
    CHECK(b < c);
    CHECK(c < d);
    CHECK(fs::exists(dir / "episodes.symcode.jsonl"));
    CHECK(fs::exists(dir / "episodes.no_sympy_numeric_python.jsonl"));
    // The first two variants share prompts, so the cassette dedupes them.
    CHECK(line_count(dir / "cassette.jsonl") == 9);

    // The report command rebuilds the same table from the logs.
    const auto rep = cli({"report", "--log", "SymCode+=" + (dir / "episodes.symcode.jsonl"), "--log",
                          "No Self-Debug=" + (dir / "episodes.no_self_debug.jsonl")});
    CHECK(rep.code == exit_code::ok);
    CHECK(rep.out.find("| SymCode+ |") < rep.out.find("| No Self-Debug |"));
    ::unsetenv("SYMCODE_CLI_TEST_KEY");
}

TEST_CASE("usage and missing-worker errors map to exit codes")
{
    CHECK(cli({}).code == exit_code::usage);
    CHECK(cli({"bogus"}).code == exit_code::usage);
    CHECK(cli({"run"}).code == exit_code::usage);

    TempDir dir;
    write_file(dir / "cassette.jsonl", "");
    nlohmann::json cfg = base_config(dir);
    cfg["sandbox"]["worker"] = {"/nonexistent/worker"};
    write_file(dir / "c.json", cfg.dump());
    const auto r = cli({"run", "-c", dir / "c.json"});
    CHECK(r.code == exit_code::infra);
    CHECK(r.err.find("/nonexistent/worker") != std::string::npos);

    cfg = base_config(dir);
    cfg["loop"] = {{"max_attempts", 9}};
    write_file(dir / "c.json", cfg.dump());
    const auto bad = cli({"run", "-c", dir / "c.json"});
    CHECK(bad.code == exit_code::config);
    CHECK(bad.err.find("loop.max_attempts") != std::string::npos);
}

TEST_CASE("cassette misses surface as infrastructure errors")
{
    TempDir dir;
    write_file(dir / "cassette.jsonl", "");
    write_file(dir / "c.json", base_config(dir).dump());
    const auto r = cli({"run", "-c", dir / "c.json"});
    CHECK(r.code == exit_code::infra);
    CHECK(r.out.find("infra_error: 3") != std::string::npos);
}
