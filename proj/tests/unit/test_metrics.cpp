#include "symcode/metrics.hpp"

#include "../support/random_episode.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

using namespace symcode;

namespace {

Episode simple(const std::string& id, FinalStatus status, int attempts, std::int64_t tokens_each = 100)
{
    Episode e;
    e.problem_id = id;
    e.final_status = status;
    for (int i = 0; i < attempts; ++i) {
        Attempt a;
        a.index = i;
        a.completion.completion_tokens = tokens_each;
        if (i + 1 < attempts) a.failure = "exception";
        e.attempts.push_back(a);
    }
    e.completion_tokens_total = tokens_each * attempts;
    e.debug_activated = attempts > 1;
    if (e.debug_activated) e.activation_trigger = "exception";
    return e;
}

}  // namespace

TEST_CASE("definitional metrics")
{
    std::vector<Episode> eps;
    for (int i = 0; i < 10; ++i) {
        eps.push_back(simple("e" + std::to_string(i), i < 8 ? FinalStatus::correct : FinalStatus::incorrect,
                             i % 3 == 0 && i < 9 ? 2 : 1));
    }
    const RunMetrics m = aggregate(eps);
    CHECK(m.n() == 10);
    CHECK(m.accuracy == 0.8);
    CHECK(m.debug_activation_rate == doctest::Approx(0.3));
    CHECK(m.counts.activated == 3);
    CHECK(m.mean_completion_tokens == 130.0);

    std::vector<Episode> clean = {simple("a", FinalStatus::correct, 1), simple("b", FinalStatus::correct, 1)};
    CHECK(aggregate(clean).debug_activation_rate == 0.0);
    CHECK_THROWS_AS(aggregate({}), EmptyRun);
}

TEST_CASE("indeterminate counts against accuracy and is reported separately")
{
    std::vector<Episode> eps = {simple("a", FinalStatus::correct, 1), simple("b", FinalStatus::indeterminate, 1)};
    const RunMetrics m = aggregate(eps);
    CHECK(m.accuracy == 0.5);
    CHECK(m.counts.indeterminate == 1);
}

TEST_CASE("token reduction")
{
    CHECK(token_reduction(699, 1770) == doctest::Approx(1.0 - 699.0 / 1770.0));
    CHECK(format_percent(token_reduction(699, 1770)) == "60.5");
    CHECK(format_percent(token_reduction(699, 1962)) == "64.4");
    CHECK(format_percent(token_reduction(699, 2991)) == "76.6");
    CHECK(token_reduction(42, 42) == 0.0);
    CHECK_THROWS_AS(token_reduction(1, 0), DivisionByZero);
    CHECK_THROWS_AS(token_reduction(1, -3), DivisionByZero);
}

TEST_CASE("one-decimal rounding sends ties to even")
{
    CHECK(format_percent(9.0 / 16.0) == "56.2");
    CHECK(format_percent(2.0 / 16.0) == "12.5");
    CHECK(format_percent(5.0 / 16.0) == "31.2");
    CHECK(format_one_decimal(0.75) == "0.8");
    CHECK(format_one_decimal(0.25) == "0.2");
    CHECK(format_one_decimal(699.0) == "699.0");
    CHECK(format_percent(0) == "0.0");
    CHECK(format_percent(1) == "100.0");
    // Failure mix of 29 prose-baseline errors: 12 / 10 / 7.
    CHECK(format_percent(12.0 / 29) == "41.4");
    CHECK(format_percent(10.0 / 29) == "34.5");
    CHECK(format_percent(7.0 / 29) == "24.1");
}

TEST_CASE("aggregation is a fold: permutation and partition-merge")
{
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto eps = symcode::testing::random_episodes(seed, 1 + seed * 7);
        LabelMap labels;
        for (std::size_t i = 0; i < eps.size(); i += 2) labels[eps[i].problem_id] = static_cast<ErrorLabel>(i % 7);
        const RunMetrics whole = aggregate(eps, &labels);

        std::mt19937_64 rng(seed);
        auto shuffled = eps;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(aggregate(shuffled, &labels) == whole);

        const std::size_t cut = rng() % (eps.size() + 1);
        MetricsAccumulator left, right;
        for (std::size_t i = 0; i < eps.size(); ++i) (i < cut ? left : right).add(eps[i], &labels);
        MetricsAccumulator merged = left;
        merged.merge(right);
        CHECK(finish(merged) == whole);
        MetricsAccumulator reversed = right;
        reversed.merge(left);
        CHECK(finish(reversed) == whole);
    }
}

TEST_CASE("error labels")
{
    std::istringstream in(R"({"episode_id":"a","label":"problem_misinterpretation"}

{"episode_id":"b","label":"incorrect_api_usage"}
)");
    const LabelMap labels = parse_labels(in);
    CHECK(labels.size() == 2);
    CHECK(labels.at("b") == ErrorLabel::incorrect_api_usage);

    std::istringstream dup(R"({"episode_id":"a","label":"other"}
{"episode_id":"a","label":"other"})");
    CHECK_THROWS_AS(parse_labels(dup), SchemaError);
    std::istringstream bad(R"({"episode_id":"a","label":"typo"})");
    CHECK_THROWS_AS(parse_labels(bad), SchemaError);
    std::istringstream empty("");
    CHECK(parse_labels(empty).empty());

    // 9 misinterpretation / 5 api / 2 other among 16 failures.
    std::vector<Episode> eps;
    LabelMap sixteen;
    for (int i = 0; i < 16; ++i) {
        const std::string id = "f" + std::to_string(i);
        eps.push_back(simple(id, FinalStatus::incorrect, 1));
        sixteen[id] = i < 9 ? ErrorLabel::problem_misinterpretation
                            : i < 14 ? ErrorLabel::incorrect_api_usage : ErrorLabel::other;
    }
    const RunMetrics m = aggregate(eps, &sixteen);
    CHECK(m.counts.error_labels.at(ErrorLabel::problem_misinterpretation) == 9);
    const std::string summary = render_summary(m);
    CHECK(summary.find("problem_misinterpretation: 9 (56.2%)") != std::string::npos);
    CHECK(summary.find("other: 2 (12.5%)") != std::string::npos);
    CHECK(aggregate(eps).counts.error_labels.empty());
    CHECK(render_summary(aggregate(eps)).find("error labels") == std::string::npos);
}

TEST_CASE("report tables")
{
    const auto eps = symcode::testing::random_episodes(3, 40);
    const RunMetrics m = aggregate(eps);
    const std::vector<std::string> order = {"SymCode+", "No Self-Debug", "No Verification",
                                            "No SymPy (Numeric Python)"};
    std::vector<ReportEntry> entries;
    for (const auto& l : order) entries.push_back({l, m});
    const std::string doc = render_report(entries);
    std::size_t pos = doc.find("## Configurations");
    REQUIRE(pos != std::string::npos);
    for (const auto& l : order) {
        const std::size_t at = doc.find("| " + l + " |", pos);
        REQUIRE(at != std::string::npos);
        pos = at;
    }
    CHECK(doc == render_report(entries));
    CHECK(doc.find(format_percent(m.accuracy)) != std::string::npos);
    CHECK(doc.find("Error categories") == std::string::npos);

    const std::string single = render_report({{"SymCode+", m}});
    const std::size_t cfg = single.find("## Configurations");
    const std::size_t next = single.find("\n## ", cfg + 1);
    const std::string table = single.substr(cfg, next - cfg);
    CHECK(std::count(table.begin(), table.end(), '\n') == 5);  // title, blank, header, rule, one row
    CHECK_THROWS_AS(render_report({}), std::invalid_argument);
}
