#pragma once

#include "symcode/episode.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace symcode {

enum class ErrorLabel {
    arithmetic_mistake,
    logical_fallacy,
    problem_misinterpretation,
    incorrect_api_usage,
    runtime_issue,
    verification_failure,
    other
};

std::string_view to_string(ErrorLabel l);
ErrorLabel error_label_from_string(std::string_view s);

// episode id -> human-assigned failure label.
using LabelMap = std::map<std::string, ErrorLabel>;

// Sidecar of {episode_id, label} lines. Throws SchemaError on bad lines,
// unknown labels and repeated ids.
LabelMap parse_labels(std::istream& in);
LabelMap load_labels(const std::string& path);

class EmptyRun : public std::invalid_argument {
public:
    EmptyRun() : std::invalid_argument("no episodes to aggregate") {}
};

class DivisionByZero : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct Tally {
    std::int64_t correct = 0;
    std::int64_t n = 0;

    bool operator==(const Tally&) const = default;
};

// Counts and sums only, so folding is exact and order-free.
struct MetricsAccumulator {
    std::int64_t n = 0;
    std::int64_t correct = 0;
    std::int64_t incorrect = 0;
    std::int64_t indeterminate = 0;
    std::int64_t exhausted = 0;
    std::int64_t infra_error = 0;
    std::int64_t completion_tokens = 0;
    std::int64_t activated = 0;
    std::int64_t activated_by_format = 0;
    std::map<std::string, Tally> by_subject;
    std::map<AnswerKind, Tally> by_answer_kind;
    std::map<Dataset, Tally> by_dataset;
    std::map<ErrorLabel, std::int64_t> error_labels;

    void add(const Episode& e, const LabelMap* labels = nullptr);
    void merge(const MetricsAccumulator& other);

    bool operator==(const MetricsAccumulator&) const = default;
};

struct RunMetrics {
    MetricsAccumulator counts;
    double accuracy = 0;
    double mean_completion_tokens = 0;
    double debug_activation_rate = 0;
    std::map<std::string, double> by_subject;
    std::map<AnswerKind, double> by_answer_kind;
    std::map<Dataset, double> by_dataset;

    std::int64_t n() const { return counts.n; }
    bool operator==(const RunMetrics&) const = default;
};

// Throws EmptyRun on an empty accumulator.
RunMetrics finish(const MetricsAccumulator& acc);

// Pure fold over the episodes. indeterminate counts as not correct.
RunMetrics aggregate(const std::vector<Episode>& episodes, const LabelMap* labels = nullptr);

// 1 - method_mean / baseline_mean. Throws DivisionByZero unless
// baseline_mean > 0.
double token_reduction(double method_mean, double baseline_mean);

// A fraction as a percentage with one decimal, ties to even ("56.2" for
// 9/16).
std::string format_percent(double fraction);
std::string format_one_decimal(double value);

struct ReportEntry {
    std::string label;
    RunMetrics metrics;
};

// Markdown tables for accuracy by dataset, the configurations in the given
// order, tokens, activation and (when labelled) error categories.
// Throws std::invalid_argument on an empty list.
std::string render_report(const std::vector<ReportEntry>& entries);

// Few-line plain-text summary of one run.
std::string render_summary(const RunMetrics& m);

}  // namespace symcode
