#include "symcode/metrics.hpp"

#include "symcode/text_util.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace symcode {

namespace {

constexpr ErrorLabel k_all_labels[] = {ErrorLabel::arithmetic_mistake,        ErrorLabel::logical_fallacy,
                                       ErrorLabel::problem_misinterpretation, ErrorLabel::incorrect_api_usage,
                                       ErrorLabel::runtime_issue,             ErrorLabel::verification_failure,
                                       ErrorLabel::other};

}  // namespace

std::string_view to_string(ErrorLabel l)
{
    switch (l) {
    case ErrorLabel::arithmetic_mistake: return "arithmetic_mistake";
    case ErrorLabel::logical_fallacy: return "logical_fallacy";
    case ErrorLabel::problem_misinterpretation: return "problem_misinterpretation";
    case ErrorLabel::incorrect_api_usage: return "incorrect_api_usage";
    case ErrorLabel::runtime_issue: return "runtime_issue";
    case ErrorLabel::verification_failure: return "verification_failure";
    case ErrorLabel::other: return "other";
    }
    return "other";
}

ErrorLabel error_label_from_string(std::string_view s)
{
    for (auto l : k_all_labels)
        if (to_string(l) == s) return l;
    throw std::invalid_argument("unknown error label: " + std::string(s));
}

LabelMap parse_labels(std::istream& in)
{
    LabelMap out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError(line_no, std::string("malformed label line: ") + e.what());
        }
        if (!j.is_object() || !j.contains("episode_id") || !j["episode_id"].is_string() || !j.contains("label") ||
            !j["label"].is_string()) {
            throw SchemaError(line_no, "label lines need string fields 'episode_id' and 'label'");
        }
        ErrorLabel label;
        try {
            label = error_label_from_string(j["label"].get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw SchemaError(line_no, e.what());
        }
        const std::string id = j["episode_id"].get<std::string>();
        if (!out.emplace(id, label).second) throw SchemaError(line_no, "episode '" + id + "' labelled twice");
    }
    return out;
}

LabelMap load_labels(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw CorpusIOError("cannot open label file " + path);
    return parse_labels(in);
}

void MetricsAccumulator::add(const Episode& e, const LabelMap* labels)
{
    ++n;
    const bool ok = e.final_status == FinalStatus::correct;
    switch (e.final_status) {
    case FinalStatus::correct: ++correct; break;
    case FinalStatus::incorrect: ++incorrect; break;
    case FinalStatus::indeterminate: ++indeterminate; break;
    case FinalStatus::exhausted: ++exhausted; break;
    case FinalStatus::infra_error: ++infra_error; break;
    }
    completion_tokens += e.completion_tokens_total;
    if (e.debug_activated) {
        ++activated;
        if (e.activation_trigger == k_format_violation) ++activated_by_format;
    }
    auto bump = [ok](Tally& t) {
        ++t.n;
        t.correct += ok;
    };
    if (e.subject) bump(by_subject[*e.subject]);
    bump(by_answer_kind[e.answer_kind]);
    bump(by_dataset[e.dataset]);
    if (labels) {
        if (auto it = labels->find(e.problem_id); it != labels->end()) ++error_labels[it->second];
    }
}

void MetricsAccumulator::merge(const MetricsAccumulator& o)
{
    n += o.n;
    correct += o.correct;
    incorrect += o.incorrect;
    indeterminate += o.indeterminate;
    exhausted += o.exhausted;
    infra_error += o.infra_error;
    completion_tokens += o.completion_tokens;
    activated += o.activated;
    activated_by_format += o.activated_by_format;
    auto merge_tallies = [](auto& into, const auto& from) {
        for (const auto& [k, t] : from) {
            into[k].n += t.n;
            into[k].correct += t.correct;
        }
    };
    merge_tallies(by_subject, o.by_subject);
    merge_tallies(by_answer_kind, o.by_answer_kind);
    merge_tallies(by_dataset, o.by_dataset);
    for (const auto& [k, c] : o.error_labels) error_labels[k] += c;
}

RunMetrics finish(const MetricsAccumulator& acc)
{
    if (acc.n == 0) throw EmptyRun();
    RunMetrics m;
    m.counts = acc;
    const double n = static_cast<double>(acc.n);
    m.accuracy = static_cast<double>(acc.correct) / n;
    m.mean_completion_tokens = static_cast<double>(acc.completion_tokens) / n;
    m.debug_activation_rate = static_cast<double>(acc.activated) / n;
    auto rate = [](const Tally& t) { return static_cast<double>(t.correct) / static_cast<double>(t.n); };
    for (const auto& [k, t] : acc.by_subject) m.by_subject[k] = rate(t);
    for (const auto& [k, t] : acc.by_answer_kind) m.by_answer_kind[k] = rate(t);
    for (const auto& [k, t] : acc.by_dataset) m.by_dataset[k] = rate(t);
    return m;
}

RunMetrics aggregate(const std::vector<Episode>& episodes, const LabelMap* labels)
{
    MetricsAccumulator acc;
    for (const auto& e : episodes) acc.add(e, labels);
    return finish(acc);
}

double token_reduction(double method_mean, double baseline_mean)
{
    if (!(baseline_mean > 0)) throw DivisionByZero("baseline mean token count must be positive");
    return 1.0 - method_mean / baseline_mean;
}

std::string format_one_decimal(double value)
{
    // nearbyint follows the current rounding mode, which is ties-to-even.
    const double tenths = std::nearbyint(value * 10.0);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", tenths / 10.0);
    std::string s = buf;
    if (s == "-0.0") s = "0.0";
    return s;
}

std::string format_percent(double fraction) { return format_one_decimal(fraction * 100.0); }

namespace {

std::string row(const std::vector<std::string>& cells)
{
    std::string s = "|";
    for (const auto& c : cells) s += " " + c + " |";
    return s + "\n";
}

std::string rule(std::size_t columns)
{
    std::string s = "|";
    for (std::size_t i = 0; i < columns; ++i) s += i == 0 ? " --- |" : " ---: |";
    return s + "\n";
}

std::string dataset_title(Dataset d)
{
    switch (d) {
    case Dataset::math500: return "MATH-500";
    case Dataset::olympiadbench: return "OlympiadBench";
    case Dataset::aime: return "AIME";
    case Dataset::custom: return "Custom";
    }
    return "Custom";
}

}  // namespace

std::string render_report(const std::vector<ReportEntry>& entries)
{
    if (entries.empty()) throw std::invalid_argument("report needs at least one entry");
    std::ostringstream out;

    std::set<Dataset> datasets;
    bool any_labels = false;
    for (const auto& e : entries) {
        for (const auto& [d, _] : e.metrics.by_dataset) datasets.insert(d);
        any_labels = any_labels || !e.metrics.counts.error_labels.empty();
    }

    out << "## Accuracy (%)\n\n";
    std::vector<std::string> header = {"Configuration"};
    for (Dataset d : datasets) header.push_back(dataset_title(d));
    header.push_back("All");
    header.push_back("n");
    header.push_back("Indeterminate");
    out << row(header) << rule(header.size());
    for (const auto& e : entries) {
        std::vector<std::string> cells = {e.label};
        for (Dataset d : datasets) {
            auto it = e.metrics.by_dataset.find(d);
            cells.push_back(it == e.metrics.by_dataset.end() ? "-" : format_percent(it->second));
        }
        cells.push_back(format_percent(e.metrics.accuracy));
        cells.push_back(std::to_string(e.metrics.n()));
        cells.push_back(std::to_string(e.metrics.counts.indeterminate));
        out << row(cells);
    }

    out << "\n## Configurations\n\n";
    out << row({"Method Variant", "Accuracy (%)", "Correct", "Incorrect", "Indeterminate", "Exhausted",
                "Infra errors"})
        << rule(7);
    for (const auto& e : entries) {
        const auto& c = e.metrics.counts;
        out << row({e.label, format_percent(e.metrics.accuracy), std::to_string(c.correct), std::to_string(c.incorrect),
                    std::to_string(c.indeterminate), std::to_string(c.exhausted), std::to_string(c.infra_error)});
    }

    out << "\n## Output tokens\n\n";
    out << row({"Configuration", "Mean completion tokens", "Total"}) << rule(3);
    for (const auto& e : entries) {
        out << row({e.label, format_one_decimal(e.metrics.mean_completion_tokens),
                    std::to_string(e.metrics.counts.completion_tokens)});
    }

    out << "\n## Self-debugging activation\n\n";
    out << row({"Configuration", "Activation rate (%)", "Activated", "Triggered by format violation"}) << rule(4);
    for (const auto& e : entries) {
        out << row({e.label, format_percent(e.metrics.debug_activation_rate),
                    std::to_string(e.metrics.counts.activated), std::to_string(e.metrics.counts.activated_by_format)});
    }

    if (any_labels) {
        out << "\n## Error categories (% of labelled failures)\n\n";
        std::vector<std::string> h = {"Configuration"};
        for (auto l : k_all_labels) h.emplace_back(to_string(l));
        h.push_back("Labelled");
        out << row(h) << rule(h.size());
        for (const auto& e : entries) {
            std::int64_t total = 0;
            for (const auto& [_, c] : e.metrics.counts.error_labels) total += c;
            std::vector<std::string> cells = {e.label};
            for (auto l : k_all_labels) {
                auto it = e.metrics.counts.error_labels.find(l);
                const std::int64_t c = it == e.metrics.counts.error_labels.end() ? 0 : it->second;
                cells.push_back(total ? format_percent(static_cast<double>(c) / static_cast<double>(total)) : "-");
            }
            cells.push_back(std::to_string(total));
            out << row(cells);
        }
    }
    return out.str();
}

std::string render_summary(const RunMetrics& m)
{
    const auto& c = m.counts;
    std::ostringstream out;
    out << "episodes: " << c.n << "\n";
    out << "accuracy: " << format_percent(m.accuracy) << "% (" << c.correct << "/" << c.n << ")\n";
    out << "incorrect: " << c.incorrect << ", indeterminate: " << c.indeterminate << ", exhausted: " << c.exhausted
        << ", infra_error: " << c.infra_error << "\n";
    out << "mean completion tokens: " << format_one_decimal(m.mean_completion_tokens) << "\n";
    out << "self-debug activation: " << format_percent(m.debug_activation_rate) << "% (" << c.activated
        << ", of which format violations: " << c.activated_by_format << ")\n";
    if (!c.error_labels.empty()) {
        std::int64_t total = 0;
        for (const auto& [_, k] : c.error_labels) total += k;
        out << "error labels (" << total << "):\n";
        for (const auto& [label, k] : c.error_labels) {
            out << "  " << to_string(label) << ": " << k << " ("
                << format_percent(static_cast<double>(k) / static_cast<double>(total)) << "%)\n";
        }
    }
    return out.str();
}

}  // namespace symcode
