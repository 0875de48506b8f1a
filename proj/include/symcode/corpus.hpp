#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace symcode {

enum class Dataset { math500, olympiadbench, aime, custom };
enum class AnswerKind { numeric, expression };

std::string_view to_string(Dataset d);
std::string_view to_string(AnswerKind k);
Dataset dataset_from_string(std::string_view s);
AnswerKind answer_kind_from_string(std::string_view s);

struct Problem {
    std::string id;
    Dataset dataset = Dataset::custom;
    std::string statement;
    std::string ground_truth;
    std::optional<std::string> subject;
    AnswerKind answer_kind = AnswerKind::expression;

    bool operator==(const Problem&) const = default;
};

class CorpusIOError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SchemaError : public std::runtime_error {
public:
    SchemaError(std::size_t line, const std::string& message);
    // 1-based line of the offending record; 0 when not tied to a line.
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Plain integers and decimals, optionally signed ("468", "033", "-2.5").
// AIME answers are treated as ordinary integers, so "033" and "33" agree.
bool looks_numeric(std::string_view answer);

// One JSON object per line with "id", "statement", "answer" and optional
// "subject" and "answer_kind". Blank lines are skipped but still counted;
// unknown keys are ignored so source dumps can be used as-is. An integer
// "answer" is accepted and kept as its decimal spelling.
std::vector<Problem> parse_corpus(std::istream& in, Dataset dataset);
std::vector<Problem> load_corpus(const std::filesystem::path& path, Dataset dataset);

// Writes records that parse_corpus reads back into an identical list.
void save_corpus(const std::vector<Problem>& problems, std::ostream& out);

}  // namespace symcode
