#include "symcode/corpus.hpp"

#include "symcode/text_util.hpp"

#include <json.hpp>

#include <fstream>
#include <istream>
#include <ostream>
#include <regex>
#include <unordered_map>

namespace symcode {

using nlohmann::json;

std::string_view to_string(Dataset d)
{
    switch (d) {
    case Dataset::math500: return "math500";
    case Dataset::olympiadbench: return "olympiadbench";
    case Dataset::aime: return "aime";
    case Dataset::custom: return "custom";
    }
    return "custom";
}

std::string_view to_string(AnswerKind k) { return k == AnswerKind::numeric ? "numeric" : "expression"; }

Dataset dataset_from_string(std::string_view s)
{
    for (auto d : {Dataset::math500, Dataset::olympiadbench, Dataset::aime, Dataset::custom}) {
        if (to_string(d) == s) return d;
    }
    throw std::invalid_argument("unknown dataset '" + std::string(s) + "'");
}

AnswerKind answer_kind_from_string(std::string_view s)
{
    if (s == "numeric") return AnswerKind::numeric;
    if (s == "expression") return AnswerKind::expression;
    throw std::invalid_argument("unknown answer_kind '" + std::string(s) + "'");
}

SchemaError::SchemaError(std::size_t line, const std::string& message)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + message : message), line_(line)
{
}

bool looks_numeric(std::string_view answer)
{
    static const std::regex pattern(R"([+-]?(\d+(\.\d*)?|\.\d+))");
    const std::string_view t = trim(answer);
    return std::regex_match(t.begin(), t.end(), pattern);
}

namespace {

std::string required_text(const json& record, const char* key, std::size_t line)
{
    auto it = record.find(key);
    if (it == record.end()) throw SchemaError(line, std::string("missing required key \"") + key + "\"");
    std::string value;
    if (it->is_string()) {
        value = it->get<std::string>();
    } else if (std::string_view(key) == "answer" && it->is_number_integer()) {
        value = it->dump();
    } else {
        throw SchemaError(line, std::string("\"") + key + "\" must be a string");
    }
    if (trim(value).empty()) throw SchemaError(line, std::string("\"") + key + "\" is empty");
    return value;
}

}  // namespace

std::vector<Problem> parse_corpus(std::istream& in, Dataset dataset)
{
    std::vector<Problem> out;
    std::unordered_map<std::string, std::size_t> seen;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (trim(text).empty()) continue;
        json record;
        try {
            record = json::parse(text);
        } catch (const json::parse_error& e) {
            throw SchemaError(line, std::string("malformed JSON: ") + e.what());
        }
        if (!record.is_object()) throw SchemaError(line, "record is not a JSON object");

        Problem p;
        p.dataset = dataset;
        p.id = required_text(record, "id", line);
        p.statement = required_text(record, "statement", line);
        p.ground_truth = required_text(record, "answer", line);

        if (auto it = record.find("subject"); it != record.end() && !it->is_null()) {
            if (!it->is_string()) throw SchemaError(line, "\"subject\" must be a string");
            p.subject = it->get<std::string>();
        }
        if (auto it = record.find("answer_kind"); it != record.end() && !it->is_null()) {
            if (!it->is_string()) throw SchemaError(line, "\"answer_kind\" must be a string");
            try {
                p.answer_kind = answer_kind_from_string(it->get<std::string>());
            } catch (const std::invalid_argument& e) {
                throw SchemaError(line, e.what());
            }
        } else {
            p.answer_kind = looks_numeric(p.ground_truth) ? AnswerKind::numeric : AnswerKind::expression;
        }

        if (auto [it, inserted] = seen.emplace(p.id, line); !inserted) {
            throw SchemaError(line, "duplicate id \"" + p.id + "\" (first seen on line " +
                                        std::to_string(it->second) + ")");
        }
        out.push_back(std::move(p));
    }
    if (in.bad()) throw CorpusIOError("read error while loading corpus");
    return out;
}

std::vector<Problem> load_corpus(const std::filesystem::path& path, Dataset dataset)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorpusIOError("cannot open corpus file " + path.string());
    return parse_corpus(in, dataset);
}

void save_corpus(const std::vector<Problem>& problems, std::ostream& out)
{
    for (const auto& p : problems) {
        json record = {{"id", p.id}, {"statement", p.statement}, {"answer", p.ground_truth},
                       {"answer_kind", to_string(p.answer_kind)}};
        if (p.subject) record["subject"] = *p.subject;
        out << record.dump() << '\n';
    }
}

}  // namespace symcode
