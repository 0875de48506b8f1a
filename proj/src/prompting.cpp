#include "symcode/prompting.hpp"

#include "symcode/text_util.hpp"

#include <sstream>

namespace symcode {

namespace {

#include "symcode/prompt_resources.inc"

constexpr std::string_view k_problem_sentinel = "# PROBLEM\n";
constexpr std::string_view k_truncation_marker = "[earlier output truncated]\n";
constexpr std::string_view k_empty_reply = "(empty response)";

std::string_view without_final_newline(std::string_view s)
{
    if (!s.empty() && s.back() == '\n') s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_lines(std::string_view text)
{
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        lines.emplace_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

bool is_numbered(const std::string& line, char digit)
{
    return line.size() >= 3 && line[0] == digit && line[1] == '.' && line[2] == ' ';
}

bool is_sub_item(const std::string& line) { return line.rfind("   ", 0) == 0; }

std::string error_text_for(const ExecutionOutcome& error)
{
    switch (error.status) {
    case ExecutionStatus::timeout:
    case ExecutionStatus::output_missing:
        return error.detail;
    default:
        break;
    }
    if (error.traceback && !trim(*error.traceback).empty()) return *error.traceback;
    if (!trim(error.stderr_text).empty()) return error.stderr_text;
    return error.detail;
}

RenderedPrompt extend(const RenderedPrompt& history, std::string_view prior_completion, std::string user_text)
{
    RenderedPrompt out = history;
    out.kind = PromptKind::symcode_repair;
    out.messages.push_back(
        {Role::assistant, std::string(prior_completion.empty() ? k_empty_reply : prior_completion)});
    out.messages.push_back({Role::user, std::move(user_text)});
    return out;
}

}  // namespace

std::string_view to_string(Role r)
{
    switch (r) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
    }
    return "user";
}

Role role_from_string(std::string_view s)
{
    if (s == "system") return Role::system;
    if (s == "user") return Role::user;
    if (s == "assistant") return Role::assistant;
    throw std::invalid_argument("unknown role '" + std::string(s) + "'");
}

std::string_view to_string(PromptKind k)
{
    switch (k) {
    case PromptKind::symcode: return "symcode";
    case PromptKind::symcode_repair: return "symcode_repair";
    case PromptKind::cot_baseline: return "cot_baseline";
    }
    return "symcode";
}

PromptKind prompt_kind_from_string(std::string_view s)
{
    if (s == "symcode") return PromptKind::symcode;
    if (s == "symcode_repair") return PromptKind::symcode_repair;
    if (s == "cot_baseline") return PromptKind::cot_baseline;
    throw std::invalid_argument("unknown prompt kind '" + std::string(s) + "'");
}

std::string_view symcode_template() { return k_resource_symcode; }
std::string_view cot_template() { return k_resource_cot; }

std::string symcode_template_for(const AblationFlags& flags)
{
    if (flags.verification && flags.symbolic) return std::string(k_resource_symcode);

    // Lines are edited individually so every untouched line stays verbatim.
    std::vector<std::string> lines = split_lines(k_resource_symcode);
    std::vector<std::string> out;
    bool skipping_block = false;
    for (auto& line : lines) {
        if (skipping_block) {
            if (is_sub_item(line)) continue;
            skipping_block = false;
        }
        if (!flags.symbolic && is_numbered(line, '1')) {
            out.emplace_back(without_final_newline(k_resource_symcode_numeric_import));
            continue;
        }
        if (!flags.verification && is_numbered(line, '5')) {
            skipping_block = true;
            continue;
        }
        if (!flags.verification && is_numbered(line, '6')) line[0] = '5';
        out.push_back(std::move(line));
    }
    std::string text;
    for (const auto& l : out) text += l + "\n";
    return text;
}

RenderedPrompt render_symcode(const Problem& problem, const AblationFlags& flags)
{
    const std::string tmpl = symcode_template_for(flags);
    const auto split = tmpl.find(k_problem_sentinel);
    RenderedPrompt out;
    out.kind = PromptKind::symcode;
    out.problem_id = problem.id;
    out.messages.push_back({Role::system, tmpl.substr(0, split == 0 ? 0 : split - 1)});
    const std::string user = substitute(std::string_view(tmpl).substr(split), {{"problem_text", problem.statement}});
    out.messages.push_back({Role::user, std::string(without_final_newline(user))});
    return out;
}

std::string truncate_error_text(std::string_view text, std::size_t budget_bytes)
{
    if (text.size() <= budget_bytes) return std::string(text);
    if (budget_bytes <= k_truncation_marker.size()) return std::string(utf8_tail(text, budget_bytes));
    return std::string(k_truncation_marker) +
           std::string(utf8_tail(text, budget_bytes - k_truncation_marker.size()));
}

RenderedPrompt render_repair(const RenderedPrompt& history, std::string_view prior_completion,
                             std::string_view prior_script, const ExecutionOutcome& error,
                             std::size_t error_budget_bytes)
{
    if (error.status == ExecutionStatus::success) {
        throw InvalidState("render_repair called with a successful outcome");
    }
    const std::string error_text = truncate_error_text(without_final_newline(error_text_for(error)), error_budget_bytes);
    std::string user = substitute(k_resource_repair, {{"script", without_final_newline(prior_script)},
                                                      {"status", to_string(error.status)},
                                                      {"error", error_text}});
    return extend(history, prior_completion, std::string(without_final_newline(user)));
}

RenderedPrompt render_format_repair(const RenderedPrompt& history, std::string_view prior_completion)
{
    std::string user = substitute(k_resource_repair_format,
                                  {{"status", "format_violation"},
                                   {"error", "No ```python fenced code block was found in the reply."}});
    return extend(history, prior_completion, std::string(without_final_newline(user)));
}

RenderedPrompt render_cot(const Problem& problem)
{
    RenderedPrompt out;
    out.kind = PromptKind::cot_baseline;
    out.problem_id = problem.id;
    const std::string user = substitute(k_resource_cot, {{"problem_text", problem.statement}});
    out.messages.push_back({Role::user, std::string(without_final_newline(user))});
    return out;
}

}  // namespace symcode
