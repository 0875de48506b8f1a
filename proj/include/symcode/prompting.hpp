#pragma once

#include "symcode/corpus.hpp"
#include "symcode/execution.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace symcode {

enum class Role { system, user, assistant };

std::string_view to_string(Role r);
Role role_from_string(std::string_view s);

struct ChatMessage {
    Role role = Role::user;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

enum class PromptKind { symcode, symcode_repair, cot_baseline };

std::string_view to_string(PromptKind k);
PromptKind prompt_kind_from_string(std::string_view s);

struct RenderedPrompt {
    std::vector<ChatMessage> messages;
    PromptKind kind = PromptKind::symcode;
    std::string problem_id;

    bool operator==(const RenderedPrompt&) const = default;
};

// (true, true, true) is the full method with repair; (false, true, true) is
// the single-shot variant.
struct AblationFlags {
    bool self_debug = true;
    bool verification = true;
    bool symbolic = true;

    bool operator==(const AblationFlags&) const = default;
};

class InvalidState : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline constexpr std::size_t k_default_error_budget_bytes = 4096;

// The raw template texts compiled in from resources/prompts.
std::string_view symcode_template();
std::string_view cot_template();

// The symcode template after applying the ablation flags, placeholder intact.
std::string symcode_template_for(const AblationFlags& flags);

// System message: the instruction lines. User message: the problem between
// the "# PROBLEM" / "# END PROBLEM" sentinels. Joined with a newline (plus
// the template's final newline) they reproduce the template with
// {problem_text} replaced by the statement, byte for byte.
RenderedPrompt render_symcode(const Problem& problem, const AblationFlags& flags);

// Appends the prior reply as an assistant turn and a user turn carrying the
// debug instruction, the prior script, the status label and the error text.
// Error text is the traceback, else stderr, else the outcome's detail (the
// timeout and missing-answer cases), keeping the last error_budget_bytes.
// Throws InvalidState for a success outcome.
RenderedPrompt render_repair(const RenderedPrompt& history, std::string_view prior_completion,
                             std::string_view prior_script, const ExecutionOutcome& error,
                             std::size_t error_budget_bytes = k_default_error_budget_bytes);

// Repair turn for a reply that had no code block at all.
RenderedPrompt render_format_repair(const RenderedPrompt& history, std::string_view prior_completion);

RenderedPrompt render_cot(const Problem& problem);

// Tail of text within budget bytes, prefixed with a marker when cut.
std::string truncate_error_text(std::string_view text, std::size_t budget_bytes);

}  // namespace symcode
