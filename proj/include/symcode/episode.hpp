#pragma once

#include "symcode/codeblock.hpp"
#include "symcode/corpus.hpp"
#include "symcode/equivalence.hpp"
#include "symcode/llm_gateway.hpp"
#include "symcode/prompting.hpp"
#include "symcode/sandbox.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace symcode {

inline constexpr int k_episode_schema_version = 1;

struct LoopConfig {
    // One initial attempt plus up to max_attempts - 1 repairs.
    int max_attempts = 3;
    ExecutionLimits limits;

    // Throws std::invalid_argument unless max_attempts is in [1, 5] and the
    // limits validate.
    void validate() const;
};

struct GenerationSettings {
    std::string model = "gpt-4.1";
    int max_output_tokens = 4096;
    double temperature = 0.0;
};

struct EpisodeServices {
    LlmBackend* llm = nullptr;
    ScriptExecutor* executor = nullptr;
    EscalationPolicy escalation;
    GenerationSettings generation;
};

enum class FinalStatus { correct, incorrect, indeterminate, exhausted, infra_error };

std::string_view to_string(FinalStatus s);
FinalStatus final_status_from_string(std::string_view s);

// Why an attempt did not yield a scoreable answer. format_violation is a
// reply without a code block; the others mirror ExecutionStatus.
inline constexpr std::string_view k_format_violation = "format_violation";

struct Attempt {
    int index = 0;
    RenderedPrompt prompt;
    CompletionResult completion;
    std::optional<GuestScript> script;
    std::optional<ExecutionOutcome> outcome;
    std::optional<std::string> boxed;
    // Empty when the attempt produced a scoreable answer or is the last one
    // cut short by an infrastructure fault.
    std::string failure;

    bool operator==(const Attempt&) const = default;
};

struct Episode {
    std::string problem_id;
    Dataset dataset = Dataset::custom;
    std::optional<std::string> subject;
    AnswerKind answer_kind = AnswerKind::expression;
    std::vector<Attempt> attempts;
    FinalStatus final_status = FinalStatus::infra_error;
    std::optional<EquivalenceVerdict> verdict;
    std::int64_t completion_tokens_total = 0;
    bool debug_activated = false;
    // Failure kind of the first attempt when a retry followed it, so both the
    // with- and without-format-violation activation tallies can be derived.
    std::optional<std::string> activation_trigger;
    // Infrastructure fault text for infra_error episodes.
    std::string detail;

    bool operator==(const Episode&) const = default;
};

// Text the repair prompt carries when a script ran cleanly but printed no
// \boxed{} answer.
inline constexpr std::string_view k_missing_answer_detail =
    "The script ran without errors but printed no \\boxed{...} answer. The last line of output must be the final "
    "answer in the form \\boxed{answer}.";

// The SymCode+ loop: generate, extract, execute, score, repairing execution
// failures while attempts remain. With flags.self_debug off only one attempt
// is made. Never throws for model, guest or infrastructure faults.
Episode run_episode(const Problem& problem, const AblationFlags& flags, const LoopConfig& loop,
                    const EpisodeServices& services);

// Single-reply chain-of-thought baseline; the boxed answer comes straight
// from the reply text.
Episode run_cot_episode(const Problem& problem, const EpisodeServices& services);

enum class Method { symcode, cot };

// Runs episodes on up to `parallelism` threads. Results come back in corpus
// order, and on_episode (if set) is called in corpus order as soon as each
// prefix is complete, from one thread at a time.
std::vector<Episode> run_corpus(const std::vector<Problem>& problems, const AblationFlags& flags,
                                const LoopConfig& loop, const EpisodeServices& services, int parallelism,
                                const std::function<void(const Episode&)>& on_episode = {},
                                Method method = Method::symcode);

// One JSON object per line. Measured timings (latency, duration) are left
// out so logs from replayed runs are byte-identical.
std::string to_json_line(const Episode& e);
// Throws SchemaError on malformed or future-versioned lines.
Episode episode_from_json(std::string_view line, std::size_t line_no = 0);

std::vector<Episode> read_episode_log(const std::string& path);

}  // namespace symcode
