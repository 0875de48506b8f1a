#pragma once

// Synthetic episodes for exercising aggregation without running anything.

#include "symcode/episode.hpp"

#include <random>
#include <string>
#include <vector>

namespace symcode::testing {

inline std::vector<Episode> random_episodes(std::uint64_t seed, std::size_t count)
{
    std::mt19937_64 rng(seed);
    const FinalStatus statuses[] = {FinalStatus::correct, FinalStatus::correct, FinalStatus::incorrect,
                                    FinalStatus::indeterminate, FinalStatus::exhausted, FinalStatus::infra_error};
    const char* subjects[] = {"Algebra", "Geometry", "Number Theory", "Prealgebra"};
    const Dataset datasets[] = {Dataset::math500, Dataset::olympiadbench, Dataset::aime};
    std::vector<Episode> out;
    for (std::size_t i = 0; i < count; ++i) {
        Episode e;
        e.problem_id = "p" + std::to_string(seed) + "-" + std::to_string(i);
        e.dataset = datasets[rng() % 3];
        if (rng() % 5) e.subject = subjects[rng() % 4];
        e.answer_kind = rng() % 2 ? AnswerKind::numeric : AnswerKind::expression;
        e.final_status = statuses[rng() % 6];
        const int attempts = 1 + static_cast<int>(rng() % 3);
        for (int k = 0; k < attempts; ++k) {
            Attempt a;
            a.index = k;
            a.completion.completion_tokens = static_cast<std::int64_t>(50 + rng() % 3000);
            if (k + 1 < attempts) a.failure = rng() % 4 ? "exception" : std::string(k_format_violation);
            e.completion_tokens_total += a.completion.completion_tokens;
            e.attempts.push_back(a);
        }
        e.debug_activated = attempts > 1;
        if (e.debug_activated) e.activation_trigger = e.attempts.front().failure;
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace symcode::testing
