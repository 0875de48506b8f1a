#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace symcode {

enum class ExecutionStatus { success, exception, assertion_failure, timeout, output_missing, sandbox_error };

std::string_view to_string(ExecutionStatus s);
ExecutionStatus execution_status_from_string(std::string_view s);

inline bool is_failure(ExecutionStatus s) { return s != ExecutionStatus::success; }

struct ExecutionOutcome {
    ExecutionStatus status = ExecutionStatus::sandbox_error;
    std::string stdout_text;
    std::string stderr_text;
    std::optional<std::string> exception_type;
    std::optional<std::string> traceback;
    std::int64_t duration_ms = 0;
    // Harness-written explanation (timeout limit, protocol fault, missing
    // answer). Deterministic: never contains measured timings.
    std::string detail;

    bool operator==(const ExecutionOutcome&) const = default;
};

}  // namespace symcode
