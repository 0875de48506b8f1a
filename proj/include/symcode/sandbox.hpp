#pragma once

#include "symcode/execution.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <sys/types.h>

namespace symcode {

struct ExecutionLimits {
    std::int64_t wall_timeout_ms = 30000;
    std::uint64_t memory_limit_bytes = 1ULL << 30;
    std::size_t stdout_cap_bytes = 64 * 1024;

    // Throws std::invalid_argument unless wall_timeout_ms >= 100 and
    // stdout_cap_bytes >= 4096 (and memory is non-zero).
    void validate() const;

    bool operator==(const ExecutionLimits&) const = default;
};

class ScriptExecutor {
public:
    virtual ~ScriptExecutor() = default;
    // Never throws for guest or infrastructure faults: those come back as an
    // outcome (infrastructure faults as status sandbox_error).
    virtual ExecutionOutcome execute(std::string_view script, const ExecutionLimits& limits) = 0;
};

struct SandboxConfig {
    // Worker command line; argv[0] is resolved against PATH when it has no '/'.
    std::vector<std::string> worker_argv;
    // Added to (or overriding) the inherited environment of the worker.
    std::map<std::string, std::string> extra_env;
    int pool_size = 4;
    std::int64_t grace_ms = 500;
    // Called in the parent right after fork with the worker pid, which is
    // also its process-group id. Meant for tests.
    std::function<void(pid_t)> on_spawn;
};

// Report channel file descriptor inside the worker; also exported to it as
// SYMCODE_REPORT_FD.
inline constexpr int k_report_fd = 3;

// Pure mapping from the bytes read off the report channel (plus whether the
// wall clock expired) to an outcome. The report must be exactly one JSON
// object {ok, exc, tb, stdout, duration_ms} terminated by a newline.
// stdout is kept whole here; execute() applies the cap.
ExecutionOutcome classify(std::string_view report_bytes, bool timed_out);

// Keeps the last cap bytes of text (on a UTF-8 boundary), prefixing a marker
// when anything was dropped. The tail is kept because the answer line and
// the innermost error frames come last.
std::string cap_stream(std::string_view text, std::size_t cap_bytes);

// PATH lookup as execvp would do it; names containing '/' are checked as
// given. Empty when nothing executable is found.
std::optional<std::string> resolve_executable(const std::string& name);

// One OS process per execution: own process group, address-space and CPU
// rlimits, request on stdin, report on fd 3. On Linux the harness becomes a
// child subreaper so grandchildren can be reaped after the group is killed.
class Sandbox : public ScriptExecutor {
public:
    explicit Sandbox(SandboxConfig config);

    ExecutionOutcome execute(std::string_view script, const ExecutionLimits& limits) override;

    const SandboxConfig& config() const { return config_; }

private:
    class Slots {
    public:
        explicit Slots(int n) : free_(n) {}
        void acquire();
        void release();

    private:
        std::mutex mu_;
        std::condition_variable cv_;
        int free_;
    };

    ExecutionOutcome run_child(std::string_view script, const ExecutionLimits& limits);

    SandboxConfig config_;
    Slots slots_;
};

}  // namespace symcode
