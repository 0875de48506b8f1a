#pragma once

#include "symcode/prompting.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace symcode {

struct CompletionRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    int max_output_tokens = 4096;
    double temperature = 0.0;
    // problem_id + "#" + attempt index; for diagnostics only, never hashed.
    std::string request_tag;

    // Throws std::invalid_argument on an empty message list, a first message
    // from the assistant, non-positive max_output_tokens or negative
    // temperature.
    void validate() const;
};

enum class BackendKind { live, replay };

std::string_view to_string(BackendKind k);
BackendKind backend_kind_from_string(std::string_view s);

struct CompletionResult {
    std::string text;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    std::int64_t latency_ms = 0;
    BackendKind backend = BackendKind::replay;

    bool operator==(const CompletionResult&) const = default;
};

class GatewayError : public std::runtime_error {
public:
    GatewayError(const std::string& what, std::string request_tag)
        : std::runtime_error(what + " [request " + request_tag + "]"), tag_(std::move(request_tag))
    {
    }
    const std::string& request_tag() const { return tag_; }

private:
    std::string tag_;
};

class TransportError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class AuthError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class ProviderError : public GatewayError {
public:
    ProviderError(const std::string& what, std::string request_tag, int status = 0)
        : GatewayError(what, std::move(request_tag)), status_(status)
    {
    }
    int status() const { return status_; }

private:
    int status_;
};

class CassetteMiss : public GatewayError {
public:
    CassetteMiss(const std::string& key, std::string request_tag)
        : GatewayError("no cassette entry for key " + key, std::move(request_tag)), key_(key)
    {
    }
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

// Implementations are safe to call from many threads at once.
class LlmBackend {
public:
    virtual ~LlmBackend() = default;
    virtual CompletionResult complete(const CompletionRequest& request) = 0;
};

// Lowercase hex SHA-256 over a canonical JSON rendering of model, message
// roles and texts, temperature and max_output_tokens.
std::string cassette_key(const CompletionRequest& request);

// Short human-readable summary stored next to the key so cassette diffs can
// be read without decoding hashes.
std::string request_digest(const CompletionRequest& request);

struct CassetteEntry {
    std::string key;
    std::string request_digest;
    std::string text;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;

    bool operator==(const CassetteEntry&) const = default;
};

std::string to_json_line(const CassetteEntry& e);
// Throws SchemaError (see corpus.hpp) on malformed lines.
CassetteEntry cassette_entry_from_json(std::string_view line, std::size_t line_no = 0);

// Read-only after construction. Later entries with an existing key are
// ignored, so appending a re-recording never changes earlier answers.
class ReplayBackend : public LlmBackend {
public:
    explicit ReplayBackend(std::vector<CassetteEntry> entries);
    static ReplayBackend from_file(const std::string& path);

    CompletionResult complete(const CompletionRequest& request) override;
    std::size_t size() const { return entries_.size(); }

private:
    std::map<std::string, CassetteEntry> entries_;
};

// Passes requests through and appends each new (key, completion) to a
// cassette file.
class RecordingBackend : public LlmBackend {
public:
    RecordingBackend(LlmBackend& inner, const std::string& cassette_path);

    CompletionResult complete(const CompletionRequest& request) override;

private:
    LlmBackend& inner_;
    std::string path_;
    std::mutex mu_;
    std::map<std::string, bool> written_;
};

// Shared token bucket; also carries a cooldown that any caller can extend
// after a rate-limit response, so every worker backs off together.
class RateLimiter {
public:
    RateLimiter(double capacity, double refill_per_second);

    void acquire();
    void cool_down_until(std::chrono::steady_clock::time_point t);

private:
    std::mutex mu_;
    double capacity_;
    double refill_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
    std::chrono::steady_clock::time_point cooldown_{};
};

struct LiveConfig {
    // e.g. https://api.openai.com/v1; the chat-completions path is appended.
    std::string base_url;
    std::string api_key_env = "OPENAI_API_KEY";
    std::int64_t connect_timeout_ms = 10000;
    std::int64_t read_timeout_ms = 300000;
    int max_retries = 5;
    std::int64_t backoff_initial_ms = 1000;
    std::int64_t backoff_max_ms = 60000;
    double rate_capacity = 4;
    double rate_per_second = 1;
};

// OpenAI-compatible chat-completions over HTTP(S).
class LiveBackend : public LlmBackend {
public:
    explicit LiveBackend(LiveConfig config);

    CompletionResult complete(const CompletionRequest& request) override;

private:
    LiveConfig config_;
    std::string scheme_host_port_;
    std::string path_prefix_;
    RateLimiter limiter_;
};

}  // namespace symcode
