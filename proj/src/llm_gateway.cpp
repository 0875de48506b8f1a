#include "symcode/llm_gateway.hpp"

#include "symcode/corpus.hpp"
#include "symcode/text_util.hpp"

#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

namespace symcode {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

void CompletionRequest::validate() const
{
    if (messages.empty()) throw std::invalid_argument("completion request has no messages");
    if (messages.front().role == Role::assistant) {
        throw std::invalid_argument("completion request must start with a system or user message");
    }
    if (max_output_tokens <= 0) throw std::invalid_argument("max_output_tokens must be positive");
    if (!(temperature >= 0)) throw std::invalid_argument("temperature must be non-negative");
}

std::string_view to_string(BackendKind k) { return k == BackendKind::live ? "live" : "replay"; }

BackendKind backend_kind_from_string(std::string_view s)
{
    if (s == "live") return BackendKind::live;
    if (s == "replay") return BackendKind::replay;
    throw std::invalid_argument("unknown backend kind: " + std::string(s));
}

namespace {

json messages_json(const std::vector<ChatMessage>& messages)
{
    json out = json::array();
    for (const auto& m : messages) out.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
    return out;
}

std::string sha256_hex(std::string_view data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

}  // namespace

std::string cassette_key(const CompletionRequest& request)
{
    // nlohmann objects keep keys sorted, which makes the rendering canonical.
    const json canonical = {{"model", request.model},
                            {"messages", messages_json(request.messages)},
                            {"temperature", request.temperature},
                            {"max_output_tokens", request.max_output_tokens}};
    return sha256_hex(canonical.dump(-1, ' ', true, json::error_handler_t::replace));
}

std::string request_digest(const CompletionRequest& request)
{
    std::string roles;
    for (const auto& m : request.messages) roles += to_string(m.role).front();
    std::string last = request.messages.empty() ? "" : std::string(utf8_head(request.messages.back().content, 80));
    for (char& c : last)
        if (c == '\n' || c == '\t') c = ' ';
    return request.model + " " + roles + " " + last;
}

std::string to_json_line(const CassetteEntry& e)
{
    // Field order is fixed so cassettes diff cleanly.
    nlohmann::ordered_json j;
    j["key"] = e.key;
    j["request_digest"] = e.request_digest;
    j["text"] = e.text;
    j["prompt_tokens"] = e.prompt_tokens;
    j["completion_tokens"] = e.completion_tokens;
    return j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

CassetteEntry cassette_entry_from_json(std::string_view line, std::size_t line_no)
{
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw SchemaError(line_no, std::string("malformed cassette line: ") + e.what());
    }
    auto str = [&](const char* k) {
        if (!j.is_object() || !j.contains(k) || !j[k].is_string()) {
            throw SchemaError(line_no, std::string("cassette field '") + k + "' missing or not a string");
        }
        return j[k].get<std::string>();
    };
    auto count = [&](const char* k) {
        if (!j.contains(k) || !j[k].is_number_integer() || j[k].get<std::int64_t>() < 0) {
            throw SchemaError(line_no, std::string("cassette field '") + k + "' missing or not a count");
        }
        return j[k].get<std::int64_t>();
    };
    CassetteEntry e;
    e.key = str("key");
    e.request_digest = str("request_digest");
    e.text = str("text");
    e.prompt_tokens = count("prompt_tokens");
    e.completion_tokens = count("completion_tokens");
    return e;
}

ReplayBackend::ReplayBackend(std::vector<CassetteEntry> entries)
{
    for (auto& e : entries) entries_.try_emplace(e.key, std::move(e));
}

ReplayBackend ReplayBackend::from_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorpusIOError("cannot open cassette " + path);
    std::vector<CassetteEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        entries.push_back(cassette_entry_from_json(line, line_no));
    }
    return ReplayBackend(std::move(entries));
}

CompletionResult ReplayBackend::complete(const CompletionRequest& request)
{
    request.validate();
    const std::string key = cassette_key(request);
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw CassetteMiss(key, request.request_tag);
    CompletionResult r;
    r.text = it->second.text;
    r.prompt_tokens = it->second.prompt_tokens;
    r.completion_tokens = it->second.completion_tokens;
    r.latency_ms = 0;
    r.backend = BackendKind::replay;
    return r;
}

RecordingBackend::RecordingBackend(LlmBackend& inner, const std::string& cassette_path)
    : inner_(inner), path_(cassette_path)
{
    std::ofstream probe(path_, std::ios::app);
    if (!probe) throw CorpusIOError("cannot open cassette for appending: " + path_);
}

CompletionResult RecordingBackend::complete(const CompletionRequest& request)
{
    CompletionResult r = inner_.complete(request);
    CassetteEntry e{cassette_key(request), request_digest(request), r.text, r.prompt_tokens, r.completion_tokens};
    std::lock_guard lock(mu_);
    if (written_.emplace(e.key, true).second) {
        std::ofstream out(path_, std::ios::app | std::ios::binary);
        out << to_json_line(e) << '\n';
        out.flush();
        if (!out) throw CorpusIOError("failed to append to cassette " + path_);
    }
    return r;
}

RateLimiter::RateLimiter(double capacity, double refill_per_second)
    : capacity_(capacity), refill_(refill_per_second), tokens_(capacity), last_(Clock::now())
{
    if (!(capacity >= 1)) throw std::invalid_argument("rate limiter capacity must be at least 1");
    if (!(refill_per_second > 0)) throw std::invalid_argument("rate limiter refill rate must be positive");
}

void RateLimiter::acquire()
{
    while (true) {
        Clock::duration wait{};
        {
            std::lock_guard lock(mu_);
            const auto now = Clock::now();
            tokens_ = std::min(capacity_, tokens_ + std::chrono::duration<double>(now - last_).count() * refill_);
            last_ = now;
            if (now < cooldown_) {
                wait = cooldown_ - now;
            } else if (tokens_ >= 1) {
                tokens_ -= 1;
                return;
            } else {
                wait = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>((1 - tokens_) / refill_));
            }
        }
        std::this_thread::sleep_for(wait);
    }
}

void RateLimiter::cool_down_until(Clock::time_point t)
{
    std::lock_guard lock(mu_);
    cooldown_ = std::max(cooldown_, t);
}

LiveBackend::LiveBackend(LiveConfig config)
    : config_(std::move(config)), limiter_(config_.rate_capacity, config_.rate_per_second)
{
    const std::string& url = config_.base_url;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw std::invalid_argument("base_url has no scheme: " + url);
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") throw std::invalid_argument("base_url scheme must be http or https");
    const auto path_start = url.find('/', scheme_end + 3);
    scheme_host_port_ = url.substr(0, path_start);
    path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    if (config_.max_retries < 0) throw std::invalid_argument("max_retries must be non-negative");
}

CompletionResult LiveBackend::complete(const CompletionRequest& request)
{
    request.validate();
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key || !*key) throw AuthError("environment variable " + config_.api_key_env + " is not set", request.request_tag);

    const json body = {{"model", request.model},
                       {"messages", messages_json(request.messages)},
                       {"temperature", request.temperature},
                       {"max_tokens", request.max_output_tokens}};
    const std::string payload = body.dump(-1, ' ', false, json::error_handler_t::replace);
    const std::string path = path_prefix_ + "/chat/completions";

    std::int64_t backoff = config_.backoff_initial_ms;
    std::string last_failure;
    for (int attempt = 0;; ++attempt) {
        limiter_.acquire();
        httplib::Client client(scheme_host_port_);
        client.set_connection_timeout(std::chrono::milliseconds(config_.connect_timeout_ms));
        client.set_read_timeout(std::chrono::milliseconds(config_.read_timeout_ms));
        client.set_write_timeout(std::chrono::milliseconds(config_.read_timeout_ms));
        client.set_bearer_token_auth(key);
        const auto t0 = Clock::now();
        auto res = client.Post(path, payload, "application/json");
        const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();

        std::int64_t retry_after_ms = 0;
        if (!res) {
            last_failure = "transport failure: " + httplib::to_string(res.error());
        } else if (res->status == 200) {
            json reply;
            try {
                reply = json::parse(res->body);
            } catch (const json::exception& e) {
                throw ProviderError(std::string("unparseable response body: ") + e.what(), request.request_tag, 200);
            }
            try {
                CompletionResult r;
                const json& content = reply.at("choices").at(0).at("message").at("content");
                r.text = content.is_null() ? "" : content.get<std::string>();
                const json& usage = reply.at("usage");
                r.prompt_tokens = usage.at("prompt_tokens").get<std::int64_t>();
                r.completion_tokens = usage.at("completion_tokens").get<std::int64_t>();
                r.latency_ms = latency;
                r.backend = BackendKind::live;
                if (r.prompt_tokens < 0 || r.completion_tokens < 0) throw std::domain_error("negative usage");
                if (!r.text.empty() && r.completion_tokens == 0) throw std::domain_error("zero completion tokens");
                return r;
            } catch (const std::exception& e) {
                throw ProviderError(std::string("response lacks content or usage report: ") + e.what(),
                                    request.request_tag, 200);
            }
        } else if (res->status == 401 || res->status == 403) {
            throw AuthError("provider rejected the credential (HTTP " + std::to_string(res->status) + ")",
                            request.request_tag);
        } else if (res->status == 429 || res->status >= 500) {
            last_failure = "HTTP " + std::to_string(res->status);
            if (res->has_header("Retry-After")) {
                try {
                    retry_after_ms = static_cast<std::int64_t>(std::stod(res->get_header_value("Retry-After")) * 1000);
                } catch (const std::exception&) {
                }
            }
        } else {
            throw ProviderError("HTTP " + std::to_string(res->status) + ": " + std::string(utf8_head(res->body, 500)),
                                request.request_tag, res->status);
        }

        if (attempt >= config_.max_retries) {
            throw TransportError("giving up after " + std::to_string(attempt + 1) + " tries; last: " + last_failure,
                                 request.request_tag);
        }
        const std::int64_t wait = std::min(config_.backoff_max_ms, std::max(backoff, retry_after_ms));
        limiter_.cool_down_until(Clock::now() + std::chrono::milliseconds(wait));
        backoff = std::min(config_.backoff_max_ms, backoff * 2);
    }
}

}  // namespace symcode
