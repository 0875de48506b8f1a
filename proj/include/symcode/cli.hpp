#pragma once

#include "symcode/episode.hpp"
#include "symcode/llm_gateway.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace symcode {

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& message)
        : std::runtime_error(path + ": " + message), path_(std::move(path))
    {
    }
    // Dotted location of the offending field, e.g. "backend.base_url".
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

class UnknownEpisodeId : public std::runtime_error {
public:
    explicit UnknownEpisodeId(std::string id)
        : std::runtime_error("episode '" + id + "' has no problem in the corpus"), id_(std::move(id))
    {
    }
    const std::string& id() const { return id_; }

private:
    std::string id_;
};

class InfraError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BackendConfig {
    BackendKind kind = BackendKind::replay;
    std::string model;
    std::string base_url;
    std::string cassette;
    std::string api_key_env = "OPENAI_API_KEY";
    int max_retries = 5;
    std::int64_t connect_timeout_ms = 10000;
    std::int64_t read_timeout_ms = 300000;
    double rate_capacity = 4;
    double rate_per_second = 1;
};

struct RunConfig {
    std::string corpus;
    Dataset dataset = Dataset::custom;
    Method method = Method::symcode;
    BackendConfig backend;
    bool record = false;
    std::string record_cassette;
    int max_output_tokens = 4096;
    double temperature = 0.0;
    AblationFlags flags;
    LoopConfig loop;
    std::vector<std::string> worker;
    std::map<std::string, std::string> worker_env;
    int sandbox_pool = 4;
    bool oracle = false;
    std::int64_t oracle_timeout_ms = 30000;
    int parallelism = 4;
    std::string episode_log;
    std::string report;
    std::string labels;
};

// Parses a JSON config document. Relative paths are taken relative to
// base_dir. Each override is "dotted.path=value", where value is read as
// JSON when it parses and as a plain string otherwise; overrides apply
// before validation. Throws ConfigError naming the field.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir,
                           const std::vector<std::string>& overrides = {});
RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

// Display label of a flag combination: "SymCode+", "No Self-Debug", ...
std::string variant_label(const AblationFlags& flags, Method method = Method::symcode);

// The four cumulative ablation settings in table order.
std::vector<AblationFlags> ablation_ladder();

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1;
inline constexpr int config = 2;
inline constexpr int data = 3;
inline constexpr int infra = 4;
}  // namespace exit_code

// Entry point behind the command-line tool; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace symcode
