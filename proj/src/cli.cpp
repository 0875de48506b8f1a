#include "symcode/cli.hpp"

#include "symcode/metrics.hpp"
#include "symcode/oracle.hpp"
#include "symcode/sandbox.hpp"
#include "symcode/text_util.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

namespace symcode {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Typed, path-aware access to one JSON object of the config, rejecting keys
// it was not asked about.
class Section {
public:
    Section(const json* j, std::string path) : j_(j), path_(std::move(path))
    {
        if (j_ && !j_->is_object()) throw ConfigError(display(), "must be an object");
    }

    bool has(const std::string& key) const { return j_ && j_->contains(key) && !(*j_)[key].is_null(); }

    Section section(const std::string& key)
    {
        seen_.insert(key);
        return Section(has(key) ? &(*j_)[key] : nullptr, child(key));
    }

    std::string str(const std::string& key, std::optional<std::string> fallback = std::nullopt)
    {
        const json* v = get(key);
        if (!v) return required(key, fallback);
        if (!v->is_string()) throw ConfigError(child(key), "must be a string");
        return v->get<std::string>();
    }
    bool boolean(const std::string& key, bool fallback)
    {
        const json* v = get(key);
        if (!v) return fallback;
        if (!v->is_boolean()) throw ConfigError(child(key), "must be true or false");
        return v->get<bool>();
    }
    std::int64_t integer(const std::string& key, std::int64_t fallback)
    {
        const json* v = get(key);
        if (!v) return fallback;
        if (!v->is_number_integer()) throw ConfigError(child(key), "must be an integer");
        return v->get<std::int64_t>();
    }
    double number(const std::string& key, double fallback)
    {
        const json* v = get(key);
        if (!v) return fallback;
        if (!v->is_number()) throw ConfigError(child(key), "must be a number");
        return v->get<double>();
    }
    std::vector<std::string> strings(const std::string& key)
    {
        const json* v = get(key);
        if (!v) return {};
        if (!v->is_array()) throw ConfigError(child(key), "must be an array of strings");
        std::vector<std::string> out;
        for (std::size_t i = 0; i < v->size(); ++i) {
            if (!(*v)[i].is_string()) throw ConfigError(child(key) + "[" + std::to_string(i) + "]", "must be a string");
            out.push_back((*v)[i].get<std::string>());
        }
        return out;
    }
    std::map<std::string, std::string> string_map(const std::string& key)
    {
        const json* v = get(key);
        if (!v) return {};
        if (!v->is_object()) throw ConfigError(child(key), "must be an object of strings");
        std::map<std::string, std::string> out;
        for (const auto& [k, val] : v->items()) {
            if (!val.is_string()) throw ConfigError(child(key) + "." + k, "must be a string");
            out[k] = val.get<std::string>();
        }
        return out;
    }

    template <typename T, typename F>
    T convert(const std::string& key, F&& from_string, std::optional<std::string> fallback = std::nullopt)
    {
        const std::string s = str(key, std::move(fallback));
        try {
            return from_string(s);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(child(key), e.what());
        }
    }

    void reject_unknown() const
    {
        if (!j_) return;
        for (const auto& [k, _] : j_->items())
            if (!seen_.count(k)) throw ConfigError(child(k), "unknown field");
    }

    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const json* get(const std::string& key)
    {
        seen_.insert(key);
        return has(key) ? &(*j_)[key] : nullptr;
    }
    std::string required(const std::string& key, const std::optional<std::string>& fallback) const
    {
        if (fallback) return *fallback;
        throw ConfigError(child(key), "is required");
    }
    std::string display() const { return path_.empty() ? "config" : path_; }

    const json* j_;
    std::string path_;
    std::set<std::string> seen_;
};

void apply_override(json& doc, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like path=value");
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw;
    }
    json* node = &doc;
    std::string_view rest = path;
    while (true) {
        const auto dot = rest.find('.');
        const std::string key(rest.substr(0, dot));
        if (key.empty()) throw ConfigError(path, "empty path segment in override");
        if (!node->is_object()) *node = json::object();
        if (dot == std::string_view::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        rest.remove_prefix(dot + 1);
    }
}

std::string resolve(const fs::path& base, const std::string& p)
{
    if (p.empty()) return p;
    const fs::path path(p);
    return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text, const fs::path& base_dir,
                           const std::vector<std::string>& overrides)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError("config", std::string("not valid JSON: ") + e.what());
    }
    for (const auto& o : overrides) apply_override(doc, o);

    RunConfig c;
    Section root(&doc, "");
    c.corpus = resolve(base_dir, root.str("corpus"));
    c.dataset = root.convert<Dataset>("dataset", dataset_from_string, "custom");
    const std::string method = root.str("method", "symcode");
    if (method == "symcode") c.method = Method::symcode;
    else if (method == "cot") c.method = Method::cot;
    else throw ConfigError("method", "must be \"symcode\" or \"cot\"");

    {
        Section b = root.section("backend");
        if (!root.has("backend")) throw ConfigError("backend", "is required");
        c.backend.kind = b.convert<BackendKind>("kind", backend_kind_from_string);
        c.backend.model = b.str("model");
        if (c.backend.kind == BackendKind::live) {
            c.backend.base_url = b.str("base_url");
            c.backend.api_key_env = b.str("api_key_env", c.backend.api_key_env);
            c.backend.max_retries = static_cast<int>(b.integer("max_retries", c.backend.max_retries));
            c.backend.connect_timeout_ms = b.integer("connect_timeout_ms", c.backend.connect_timeout_ms);
            c.backend.read_timeout_ms = b.integer("read_timeout_ms", c.backend.read_timeout_ms);
            c.backend.rate_capacity = b.number("rate_capacity", c.backend.rate_capacity);
            c.backend.rate_per_second = b.number("rate_per_second", c.backend.rate_per_second);
            if (b.has("cassette")) throw ConfigError("backend.cassette", "only a replay backend reads a cassette");
            if (c.backend.max_retries < 0) throw ConfigError("backend.max_retries", "must be non-negative");
            if (c.backend.rate_capacity < 1) throw ConfigError("backend.rate_capacity", "must be at least 1");
            if (!(c.backend.rate_per_second > 0)) throw ConfigError("backend.rate_per_second", "must be positive");
            if (c.backend.base_url.rfind("http://", 0) != 0 && c.backend.base_url.rfind("https://", 0) != 0) {
                throw ConfigError("backend.base_url", "must start with http:// or https://");
            }
        } else {
            c.backend.cassette = resolve(base_dir, b.str("cassette"));
            if (b.has("base_url")) throw ConfigError("backend.base_url", "only a live backend has a base_url");
        }
        b.reject_unknown();
    }
    {
        Section r = root.section("record");
        c.record = r.boolean("enabled", false);
        if (r.has("cassette")) c.record_cassette = resolve(base_dir, r.str("cassette"));
        r.reject_unknown();
        if (c.record && c.backend.kind == BackendKind::replay) {
            throw ConfigError("record.enabled", "a replay backend cannot record; recording requires a live backend");
        }
        if (c.record && c.record_cassette.empty()) throw ConfigError("record.cassette", "is required when recording");
    }
    {
        Section g = root.section("generation");
        c.max_output_tokens = static_cast<int>(g.integer("max_output_tokens", c.max_output_tokens));
        c.temperature = g.number("temperature", c.temperature);
        g.reject_unknown();
        if (c.max_output_tokens <= 0) throw ConfigError("generation.max_output_tokens", "must be positive");
        if (c.temperature < 0) throw ConfigError("generation.temperature", "must be non-negative");
    }
    {
        Section f = root.section("flags");
        c.flags.self_debug = f.boolean("self_debug", true);
        c.flags.verification = f.boolean("verification", true);
        c.flags.symbolic = f.boolean("symbolic", true);
        f.reject_unknown();
    }
    {
        Section l = root.section("loop");
        c.loop.max_attempts = static_cast<int>(l.integer("max_attempts", c.loop.max_attempts));
        l.reject_unknown();
        if (c.loop.max_attempts < 1 || c.loop.max_attempts > 5) {
            throw ConfigError("loop.max_attempts", "must be between 1 and 5");
        }
    }
    {
        Section l = root.section("limits");
        c.loop.limits.wall_timeout_ms = l.integer("wall_timeout_ms", c.loop.limits.wall_timeout_ms);
        const auto mem = l.integer("memory_limit_bytes", static_cast<std::int64_t>(c.loop.limits.memory_limit_bytes));
        const auto cap = l.integer("stdout_cap_bytes", static_cast<std::int64_t>(c.loop.limits.stdout_cap_bytes));
        l.reject_unknown();
        if (c.loop.limits.wall_timeout_ms < 100) throw ConfigError("limits.wall_timeout_ms", "must be at least 100");
        if (mem <= 0) throw ConfigError("limits.memory_limit_bytes", "must be positive");
        if (cap < 4096) throw ConfigError("limits.stdout_cap_bytes", "must be at least 4096");
        c.loop.limits.memory_limit_bytes = static_cast<std::uint64_t>(mem);
        c.loop.limits.stdout_cap_bytes = static_cast<std::size_t>(cap);
    }
    {
        Section s = root.section("sandbox");
        c.worker = s.strings("worker");
        c.worker_env = s.string_map("env");
        c.sandbox_pool = static_cast<int>(s.integer("pool_size", c.sandbox_pool));
        s.reject_unknown();
        if (!c.worker.empty() && c.worker.front().find('/') != std::string::npos) {
            c.worker.front() = resolve(base_dir, c.worker.front());
        }
        if (c.sandbox_pool < 1) throw ConfigError("sandbox.pool_size", "must be at least 1");
    }
    {
        Section o = root.section("oracle");
        c.oracle = o.boolean("enabled", false);
        c.oracle_timeout_ms = o.integer("wall_timeout_ms", c.oracle_timeout_ms);
        o.reject_unknown();
        if (c.oracle_timeout_ms < 100) throw ConfigError("oracle.wall_timeout_ms", "must be at least 100");
    }
    if ((c.method == Method::symcode || c.oracle) && c.worker.empty()) {
        throw ConfigError("sandbox.worker", "is required to execute scripts");
    }
    c.parallelism = static_cast<int>(root.integer("parallelism", c.parallelism));
    if (c.parallelism < 1) throw ConfigError("parallelism", "must be at least 1");
    {
        Section o = root.section("output");
        if (o.has("episode_log")) c.episode_log = resolve(base_dir, o.str("episode_log"));
        if (o.has("report")) c.report = resolve(base_dir, o.str("report"));
        if (o.has("labels")) c.labels = resolve(base_dir, o.str("labels"));
        o.reject_unknown();
    }
    root.reject_unknown();

    if (!fs::exists(c.corpus)) throw ConfigError("corpus", "no such file: " + c.corpus);
    if (c.backend.kind == BackendKind::replay && !fs::exists(c.backend.cassette)) {
        throw ConfigError("backend.cassette", "no such file: " + c.backend.cassette);
    }
    return c;
}

RunConfig load_run_config(const fs::path& path, const std::vector<std::string>& overrides)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config", "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), path.parent_path(), overrides);
}

std::vector<AblationFlags> ablation_ladder()
{
    return {{true, true, true}, {false, true, true}, {false, false, true}, {false, false, false}};
}

std::string variant_label(const AblationFlags& f, Method method)
{
    if (method == Method::cot) return "CoT";
    const auto ladder = ablation_ladder();
    if (f == ladder[0]) return "SymCode+";
    if (f == ladder[1]) return "No Self-Debug";
    if (f == ladder[2]) return "No Verification";
    if (f == ladder[3]) return "No SymPy (Numeric Python)";
    auto b = [](bool v) { return v ? "on" : "off"; };
    return std::string("SymCode (self_debug ") + b(f.self_debug) + ", verification " + b(f.verification) +
           ", symbolic " + b(f.symbolic) + ")";
}

namespace {

// Owns the backends, sandbox and oracle for one invocation.
struct Runtime {
    std::unique_ptr<LlmBackend> backend;
    std::unique_ptr<RecordingBackend> recorder;
    std::unique_ptr<Sandbox> sandbox;
    std::unique_ptr<ShimOracle> oracle;
    EpisodeServices services;
};

std::unique_ptr<Runtime> build_runtime(const RunConfig& c, bool need_llm)
{
    auto rt = std::make_unique<Runtime>();
    if (need_llm) {
        if (c.backend.kind == BackendKind::live) {
            LiveConfig lc;
            lc.base_url = c.backend.base_url;
            lc.api_key_env = c.backend.api_key_env;
            lc.max_retries = c.backend.max_retries;
            lc.connect_timeout_ms = c.backend.connect_timeout_ms;
            lc.read_timeout_ms = c.backend.read_timeout_ms;
            lc.rate_capacity = c.backend.rate_capacity;
            lc.rate_per_second = c.backend.rate_per_second;
            if (!std::getenv(lc.api_key_env.c_str())) {
                throw ConfigError("backend.api_key_env", "environment variable " + lc.api_key_env + " is not set");
            }
            rt->backend = std::make_unique<LiveBackend>(lc);
        } else {
            rt->backend = std::make_unique<ReplayBackend>(ReplayBackend::from_file(c.backend.cassette));
        }
        rt->services.llm = rt->backend.get();
        if (c.record) {
            rt->recorder = std::make_unique<RecordingBackend>(*rt->backend, c.record_cassette);
            rt->services.llm = rt->recorder.get();
        }
    }
    if (!c.worker.empty()) {
        if (!resolve_executable(c.worker.front())) {
            throw InfraError("sandbox worker not found: " + c.worker.front());
        }
        SandboxConfig sc;
        sc.worker_argv = c.worker;
        sc.extra_env = c.worker_env;
        sc.pool_size = c.sandbox_pool;
        rt->sandbox = std::make_unique<Sandbox>(sc);
        rt->services.executor = rt->sandbox.get();
        if (c.oracle) {
            ExecutionLimits ol = c.loop.limits;
            ol.wall_timeout_ms = c.oracle_timeout_ms;
            rt->oracle = std::make_unique<ShimOracle>(*rt->sandbox, ol);
            rt->services.escalation.oracle = rt->oracle.get();
        }
    }
    rt->services.generation.model = c.backend.model;
    rt->services.generation.max_output_tokens = c.max_output_tokens;
    rt->services.generation.temperature = c.temperature;
    return rt;
}

std::vector<Problem> load_problems(const RunConfig& c)
{
    return load_corpus(c.corpus, c.dataset);
}

struct RunResult {
    std::vector<Episode> episodes;  // corpus order, previously logged ones included
    std::size_t resumed = 0;
};

// Runs one configuration, resuming from and appending to the episode log.
RunResult execute_run(const RunConfig& c, const AblationFlags& flags, const std::string& log_path, Runtime& rt,
                      std::ostream& err)
{
    const std::vector<Problem> problems = load_problems(c);
    std::map<std::string, Episode> logged;
    if (!log_path.empty() && fs::exists(log_path)) {
        for (auto& e : read_episode_log(log_path)) logged.emplace(e.problem_id, std::move(e));
    }
    std::vector<Problem> todo;
    for (const auto& p : problems)
        if (!logged.count(p.id)) todo.push_back(p);

    std::ofstream log;
    if (!log_path.empty()) {
        if (fs::path(log_path).has_parent_path()) fs::create_directories(fs::path(log_path).parent_path());
        log.open(log_path, std::ios::app | std::ios::binary);
        if (!log) throw CorpusIOError("cannot open episode log " + log_path);
    }
    std::size_t done = 0;
    auto on_episode = [&](const Episode& e) {
        ++done;
        if (log.is_open()) {
            log << to_json_line(e) << '\n';
            log.flush();
        }
        err << "[" << done << "/" << todo.size() << "] " << e.problem_id << ": " << to_string(e.final_status) << " ("
            << e.attempts.size() << (e.attempts.size() == 1 ? " attempt" : " attempts") << ")\n";
    };
    std::vector<Episode> fresh = run_corpus(todo, flags, c.loop, rt.services, c.parallelism, on_episode, c.method);

    RunResult r;
    r.resumed = logged.size();
    std::size_t k = 0;
    for (const auto& p : problems) {
        if (auto it = logged.find(p.id); it != logged.end()) {
            r.episodes.push_back(it->second);
        } else {
            r.episodes.push_back(std::move(fresh[k++]));
        }
    }
    return r;
}

std::string sibling_log(const std::string& log_path, const std::string& tag)
{
    if (log_path.empty()) return {};
    fs::path p(log_path);
    const std::string ext = p.has_extension() ? p.extension().string() : ".jsonl";
    return (p.parent_path() / (p.stem().string() + "." + tag + ext)).string();
}

std::string slug(const std::string& label)
{
    std::string s;
    for (char ch : label) {
        if (std::isalnum(static_cast<unsigned char>(ch))) s += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        else if (!s.empty() && s.back() != '_') s += '_';
    }
    while (!s.empty() && s.back() == '_') s.pop_back();
    return s;
}

void write_text(const std::string& path, const std::string& text)
{
    if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw CorpusIOError("cannot write " + path);
}

std::size_t count_infra(const std::vector<Episode>& eps)
{
    std::size_t n = 0;
    for (const auto& e : eps) n += e.final_status == FinalStatus::infra_error;
    return n;
}

int finish_status(std::size_t infra, std::ostream& err)
{
    if (infra == 0) return exit_code::ok;
    err << "warning: " << infra << " episode(s) ended in infra_error; see the episode log for details\n";
    return exit_code::infra;
}

int cmd_run(const RunConfig& c, std::ostream& out, std::ostream& err)
{
    auto rt = build_runtime(c, true);
    const RunResult r = execute_run(c, c.flags, c.episode_log, *rt, err);
    if (r.resumed) err << "resumed: " << r.resumed << " episode(s) already logged\n";
    const LabelMap labels = c.labels.empty() ? LabelMap{} : load_labels(c.labels);
    std::size_t infra = count_infra(r.episodes);
    if (r.episodes.empty()) {
        out << "episodes: 0\n";
        return exit_code::ok;
    }
    const RunMetrics m = aggregate(r.episodes, c.labels.empty() ? nullptr : &labels);
    out << render_summary(m);
    if (!c.report.empty()) write_text(c.report, render_report({{variant_label(c.flags, c.method), m}}));
    return finish_status(infra, err);
}

int cmd_ablate(const RunConfig& c, std::ostream& out, std::ostream& err)
{
    if (c.method != Method::symcode) throw ConfigError("method", "ablation applies to the symcode method only");
    auto rt = build_runtime(c, true);
    const LabelMap labels = c.labels.empty() ? LabelMap{} : load_labels(c.labels);
    std::vector<ReportEntry> entries;
    std::size_t infra = 0;
    for (const auto& flags : ablation_ladder()) {
        const std::string label = variant_label(flags);
        err << "== " << label << "\n";
        const RunResult r = execute_run(c, flags, sibling_log(c.episode_log, slug(label)), *rt, err);
        if (r.episodes.empty()) throw std::invalid_argument("corpus is empty");
        infra += count_infra(r.episodes);
        entries.push_back({label, aggregate(r.episodes, c.labels.empty() ? nullptr : &labels)});
    }
    const std::string doc = render_report(entries);
    out << doc;
    if (!c.report.empty()) write_text(c.report, doc);
    return finish_status(infra, err);
}

// Re-judges the stored boxed answers; statuses without an answer stay.
int cmd_score(const std::string& log_path, const std::string& corpus_path, Dataset dataset,
              const std::string& labels_path, const std::string& output_path, const RunConfig* oracle_cfg,
              std::ostream& out)
{
    std::vector<Episode> eps = read_episode_log(log_path);
    std::map<std::string, Problem> problems;
    for (auto& p : load_corpus(corpus_path, dataset)) problems.emplace(p.id, std::move(p));

    std::unique_ptr<Runtime> rt;
    EscalationPolicy policy;
    if (oracle_cfg && oracle_cfg->oracle) {
        rt = build_runtime(*oracle_cfg, false);
        policy = rt->services.escalation;
    }
    for (auto& e : eps) {
        const auto it = problems.find(e.problem_id);
        if (it == problems.end()) throw UnknownEpisodeId(e.problem_id);
        std::optional<std::string> boxed;
        for (const auto& a : e.attempts)
            if (a.boxed) boxed = a.boxed;
        if (!boxed) continue;
        e.verdict = check_equivalence(*boxed, it->second.ground_truth, policy);
        switch (e.verdict->verdict) {
        case Verdict::equivalent: e.final_status = FinalStatus::correct; break;
        case Verdict::distinct: e.final_status = FinalStatus::incorrect; break;
        case Verdict::indeterminate: e.final_status = FinalStatus::indeterminate; break;
        }
    }
    if (eps.empty()) {
        out << "episodes: 0\n";
        return exit_code::ok;
    }
    const LabelMap labels = labels_path.empty() ? LabelMap{} : load_labels(labels_path);
    out << render_summary(aggregate(eps, labels_path.empty() ? nullptr : &labels));
    if (!output_path.empty()) {
        std::string text;
        for (const auto& e : eps) text += to_json_line(e) + "\n";
        write_text(output_path, text);
    }
    return exit_code::ok;
}

int cmd_report(const std::vector<std::string>& specs, const std::string& labels_path, const std::string& output_path,
               std::ostream& out)
{
    const LabelMap labels = labels_path.empty() ? LabelMap{} : load_labels(labels_path);
    std::vector<ReportEntry> entries;
    for (const auto& spec : specs) {
        const auto eq = spec.find('=');
        const std::string label = eq == std::string::npos ? fs::path(spec).stem().string() : spec.substr(0, eq);
        const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
        const auto eps = read_episode_log(path);
        if (eps.empty()) throw SchemaError(0, "episode log " + path + " is empty");
        entries.push_back({label, aggregate(eps, labels_path.empty() ? nullptr : &labels)});
    }
    const std::string doc = render_report(entries);
    out << doc;
    if (!output_path.empty()) write_text(output_path, doc);
    return exit_code::ok;
}

struct RunOptions {
    std::string config;
    std::vector<std::string> overrides;
    std::string corpus, cassette, episode_log, report, record_cassette;
    int parallelism = 0;
    int max_attempts = 0;
    bool no_self_debug = false, no_verification = false, no_symbolic = false;

    void attach(CLI::App* cmd)
    {
        cmd->add_option("-c,--config", config, "JSON run configuration")->required();
        cmd->add_option("--set", overrides, "Override a config field: dotted.path=value (repeatable)");
        cmd->add_option("--corpus", corpus, "Corpus JSONL (overrides the config)");
        cmd->add_option("--cassette", cassette, "Replay cassette (overrides backend.cassette)");
        cmd->add_option("--episode-log", episode_log, "Episode log to append to");
        cmd->add_option("--report", report, "Write the markdown report here");
        cmd->add_option("--parallelism", parallelism, "Concurrent episodes")->check(CLI::PositiveNumber);
        cmd->add_option("--max-attempts", max_attempts, "Attempt budget per episode")->check(CLI::Range(1, 5));
        cmd->add_flag("--no-self-debug", no_self_debug, "Single attempt per problem");
        cmd->add_flag("--no-verification", no_verification, "Drop the verification instructions");
        cmd->add_flag("--no-symbolic", no_symbolic, "Ask for plain numeric Python instead of SymPy");
    }

    // Flag overrides are relative to the working directory, so absolutize
    // them before they meet the config's base directory.
    std::vector<std::string> all_overrides() const
    {
        auto abs = [](const std::string& p) { return json(fs::absolute(p).string()).dump(); };
        std::vector<std::string> o = overrides;
        if (!corpus.empty()) o.push_back("corpus=" + abs(corpus));
        if (!cassette.empty()) o.push_back("backend.cassette=" + abs(cassette));
        if (!episode_log.empty()) o.push_back("output.episode_log=" + abs(episode_log));
        if (!report.empty()) o.push_back("output.report=" + abs(report));
        if (!record_cassette.empty()) o.push_back("record.cassette=" + abs(record_cassette));
        if (parallelism) o.push_back("parallelism=" + std::to_string(parallelism));
        if (max_attempts) o.push_back("loop.max_attempts=" + std::to_string(max_attempts));
        if (no_self_debug) o.push_back("flags.self_debug=false");
        if (no_verification) o.push_back("flags.verification=false");
        if (no_symbolic) o.push_back("flags.symbolic=false");
        return o;
    }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Benchmark harness for code-generating math solvers with execution feedback", "symcode"};
    app.require_subcommand(1);

    RunOptions run_opts, record_opts, ablate_opts;
    auto* run = app.add_subcommand("run", "Run the corpus and append to the episode log");
    run_opts.attach(run);
    auto* record = app.add_subcommand("record", "Run against a live backend and record a cassette");
    record_opts.attach(record);
    record->add_option("--record-cassette", record_opts.record_cassette, "Cassette file to append to");
    auto* ablate = app.add_subcommand("ablate", "Run the four cumulative ablation configurations");
    ablate_opts.attach(ablate);

    std::string score_log, score_corpus, score_dataset = "custom", score_labels, score_output, score_config;
    auto* score = app.add_subcommand("score", "Re-score the boxed answers stored in an episode log");
    score->add_option("--log", score_log, "Episode log")->required();
    score->add_option("--corpus", score_corpus, "Corpus JSONL with the ground truth")->required();
    score->add_option("--dataset", score_dataset, "Dataset tag for the corpus");
    score->add_option("--labels", score_labels, "Error-label sidecar JSONL");
    score->add_option("--output", score_output, "Write the re-scored log here");
    score->add_option("-c,--config", score_config, "Run configuration supplying the oracle settings");

    std::vector<std::string> report_logs;
    std::string report_labels, report_output;
    auto* report = app.add_subcommand("report", "Render comparison tables from episode logs");
    report->add_option("--log", report_logs, "LABEL=PATH of an episode log (repeatable, in row order)")->required();
    report->add_option("--labels", report_labels, "Error-label sidecar JSONL");
    report->add_option("--output", report_output, "Write the report here as well");

    std::vector<std::string> argv_store = {"symcode"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_code::ok : exit_code::usage;
    }

    try {
        if (run->parsed()) return cmd_run(load_run_config(run_opts.config, run_opts.all_overrides()), out, err);
        if (record->parsed()) {
            auto o = record_opts.all_overrides();
            o.push_back("record.enabled=true");
            const RunConfig c = load_run_config(record_opts.config, o);
            if (c.backend.kind != BackendKind::live) {
                throw ConfigError("backend.kind", "record requires a live backend");
            }
            return cmd_run(c, out, err);
        }
        if (ablate->parsed()) return cmd_ablate(load_run_config(ablate_opts.config, ablate_opts.all_overrides()), out, err);
        if (score->parsed()) {
            Dataset d;
            try {
                d = dataset_from_string(score_dataset);
            } catch (const std::invalid_argument& e) {
                throw ConfigError("dataset", e.what());
            }
            std::optional<RunConfig> cfg;
            if (!score_config.empty()) cfg = load_run_config(score_config);
            return cmd_score(score_log, score_corpus, d, score_labels, score_output, cfg ? &*cfg : nullptr, out);
        }
        if (report->parsed()) return cmd_report(report_logs, report_labels, report_output, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_code::config;
    } catch (const UnknownEpisodeId& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::data;
    } catch (const SchemaError& e) {
        err << "schema error: " << e.what() << "\n";
        return exit_code::data;
    } catch (const CorpusIOError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::data;
    } catch (const InfraError& e) {
        err << "infrastructure error: " << e.what() << "\n";
        return exit_code::infra;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::infra;
    }
    return exit_code::usage;
}

}  // namespace symcode
