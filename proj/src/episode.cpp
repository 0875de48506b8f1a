#include "symcode/episode.hpp"

#include "symcode/text_util.hpp"

#include <json.hpp>

#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

namespace symcode {

using ojson = nlohmann::ordered_json;

void LoopConfig::validate() const
{
    if (max_attempts < 1 || max_attempts > 5) throw std::invalid_argument("max_attempts must be in [1, 5]");
    limits.validate();
}

std::string_view to_string(FinalStatus s)
{
    switch (s) {
    case FinalStatus::correct: return "correct";
    case FinalStatus::incorrect: return "incorrect";
    case FinalStatus::indeterminate: return "indeterminate";
    case FinalStatus::exhausted: return "exhausted";
    case FinalStatus::infra_error: return "infra_error";
    }
    return "infra_error";
}

FinalStatus final_status_from_string(std::string_view s)
{
    for (auto v : {FinalStatus::correct, FinalStatus::incorrect, FinalStatus::indeterminate, FinalStatus::exhausted,
                   FinalStatus::infra_error})
        if (to_string(v) == s) return v;
    throw std::invalid_argument("unknown final status: " + std::string(s));
}

namespace {

Episode start_episode(const Problem& problem)
{
    Episode e;
    e.problem_id = problem.id;
    e.dataset = problem.dataset;
    e.subject = problem.subject;
    e.answer_kind = problem.answer_kind;
    return e;
}

CompletionRequest make_request(const RenderedPrompt& prompt, const GenerationSettings& gen, int index)
{
    CompletionRequest r;
    r.model = gen.model;
    r.messages = prompt.messages;
    r.max_output_tokens = gen.max_output_tokens;
    r.temperature = gen.temperature;
    r.request_tag = prompt.problem_id + "#" + std::to_string(index);
    return r;
}

void finish(Episode& e)
{
    e.completion_tokens_total = 0;
    for (const auto& a : e.attempts) e.completion_tokens_total += a.completion.completion_tokens;
    e.debug_activated = e.attempts.size() > 1;
    if (e.debug_activated) e.activation_trigger = e.attempts.front().failure;
}

FinalStatus status_for(Verdict v)
{
    switch (v) {
    case Verdict::equivalent: return FinalStatus::correct;
    case Verdict::distinct: return FinalStatus::incorrect;
    case Verdict::indeterminate: return FinalStatus::indeterminate;
    }
    return FinalStatus::indeterminate;
}

}  // namespace

Episode run_episode(const Problem& problem, const AblationFlags& flags, const LoopConfig& loop,
                    const EpisodeServices& services)
{
    loop.validate();
    if (!services.llm || !services.executor) throw std::invalid_argument("episode services are incomplete");
    const int budget = flags.self_debug ? loop.max_attempts : 1;

    Episode episode = start_episode(problem);
    RenderedPrompt prompt = render_symcode(problem, flags);
    episode.final_status = FinalStatus::exhausted;

    for (int i = 0; i < budget; ++i) {
        Attempt& a = episode.attempts.emplace_back();
        a.index = i;
        a.prompt = prompt;
        try {
            a.completion = services.llm->complete(make_request(prompt, services.generation, i));
        } catch (const GatewayError& e) {
            episode.final_status = FinalStatus::infra_error;
            episode.detail = e.what();
            break;
        }

        try {
            a.script = extract_script(a.completion.text);
        } catch (const NoCodeBlock&) {
            a.failure = k_format_violation;
            if (i + 1 < budget) prompt = render_format_repair(prompt, a.completion.text);
            continue;
        }

        a.outcome = services.executor->execute(a.script->source, loop.limits);
        if (a.outcome->status == ExecutionStatus::sandbox_error) {
            episode.final_status = FinalStatus::infra_error;
            episode.detail = "sandbox: " + a.outcome->detail;
            break;
        }
        if (a.outcome->status == ExecutionStatus::success) {
            try {
                a.boxed = extract_boxed(a.outcome->stdout_text);
            } catch (const NoBoxedAnswer&) {
                a.outcome->status = ExecutionStatus::output_missing;
                a.outcome->detail = std::string(k_missing_answer_detail);
            }
        }
        if (a.boxed) {
            episode.verdict = check_equivalence(*a.boxed, problem.ground_truth, services.escalation);
            episode.final_status = status_for(episode.verdict->verdict);
            break;
        }
        a.failure = std::string(to_string(a.outcome->status));
        if (i + 1 < budget) prompt = render_repair(prompt, a.completion.text, a.script->source, *a.outcome);
    }
    finish(episode);
    return episode;
}

Episode run_cot_episode(const Problem& problem, const EpisodeServices& services)
{
    if (!services.llm) throw std::invalid_argument("episode services are incomplete");
    Episode episode = start_episode(problem);
    Attempt& a = episode.attempts.emplace_back();
    a.prompt = render_cot(problem);
    episode.final_status = FinalStatus::exhausted;
    try {
        a.completion = services.llm->complete(make_request(a.prompt, services.generation, 0));
        try {
            a.boxed = extract_boxed(a.completion.text);
            episode.verdict = check_equivalence(*a.boxed, problem.ground_truth, services.escalation);
            episode.final_status = status_for(episode.verdict->verdict);
        } catch (const NoBoxedAnswer&) {
            a.failure = std::string(to_string(ExecutionStatus::output_missing));
        }
    } catch (const GatewayError& e) {
        episode.final_status = FinalStatus::infra_error;
        episode.detail = e.what();
    }
    finish(episode);
    return episode;
}

std::vector<Episode> run_corpus(const std::vector<Problem>& problems, const AblationFlags& flags,
                                const LoopConfig& loop, const EpisodeServices& services, int parallelism,
                                const std::function<void(const Episode&)>& on_episode, Method method)
{
    if (parallelism < 1) throw std::invalid_argument("parallelism must be at least 1");
    loop.validate();
    std::vector<std::optional<Episode>> slots(problems.size());
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::size_t delivered = 0;

    auto run_one = [&](const Problem& p) {
        try {
            return method == Method::cot ? run_cot_episode(p, services) : run_episode(p, flags, loop, services);
        } catch (const std::exception& ex) {
            // Not expected; keep one bad record from sinking the corpus.
            Episode e = start_episode(p);
            e.final_status = FinalStatus::infra_error;
            e.detail = ex.what();
            return e;
        }
    };

    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= problems.size()) return;
            Episode e = run_one(problems[i]);
            std::lock_guard lock(mu);
            slots[i] = std::move(e);
            while (delivered < slots.size() && slots[delivered]) {
                if (on_episode) on_episode(*slots[delivered]);
                ++delivered;
            }
        }
    };

    const int n = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(parallelism), problems.size()));
    if (n <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int t = 0; t < n; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    std::vector<Episode> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

namespace {

template <typename T>
ojson opt(const std::optional<T>& v)
{
    return v ? ojson(*v) : ojson(nullptr);
}

ojson to_ojson(const Attempt& a)
{
    ojson j;
    j["index"] = a.index;
    ojson prompt;
    prompt["kind"] = to_string(a.prompt.kind);
    prompt["messages"] = ojson::array();
    for (const auto& m : a.prompt.messages) {
        ojson msg;
        msg["role"] = to_string(m.role);
        msg["content"] = m.content;
        prompt["messages"].push_back(msg);
    }
    j["prompt"] = prompt;
    ojson completion;
    completion["backend"] = to_string(a.completion.backend);
    completion["text"] = a.completion.text;
    completion["prompt_tokens"] = a.completion.prompt_tokens;
    completion["completion_tokens"] = a.completion.completion_tokens;
    j["completion"] = completion;
    if (a.script) {
        ojson s;
        s["source"] = a.script->source;
        s["fence_count_seen"] = a.script->fence_count_seen;
        s["contract_clean"] = a.script->contract_clean;
        j["script"] = s;
    } else {
        j["script"] = nullptr;
    }
    if (a.outcome) {
        ojson o;
        o["status"] = to_string(a.outcome->status);
        o["stdout"] = a.outcome->stdout_text;
        o["stderr"] = a.outcome->stderr_text;
        o["exception_type"] = opt(a.outcome->exception_type);
        o["traceback"] = opt(a.outcome->traceback);
        o["detail"] = a.outcome->detail;
        j["outcome"] = o;
    } else {
        j["outcome"] = nullptr;
    }
    j["boxed"] = opt(a.boxed);
    j["failure"] = a.failure;
    return j;
}

}  // namespace

std::string to_json_line(const Episode& e)
{
    ojson j;
    j["schema_version"] = k_episode_schema_version;
    j["problem_id"] = e.problem_id;
    j["dataset"] = to_string(e.dataset);
    j["subject"] = opt(e.subject);
    j["answer_kind"] = to_string(e.answer_kind);
    j["final_status"] = to_string(e.final_status);
    if (e.verdict) {
        ojson v;
        v["verdict"] = to_string(e.verdict->verdict);
        v["method"] = to_string(e.verdict->method);
        v["detail"] = e.verdict->detail;
        j["verdict"] = v;
    } else {
        j["verdict"] = nullptr;
    }
    j["completion_tokens_total"] = e.completion_tokens_total;
    j["debug_activated"] = e.debug_activated;
    j["activation_trigger"] = opt(e.activation_trigger);
    j["detail"] = e.detail;
    j["attempts"] = ojson::array();
    for (const auto& a : e.attempts) j["attempts"].push_back(to_ojson(a));
    return j.dump(-1, ' ', false, ojson::error_handler_t::replace);
}

namespace {

class Reader {
public:
    Reader(const ojson& j, std::size_t line, std::string where) : j_(j), line_(line), where_(std::move(where)) {}

    const ojson& at(const char* key) const
    {
        if (!j_.is_object() || !j_.contains(key)) fail(std::string("missing field '") + key + "'");
        return j_.at(key);
    }
    std::string str(const char* key) const
    {
        const auto& v = at(key);
        if (!v.is_string()) fail(std::string("field '") + key + "' must be a string");
        return v.get<std::string>();
    }
    std::optional<std::string> opt_str(const char* key) const
    {
        const auto& v = at(key);
        if (v.is_null()) return std::nullopt;
        return str(key);
    }
    std::int64_t integer(const char* key) const
    {
        const auto& v = at(key);
        if (!v.is_number_integer()) fail(std::string("field '") + key + "' must be an integer");
        return v.get<std::int64_t>();
    }
    bool boolean(const char* key) const
    {
        const auto& v = at(key);
        if (!v.is_boolean()) fail(std::string("field '") + key + "' must be a boolean");
        return v.get<bool>();
    }
    Reader sub(const char* key) const { return Reader(at(key), line_, where_ + "." + key); }
    Reader sub(const ojson& j, const std::string& name) const { return Reader(j, line_, where_ + name); }
    [[noreturn]] void fail(const std::string& msg) const { throw SchemaError(line_, where_ + ": " + msg); }

    template <typename F>
    auto convert(F&& f, const std::string& value) const
    {
        try {
            return f(value);
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
    }

private:
    const ojson& j_;
    std::size_t line_;
    std::string where_;
};

}  // namespace

Episode episode_from_json(std::string_view line, std::size_t line_no)
{
    ojson j;
    try {
        j = ojson::parse(line);
    } catch (const ojson::exception& ex) {
        throw SchemaError(line_no, std::string("malformed episode line: ") + ex.what());
    }
    Reader r(j, line_no, "episode");
    if (r.integer("schema_version") != k_episode_schema_version) {
        r.fail("unsupported schema_version " + std::to_string(r.integer("schema_version")));
    }
    Episode e;
    e.problem_id = r.str("problem_id");
    e.dataset = r.convert(dataset_from_string, r.str("dataset"));
    e.subject = r.opt_str("subject");
    e.answer_kind = r.convert(answer_kind_from_string, r.str("answer_kind"));
    e.final_status = r.convert(final_status_from_string, r.str("final_status"));
    if (!r.at("verdict").is_null()) {
        const Reader v = r.sub("verdict");
        EquivalenceVerdict ev;
        ev.verdict = v.convert(verdict_from_string, v.str("verdict"));
        ev.method = v.convert(verdict_method_from_string, v.str("method"));
        ev.detail = v.str("detail");
        e.verdict = ev;
    }
    e.completion_tokens_total = r.integer("completion_tokens_total");
    e.debug_activated = r.boolean("debug_activated");
    e.activation_trigger = r.opt_str("activation_trigger");
    e.detail = r.str("detail");
    const ojson& attempts = r.at("attempts");
    if (!attempts.is_array()) r.fail("field 'attempts' must be an array");
    for (std::size_t k = 0; k < attempts.size(); ++k) {
        const Reader ar = r.sub(attempts[k], ".attempts[" + std::to_string(k) + "]");
        Attempt a;
        a.index = static_cast<int>(ar.integer("index"));
        const Reader pr = ar.sub("prompt");
        a.prompt.kind = pr.convert(prompt_kind_from_string, pr.str("kind"));
        a.prompt.problem_id = e.problem_id;
        const ojson& msgs = pr.at("messages");
        if (!msgs.is_array()) pr.fail("field 'messages' must be an array");
        for (std::size_t m = 0; m < msgs.size(); ++m) {
            const Reader mr = pr.sub(msgs[m], ".messages[" + std::to_string(m) + "]");
            a.prompt.messages.push_back({mr.convert(role_from_string, mr.str("role")), mr.str("content")});
        }
        const Reader cr = ar.sub("completion");
        a.completion.backend = cr.convert(backend_kind_from_string, cr.str("backend"));
        a.completion.text = cr.str("text");
        a.completion.prompt_tokens = cr.integer("prompt_tokens");
        a.completion.completion_tokens = cr.integer("completion_tokens");
        if (!ar.at("script").is_null()) {
            const Reader sr = ar.sub("script");
            a.script = GuestScript{sr.str("source"), static_cast<int>(sr.integer("fence_count_seen")),
                                   sr.boolean("contract_clean")};
        }
        if (!ar.at("outcome").is_null()) {
            const Reader orr = ar.sub("outcome");
            ExecutionOutcome o;
            o.status = orr.convert(execution_status_from_string, orr.str("status"));
            o.stdout_text = orr.str("stdout");
            o.stderr_text = orr.str("stderr");
            o.exception_type = orr.opt_str("exception_type");
            o.traceback = orr.opt_str("traceback");
            o.detail = orr.str("detail");
            a.outcome = o;
        }
        a.boxed = ar.opt_str("boxed");
        a.failure = ar.str("failure");
        e.attempts.push_back(std::move(a));
    }
    return e;
}

std::vector<Episode> read_episode_log(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorpusIOError("cannot open episode log " + path);
    std::vector<Episode> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        out.push_back(episode_from_json(line, line_no));
    }
    return out;
}

}  // namespace symcode
