#include "symcode/sandbox.hpp"

#include "symcode/text_util.hpp"

#include <json.hpp>

#include <cerrno>
#include <csignal>
#include <cstring>
#include <optional>
#include <stdexcept>

#include <fcntl.h>
#include <poll.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>
#ifdef __linux__
#include <sys/prctl.h>
#endif

extern char** environ;

namespace symcode {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

void ExecutionLimits::validate() const
{
    if (wall_timeout_ms < 100) throw std::invalid_argument("wall_timeout_ms must be at least 100");
    if (stdout_cap_bytes < 4096) throw std::invalid_argument("stdout_cap_bytes must be at least 4096");
    if (memory_limit_bytes == 0) throw std::invalid_argument("memory_limit_bytes must be positive");
}

namespace {

constexpr std::string_view k_cap_marker = "[output truncated]\n";

ExecutionOutcome infra(std::string detail)
{
    ExecutionOutcome o;
    o.status = ExecutionStatus::sandbox_error;
    o.detail = std::move(detail);
    return o;
}

std::string timeout_detail(std::int64_t limit_ms)
{
    return "Execution exceeded the wall-clock limit of " + std::to_string(limit_ms) + " ms and was terminated.";
}

std::string describe_wait_status(int status)
{
    if (WIFEXITED(status)) return "exit code " + std::to_string(WEXITSTATUS(status));
    if (WIFSIGNALED(status)) {
        const char* name = strsignal(WTERMSIG(status));
        return "signal " + std::to_string(WTERMSIG(status)) + (name ? std::string(" (") + name + ")" : "");
    }
    return "status " + std::to_string(status);
}

void close_fd(int& fd)
{
    if (fd >= 0) {
        ::close(fd);
        fd = -1;
    }
}

struct Pipe {
    int read = -1;
    int write = -1;

    bool open()
    {
        int fds[2];
        if (::pipe2(fds, O_CLOEXEC) != 0) return false;
        read = fds[0];
        write = fds[1];
        return true;
    }
    void close()
    {
        close_fd(read);
        close_fd(write);
    }
};

struct Pipes {
    Pipe in, out, err, report, exec_status;
    ~Pipes()
    {
        for (Pipe* p : {&in, &out, &err, &report, &exec_status}) p->close();
    }
};

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

// Accumulates a stream, holding at most about twice the cap in memory while
// counting every byte seen.
class StreamBuffer {
public:
    explicit StreamBuffer(std::size_t cap) : cap_(cap) {}

    void append(const char* data, std::size_t n)
    {
        total_ += n;
        data_.append(data, n);
        if (data_.size() > 2 * cap_) data_.erase(0, data_.size() - cap_);
    }
    std::string text() const
    {
        if (total_ <= data_.size()) return data_;
        // Some prefix was already dropped; make sure the marker shows.
        return std::string(k_cap_marker) + data_;
    }

private:
    std::size_t cap_;
    std::size_t total_ = 0;
    std::string data_;
};

// Drains fd until it would block. Returns false at end of file or error.
template <typename Sink>
bool drain(int fd, Sink&& sink)
{
    char buf[16384];
    while (true) {
        const ssize_t n = ::read(fd, buf, sizeof buf);
        if (n > 0) {
            sink(buf, static_cast<std::size_t>(n));
            continue;
        }
        if (n == 0) return false;
        if (errno == EINTR) continue;
        return errno == EAGAIN || errno == EWOULDBLOCK;
    }
}

void reap_group(pid_t pgid)
{
#ifdef __linux__
    // Group members orphaned by the worker were reparented to us (we are a
    // subreaper) and have been sent SIGKILL; collect them.
    while (true) {
        const pid_t r = ::waitpid(-pgid, nullptr, 0);
        if (r > 0) continue;
        if (r < 0 && errno == EINTR) continue;
        break;
    }
#else
    (void)pgid;
#endif
}

}  // namespace

std::optional<std::string> resolve_executable(const std::string& name)
{
    if (name.empty()) return std::nullopt;
    if (name.find('/') != std::string::npos) {
        if (::access(name.c_str(), X_OK) == 0) return name;
        return std::nullopt;
    }
    const char* path = std::getenv("PATH");
    std::string_view dirs = path ? path : "/usr/local/bin:/usr/bin:/bin";
    while (true) {
        const auto colon = dirs.find(':');
        std::string dir(dirs.substr(0, colon));
        if (dir.empty()) dir = ".";
        std::string candidate = dir + "/" + name;
        if (::access(candidate.c_str(), X_OK) == 0) return candidate;
        if (colon == std::string_view::npos) break;
        dirs.remove_prefix(colon + 1);
    }
    return std::nullopt;
}

std::string cap_stream(std::string_view text, std::size_t cap_bytes)
{
    if (text.size() <= cap_bytes) return std::string(text);
    if (cap_bytes <= k_cap_marker.size()) return std::string(utf8_tail(text, cap_bytes));
    return std::string(k_cap_marker) + std::string(utf8_tail(text, cap_bytes - k_cap_marker.size()));
}

ExecutionOutcome classify(std::string_view report_bytes, bool timed_out)
{
    if (timed_out) {
        ExecutionOutcome o;
        o.status = ExecutionStatus::timeout;
        o.detail = "Execution exceeded the wall-clock limit and was terminated.";
        return o;
    }
    if (report_bytes.empty()) return infra("worker produced no report");
    if (report_bytes.back() != '\n') return infra("report is not newline-terminated");
    const std::string_view line = report_bytes.substr(0, report_bytes.size() - 1);
    if (line.find('\n') != std::string_view::npos) return infra("report channel carried more than one line");

    json report;
    try {
        report = json::parse(line);
    } catch (const json::exception& e) {
        return infra(std::string("malformed report: ") + e.what());
    }
    if (!report.is_object()) return infra("report is not a JSON object");

    auto field = [&](const char* key) -> const json* {
        auto it = report.find(key);
        return it == report.end() ? nullptr : &*it;
    };
    const json* ok = field("ok");
    const json* exc = field("exc");
    const json* tb = field("tb");
    const json* out = field("stdout");
    const json* duration = field("duration_ms");
    if (!ok || !ok->is_boolean()) return infra("report field 'ok' missing or not a boolean");
    if (!exc || !(exc->is_null() || exc->is_string())) return infra("report field 'exc' missing or not string|null");
    if (!tb || !(tb->is_null() || tb->is_string())) return infra("report field 'tb' missing or not string|null");
    if (!out || !out->is_string()) return infra("report field 'stdout' missing or not a string");
    if (!duration || !duration->is_number_integer() || duration->get<std::int64_t>() < 0) {
        return infra("report field 'duration_ms' missing or not a non-negative integer");
    }

    ExecutionOutcome o;
    o.stdout_text = out->get<std::string>();
    o.duration_ms = duration->get<std::int64_t>();
    if (ok->get<bool>()) {
        if (!exc->is_null()) return infra("report says ok but names an exception");
        o.status = ExecutionStatus::success;
        return o;
    }
    if (exc->is_null() || exc->get<std::string>().empty()) return infra("failed report without an exception name");
    o.exception_type = exc->get<std::string>();
    if (tb->is_string()) o.traceback = tb->get<std::string>();
    o.status = *o.exception_type == "AssertionError" ? ExecutionStatus::assertion_failure : ExecutionStatus::exception;
    return o;
}

void Sandbox::Slots::acquire()
{
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return free_ > 0; });
    --free_;
}

void Sandbox::Slots::release()
{
    {
        std::lock_guard lock(mu_);
        ++free_;
    }
    cv_.notify_one();
}

Sandbox::Sandbox(SandboxConfig config) : config_(std::move(config)), slots_(config_.pool_size)
{
    if (config_.worker_argv.empty()) throw std::invalid_argument("sandbox worker command is empty");
    if (config_.pool_size < 1) throw std::invalid_argument("sandbox pool_size must be at least 1");
    if (config_.grace_ms < 0) throw std::invalid_argument("sandbox grace_ms must be non-negative");
    // A worker dying mid-request must not take the harness down with it.
    std::signal(SIGPIPE, SIG_IGN);
#ifdef __linux__
    ::prctl(PR_SET_CHILD_SUBREAPER, 1);
#endif
}

ExecutionOutcome Sandbox::execute(std::string_view script, const ExecutionLimits& limits)
{
    limits.validate();
    slots_.acquire();
    struct Release {
        Slots& s;
        ~Release() { s.release(); }
    } release{slots_};
    return run_child(script, limits);
}

ExecutionOutcome Sandbox::run_child(std::string_view script, const ExecutionLimits& limits)
{
    const auto path = resolve_executable(config_.worker_argv.front());
    if (!path) return infra("worker executable not found: " + config_.worker_argv.front());

    // Everything the child touches is prepared before fork.
    std::vector<std::string> env_strings;
    for (char** e = environ; e && *e; ++e) {
        std::string_view entry(*e);
        const std::string name(entry.substr(0, entry.find('=')));
        if (name == "SYMCODE_REPORT_FD" || config_.extra_env.count(name)) continue;
        env_strings.emplace_back(entry);
    }
    env_strings.push_back("SYMCODE_REPORT_FD=" + std::to_string(k_report_fd));
    for (const auto& [k, v] : config_.extra_env) env_strings.push_back(k + "=" + v);
    std::vector<char*> envp;
    for (auto& s : env_strings) envp.push_back(s.data());
    envp.push_back(nullptr);
    std::vector<std::string> argv_strings = config_.worker_argv;
    std::vector<char*> argv;
    for (auto& s : argv_strings) argv.push_back(s.data());
    argv.push_back(nullptr);

    const std::string request =
        json{{"script", std::string(script)},
             {"wall_timeout_ms", limits.wall_timeout_ms},
             {"memory_limit_bytes", limits.memory_limit_bytes}}
            .dump(-1, ' ', false, json::error_handler_t::replace) +
        "\n";

    const rlim_t cpu_seconds = static_cast<rlim_t>(limits.wall_timeout_ms / 1000 + 1);
    const struct rlimit as_limit{limits.memory_limit_bytes, limits.memory_limit_bytes};
    const struct rlimit cpu_limit{cpu_seconds, cpu_seconds + 1};
    const struct rlimit core_limit{0, 0};
    sigset_t empty_mask;
    sigemptyset(&empty_mask);
    struct sigaction default_action{};
    default_action.sa_handler = SIG_DFL;

    Pipes p;
    for (Pipe* pipe : {&p.in, &p.out, &p.err, &p.report, &p.exec_status}) {
        if (!pipe->open()) return infra(std::string("pipe creation failed: ") + std::strerror(errno));
    }

    const auto start = Clock::now();
    const pid_t pid = ::fork();
    if (pid < 0) return infra(std::string("fork failed: ") + std::strerror(errno));
    if (pid == 0) {
        // Child: async-signal-safe calls only from here to execve.
        ::setpgid(0, 0);
        ::setrlimit(RLIMIT_AS, &as_limit);
        ::setrlimit(RLIMIT_CPU, &cpu_limit);
        ::setrlimit(RLIMIT_CORE, &core_limit);
        ::sigprocmask(SIG_SETMASK, &empty_mask, nullptr);
        ::sigaction(SIGPIPE, &default_action, nullptr);
        const int mapping[4][2] = {{p.in.read, 0}, {p.out.write, 1}, {p.err.write, 2}, {p.report.write, k_report_fd}};
        for (const auto& [from, to] : mapping) {
            if (from == to) {
                ::fcntl(to, F_SETFD, 0);
            } else if (::dup2(from, to) < 0) {
                const int e = errno;
                (void)!::write(p.exec_status.write, &e, sizeof e);
                ::_exit(127);
            }
        }
        ::execve(path->c_str(), argv.data(), envp.data());
        const int e = errno;
        (void)!::write(p.exec_status.write, &e, sizeof e);
        ::_exit(127);
    }

    ::setpgid(pid, pid);  // the child does the same; whichever runs first wins
    close_fd(p.in.read);
    close_fd(p.out.write);
    close_fd(p.err.write);
    close_fd(p.report.write);
    close_fd(p.exec_status.write);
    if (config_.on_spawn) config_.on_spawn(pid);

    int exec_errno = 0;
    ssize_t got;
    do {
        got = ::read(p.exec_status.read, &exec_errno, sizeof exec_errno);
    } while (got < 0 && errno == EINTR);
    close_fd(p.exec_status.read);
    if (got == static_cast<ssize_t>(sizeof exec_errno)) {
        int status = 0;
        ::waitpid(pid, &status, 0);
        reap_group(pid);
        return infra("failed to start worker " + *path + ": " + std::strerror(exec_errno));
    }

    set_nonblocking(p.in.write);
    set_nonblocking(p.out.read);
    set_nonblocking(p.err.read);
    set_nonblocking(p.report.read);

    StreamBuffer out_buf(limits.stdout_cap_bytes);
    StreamBuffer err_buf(limits.stdout_cap_bytes);
    const std::size_t report_cap = std::max<std::size_t>(16u << 20, 8 * limits.stdout_cap_bytes);
    std::string report;
    bool report_overflow = false;

    const auto deadline = start + std::chrono::milliseconds(limits.wall_timeout_ms);
    std::optional<Clock::time_point> drain_deadline;
    std::size_t written = 0;
    bool exited = false;
    bool timed_out = false;
    int wait_status = 0;

    auto sink_out = [&](const char* d, std::size_t n) { out_buf.append(d, n); };
    auto sink_err = [&](const char* d, std::size_t n) { err_buf.append(d, n); };
    auto sink_report = [&](const char* d, std::size_t n) {
        if (report.size() + n > report_cap) {
            report_overflow = true;
            return;
        }
        report.append(d, n);
    };

    while (true) {
        if (!exited && ::waitpid(pid, &wait_status, WNOHANG) == pid) {
            exited = true;
            // Take down anything the worker left behind; their pipe ends
            // close as they die.
            ::kill(-pid, SIGKILL);
            drain_deadline = Clock::now() + std::chrono::milliseconds(config_.grace_ms);
        }
        const bool reading = p.out.read >= 0 || p.err.read >= 0 || p.report.read >= 0;
        if (exited && !reading) break;

        const auto now = Clock::now();
        if (!exited && now >= deadline) {
            timed_out = true;
            ::kill(-pid, SIGKILL);
            while (::waitpid(pid, &wait_status, 0) < 0 && errno == EINTR) {
            }
            exited = true;
            break;
        }
        if (drain_deadline && now >= *drain_deadline) break;

        std::vector<pollfd> fds;
        auto watch = [&](int fd, short events) {
            if (fd >= 0) fds.push_back({fd, events, 0});
        };
        watch(p.in.write, POLLOUT);
        watch(p.out.read, POLLIN);
        watch(p.err.read, POLLIN);
        watch(p.report.read, POLLIN);

        const auto limit = drain_deadline ? *drain_deadline : deadline;
        auto wait_ms = std::chrono::duration_cast<std::chrono::milliseconds>(limit - now).count() + 1;
        // Short slices so a worker exit is noticed promptly even while a
        // stray descendant keeps a pipe open.
        wait_ms = std::min<std::int64_t>(wait_ms, 10);
        const int ready = ::poll(fds.data(), fds.size(), static_cast<int>(wait_ms));
        if (ready < 0 && errno != EINTR) break;
        if (ready <= 0) continue;

        for (const auto& f : fds) {
            if (!f.revents) continue;
            if (f.fd == p.in.write) {
                if (f.revents & (POLLERR | POLLHUP)) {
                    close_fd(p.in.write);
                    continue;
                }
                const ssize_t n = ::write(p.in.write, request.data() + written, request.size() - written);
                if (n > 0) written += static_cast<std::size_t>(n);
                if ((n < 0 && errno != EAGAIN && errno != EINTR) || written == request.size()) close_fd(p.in.write);
            } else if (f.fd == p.out.read) {
                if (!drain(p.out.read, sink_out)) close_fd(p.out.read);
            } else if (f.fd == p.err.read) {
                if (!drain(p.err.read, sink_err)) close_fd(p.err.read);
            } else if (f.fd == p.report.read) {
                if (!drain(p.report.read, sink_report)) close_fd(p.report.read);
            }
        }
    }

    ::kill(-pid, SIGKILL);
    if (!exited) {
        while (::waitpid(pid, &wait_status, 0) < 0 && errno == EINTR) {
        }
    }
    reap_group(pid);
    const auto duration_ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();

    ExecutionOutcome o;
    if (timed_out) {
        o = classify({}, true);
        o.detail = timeout_detail(limits.wall_timeout_ms);
    } else if (report_overflow) {
        o = infra("report exceeded " + std::to_string(report_cap) + " bytes");
    } else if (report.empty()) {
        o = infra("worker ended without a report (" + describe_wait_status(wait_status) + ")");
    } else if (!WIFEXITED(wait_status) || WEXITSTATUS(wait_status) != 0) {
        o = infra("protocol violation: worker reported, then ended with " + describe_wait_status(wait_status));
    } else {
        o = classify(report, false);
    }
    o.stdout_text = cap_stream(o.stdout_text, limits.stdout_cap_bytes);
    o.stderr_text = cap_stream(err_buf.text(), limits.stdout_cap_bytes);
    // The worker's own fd 1 is drained so it never blocks; guest stdout is
    // what the report carries. Fall back to it only when there is no report.
    if (o.status == ExecutionStatus::sandbox_error && o.stdout_text.empty()) {
        o.stdout_text = cap_stream(out_buf.text(), limits.stdout_cap_bytes);
    }
    o.duration_ms = duration_ms;
    return o;
}

}  // namespace symcode
