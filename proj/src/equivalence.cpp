#include "symcode/equivalence.hpp"

#include "symcode/canonicalize.hpp"
#include "symcode/latex_parser.hpp"
#include "symcode/numeric_eval.hpp"
#include "symcode/text_util.hpp"

#include <optional>
#include <random>
#include <set>

namespace symcode {

using math::HighFloat;

std::string extract_boxed(std::string_view text)
{
    static constexpr std::string_view marker = "\\boxed";
    std::optional<std::string_view> last;
    for (auto pos = text.find(marker); pos != std::string_view::npos; pos = text.find(marker, pos + 1)) {
        std::size_t i = pos + marker.size();
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
        if (i >= text.size() || text[i] != '{') continue;
        const std::size_t open = i;
        int depth = 0;
        for (; i < text.size(); ++i) {
            const char c = text[i];
            if (c == '\\' && i + 1 < text.size()) {
                ++i;
                continue;
            }
            if (c == '{') ++depth;
            if (c == '}' && --depth == 0) break;
        }
        if (i < text.size()) last = text.substr(open + 1, i - open - 1);
    }
    if (!last) throw NoBoxedAnswer();
    return std::string(trim(*last));
}

std::string_view to_string(Verdict v)
{
    switch (v) {
    case Verdict::equivalent: return "equivalent";
    case Verdict::distinct: return "distinct";
    case Verdict::indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

std::string_view to_string(VerdictMethod m)
{
    switch (m) {
    case VerdictMethod::structural: return "structural";
    case VerdictMethod::numeric: return "numeric";
    case VerdictMethod::oracle: return "oracle";
    }
    return "numeric";
}

Verdict verdict_from_string(std::string_view s)
{
    if (s == "equivalent") return Verdict::equivalent;
    if (s == "distinct") return Verdict::distinct;
    if (s == "indeterminate") return Verdict::indeterminate;
    throw std::invalid_argument("unknown verdict: " + std::string(s));
}

VerdictMethod verdict_method_from_string(std::string_view s)
{
    if (s == "structural") return VerdictMethod::structural;
    if (s == "numeric") return VerdictMethod::numeric;
    if (s == "oracle") return VerdictMethod::oracle;
    throw std::invalid_argument("unknown verdict method: " + std::string(s));
}

namespace {

constexpr int k_sample_points = 8;
constexpr int k_sample_candidates = 64;

const HighFloat& accept_tolerance()
{
    static const HighFloat v("1e-30");
    return v;
}

const HighFloat& reject_tolerance()
{
    static const HighFloat v("1e-10");
    return v;
}

enum class PointResult { agree, disagree, unclear };

PointResult compare_values(const HighFloat& a, const HighFloat& b)
{
    if (math::agree_within(a, b, accept_tolerance())) return PointResult::agree;
    if (!math::agree_within(a, b, reject_tolerance())) return PointResult::disagree;
    return PointResult::unclear;
}

// Candidate assignments come from a fixed-seed engine (its output sequence
// is pinned by the standard), so sampling is reproducible everywhere.
// Magnitudes fall in [0.05, 3.05) and one candidate in four is negative.
std::vector<math::Assignment> sample_candidates(const std::vector<std::string>& symbols)
{
    std::mt19937_64 engine(0x53796d436f6465ULL);
    std::vector<math::Assignment> out;
    for (int i = 0; i < k_sample_candidates; ++i) {
        math::Assignment at;
        for (const auto& name : symbols) {
            const std::uint64_t r = engine();
            HighFloat magnitude = HighFloat(static_cast<long long>(r % 3000000) + 50000) / 1000000;
            at[name] = ((r >> 32) % 4 == 0) ? HighFloat(-magnitude) : magnitude;
        }
        out.push_back(std::move(at));
    }
    return out;
}

EquivalenceVerdict numeric_stage(const math::Expr& a, const math::Expr& b)
{
    std::set<std::string> names;
    for (auto& s : math::free_symbols(a)) names.insert(s);
    for (auto& s : math::free_symbols(b)) names.insert(s);

    if (names.empty()) {
        auto va = math::evaluate(a);
        auto vb = math::evaluate(b);
        if (!va || !vb) return {Verdict::indeterminate, VerdictMethod::numeric, "value undefined over the reals"};
        switch (compare_values(*va, *vb)) {
        case PointResult::agree: return {Verdict::equivalent, VerdictMethod::numeric, "values agree"};
        case PointResult::disagree: return {Verdict::distinct, VerdictMethod::numeric, "values differ"};
        case PointResult::unclear:
            return {Verdict::indeterminate, VerdictMethod::numeric, "values differ only within the gray zone"};
        }
    }

    const std::vector<std::string> symbols(names.begin(), names.end());
    int used = 0;
    bool unclear = false;
    for (const auto& at : sample_candidates(symbols)) {
        auto va = math::evaluate(a, at);
        auto vb = math::evaluate(b, at);
        if (!va || !vb) continue;
        switch (compare_values(*va, *vb)) {
        case PointResult::agree: break;
        case PointResult::disagree:
            return {Verdict::distinct, VerdictMethod::numeric, "values differ at a sample point"};
        case PointResult::unclear: unclear = true; break;
        }
        if (++used == k_sample_points) break;
    }
    if (used < k_sample_points) {
        return {Verdict::indeterminate, VerdictMethod::numeric, "too few sample points where both sides are defined"};
    }
    if (unclear) return {Verdict::indeterminate, VerdictMethod::numeric, "sample points inside the gray zone"};
    return {Verdict::equivalent, VerdictMethod::numeric, "agree at all sample points"};
}

EquivalenceVerdict escalate(std::string_view candidate, std::string_view truth, const EscalationPolicy& policy,
                            EquivalenceVerdict undecided)
{
    if (!policy.oracle) return undecided;
    const Verdict v = policy.oracle->judge(candidate, truth);
    return {v, VerdictMethod::oracle, "oracle after: " + undecided.detail};
}

}  // namespace

EquivalenceVerdict check_equivalence(std::string_view candidate, std::string_view truth, const EscalationPolicy& policy)
{
    const std::string_view c = trim(candidate);
    const std::string_view t = trim(truth);
    if (c == t) return {Verdict::equivalent, VerdictMethod::structural, "identical text"};

    math::ExprPtr ca;
    math::ExprPtr ta;
    try {
        ca = math::canonicalize(math::parse_latex(c));
    } catch (const math::ParseError& e) {
        return escalate(c, t, policy,
                        {Verdict::indeterminate, VerdictMethod::numeric, std::string("candidate: ") + e.what()});
    }
    try {
        ta = math::canonicalize(math::parse_latex(t));
    } catch (const math::ParseError& e) {
        return escalate(c, t, policy,
                        {Verdict::indeterminate, VerdictMethod::numeric, std::string("truth: ") + e.what()});
    }

    if (math::equal(ca, ta)) return {Verdict::equivalent, VerdictMethod::structural, "canonical forms match"};
    auto is_exact_rational = [](const math::Expr& e) {
        return e.is<math::IntegerNode>() || e.is<math::RationalNode>();
    };
    if (is_exact_rational(*ca) && is_exact_rational(*ta)) {
        return {Verdict::distinct, VerdictMethod::structural, "different exact rationals"};
    }

    EquivalenceVerdict numeric = numeric_stage(*ca, *ta);
    if (numeric.verdict != Verdict::indeterminate) return numeric;
    return escalate(c, t, policy, std::move(numeric));
}

}  // namespace symcode
