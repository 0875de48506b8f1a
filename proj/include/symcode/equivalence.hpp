#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace symcode {

class NoBoxedAnswer : public std::runtime_error {
public:
    NoBoxedAnswer() : std::runtime_error("no balanced \\boxed{...} span in output") {}
};

// Contents of the last balanced \boxed{...} span, trimmed. Braces escaped as
// \{ and \} do not count toward nesting.
std::string extract_boxed(std::string_view text);

enum class Verdict { equivalent, distinct, indeterminate };
enum class VerdictMethod { structural, numeric, oracle };

std::string_view to_string(Verdict v);
std::string_view to_string(VerdictMethod m);
Verdict verdict_from_string(std::string_view s);
VerdictMethod verdict_method_from_string(std::string_view s);

struct EquivalenceVerdict {
    Verdict verdict = Verdict::indeterminate;
    VerdictMethod method = VerdictMethod::numeric;
    std::string detail;

    bool operator==(const EquivalenceVerdict&) const = default;
};

// Court of appeal for pairs the exact and numeric stages cannot settle.
// Implementations must be safe to call concurrently.
class EquivalenceOracle {
public:
    virtual ~EquivalenceOracle() = default;
    virtual Verdict judge(std::string_view candidate, std::string_view truth) = 0;
};

struct EscalationPolicy {
    // Consulted only when the earlier stages end undecided; null disables it.
    EquivalenceOracle* oracle = nullptr;
};

// Staged comparison:
//   1. identical text, or structurally equal canonical forms -> equivalent;
//      two distinct exact rationals -> distinct (all structural),
//   2. evaluation at 100 significant digits, at 8 deterministic sample
//      points when free symbols are present: relative agreement within
//      1e-30 everywhere -> equivalent, disagreement beyond 1e-10 anywhere ->
//      distinct, anything else is undecided,
//   3. the oracle, if the policy provides one; otherwise indeterminate.
// Unparseable input skips straight to stage 3.
EquivalenceVerdict check_equivalence(std::string_view candidate, std::string_view truth,
                                     const EscalationPolicy& policy = {});

}  // namespace symcode
