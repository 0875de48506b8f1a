#pragma once

#include "symcode/equivalence.hpp"
#include "symcode/sandbox.hpp"

#include <string>
#include <string_view>

namespace symcode {

// First line of every oracle script; workers may key on it.
inline constexpr std::string_view k_oracle_header = "# symcode-oracle";

// Python source that compares two answers with SymPy and prints exactly one
// line "ORACLE_VERDICT: <equivalent|distinct|indeterminate>". Both answers are
// embedded as data, never spliced in as code.
std::string oracle_script(std::string_view candidate, std::string_view truth);

// Reads the verdict from a run of oracle_script. Anything other than a
// successful run whose last verdict line names a known verdict reads as
// indeterminate.
Verdict parse_oracle_output(const ExecutionOutcome& outcome);

// Escalates undecided pairs to a CAS running behind the worker protocol.
class ShimOracle : public EquivalenceOracle {
public:
    ShimOracle(ScriptExecutor& executor, ExecutionLimits limits) : executor_(executor), limits_(limits) {}

    Verdict judge(std::string_view candidate, std::string_view truth) override;

private:
    ScriptExecutor& executor_;
    ExecutionLimits limits_;
};

}  // namespace symcode
