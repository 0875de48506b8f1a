#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace symcode {

struct GuestScript {
    std::string source;
    int fence_count_seen = 1;
    // Exactly one guest block and nothing but whitespace around it.
    bool contract_clean = true;

    bool operator==(const GuestScript&) const = default;
};

class NoCodeBlock : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Fence dialect: a fence is a line starting with three backticks at column 0.
// A guest block opens with ```python (also ```py / ```python3) and closes at
// the next line that is exactly ``` (trailing whitespace tolerated). Blocks
// under other tags are skipped and count as prose. A guest block left open
// at the end of the text runs to the end and marks the reply unclean.
//
// source is the text strictly between the opening line's newline and the
// newline before the closing fence, so wrapping s as
// "```python\n" + s + "\n```" extracts s byte for byte.
//
// Throws NoCodeBlock when no guest block exists or the first one is blank.
GuestScript extract_script(std::string_view completion_text);

std::string wrap_in_single_fence(std::string_view source);

}  // namespace symcode
