#include "symcode/codeblock.hpp"

#include "symcode/text_util.hpp"

#include <optional>
#include <vector>

namespace symcode {

namespace {

struct Line {
    std::size_t begin;  // offset of the first byte
    std::size_t end;    // offset of the terminating '\n' (or text size)
};

std::vector<Line> split(std::string_view text)
{
    std::vector<Line> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < text.size()) lines.push_back({start, text.size()});
            break;
        }
        lines.push_back({start, nl});
        start = nl + 1;
    }
    return lines;
}

bool is_fence(std::string_view line) { return line.substr(0, 3) == "```"; }

bool is_closing_fence(std::string_view line) { return line.substr(0, 3) == "```" && trim(line.substr(3)).empty(); }

bool is_guest_fence(std::string_view line)
{
    if (!is_fence(line)) return false;
    const std::string_view tag = trim(line.substr(3));
    return tag == "python" || tag == "py" || tag == "python3";
}

}  // namespace

GuestScript extract_script(std::string_view text)
{
    const std::vector<Line> lines = split(text);
    auto line_at = [&](std::size_t i) { return text.substr(lines[i].begin, lines[i].end - lines[i].begin); };
    auto find_close = [&](std::size_t from) -> std::optional<std::size_t> {
        for (std::size_t j = from; j < lines.size(); ++j)
            if (is_closing_fence(line_at(j))) return j;
        return std::nullopt;
    };

    std::optional<std::string> first;
    int guest_blocks = 0;
    bool prose = false;
    bool unclosed = false;

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string_view line = line_at(i);
        if (is_guest_fence(line)) {
            ++guest_blocks;
            const auto close = find_close(i + 1);
            const std::size_t body_begin = lines[i].end + 1;
            std::size_t body_end = text.size();
            if (close) {
                body_end = lines[*close].begin == 0 ? 0 : lines[*close].begin - 1;
            } else {
                unclosed = true;
            }
            if (!first) first = std::string(body_begin < body_end ? text.substr(body_begin, body_end - body_begin) : "");
            if (!close) break;
            i = *close;
        } else if (is_fence(line)) {
            prose = true;
            const auto close = find_close(i + 1);
            if (!close) break;
            i = *close;
        } else if (!trim(line).empty()) {
            prose = true;
        }
    }

    if (!first) throw NoCodeBlock("no ```python code block in the reply");
    if (trim(*first).empty()) throw NoCodeBlock("the first ```python code block is empty");

    GuestScript out;
    out.source = std::move(*first);
    out.fence_count_seen = guest_blocks;
    out.contract_clean = guest_blocks == 1 && !prose && !unclosed;
    return out;
}

std::string wrap_in_single_fence(std::string_view source)
{
    return "```python\n" + std::string(source) + "\n```";
}

}  // namespace symcode
