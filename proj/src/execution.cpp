#include "symcode/execution.hpp"

#include <array>
#include <stdexcept>

namespace symcode {

namespace {

constexpr std::array k_status_names = {
    std::pair{ExecutionStatus::success, std::string_view("success")},
    std::pair{ExecutionStatus::exception, std::string_view("exception")},
    std::pair{ExecutionStatus::assertion_failure, std::string_view("assertion_failure")},
    std::pair{ExecutionStatus::timeout, std::string_view("timeout")},
    std::pair{ExecutionStatus::output_missing, std::string_view("output_missing")},
    std::pair{ExecutionStatus::sandbox_error, std::string_view("sandbox_error")},
};

}  // namespace

std::string_view to_string(ExecutionStatus s)
{
    for (const auto& [status, name] : k_status_names)
        if (status == s) return name;
    return "sandbox_error";
}

ExecutionStatus execution_status_from_string(std::string_view s)
{
    for (const auto& [status, name] : k_status_names)
        if (name == s) return status;
    throw std::invalid_argument("unknown execution status '" + std::string(s) + "'");
}

}  // namespace symcode
