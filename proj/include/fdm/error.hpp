#ifndef FDM_ERROR_HPP
#define FDM_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace fdm {

// Every failure the library reports carries one of these kinds. The CLI
// prints the kind verbatim, so the strings below are part of its output.
enum class ErrorKind {
    domain,
    overflow,
    negative_probability,
    not_an_fcgf,
    dilation_unavailable,
    parameter,
    root_not_bracketed,
    incomplete_table,
    unsupported,
    infeasible,
    asymmetric,
    schema,
    budget,
    usage,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::overflow: return "overflow";
    case ErrorKind::negative_probability: return "negative-probability";
    case ErrorKind::not_an_fcgf: return "not-an-fcgf";
    case ErrorKind::dilation_unavailable: return "dilation-unavailable";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::root_not_bracketed: return "root-not-bracketed";
    case ErrorKind::incomplete_table: return "incomplete-table";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::infeasible: return "decomposition-infeasible";
    case ErrorKind::asymmetric: return "asymmetric";
    case ErrorKind::schema: return "schema";
    case ErrorKind::budget: return "truncation-budget";
    case ErrorKind::usage: return "usage";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string &message)
        : std::runtime_error(message), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string &message)
{
    throw Error(kind, message);
}

} // namespace fdm

#endif
