#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace deepls {

enum class ErrorKind {
    contract,               // caller broke a precondition
    config,                 // invalid configuration value
    divergence,             // non-finite loss/gradient
    degenerate_density,     // sampler density vanished everywhere
    undefined_denominator,  // metric ratio with zero denominator
    support_violation,      // importance density zero where integrand is not
    io,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::contract: return "contract";
    case ErrorKind::config: return "config";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::degenerate_density: return "degenerate_density";
    case ErrorKind::undefined_denominator: return "undefined_denominator";
    case ErrorKind::support_violation: return "support_violation";
    case ErrorKind::io: return "io";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind)
    {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
{
    throw Error(kind, what);
}

inline void require(bool cond, const std::string& what)
{
    if (!cond)
        fail(ErrorKind::contract, what);
}

} // namespace deepls
