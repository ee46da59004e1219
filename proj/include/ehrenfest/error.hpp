#pragma once

#include <stdexcept>
#include <string>

namespace ehrenfest {

enum class Errc {
    invalid_argument,
    parse,
    numeric,
    solver,
    check_failed,
    io,
};

// Every library failure is reported as an Error carrying one of the codes
// above; the C API maps them onto its status enum.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace ehrenfest
