#pragma once

#include <stdexcept>
#include <string>

namespace archscale {

// Two failure classes, mirrored by the C API status codes and the CLI
// exit codes: validation (bad inputs, schema violations, infeasible
// requests) and numeric (fits that cannot converge, undefined metrics).
enum class ErrorKind { validation, numeric };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_validation(const std::string& msg) {
    throw Error(ErrorKind::validation, msg);
}

[[noreturn]] inline void throw_numeric(const std::string& msg) {
    throw Error(ErrorKind::numeric, msg);
}

}  // namespace archscale
