#pragma once

#include <stdexcept>
#include <string>

namespace ctmdp {

// Error taxonomy surfaced through the CLI exit codes:
//   io/parse/schema/usage -> 2, invariant -> 1, non_convergence -> 3.
enum class ErrorKind {
    io,
    parse,
    schema,
    invariant,
    structure,
    usage,
    non_convergence,
    enumeration_cap,
    numerical,
};

class CtmdpError : public std::runtime_error {
  public:
    CtmdpError(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::io: return "io";
    case ErrorKind::parse: return "parse";
    case ErrorKind::schema: return "schema";
    case ErrorKind::invariant: return "invariant";
    case ErrorKind::structure: return "structure";
    case ErrorKind::usage: return "usage";
    case ErrorKind::non_convergence: return "non_convergence";
    case ErrorKind::enumeration_cap: return "enumeration_cap";
    case ErrorKind::numerical: return "numerical";
    }
    return "unknown";
}

} // namespace ctmdp
