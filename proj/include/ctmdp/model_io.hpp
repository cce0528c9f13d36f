#pragma once

#include <string>

#include "ctmdp/model.hpp"

namespace ctmdp {

// JSON model schema (UTF-8), all numbers IEEE-754 doubles:
// {
//   "num_states": int,
//   "actions":   [[action id, ...], ...]            (one array per state),
//   "rates":     {"<state>:<action>": [q(0|x,a), ..., q(S-1|x,a)], ...},
//   "cost":      {"<state>:<action>": c(x,a), ...},
//   "weight":    [w(0), ..., w(S-1)],
//   "labels":    {"states": [...]}                  (optional)
// }

/// Parses and schema-checks a model document without semantic validation.
/// Throws ErrorKind::parse on malformed JSON and ErrorKind::schema on
/// missing/ill-typed fields (the message names the field).
CtmdpModel parse_model(const std::string& text);

/// parse_model + validate_model; throws ValidationFailure (with the report
/// embedded) if any invariant is violated.
CtmdpModel load_model(const std::string& text);

CtmdpModel load_model_file(const std::string& path);

/// Serializes with shortest round-trip double formatting (bit-exact reload).
std::string save_model(const CtmdpModel& model);

std::string policy_to_json(const CtmdpModel& model, const PolicyDeterministic& policy);

/// Accepts {"kind":"deterministic","choice":[ids...]} or
/// {"kind":"randomized","dist":[[...], ...]}; checks admissibility.
struct ParsedPolicy {
    std::optional<PolicyDeterministic> deterministic;
    std::optional<PolicyRandomized> randomized;
};
ParsedPolicy parse_policy(const CtmdpModel& model, const std::string& text);

} // namespace ctmdp
