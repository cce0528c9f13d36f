#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctmdp/errors.hpp"

namespace ctmdp {

/// Finite continuous-time Markov decision process.
///
/// States are indexed 0..num_states-1. Each state has a nonempty list of
/// admissible actions identified by strings; per (state, action) the model
/// stores a generator row q(.|x,a) over all states (diagonal entry is
/// -q_x(a), the negated exit rate), a nonnegative cost rate c(x,a), and a
/// positive per-state uniformization weight w(x) with w(x) >= max_a q_x(a).
///
/// Instances are immutable after construction by convention; all solver and
/// validation entry points take them by const reference and are pure.
struct CtmdpModel {
    int num_states = 0;
    std::vector<std::vector<std::string>> actions; // action ids per state
    std::vector<std::vector<std::vector<double>>> rates; // [x][a][y] = q(y|x,a)
    std::vector<std::vector<double>> cost;               // [x][a] = c(x,a)
    std::vector<double> weight;                          // [x] = w(x)
    std::vector<std::string> state_labels;               // optional, display only

    int action_count(int x) const { return static_cast<int>(actions[x].size()); }

    /// q_x(a) = -q({x}|x,a), the total exit rate.
    double exit_rate(int x, int a) const { return -rates[x][a][x]; }

    /// max_a q_x(a).
    double max_exit_rate(int x) const {
        double m = 0.0;
        for (int a = 0; a < action_count(x); ++a) m = std::max(m, exit_rate(x, a));
        return m;
    }

    int action_index(int x, std::string_view id) const {
        for (int a = 0; a < action_count(x); ++a)
            if (actions[x][a] == id) return a;
        return -1;
    }
};

/// Deterministic stationary policy: choice[x] indexes into actions[x].
struct PolicyDeterministic {
    std::vector<int> choice;

    bool operator==(const PolicyDeterministic&) const = default;
};

/// Randomized stationary policy: dist[x] is a probability vector over
/// actions[x] (same length, entries >= 0, row sum 1 within 1e-12).
struct PolicyRandomized {
    std::vector<std::vector<double>> dist;
};

struct Violation {
    std::string invariant;
    int state = -1;
    int action = -1; // -1 when not action-specific
    double magnitude = 0.0;
};

struct ValidationReport {
    bool ok = true;
    std::vector<Violation> violations;
    std::vector<std::string> notes; // informational, does not affect ok

    void add(std::string invariant, int state, int action, double magnitude) {
        ok = false;
        violations.push_back({std::move(invariant), state, action, magnitude});
    }
};

class ValidationFailure : public CtmdpError {
  public:
    ValidationFailure(std::string message, ValidationReport report)
        : CtmdpError(ErrorKind::invariant, std::move(message)),
          report_(std::move(report)) {}

    const ValidationReport& report() const { return report_; }

  private:
    ValidationReport report_;
};

/// Throws ErrorKind::structure when array dimensions are inconsistent
/// (distinct from semantic invariant violations).
void check_structure(const CtmdpModel& model);

/// Checks every model invariant; one violation entry per failure with its
/// magnitude. Requires a structurally well-formed model (check_structure
/// is invoked and throws otherwise).
ValidationReport validate_model(const CtmdpModel& model);

/// Throws ValidationFailure if the model does not validate.
void require_valid(const CtmdpModel& model);

/// Admissibility checks for policies against a model; throw on failure.
void check_policy(const CtmdpModel& model, const PolicyDeterministic& policy);
void check_policy(const CtmdpModel& model, const PolicyRandomized& policy);

PolicyRandomized to_randomized(const CtmdpModel& model, const PolicyDeterministic& policy);

/// Policy-mixed dynamics: exit_rate[x] = sum_a pi(a|x) q_x(a),
/// cost_rate[x] = sum_a pi(a|x) c(x,a), generator_row[x][y] = sum_a pi(a|x) q(y|x,a).
struct MixedDynamics {
    std::vector<double> exit_rate;
    std::vector<double> cost_rate;
    std::vector<std::vector<double>> generator; // [x][y]
};

MixedDynamics mix_policy(const CtmdpModel& model, const PolicyRandomized& policy);
MixedDynamics mix_policy(const CtmdpModel& model, const PolicyDeterministic& policy);

/// Drift condition check: ok iff
///   (i)  sum_y w(y) q(y|x,a) <= c0*w(x) + b0 for every (x,a), and
///   (ii) max_a q_x(a) <= M0*w(x) for every x,
/// with per-constraint slack reported (violations carry -slack as magnitude).
/// `tol` absorbs float rounding when c0 is derived from the model itself.
ValidationReport check_lyapunov(const CtmdpModel& model, double c0, double b0,
                                double M0, double tol = 1e-9);

/// Sufficient condition for bounded relative values: ok iff
///   0 >= c(x,a) + sum_{y != z} q(y|x,a) v(y) for all x != z, a in A(x).
/// Also notes whether min_{x != z, a} q_x(a) > 0 (rates separated from zero).
ValidationReport check_condition2_sufficient(const CtmdpModel& model, int z,
                                             const std::vector<double>& v);

} // namespace ctmdp
