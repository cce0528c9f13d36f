#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ctmdp/model.hpp"

namespace ctmdp {

struct SimulationConfig {
    double horizon = 0.0;            // > 0
    long max_jumps = 10'000'000;
    std::uint64_t seed = 0;
    int replications = 1;
    std::optional<double> alpha;     // discount; unset => undiscounted
    int start_state = 0;
};

enum class ExplosionKind {
    none,
    surrogate, // entered a zero-exit-rate zero-cost state (stands in for the cemetery)
    jump_cap,  // max_jumps reached before the horizon ("explosion possible")
};

const char* to_string(ExplosionKind k);

struct TrajectoryStats {
    double accumulated_cost = 0.0; // e^{-alpha t}-weighted when alpha is set
    long jump_count = 0;
    ExplosionKind explosion = ExplosionKind::none;
    std::optional<double> explosion_time;
    int final_state = 0; // -1 once the process is formally in the cemetery

    bool exploded() const { return explosion != ExplosionKind::none; }
};

/// Called once per sojourn with (entry time, state, sojourn length); a
/// negative sojourn length marks the final truncated interval at the horizon.
using TraceSink = std::function<void(double t, int state, double sojourn)>;

/// Simulates one trajectory of the jump process under a stationary policy:
/// exponential sojourn with the policy-mixed exit rate, next state drawn from
/// the mixed jump kernel, cost accumulated in closed form per sojourn
/// (exact exponential integrals when discounting). Stops at the horizon, in a
/// zero-exit state (to the horizon if its cost rate is positive, immediately
/// flagged as the explosion surrogate if cost is zero too), or at max_jumps
/// (flagged, zero cost afterwards). Bit-reproducible for fixed
/// (model, policy, config, rep_index).
TrajectoryStats simulate_trajectory(const CtmdpModel& model,
                                    const PolicyRandomized& policy,
                                    const SimulationConfig& config,
                                    int rep_index,
                                    const TraceSink& trace = nullptr);
TrajectoryStats simulate_trajectory(const CtmdpModel& model,
                                    const PolicyDeterministic& policy,
                                    const SimulationConfig& config,
                                    int rep_index,
                                    const TraceSink& trace = nullptr);

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    int replications = 0;
    std::optional<double> truncation_bias_bound; // discounted estimator only
    std::vector<std::string> warnings;
    std::vector<double> per_replication;
};

/// Sample mean and standard error of (accumulated cost)/horizon across
/// replications with independent streams (seed, rep_index). Requires
/// replications >= 2. Aggregation uses pairwise summation in a fixed order,
/// so results are identical under any `threads` split.
Estimate estimate_average_cost(const CtmdpModel& model, const PolicyRandomized& policy,
                               const SimulationConfig& config, int threads = 1);
Estimate estimate_average_cost(const CtmdpModel& model, const PolicyDeterministic& policy,
                               const SimulationConfig& config, int threads = 1);

/// Discounted-cost estimator; warns (with the tail bound
/// e^{-alpha T} max c / alpha) when horizon < 20/alpha.
Estimate estimate_discounted_cost(const CtmdpModel& model, const PolicyRandomized& policy,
                                  double alpha, const SimulationConfig& config,
                                  int threads = 1);
Estimate estimate_discounted_cost(const CtmdpModel& model, const PolicyDeterministic& policy,
                                  double alpha, const SimulationConfig& config,
                                  int threads = 1);

/// Pairwise (tree) summation; deterministic given the input order.
double pairwise_sum(const std::vector<double>& values);

} // namespace ctmdp
