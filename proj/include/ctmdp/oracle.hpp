#pragma once

#include <string>
#include <vector>

#include "ctmdp/model.hpp"

namespace ctmdp {

enum class ChainClass { unichain, multichain, absorbing };

const char* to_string(ChainClass c);

/// Chain structure of the policy-induced jump graph (edge x -> y iff the
/// mixed rate q(y|x) > 0). Recurrent classes are the closed strongly
/// connected components; zero-exit states form singleton recurrent classes.
/// `absorbing` means the single recurrent class is a zero-exit singleton.
struct StationaryResult {
    ChainClass classification = ChainClass::unichain;
    std::vector<std::vector<int>> recurrent_classes;     // sorted state lists
    std::vector<std::vector<double>> mu_per_class;       // full-length, zero off class
    std::vector<double> mu;                              // unichain/absorbing convenience
    std::vector<int> class_of_state;                     // -1 for transient states
};

StationaryResult stationary_distribution(const CtmdpModel& model,
                                         const PolicyDeterministic& policy);
StationaryResult stationary_distribution(const CtmdpModel& model,
                                         const PolicyRandomized& policy);

/// Exact long-run average cost of a stationary policy: per-class gains
/// sum_x mu(x) c(x, pi) and, for multichain structures, the start-dependent
/// value via absorption probabilities of the embedded jump chain.
struct PolicyAverage {
    ChainClass classification = ChainClass::unichain;
    std::vector<std::vector<int>> recurrent_classes;
    std::vector<double> class_gains;
    std::vector<double> value_per_start; // length num_states
    double worst_start_value = 0.0;      // max over starts
};

PolicyAverage exact_average_cost(const CtmdpModel& model,
                                 const PolicyDeterministic& policy);
PolicyAverage exact_average_cost(const CtmdpModel& model,
                                 const PolicyRandomized& policy);

/// Lexicographic enumeration of all deterministic stationary policies.
/// Throws ErrorKind::enumeration_cap when prod_x |A(x)| exceeds `cap`.
std::vector<PolicyDeterministic> enumerate_policies(const CtmdpModel& model,
                                                    long cap = 1'000'000);

struct OracleRow {
    PolicyDeterministic policy;
    ChainClass classification;
    std::vector<double> class_gains;
    std::vector<double> value_per_start;
    double worst_start_value;
};

struct OracleResult {
    double best_g = 0.0;            // min over policies of worst-start value
    PolicyDeterministic best_policy;
    std::vector<OracleRow> table;   // lexicographic order
};

OracleResult brute_force_optimal_average(const CtmdpModel& model,
                                         long cap = 1'000'000);

} // namespace ctmdp
