#pragma once

// Shared model builders for unit and acceptance tests.

#include <string>
#include <vector>

#include "ctmdp/model.hpp"
#include "ctmdp/rng.hpp"

namespace ctmdp::testing {

// Two-state admission control chain: state 0 idle (arrival rate 1), state 1
// busy with a slow (rate 1, cost 2) or fast (rate 3, cost 5) server.
// Optimal average policy is slow with gain 1.0 (vs 1.25 for fast).
inline CtmdpModel mm1_adm() {
    CtmdpModel m;
    m.num_states = 2;
    m.actions = {{"idle"}, {"slow", "fast"}};
    m.rates = {{{-1.0, 1.0}},
               {{1.0, -1.0}, {3.0, -3.0}}};
    m.cost = {{0.0}, {2.0, 5.0}};
    m.weight = {1.0, 3.0};
    return m;
}

inline CtmdpModel single_state(double cost = 2.0, double weight = 1.0) {
    CtmdpModel m;
    m.num_states = 1;
    m.actions = {{"a"}};
    m.rates = {{{0.0}}};
    m.cost = {{cost}};
    m.weight = {weight};
    return m;
}

// Uncontrolled two-state symmetric chain with unit rates.
inline CtmdpModel two_state_symmetric() {
    CtmdpModel m;
    m.num_states = 2;
    m.actions = {{"a"}, {"a"}};
    m.rates = {{{-1.0, 1.0}}, {{1.0, -1.0}}};
    m.cost = {{0.0}, {0.0}};
    m.weight = {1.0, 1.0};
    return m;
}

// Truncated pure-birth chain: states 0..levels, birth rate (n+1)^2 at level
// n < levels, absorbing boundary at `levels`, zero cost everywhere. Hitting
// the boundary stands in for explosion of the untruncated chain.
inline CtmdpModel pure_birth(int levels = 50) {
    CtmdpModel m;
    m.num_states = levels + 1;
    for (int n = 0; n <= levels; ++n) {
        m.actions.push_back({"up"});
        std::vector<double> row(levels + 1, 0.0);
        const double rate = static_cast<double>(n + 1) * (n + 1);
        if (n < levels) {
            row[n] = -rate;
            row[n + 1] = rate;
        }
        m.rates.push_back({row});
        m.cost.push_back({0.0});
        m.weight.push_back(rate);
    }
    return m;
}

struct RandomModelParams {
    int min_states = 2;
    int max_states = 6;
    int max_actions = 4;
    double max_rate = 5.0;
    double max_cost = 10.0;
    double sparse_probability = 0.3; // chance the model gets a sparsity mask
    double zero_rate_probability = 0.4;
};

// Random validated model: off-diagonal rates uniform on [0, max_rate]
// (optionally sparsified), conservative diagonal, costs uniform on
// [0, max_cost], weight = max exit rate + uniform(0,1].
inline CtmdpModel random_model(std::uint64_t seed, std::uint64_t index,
                               const RandomModelParams& params = {}) {
    CounterRng rng(seed, index);
    CtmdpModel m;
    const int span = params.max_states - params.min_states + 1;
    m.num_states = params.min_states + static_cast<int>(rng.next_u64() % span);
    const bool sparse = rng.next_uniform() < params.sparse_probability;

    for (int x = 0; x < m.num_states; ++x) {
        const int na = 1 + static_cast<int>(rng.next_u64() % params.max_actions);
        std::vector<std::string> ids;
        for (int a = 0; a < na; ++a) ids.push_back("a" + std::to_string(a));
        m.actions.push_back(std::move(ids));

        std::vector<std::vector<double>> rows;
        std::vector<double> costs;
        for (int a = 0; a < na; ++a) {
            std::vector<double> row(m.num_states, 0.0);
            double exit = 0.0;
            for (int y = 0; y < m.num_states; ++y) {
                if (y == x) continue;
                double q = params.max_rate * rng.next_uniform();
                if (sparse && rng.next_uniform() < params.zero_rate_probability) q = 0.0;
                row[y] = q;
                exit += q;
            }
            row[x] = -exit;
            rows.push_back(std::move(row));
            costs.push_back(params.max_cost * rng.next_uniform());
        }
        m.rates.push_back(std::move(rows));
        m.cost.push_back(std::move(costs));
    }
    for (int x = 0; x < m.num_states; ++x) {
        double u = rng.next_uniform();
        if (u == 0.0) u = 0.5;
        m.weight.push_back(m.max_exit_rate(x) + u);
    }
    return m;
}

inline PolicyDeterministic random_policy(const CtmdpModel& model, std::uint64_t seed,
                                         std::uint64_t index) {
    CounterRng rng(seed ^ 0x777, index);
    PolicyDeterministic policy;
    for (int x = 0; x < model.num_states; ++x)
        policy.choice.push_back(static_cast<int>(rng.next_u64() % model.action_count(x)));
    return policy;
}

inline PolicyRandomized random_randomized_policy(const CtmdpModel& model,
                                                 std::uint64_t seed,
                                                 std::uint64_t index) {
    CounterRng rng(seed ^ 0xAAA, index);
    PolicyRandomized policy;
    for (int x = 0; x < model.num_states; ++x) {
        const int na = model.action_count(x);
        std::vector<double> row(na);
        double sum = 0.0;
        for (int a = 0; a < na; ++a) {
            row[a] = 0.05 + rng.next_uniform();
            sum += row[a];
        }
        double acc = 0.0;
        for (int a = 0; a + 1 < na; ++a) {
            row[a] /= sum;
            acc += row[a];
        }
        row[na - 1] = 1.0 - acc; // row sums to 1 exactly
        policy.dist.push_back(std::move(row));
    }
    return policy;
}

} // namespace ctmdp::testing
