#include "ctmdp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "ctmdp/rng.hpp"

namespace ctmdp {

const char* to_string(ExplosionKind k) {
    switch (k) {
    case ExplosionKind::none: return "none";
    case ExplosionKind::surrogate: return "surrogate";
    case ExplosionKind::jump_cap: return "jump_cap";
    }
    return "unknown";
}

double pairwise_sum(const std::vector<double>& values) {
    // Recursive halving; deterministic for a fixed input order.
    std::function<double(std::size_t, std::size_t)> sum =
        [&](std::size_t lo, std::size_t hi) -> double {
        if (hi - lo <= 4) {
            double s = 0.0;
            for (std::size_t i = lo; i < hi; ++i) s += values[i];
            return s;
        }
        const std::size_t mid = lo + (hi - lo) / 2;
        return sum(lo, mid) + sum(mid, hi);
    };
    return values.empty() ? 0.0 : sum(0, values.size());
}

namespace {

void check_config(const SimulationConfig& config, int num_states) {
    if (!(config.horizon > 0.0))
        throw CtmdpError(ErrorKind::usage, "horizon must be positive");
    if (config.max_jumps < 0)
        throw CtmdpError(ErrorKind::usage, "max_jumps must be nonnegative");
    if (config.start_state < 0 || config.start_state >= num_states)
        throw CtmdpError(ErrorKind::usage, "start state out of range");
    if (config.alpha && !(*config.alpha > 0.0))
        throw CtmdpError(ErrorKind::usage, "discount alpha must be positive");
}

// Cost of holding a state with cost rate `c` over [t0, t1], discounted when
// alpha is set: c * (e^{-alpha t0} - e^{-alpha t1}) / alpha, else c (t1 - t0).
double sojourn_cost(double c, double t0, double t1, const std::optional<double>& alpha) {
    if (!alpha) return c * (t1 - t0);
    return c * (std::exp(-*alpha * t0) - std::exp(-*alpha * t1)) / *alpha;
}

TrajectoryStats run_trajectory(const CtmdpModel& model, const MixedDynamics& mix,
                               const SimulationConfig& config, int rep_index,
                               const TraceSink& trace) {
    CounterRng rng(config.seed, static_cast<std::uint64_t>(rep_index));
    TrajectoryStats stats;
    double t = 0.0;
    int x = config.start_state;
    stats.final_state = x;

    while (true) {
        const double rate = mix.exit_rate[x];
        const double cost = mix.cost_rate[x];
        if (rate == 0.0) {
            if (cost == 0.0) {
                // Zero exit rate and zero cost: indistinguishable from the
                // cemetery; reported as the explosion surrogate.
                stats.explosion = ExplosionKind::surrogate;
                stats.explosion_time = t;
                stats.final_state = x;
                if (trace) trace(t, x, config.horizon - t);
                return stats;
            }
            stats.accumulated_cost += sojourn_cost(cost, t, config.horizon, config.alpha);
            stats.final_state = x;
            if (trace) trace(t, x, config.horizon - t);
            return stats;
        }

        const double sojourn = rng.next_exponential(rate);
        const double t_next = t + sojourn;
        if (t_next >= config.horizon) {
            stats.accumulated_cost += sojourn_cost(cost, t, config.horizon, config.alpha);
            stats.final_state = x;
            if (trace) trace(t, x, config.horizon - t);
            return stats;
        }

        stats.accumulated_cost += sojourn_cost(cost, t, t_next, config.alpha);
        if (trace) trace(t, x, sojourn);
        ++stats.jump_count;
        if (stats.jump_count >= config.max_jumps) {
            // Jump budget exhausted before the horizon: explosion possible;
            // the process is formally parked in the cemetery at zero cost.
            stats.explosion = ExplosionKind::jump_cap;
            stats.explosion_time = t_next;
            stats.final_state = -1;
            return stats;
        }
        x = rng.next_index(mix.generator[x], rate) ;
        t = t_next;
        stats.final_state = x;
    }
}

Estimate estimate_impl(const CtmdpModel& model, const PolicyRandomized& policy,
                       const SimulationConfig& config, bool discounted, int threads) {
    require_valid(model);
    check_config(config, model.num_states);
    if (config.replications < 2)
        throw CtmdpError(ErrorKind::usage, "estimators need at least 2 replications");
    const MixedDynamics mix = mix_policy(model, policy);
    const int reps = config.replications;

    std::vector<double> values(reps);
    const auto run_range = [&](int lo, int hi) {
        for (int r = lo; r < hi; ++r) {
            const TrajectoryStats stats = run_trajectory(model, mix, config, r, nullptr);
            values[r] = discounted ? stats.accumulated_cost
                                   : stats.accumulated_cost / config.horizon;
        }
    };

    const int workers = std::max(1, std::min(threads, reps));
    if (workers == 1) {
        run_range(0, reps);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (reps + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const int lo = w * chunk;
            const int hi = std::min(reps, lo + chunk);
            if (lo < hi) pool.emplace_back(run_range, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    Estimate est;
    est.replications = reps;
    est.mean = pairwise_sum(values) / reps;
    std::vector<double> sq(reps);
    for (int r = 0; r < reps; ++r) {
        const double d = values[r] - est.mean;
        sq[r] = d * d;
    }
    est.std_error = std::sqrt(pairwise_sum(sq) / (static_cast<double>(reps) * (reps - 1)));
    est.per_replication = std::move(values);
    return est;
}

double max_cost_rate(const CtmdpModel& model) {
    double m = 0.0;
    for (int x = 0; x < model.num_states; ++x)
        for (int a = 0; a < model.action_count(x); ++a)
            m = std::max(m, model.cost[x][a]);
    return m;
}

} // namespace

TrajectoryStats simulate_trajectory(const CtmdpModel& model,
                                    const PolicyRandomized& policy,
                                    const SimulationConfig& config, int rep_index,
                                    const TraceSink& trace) {
    require_valid(model);
    check_config(config, model.num_states);
    return run_trajectory(model, mix_policy(model, policy), config, rep_index, trace);
}

TrajectoryStats simulate_trajectory(const CtmdpModel& model,
                                    const PolicyDeterministic& policy,
                                    const SimulationConfig& config, int rep_index,
                                    const TraceSink& trace) {
    return simulate_trajectory(model, to_randomized(model, policy), config, rep_index, trace);
}

Estimate estimate_average_cost(const CtmdpModel& model, const PolicyRandomized& policy,
                               const SimulationConfig& config, int threads) {
    SimulationConfig cfg = config;
    cfg.alpha.reset(); // undiscounted pathwise cost
    return estimate_impl(model, policy, cfg, /*discounted=*/false, threads);
}

Estimate estimate_average_cost(const CtmdpModel& model, const PolicyDeterministic& policy,
                               const SimulationConfig& config, int threads) {
    return estimate_average_cost(model, to_randomized(model, policy), config, threads);
}

Estimate estimate_discounted_cost(const CtmdpModel& model, const PolicyRandomized& policy,
                                  double alpha, const SimulationConfig& config,
                                  int threads) {
    if (!(alpha > 0.0))
        throw CtmdpError(ErrorKind::usage, "discount alpha must be positive");
    SimulationConfig cfg = config;
    cfg.alpha = alpha;
    Estimate est = estimate_impl(model, policy, cfg, /*discounted=*/true, threads);
    const double bias = std::exp(-alpha * config.horizon) * max_cost_rate(model) / alpha;
    est.truncation_bias_bound = bias;
    if (config.horizon < 20.0 / alpha) {
        std::ostringstream os;
        os << "horizon " << config.horizon << " is below 20/alpha = " << 20.0 / alpha
           << "; truncation bias bounded by " << bias;
        est.warnings.push_back(os.str());
    }
    return est;
}

Estimate estimate_discounted_cost(const CtmdpModel& model, const PolicyDeterministic& policy,
                                  double alpha, const SimulationConfig& config,
                                  int threads) {
    return estimate_discounted_cost(model, to_randomized(model, policy), alpha, config,
                                    threads);
}

} // namespace ctmdp
