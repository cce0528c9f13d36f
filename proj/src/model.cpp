#include "ctmdp/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace ctmdp {

namespace {

constexpr double kConservativeTol = 1e-12;
constexpr double kRowSumTol = 1e-12;

std::string at(int x, int a) {
    std::ostringstream os;
    os << "(" << x;
    if (a >= 0) os << "," << a;
    os << ")";
    return os.str();
}

} // namespace

void check_structure(const CtmdpModel& model) {
    const auto fail = [](const std::string& what) {
        throw CtmdpError(ErrorKind::structure, "model structure: " + what);
    };
    if (model.num_states <= 0) fail("num_states must be positive");
    const auto s = static_cast<std::size_t>(model.num_states);
    if (model.actions.size() != s) fail("actions has wrong length");
    if (model.rates.size() != s) fail("rates has wrong length");
    if (model.cost.size() != s) fail("cost has wrong length");
    if (model.weight.size() != s) fail("weight has wrong length");
    if (!model.state_labels.empty() && model.state_labels.size() != s)
        fail("labels.states has wrong length");
    for (int x = 0; x < model.num_states; ++x) {
        const auto n = model.actions[x].size();
        if (model.rates[x].size() != n)
            fail("rates/actions mismatch at state " + std::to_string(x));
        if (model.cost[x].size() != n)
            fail("cost/actions mismatch at state " + std::to_string(x));
        for (std::size_t a = 0; a < n; ++a)
            if (model.rates[x][a].size() != s)
                fail("rate row " + at(x, static_cast<int>(a)) + " has wrong length");
    }
}

ValidationReport validate_model(const CtmdpModel& model) {
    check_structure(model);
    ValidationReport report;
    for (int x = 0; x < model.num_states; ++x) {
        if (model.actions[x].empty())
            report.add("actions_nonempty", x, -1, 1.0);
        if (!(model.weight[x] > 0.0))
            report.add("weight_positive", x, -1, -model.weight[x]);
        for (int a = 0; a < model.action_count(x); ++a) {
            const auto& row = model.rates[x][a];
            double sum = 0.0;
            for (int y = 0; y < model.num_states; ++y) {
                sum += row[y];
                if (y != x && row[y] < 0.0)
                    report.add("off_diagonal_nonneg", x, a, -row[y]);
            }
            if (!(std::abs(sum) <= kConservativeTol))
                report.add("conservative", x, a, std::abs(sum));
            if (model.cost[x][a] < 0.0)
                report.add("cost_nonneg", x, a, -model.cost[x][a]);
        }
        const double qbar = model.max_exit_rate(x);
        if (qbar > model.weight[x])
            report.add("stable_dominated", x, -1, qbar - model.weight[x]);
    }
    return report;
}

void require_valid(const CtmdpModel& model) {
    auto report = validate_model(model);
    if (!report.ok) {
        std::ostringstream os;
        os << "model invariant violation:";
        for (const auto& v : report.violations)
            os << " " << v.invariant << at(v.state, v.action)
               << " magnitude " << v.magnitude << ";";
        throw ValidationFailure(os.str(), std::move(report));
    }
}

void check_policy(const CtmdpModel& model, const PolicyDeterministic& policy) {
    if (policy.choice.size() != static_cast<std::size_t>(model.num_states))
        throw CtmdpError(ErrorKind::structure, "policy has wrong length");
    for (int x = 0; x < model.num_states; ++x)
        if (policy.choice[x] < 0 || policy.choice[x] >= model.action_count(x))
            throw CtmdpError(ErrorKind::invariant,
                             "policy action out of range at state " + std::to_string(x));
}

void check_policy(const CtmdpModel& model, const PolicyRandomized& policy) {
    if (policy.dist.size() != static_cast<std::size_t>(model.num_states))
        throw CtmdpError(ErrorKind::structure, "policy has wrong length");
    for (int x = 0; x < model.num_states; ++x) {
        const auto& row = policy.dist[x];
        if (row.size() != static_cast<std::size_t>(model.action_count(x)))
            throw CtmdpError(ErrorKind::structure,
                             "policy row length mismatch at state " + std::to_string(x));
        double sum = 0.0;
        for (double p : row) {
            if (p < 0.0)
                throw CtmdpError(ErrorKind::invariant,
                                 "negative policy probability at state " + std::to_string(x));
            sum += p;
        }
        if (std::abs(sum - 1.0) > kRowSumTol)
            throw CtmdpError(ErrorKind::invariant,
                             "policy row does not sum to 1 at state " + std::to_string(x));
    }
}

PolicyRandomized to_randomized(const CtmdpModel& model, const PolicyDeterministic& policy) {
    check_policy(model, policy);
    PolicyRandomized out;
    out.dist.resize(model.num_states);
    for (int x = 0; x < model.num_states; ++x) {
        out.dist[x].assign(model.action_count(x), 0.0);
        out.dist[x][policy.choice[x]] = 1.0;
    }
    return out;
}

MixedDynamics mix_policy(const CtmdpModel& model, const PolicyRandomized& policy) {
    check_policy(model, policy);
    const int n = model.num_states;
    MixedDynamics mix;
    mix.exit_rate.assign(n, 0.0);
    mix.cost_rate.assign(n, 0.0);
    mix.generator.assign(n, std::vector<double>(n, 0.0));
    for (int x = 0; x < n; ++x) {
        for (int a = 0; a < model.action_count(x); ++a) {
            const double p = policy.dist[x][a];
            if (p == 0.0) continue;
            mix.cost_rate[x] += p * model.cost[x][a];
            mix.exit_rate[x] += p * model.exit_rate(x, a);
            for (int y = 0; y < n; ++y) mix.generator[x][y] += p * model.rates[x][a][y];
        }
    }
    return mix;
}

MixedDynamics mix_policy(const CtmdpModel& model, const PolicyDeterministic& policy) {
    return mix_policy(model, to_randomized(model, policy));
}

ValidationReport check_lyapunov(const CtmdpModel& model, double c0, double b0,
                                double M0, double tol) {
    require_valid(model);
    ValidationReport report;
    for (int x = 0; x < model.num_states; ++x) {
        for (int a = 0; a < model.action_count(x); ++a) {
            double drift = 0.0;
            for (int y = 0; y < model.num_states; ++y)
                drift += model.weight[y] * model.rates[x][a][y];
            const double slack = c0 * model.weight[x] + b0 - drift;
            if (slack < -tol) report.add("lyapunov_drift", x, a, -slack);
        }
        const double slack = M0 * model.weight[x] - model.max_exit_rate(x);
        if (slack < -tol) report.add("lyapunov_rate_bound", x, -1, -slack);
    }
    return report;
}

ValidationReport check_condition2_sufficient(const CtmdpModel& model, int z,
                                             const std::vector<double>& v) {
    require_valid(model);
    if (z < 0 || z >= model.num_states)
        throw CtmdpError(ErrorKind::usage, "reference state z out of range");
    if (v.size() != static_cast<std::size_t>(model.num_states))
        throw CtmdpError(ErrorKind::structure, "v has wrong length");

    ValidationReport report;
    double min_exit = std::numeric_limits<double>::infinity();
    bool any = false;
    for (int x = 0; x < model.num_states; ++x) {
        if (x == z) continue;
        for (int a = 0; a < model.action_count(x); ++a) {
            any = true;
            min_exit = std::min(min_exit, model.exit_rate(x, a));
            double lhs = model.cost[x][a];
            for (int y = 0; y < model.num_states; ++y)
                if (y != z) lhs += model.rates[x][a][y] * v[y];
            if (lhs > 0.0) report.add("condition2_sufficient", x, a, lhs);
        }
    }
    if (any) {
        std::ostringstream os;
        os << "min off-z exit rate = " << min_exit
           << (min_exit > 0.0 ? " (separated from zero)" : " (not separated from zero)");
        report.notes.push_back(os.str());
    } else {
        report.notes.push_back("constraint set empty (all states equal z)");
    }
    return report;
}

} // namespace ctmdp
