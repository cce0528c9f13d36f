#include "ctmdp/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace ctmdp {

const char* to_string(ChainClass c) {
    switch (c) {
    case ChainClass::unichain: return "unichain";
    case ChainClass::multichain: return "multichain";
    case ChainClass::absorbing: return "absorbing";
    }
    return "unknown";
}

namespace {

// Tarjan strongly connected components of the jump graph (edge x->y iff the
// mixed rate q(y|x) > 0, y != x). Components are emitted in reverse
// topological order.
std::vector<std::vector<int>> strongly_connected_components(
    const std::vector<std::vector<int>>& adjacency) {
    const int n = static_cast<int>(adjacency.size());
    std::vector<int> index(n, -1), low(n, 0), on_stack(n, 0), stack;
    std::vector<std::vector<int>> components;
    int counter = 0;

    std::function<void(int)> visit = [&](int v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = 1;
        for (int w : adjacency[v]) {
            if (index[w] < 0) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            std::vector<int> comp;
            int w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = 0;
                comp.push_back(w);
            } while (w != v);
            std::sort(comp.begin(), comp.end());
            components.push_back(std::move(comp));
        }
    };
    for (int v = 0; v < n; ++v)
        if (index[v] < 0) visit(v);
    return components;
}

std::vector<double> off_diagonal_sums(const MixedDynamics& mix) {
    const int n = static_cast<int>(mix.exit_rate.size());
    std::vector<double> sums(n, 0.0);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            if (y != x) sums[x] += mix.generator[x][y];
    return sums;
}

StationaryResult analyze_chain(const MixedDynamics& mix) {
    const int n = static_cast<int>(mix.exit_rate.size());
    std::vector<std::vector<int>> adjacency(n);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            if (y != x && mix.generator[x][y] > 0.0) adjacency[x].push_back(y);

    const auto components = strongly_connected_components(adjacency);
    std::vector<int> comp_of(n, -1);
    for (int c = 0; c < static_cast<int>(components.size()); ++c)
        for (int v : components[c]) comp_of[v] = c;

    StationaryResult result;
    result.class_of_state.assign(n, -1);
    for (int c = 0; c < static_cast<int>(components.size()); ++c) {
        bool closed = true;
        for (int v : components[c])
            for (int w : adjacency[v])
                if (comp_of[w] != c) closed = false;
        if (!closed) continue;
        const int id = static_cast<int>(result.recurrent_classes.size());
        for (int v : components[c]) result.class_of_state[v] = id;
        result.recurrent_classes.push_back(components[c]);
    }

    // Stationary distribution per recurrent class: solve mu^T Q_C = 0 with the
    // normalization sum mu = 1 replacing one equation.
    for (const auto& cls : result.recurrent_classes) {
        const int m = static_cast<int>(cls.size());
        Eigen::MatrixXd A(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                A(i, j) = mix.generator[cls[j]][cls[i]]; // transpose of restriction
        A.row(m - 1).setOnes();
        Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
        b(m - 1) = 1.0;
        Eigen::VectorXd mu = Eigen::PartialPivLU<Eigen::MatrixXd>(A).solve(b);

        std::vector<double> full(n, 0.0);
        for (int i = 0; i < m; ++i) full[cls[i]] = std::max(0.0, mu(i));
        result.mu_per_class.push_back(std::move(full));
    }

    const std::size_t classes = result.recurrent_classes.size();
    if (classes >= 2) {
        result.classification = ChainClass::multichain;
    } else {
        const auto& cls = result.recurrent_classes.front();
        const bool zero_exit = cls.size() == 1 && adjacency[cls[0]].empty();
        result.classification = zero_exit ? ChainClass::absorbing : ChainClass::unichain;
        result.mu = result.mu_per_class.front();
    }
    return result;
}

PolicyAverage average_of_mixed(const MixedDynamics& mix) {
    const int n = static_cast<int>(mix.exit_rate.size());
    const StationaryResult chain = analyze_chain(mix);

    PolicyAverage out;
    out.classification = chain.classification;
    out.recurrent_classes = chain.recurrent_classes;
    out.value_per_start.assign(n, 0.0);

    for (std::size_t c = 0; c < chain.recurrent_classes.size(); ++c) {
        double gain = 0.0;
        for (int x : chain.recurrent_classes[c])
            gain += chain.mu_per_class[c][x] * mix.cost_rate[x];
        out.class_gains.push_back(gain);
        for (int x : chain.recurrent_classes[c]) out.value_per_start[x] = gain;
    }

    // Start-dependent values for transient states via absorption of the
    // embedded jump chain: (I - P_TT) v_T = P_TR g.
    std::vector<int> transient;
    for (int x = 0; x < n; ++x)
        if (chain.class_of_state[x] < 0) transient.push_back(x);
    if (!transient.empty()) {
        const std::vector<double> off_sum = off_diagonal_sums(mix);
        const int m = static_cast<int>(transient.size());
        std::vector<int> tindex(n, -1);
        for (int i = 0; i < m; ++i) tindex[transient[i]] = i;
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
        for (int i = 0; i < m; ++i) {
            const int x = transient[i];
            const double exit = off_sum[x]; // > 0: transient states have out-edges
            for (int y = 0; y < n; ++y) {
                if (y == x) continue;
                const double p = mix.generator[x][y] / exit;
                if (p == 0.0) continue;
                if (tindex[y] >= 0)
                    A(i, tindex[y]) -= p;
                else
                    b(i) += p * out.class_gains[chain.class_of_state[y]];
            }
        }
        Eigen::VectorXd v = Eigen::PartialPivLU<Eigen::MatrixXd>(A).solve(b);
        for (int i = 0; i < m; ++i) out.value_per_start[transient[i]] = v(i);
    }

    out.worst_start_value =
        *std::max_element(out.value_per_start.begin(), out.value_per_start.end());
    return out;
}

} // namespace

StationaryResult stationary_distribution(const CtmdpModel& model,
                                         const PolicyRandomized& policy) {
    require_valid(model);
    return analyze_chain(mix_policy(model, policy));
}

StationaryResult stationary_distribution(const CtmdpModel& model,
                                         const PolicyDeterministic& policy) {
    return stationary_distribution(model, to_randomized(model, policy));
}

PolicyAverage exact_average_cost(const CtmdpModel& model,
                                 const PolicyRandomized& policy) {
    require_valid(model);
    return average_of_mixed(mix_policy(model, policy));
}

PolicyAverage exact_average_cost(const CtmdpModel& model,
                                 const PolicyDeterministic& policy) {
    return exact_average_cost(model, to_randomized(model, policy));
}

std::vector<PolicyDeterministic> enumerate_policies(const CtmdpModel& model, long cap) {
    require_valid(model);
    const int n = model.num_states;
    long count = 1;
    for (int x = 0; x < n; ++x) {
        const long na = model.action_count(x);
        if (count > cap / na)
            throw CtmdpError(ErrorKind::enumeration_cap,
                             "policy count exceeds enumeration cap " + std::to_string(cap));
        count *= na;
    }

    std::vector<PolicyDeterministic> out;
    out.reserve(count);
    PolicyDeterministic current;
    current.choice.assign(n, 0);
    while (true) {
        out.push_back(current);
        int x = n - 1;
        while (x >= 0 && current.choice[x] + 1 >= model.action_count(x)) {
            current.choice[x] = 0;
            --x;
        }
        if (x < 0) break;
        ++current.choice[x];
    }
    return out;
}

OracleResult brute_force_optimal_average(const CtmdpModel& model, long cap) {
    const auto policies = enumerate_policies(model, cap);
    OracleResult result;
    result.best_g = std::numeric_limits<double>::infinity();
    for (const auto& policy : policies) {
        PolicyAverage avg = exact_average_cost(model, policy);
        OracleRow row;
        row.policy = policy;
        row.classification = avg.classification;
        row.class_gains = std::move(avg.class_gains);
        row.value_per_start = std::move(avg.value_per_start);
        row.worst_start_value = avg.worst_start_value;
        if (row.worst_start_value < result.best_g) {
            result.best_g = row.worst_start_value;
            result.best_policy = policy;
        }
        result.table.push_back(std::move(row));
    }
    return result;
}

} // namespace ctmdp
