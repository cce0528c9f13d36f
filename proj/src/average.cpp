#include "ctmdp/average.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ctmdp/oracle.hpp"

namespace ctmdp {

double CertificateReport::min_slack() const {
    double m = std::numeric_limits<double>::infinity();
    for (double s : slack) m = std::min(m, s);
    return m;
}

namespace {

// Bracket of the optimality inequality,
//   bracket(x,a) = c(x,a) + w(x) sum_y h(y) (q(y|x,a)/w(x) + [y=x]),
// returned as min over a with the lowest-index argmin.
void average_bracket(const CtmdpModel& model, const std::vector<double>& h,
                     std::vector<double>& value, std::vector<int>& argmin) {
    const int n = model.num_states;
    value.assign(n, 0.0);
    argmin.assign(n, 0);
    for (int x = 0; x < n; ++x) {
        const double w = model.weight[x];
        double best = std::numeric_limits<double>::infinity();
        int best_a = 0;
        for (int a = 0; a < model.action_count(x); ++a) {
            const auto& q = model.rates[x][a];
            double s = 0.0;
            for (int y = 0; y < n; ++y) s += h[y] * (q[y] / w + (y == x ? 1.0 : 0.0));
            const double b = model.cost[x][a] + w * s;
            if (b < best) {
                best = b;
                best_a = a;
            }
        }
        value[x] = best;
        argmin[x] = best_a;
    }
}

void check_h(const CtmdpModel& model, const std::vector<double>& h) {
    if (h.size() != static_cast<std::size_t>(model.num_states))
        throw CtmdpError(ErrorKind::structure, "h has wrong length");
    for (double v : h)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw CtmdpError(ErrorKind::invariant, "h must be nonnegative and finite");
}

} // namespace

AverageSolution vanishing_discount(const CtmdpModel& model, const AverageOptions& options) {
    require_valid(model);
    if (!(options.alpha0 > 0.0))
        throw CtmdpError(ErrorKind::usage, "alpha0 must be positive");
    if (!(options.ratio > 0.0 && options.ratio < 1.0))
        throw CtmdpError(ErrorKind::usage, "ratio must lie in (0,1)");
    if (options.steps < 1) throw CtmdpError(ErrorKind::usage, "steps must be >= 1");
    if (!(options.vi_tol > 0.0))
        throw CtmdpError(ErrorKind::usage, "vi_tol must be positive");

    AverageSolution sol;
    CertifiedSolveOptions solve_opts;
    solve_opts.tol = options.vi_tol;
    solve_opts.vi_max_iter = options.vi_max_iter;
    solve_opts.vi_sweep_budget =
        options.exact_small_alpha ? options.vi_sweep_budget
                                  : std::numeric_limits<long>::max();

    for (int k = 0; k < options.steps; ++k) {
        const double alpha = options.alpha0 * std::pow(options.ratio, k);
        RelativeDiscountedSolution step = solve_discounted_certified(model, alpha, solve_opts);
        if (!step.converged) {
            std::ostringstream os;
            os << "discounted solve not certified at alpha=" << alpha
               << " (method " << step.method << ", residual " << step.residual << ")";
            if (sol.trace.size() >= 5) {
                sol.notes.push_back("grid truncated: " + os.str());
                break;
            }
            throw CtmdpError(ErrorKind::non_convergence, os.str());
        }
        AlphaRecord rec;
        rec.alpha = alpha;
        rec.g_alpha = step.gain;
        rec.m_alpha = step.gain / alpha;
        rec.h_alpha = std::move(step.relative);
        rec.iterations = step.iterations;
        rec.method = step.method;
        sol.alpha_grid.push_back(alpha);
        sol.trace.push_back(std::move(rec));
        solve_opts.hint = std::move(step.policy);
    }

    const int count = static_cast<int>(sol.trace.size());
    const int window = std::min(options.tail_window, count);
    const int k0 = count - window;

    // limsup estimate over the tail window
    double g = -std::numeric_limits<double>::infinity();
    for (int k = k0; k < count; ++k) g = std::max(g, sol.trace[k].g_alpha);
    sol.g = g;

    // liminf estimate: running tail infimum evaluated on the window
    sol.h.assign(model.num_states, std::numeric_limits<double>::infinity());
    for (int k = k0; k < count; ++k)
        for (int x = 0; x < model.num_states; ++x)
            sol.h[x] = std::min(sol.h[x], sol.trace[k].h_alpha[x]);

    sol.policy = extract_average_policy(model, sol.g, sol.h);

    sol.converged = count >= 3;
    for (int k = std::max(1, count - (options.tail_window - 1)); k < count && sol.converged;
         ++k) {
        if (std::abs(sol.trace[k].g_alpha - sol.trace[k - 1].g_alpha) > options.tol_g)
            sol.converged = false;
        double hdiff = 0.0;
        for (int x = 0; x < model.num_states; ++x)
            hdiff = std::max(hdiff,
                             std::abs(sol.trace[k].h_alpha[x] - sol.trace[k - 1].h_alpha[x]));
        if (hdiff > options.tol_h) sol.converged = false;
    }

    const StationaryResult chain = stationary_distribution(model, sol.policy);
    if (chain.classification == ChainClass::multichain) {
        sol.notes.push_back(
            "extracted policy induces a multichain structure: g is the infimum over "
            "starting states of the optimal average cost; per-state optimality is "
            "certified only via the optimality-inequality slack");
    } else {
        sol.notes.push_back(std::string("extracted policy chain structure: ") +
                            to_string(chain.classification));
    }
    return sol;
}

CertificateReport optimality_inequality_residual(const CtmdpModel& model, double g,
                                                 const std::vector<double>& h,
                                                 double tol) {
    require_valid(model);
    check_h(model, h);
    std::vector<double> bracket;
    std::vector<int> argmin;
    average_bracket(model, h, bracket, argmin);

    CertificateReport report;
    report.kind = "optimality_inequality";
    report.tolerance = tol;
    report.slack.resize(model.num_states);
    double worst = std::numeric_limits<double>::infinity();
    for (int x = 0; x < model.num_states; ++x) {
        report.slack[x] = g + model.weight[x] * h[x] - bracket[x];
        if (report.slack[x] < worst) {
            worst = report.slack[x];
            report.worst_state = x;
        }
    }
    report.ok = worst >= -tol;
    return report;
}

PolicyDeterministic extract_average_policy(const CtmdpModel& model, double g,
                                           const std::vector<double>& h) {
    (void)g; // the bracket argmin does not depend on g
    require_valid(model);
    check_h(model, h);
    std::vector<double> bracket;
    std::vector<int> argmin;
    average_bracket(model, h, bracket, argmin);
    return PolicyDeterministic{std::move(argmin)};
}

CertificateReport verify_upper_bound(const CtmdpModel& model,
                                     const PolicyRandomized& policy, double g,
                                     const std::vector<double>& h, double tol) {
    require_valid(model);
    check_h(model, h);
    const MixedDynamics mix = mix_policy(model, policy);
    const int n = model.num_states;

    CertificateReport report;
    report.kind = "lemma1b_bound";
    report.tolerance = tol;
    report.slack.resize(n);
    double worst = std::numeric_limits<double>::infinity();
    for (int x = 0; x < n; ++x) {
        double rhs = mix.cost_rate[x];
        for (int y = 0; y < n; ++y)
            if (y != x) rhs += h[y] * mix.generator[x][y];
        report.slack[x] = g + h[x] * mix.exit_rate[x] - rhs;
        if (report.slack[x] < worst) {
            worst = report.slack[x];
            report.worst_state = x;
        }
    }
    report.ok = worst >= -tol;
    return report;
}

CertificateReport verify_upper_bound(const CtmdpModel& model,
                                     const PolicyDeterministic& policy, double g,
                                     const std::vector<double>& h, double tol) {
    return verify_upper_bound(model, to_randomized(model, policy), g, h, tol);
}

CertificateReport check_condition1(const CtmdpModel& model, long enumeration_cap) {
    require_valid(model);
    CertificateReport report;
    report.kind = "condition1";
    report.tolerance = 0.0;
    try {
        const OracleResult oracle = brute_force_optimal_average(model, enumeration_cap);
        report.ok = std::isfinite(oracle.best_g);
        std::ostringstream os;
        os << "witness policy [";
        for (int x = 0; x < model.num_states; ++x) {
            if (x) os << ",";
            os << model.actions[x][oracle.best_policy.choice[x]];
        }
        os << "] with average cost " << oracle.best_g;
        report.notes.push_back(os.str());
    } catch (const CtmdpError& e) {
        if (e.kind() != ErrorKind::enumeration_cap) throw;
        // Enumeration infeasible: probe limsup alpha * m_alpha on a small grid.
        double estimate = -std::numeric_limits<double>::infinity();
        CertifiedSolveOptions opts;
        for (double alpha : {1e-2, 1e-3, 1e-4}) {
            const RelativeDiscountedSolution s = solve_discounted_certified(model, alpha, opts);
            estimate = std::max(estimate, s.gain);
        }
        report.ok = std::isfinite(estimate);
        std::ostringstream os;
        os << "enumeration cap exceeded; limsup alpha*m_alpha probe = " << estimate;
        report.notes.push_back(os.str());
    }
    return report;
}

CertificateReport check_condition2(const std::vector<AlphaRecord>& trace,
                                   double threshold, double slope_tol) {
    if (trace.size() < 5)
        throw CtmdpError(ErrorKind::usage,
                         "condition2 check needs at least 5 grid points");
    const int count = static_cast<int>(trace.size());
    const int n = static_cast<int>(trace.front().h_alpha.size());

    // Running tail infimum H_k(x) = min_{j >= k} h_{alpha_j}(x).
    std::vector<std::vector<double>> H(count, std::vector<double>(n));
    H[count - 1] = trace[count - 1].h_alpha;
    for (int k = count - 2; k >= 0; --k)
        for (int x = 0; x < n; ++x)
            H[k][x] = std::min(trace[k].h_alpha[x], H[k + 1][x]);

    CertificateReport report;
    report.kind = "condition2";
    report.tolerance = 0.0;
    report.slack.resize(n);
    double worst = std::numeric_limits<double>::infinity();
    for (int x = 0; x < n; ++x) {
        double window_max = 0.0;
        for (int k = count - 3; k < count; ++k)
            window_max = std::max(window_max, H[k][x]);
        const double slope = H[count - 1][x] - H[count - 3][x];
        report.slack[x] = std::min(threshold - window_max, slope_tol - slope);
        if (report.slack[x] < worst) {
            worst = report.slack[x];
            report.worst_state = x;
        }
    }
    report.ok = worst >= 0.0;
    std::ostringstream os;
    os << "threshold " << threshold << ", slope tolerance " << slope_tol;
    report.notes.push_back(os.str());
    return report;
}

} // namespace ctmdp
