#include "ctmdp/discounted.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace ctmdp {

namespace {

double sup_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double max_contraction_factor(const CtmdpModel& model, double alpha) {
    double beta = 0.0;
    for (double w : model.weight) beta = std::max(beta, w / (w + alpha));
    return beta;
}

} // namespace

DiscountedSolution value_iteration(const CtmdpModel& model, double alpha, double tol,
                                   const ViOptions& options) {
    if (!(tol > 0.0)) throw CtmdpError(ErrorKind::usage, "tolerance must be positive");
    const UniformizedKernel kernel = uniformize(model, alpha); // validates model and alpha
    const int n = model.num_states;
    const double beta = max_contraction_factor(model, alpha);
    const bool cold_start = !options.warm_start.has_value();
    constexpr double eps = std::numeric_limits<double>::epsilon();

    DiscountedSolution sol;
    sol.alpha = alpha;

    std::vector<double> v = options.warm_start.value_or(std::vector<double>(n, 0.0));
    if (v.size() != static_cast<std::size_t>(n))
        throw CtmdpError(ErrorKind::structure, "warm start has wrong length");
    std::vector<int> argmin(n, 0);
    double prev_diff = -1.0;

    while (true) {
        const std::vector<double> tv = bellman_T(kernel, v, &argmin);
        double residual = 0.0;
        double tv_norm = 0.0;
        for (int x = 0; x < n; ++x) {
            residual = std::max(residual, std::abs(tv[x] - v[x]));
            tv_norm = std::max(tv_norm, std::abs(tv[x]));
            // From v0 = 0 the iterates are exactly monotone in floating point
            // (nonnegative kernel rows, fixed summation order).
            if (cold_start && tv[x] < v[x]) ++sol.monotonicity_violations;
        }
        if (prev_diff >= 0.0) {
            // Successive differences contract by beta; the floor absorbs ulp
            // wiggle at the convergence plateau.
            if (residual > beta * prev_diff + 8.0 * eps * std::max(1.0, tv_norm))
                ++sol.contraction_violations;
        }
        if (residual <= tol) {
            sol.converged = true;
            sol.residual = residual;
            break;
        }
        if (sol.iterations >= options.max_iter) {
            sol.converged = false;
            sol.residual = residual;
            break;
        }
        v = tv;
        ++sol.iterations;
        prev_diff = residual;
    }

    sol.values = std::move(v);
    sol.policy.choice = std::move(argmin);
    return sol;
}

DiscountedSolution value_iteration(const CtmdpModel& model, double alpha, double tol,
                                   long max_iter) {
    ViOptions options;
    options.max_iter = max_iter;
    return value_iteration(model, alpha, tol, options);
}

PolicyDeterministic extract_greedy_policy(const CtmdpModel& model, double alpha,
                                          const std::vector<double>& v) {
    std::vector<int> argmin;
    bellman_T(model, alpha, v, &argmin);
    return PolicyDeterministic{std::move(argmin)};
}

std::vector<double> exact_discounted_value(const CtmdpModel& model,
                                           const PolicyRandomized& policy,
                                           double alpha) {
    require_valid(model);
    if (!(alpha > 0.0))
        throw CtmdpError(ErrorKind::usage, "discount alpha must be positive");
    const MixedDynamics mix = mix_policy(model, policy);
    const int n = model.num_states;

    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd b(n);
    for (int x = 0; x < n; ++x) {
        for (int y = 0; y < n; ++y)
            A(x, y) = (x == y ? alpha : 0.0) - mix.generator[x][y];
        b(x) = mix.cost_rate[x];
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    Eigen::VectorXd w = lu.solve(b);
    const double res = (A * w - b).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    if (!w.allFinite() || res > 1e-7 * scale)
        throw CtmdpError(ErrorKind::numerical,
                         "policy evaluation system could not be solved reliably "
                         "(residual " + std::to_string(res) + ")");

    std::vector<double> out(n);
    for (int x = 0; x < n; ++x) {
        if (w(x) < -1e-10)
            throw CtmdpError(ErrorKind::numerical,
                             "policy value negative beyond tolerance at state " +
                                 std::to_string(x));
        out[x] = std::max(0.0, w(x));
    }
    return out;
}

std::vector<double> exact_discounted_value(const CtmdpModel& model,
                                           const PolicyDeterministic& policy,
                                           double alpha) {
    return exact_discounted_value(model, to_randomized(model, policy), alpha);
}

namespace {

// Anchored evaluation of a deterministic policy in gain/relative coordinates:
// unknowns (u, G) with u(0) = 0 solve
//     alpha*u(x) - (Q_phi u)(x) + G = c_phi(x)  for all x,
// so W_alpha(x) = G/alpha + u(x). The system stays O(1)-conditioned as
// alpha -> 0 for unichain Q_phi, unlike (alpha I - Q) W = c.
struct AnchoredEval {
    bool ok = false;
    std::vector<double> u;
    double gain = 0.0; // G = alpha * W(0)
};

AnchoredEval anchored_evaluate(const CtmdpModel& model, const PolicyDeterministic& policy,
                               double alpha) {
    const MixedDynamics mix = mix_policy(model, policy);
    const int n = model.num_states;
    const int m = n + 1;

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    for (int x = 0; x < n; ++x) {
        for (int y = 0; y < n; ++y) A(x, y) = -mix.generator[x][y];
        A(x, x) += alpha;
        A(x, n) = 1.0;
        b(x) = mix.cost_rate[x];
    }
    A(n, 0) = 1.0; // u(0) = 0

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    Eigen::VectorXd z = lu.solve(b);
    if (!z.allFinite()) return {};
    // one step of iterative refinement
    z += lu.solve(b - A * z);
    const double res = (A * z - b).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    if (res > 1e-9 * scale) return {};

    AnchoredEval out;
    out.ok = true;
    out.u.assign(z.data(), z.data() + n);
    out.gain = z(n);
    return out;
}

// Bracket used for policy improvement and certification in relative
// coordinates: B(u)(x) = min_a { c(x,a) + sum_y q(y|x,a) u(y) }. At fixed x
// the E1 bracket at W = G/alpha + u equals B(u)(x)/(w+alpha) plus an
// action-independent term, so the argmin (with lowest-index ties) coincides.
void relative_bracket(const CtmdpModel& model, const std::vector<double>& u,
                      std::vector<double>& value, std::vector<int>& argmin) {
    const int n = model.num_states;
    value.assign(n, 0.0);
    argmin.assign(n, 0);
    for (int x = 0; x < n; ++x) {
        double best = std::numeric_limits<double>::infinity();
        int best_a = 0;
        for (int a = 0; a < model.action_count(x); ++a) {
            double s = model.cost[x][a];
            const auto& q = model.rates[x][a];
            for (int y = 0; y < n; ++y) s += q[y] * u[y];
            if (s < best) {
                best = s;
                best_a = a;
            }
        }
        value[x] = best;
        argmin[x] = best_a;
    }
}

} // namespace

RelativeDiscountedSolution solve_discounted_certified(const CtmdpModel& model,
                                                      double alpha,
                                                      const CertifiedSolveOptions& options) {
    require_valid(model);
    if (!(alpha > 0.0))
        throw CtmdpError(ErrorKind::usage, "discount alpha must be positive");
    const int n = model.num_states;

    RelativeDiscountedSolution out;
    out.alpha = alpha;

    // Estimated plain-VI sweep count: residual decays like beta^k from the
    // stage-cost scale.
    double stage_max = 0.0;
    for (int x = 0; x < n; ++x)
        for (int a = 0; a < model.action_count(x); ++a)
            stage_max = std::max(stage_max,
                                 model.cost[x][a] / (alpha + model.weight[x]));
    const double beta = max_contraction_factor(model, alpha);
    double sweeps = 1.0;
    if (stage_max > options.tol && beta > 0.0)
        sweeps = std::log(stage_max / options.tol) / -std::log(beta);

    if (sweeps <= static_cast<double>(options.vi_sweep_budget)) {
        DiscountedSolution vi =
            value_iteration(model, alpha, options.tol, options.vi_max_iter);
        double m = *std::min_element(vi.values.begin(), vi.values.end());
        out.gain = alpha * m;
        out.relative.resize(n);
        for (int x = 0; x < n; ++x) out.relative[x] = vi.values[x] - m;
        out.policy = std::move(vi.policy);
        out.residual = vi.residual;
        out.iterations = vi.iterations;
        out.converged = vi.converged;
        out.method = "value-iteration";
        return out;
    }

    // Exact path: evaluate-improve on deterministic policies, certified by the
    // same stopping rule ||T v - v||_inf <= tol, evaluated algebraically in
    // relative coordinates:
    //   (T v - v)(x) = [B(u)(x) - G - alpha*u(x)] / (w(x) + alpha)
    // at v = G/alpha + u with B the relative bracket.
    out.method = "policy-improvement-exact";
    std::vector<double> zero(n, 0.0), bracket;
    std::vector<int> argmin;
    PolicyDeterministic phi;
    if (options.hint && options.hint->choice.size() == static_cast<std::size_t>(n)) {
        phi = *options.hint;
        check_policy(model, phi);
    } else {
        relative_bracket(model, zero, bracket, argmin);
        phi.choice = argmin;
    }

    std::set<std::vector<int>> visited;
    AnchoredEval eval;
    for (int round = 0; round < 500; ++round) {
        ++out.iterations;
        eval = anchored_evaluate(model, phi, alpha);
        if (!eval.ok) {
            // Singular anchored system (multichain chain structure under phi):
            // fall back to the direct W-space solve, usable while alpha is
            // large enough for the residual to be measurable.
            std::vector<double> w;
            try {
                w = exact_discounted_value(model, phi, alpha);
            } catch (const CtmdpError&) {
                out.converged = false;
                return out;
            }
            const double wmin = *std::min_element(w.begin(), w.end());
            eval.ok = true;
            eval.gain = alpha * wmin;
            eval.u.resize(n);
            for (int x = 0; x < n; ++x) eval.u[x] = w[x] - wmin;
            out.method = "policy-improvement-direct";
        }
        relative_bracket(model, eval.u, bracket, argmin);
        if (argmin == phi.choice) break;
        if (!visited.insert(phi.choice).second) break; // improvement cycle
        phi.choice = argmin;
    }

    double residual = 0.0;
    for (int x = 0; x < n; ++x) {
        const double r =
            (bracket[x] - eval.gain - alpha * eval.u[x]) / (model.weight[x] + alpha);
        residual = std::max(residual, std::abs(r));
    }
    out.residual = residual;
    out.converged = residual <= options.tol;
    out.policy = phi;

    const double umin = *std::min_element(eval.u.begin(), eval.u.end());
    out.gain = eval.gain + alpha * umin;
    out.relative.resize(n);
    for (int x = 0; x < n; ++x) out.relative[x] = eval.u[x] - umin;
    return out;
}

} // namespace ctmdp
