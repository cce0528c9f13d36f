#pragma once

#include <optional>
#include <vector>

#include "ctmdp/kernels.hpp"
#include "ctmdp/model.hpp"

namespace ctmdp {

struct DiscountedSolution {
    double alpha = 0.0;
    std::vector<double> values; // W_alpha, nonnegative
    PolicyDeterministic policy; // greedy at `values`
    long iterations = 0;
    double residual = 0.0; // sup-norm of T v - v at `values`
    bool converged = false;
    // Per-sweep self-checks (see value_iteration); both stay 0 on healthy runs.
    long monotonicity_violations = 0;
    long contraction_violations = 0;
    std::string method = "value-iteration";
};

struct ViOptions {
    long max_iter = 10'000'000;
    // Optional warm start; when set, the monotonicity assertion is skipped
    // (it only holds from v0 = 0) but the result is still certified by the
    // final residual check.
    std::optional<std::vector<double>> warm_start;
};

/// Monotone value iteration from v0 = 0 on the uniformized fixed point
/// equation. Each sweep asserts exact pointwise monotonicity (v_n <= v_{n+1})
/// and geometric contraction of successive differences with factor
/// beta = max_x w(x)/(w(x)+alpha) (up to an eps-scale rounding floor);
/// violations are counted, never silently ignored. Stops when
/// ||T v - v||_inf <= tol; exceeding max_iter yields converged = false.
DiscountedSolution value_iteration(const CtmdpModel& model, double alpha,
                                   double tol, long max_iter = 10'000'000);
DiscountedSolution value_iteration(const CtmdpModel& model, double alpha,
                                   double tol, const ViOptions& options);

/// Greedy argmin of the T-bracket at v, lowest action index on ties.
PolicyDeterministic extract_greedy_policy(const CtmdpModel& model, double alpha,
                                          const std::vector<double>& v);

/// Exact policy value: solves (alpha I - Q_pi) v = c_pi by LU factorization.
/// Entries below -1e-10 raise ErrorKind::numerical; small negative rounding
/// is clamped to zero.
std::vector<double> exact_discounted_value(const CtmdpModel& model,
                                           const PolicyRandomized& policy,
                                           double alpha);
std::vector<double> exact_discounted_value(const CtmdpModel& model,
                                           const PolicyDeterministic& policy,
                                           double alpha);

/// Certified discounted solve in gain/relative coordinates, used by the
/// vanishing-discount sweep where plain value iteration would need ~w/alpha
/// sweeps. Returns W_alpha split as W = gain/alpha + relative with
/// min relative = 0, certified by the same stopping rule as value iteration
/// (||T v - v||_inf <= tol, evaluated algebraically in relative coordinates
/// so it is meaningful at any alpha).
struct RelativeDiscountedSolution {
    double alpha = 0.0;
    double gain = 0.0;                 // alpha * min_x W_alpha(x)
    std::vector<double> relative;      // h_alpha = W_alpha - min W_alpha
    PolicyDeterministic policy;
    double residual = 0.0;
    long iterations = 0; // improvement rounds or VI sweeps
    bool converged = false;
    std::string method;

    double min_value() const { return gain / alpha; } // m_alpha
};

struct CertifiedSolveOptions {
    double tol = 1e-11;
    long vi_sweep_budget = 300'000; // use plain VI when it fits this budget
    long vi_max_iter = 10'000'000;
    std::optional<PolicyDeterministic> hint; // improvement seed
};

RelativeDiscountedSolution solve_discounted_certified(const CtmdpModel& model,
                                                      double alpha,
                                                      const CertifiedSolveOptions& options);

} // namespace ctmdp
