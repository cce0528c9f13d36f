#pragma once

#include <string>
#include <vector>

#include "ctmdp/discounted.hpp"
#include "ctmdp/model.hpp"

namespace ctmdp {

struct AlphaRecord {
    double alpha = 0.0;
    double m_alpha = 0.0;          // min_x W_alpha(x)
    double g_alpha = 0.0;          // alpha * m_alpha
    std::vector<double> h_alpha;   // W_alpha - m_alpha, min entry exactly 0
    long iterations = 0;
    std::string method;
};

struct AverageSolution {
    double g = 0.0;                 // limsup estimate: max g_alpha over tail window
    std::vector<double> h;          // liminf estimate: min h_alpha over tail window
    PolicyDeterministic policy;     // bracket argmin at (g, h)
    std::vector<double> alpha_grid; // decreasing
    std::vector<AlphaRecord> trace;
    bool converged = false;
    std::vector<std::string> notes; // grid truncation, chain structure, ...
};

struct AverageOptions {
    double alpha0 = 1.0;
    double ratio = 0.5;
    int steps = 30;
    double vi_tol = 1e-11;
    double tol_g = 1e-7;
    double tol_h = 1e-6;
    int tail_window = 3;
    long vi_sweep_budget = 300'000; // per-alpha budget before the exact path
    long vi_max_iter = 10'000'000;
    bool exact_small_alpha = true;  // certified exact path once VI is over budget
};

/// Vanishing-discount sweep: solves the discounted problem along
/// alpha_k = alpha0 * ratio^k, records (m_alpha, g_alpha, h_alpha), and
/// estimates g = max over the final `tail_window` grid points of g_alpha and
/// h(x) = min over the same window of h_alpha(x). `converged` requires both
/// successive g_alpha differences and sup-norm h_alpha differences within
/// tolerance across the tail window. If a small-alpha solve cannot be
/// certified after at least 5 grid points, the grid is truncated there and a
/// note is attached; an earlier failure propagates as non_convergence.
AverageSolution vanishing_discount(const CtmdpModel& model,
                                   const AverageOptions& options = {});

struct CertificateReport {
    std::string kind;
    bool ok = true;
    std::vector<double> slack; // per state
    int worst_state = -1;
    double tolerance = 0.0;
    std::vector<std::string> notes;

    double min_slack() const;
};

/// slack(x) = g + w(x) h(x) - min_a { c(x,a) + w(x) sum_y h(y)(q(y|x,a)/w(x) + [y=x]) };
/// ok iff min_x slack >= -tol.
CertificateReport optimality_inequality_residual(const CtmdpModel& model, double g,
                                                 const std::vector<double>& h,
                                                 double tol = 1e-6);

/// Selector attaining the bracket minimum at (g, h); lowest index on ties.
PolicyDeterministic extract_average_policy(const CtmdpModel& model, double g,
                                           const std::vector<double>& h);

/// Stationary-policy upper-bound certificate: per state
///   slack(x) = g + h(x) sum_a q_x(a) pi(a|x)
///              - sum_a c(x,a) pi(a|x) - sum_{y != x} h(y) sum_a q(y|x,a) pi(a|x);
/// ok implies g bounds the long-run average cost of pi from every start.
CertificateReport verify_upper_bound(const CtmdpModel& model,
                                     const PolicyRandomized& policy, double g,
                                     const std::vector<double>& h,
                                     double tol = 1e-9);
CertificateReport verify_upper_bound(const CtmdpModel& model,
                                     const PolicyDeterministic& policy, double g,
                                     const std::vector<double>& h,
                                     double tol = 1e-9);

/// Finite best stationary average cost with a witness policy (enumeration
/// oracle); falls back to an alpha*m_alpha probe over a small grid if the
/// enumeration cap is exceeded.
CertificateReport check_condition1(const CtmdpModel& model,
                                   long enumeration_cap = 1'000'000);

/// Bounded relative values along the trace: the running infimum
/// H_k(x) = min_{j >= k} h_{alpha_j}(x) must stay below `threshold` on the
/// final window and its increment across the last 3 points must not exceed
/// `slope_tol`. Requires at least 5 grid points.
CertificateReport check_condition2(const std::vector<AlphaRecord>& trace,
                                   double threshold = 1e6,
                                   double slope_tol = 1e-3);

} // namespace ctmdp
