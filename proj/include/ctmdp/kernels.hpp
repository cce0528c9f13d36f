#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ctmdp/model.hpp"

namespace ctmdp {

/// Uniformized discrete-time kernel at discount alpha > 0:
///   Q(y|x,a)   = w(x)/(w(x)+alpha) * (q(y|x,a)/w(x) + [y=x])   (>= 0),
///   defect(x,a) = alpha/(w(x)+alpha)                       (mass to cemetery),
///   stage_cost(x,a) = c(x,a)/(alpha+w(x)).
/// Rows satisfy sum_y Q + defect = 1 (up to rounding) for conservative models.
struct UniformizedKernel {
    double alpha = 0.0;
    std::vector<std::vector<std::vector<double>>> prob; // [x][a][y]
    std::vector<std::vector<double>> defect;            // [x][a]
    std::vector<std::vector<double>> stage_cost;        // [x][a]
};

UniformizedKernel uniformize(const CtmdpModel& model, double alpha);

/// One application of the uniformized Bellman operator
///   (T v)(x) = min_a { c(x,a)/(alpha+w(x))
///                      + w(x)/(w(x)+alpha) * sum_y v(y) (q(y|x,a)/w(x) + [y=x]) }.
/// Ties broken by lowest action index. `argmin` (if non-null) receives the
/// minimizing action per state.
std::vector<double> bellman_T(const CtmdpModel& model, double alpha,
                              const std::vector<double>& v,
                              std::vector<int>* argmin = nullptr);

/// Same operator expressed on a precomputed kernel (used by value iteration
/// so per-sweep arithmetic is identical across iterations).
std::vector<double> bellman_T(const UniformizedKernel& kernel,
                              const std::vector<double>& v,
                              std::vector<int>* argmin = nullptr);

/// Exit-rate-normalized form of the same fixed-point equation:
///   (T~ v)(x) = min_a { c(x,a)/(alpha+q_x(a))
///                       + sum_{y != x} v(y) q(y|x,a)/(alpha+q_x(a)) }.
std::vector<double> bellman_T_tilde(const CtmdpModel& model, double alpha,
                                    const std::vector<double>& v,
                                    std::vector<int>* argmin = nullptr);

/// Partial sum sum_{k=0..k_max_used} p_k(0,x,t,y) of the transient kernel
/// series under a stationary policy. p_0(0,x,t,.) = delta_x e^{-q_x t};
/// p_k is the first-jump recursion with the time integral evaluated by
/// composite Simpson quadrature, refined until the result changes by less
/// than `quad_tol`. Terms are dropped once the remaining mass (1 - min row
/// sum) falls below 1e-13, which bounds every later term elementwise.
struct TransientKernel {
    double t = 0.0;
    int k_max_used = 0;                        // last k actually accumulated
    Eigen::MatrixXd matrix;                    // sub-probability rows
    std::vector<std::vector<double>> row_sums_by_k; // [k][x], partial sums
};

TransientKernel transient_kernel_series(const CtmdpModel& model,
                                        const PolicyRandomized& policy,
                                        double t, int k_max,
                                        double quad_tol = 1e-10);
TransientKernel transient_kernel_series(const CtmdpModel& model,
                                        const PolicyDeterministic& policy,
                                        double t, int k_max,
                                        double quad_tol = 1e-10);

/// exp(t * generator) by scaling-and-squaring with a truncated Taylor series.
/// Requires zero row sums and nonnegative off-diagonal entries; the result
/// rows sum to 1 up to rounding. Independent oracle for the series above.
Eigen::MatrixXd matrix_exponential_oracle(const Eigen::MatrixXd& generator, double t);

} // namespace ctmdp
