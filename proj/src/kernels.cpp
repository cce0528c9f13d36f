#include "ctmdp/kernels.hpp"

#include <cmath>
#include <limits>

namespace ctmdp {

UniformizedKernel uniformize(const CtmdpModel& model, double alpha) {
    require_valid(model);
    if (!(alpha > 0.0))
        throw CtmdpError(ErrorKind::usage, "discount alpha must be positive");

    const int n = model.num_states;
    UniformizedKernel kernel;
    kernel.alpha = alpha;
    kernel.prob.resize(n);
    kernel.defect.resize(n);
    kernel.stage_cost.resize(n);
    for (int x = 0; x < n; ++x) {
        const double w = model.weight[x];
        const double factor = w / (w + alpha);
        const int na = model.action_count(x);
        kernel.prob[x].resize(na);
        kernel.defect[x].assign(na, alpha / (w + alpha));
        kernel.stage_cost[x].resize(na);
        for (int a = 0; a < na; ++a) {
            const auto& q = model.rates[x][a];
            auto& row = kernel.prob[x][a];
            row.resize(n);
            for (int y = 0; y < n; ++y)
                row[y] = factor * (q[y] / w + (y == x ? 1.0 : 0.0));
            kernel.stage_cost[x][a] = model.cost[x][a] / (alpha + w);
        }
    }
    return kernel;
}

std::vector<double> bellman_T(const UniformizedKernel& kernel,
                              const std::vector<double>& v,
                              std::vector<int>* argmin) {
    const int n = static_cast<int>(kernel.prob.size());
    std::vector<double> out(n);
    if (argmin) argmin->assign(n, 0);
    for (int x = 0; x < n; ++x) {
        double best = std::numeric_limits<double>::infinity();
        int best_a = 0;
        const int na = static_cast<int>(kernel.prob[x].size());
        for (int a = 0; a < na; ++a) {
            const auto& row = kernel.prob[x][a];
            double s = 0.0;
            for (int y = 0; y < n; ++y) s += row[y] * v[y];
            const double value = kernel.stage_cost[x][a] + s;
            if (value < best) {
                best = value;
                best_a = a;
            }
        }
        out[x] = best;
        if (argmin) (*argmin)[x] = best_a;
    }
    return out;
}

std::vector<double> bellman_T(const CtmdpModel& model, double alpha,
                              const std::vector<double>& v,
                              std::vector<int>* argmin) {
    if (v.size() != static_cast<std::size_t>(model.num_states))
        throw CtmdpError(ErrorKind::structure, "value vector has wrong length");
    return bellman_T(uniformize(model, alpha), v, argmin);
}

std::vector<double> bellman_T_tilde(const CtmdpModel& model, double alpha,
                                    const std::vector<double>& v,
                                    std::vector<int>* argmin) {
    require_valid(model);
    if (!(alpha > 0.0))
        throw CtmdpError(ErrorKind::usage, "discount alpha must be positive");
    if (v.size() != static_cast<std::size_t>(model.num_states))
        throw CtmdpError(ErrorKind::structure, "value vector has wrong length");

    const int n = model.num_states;
    std::vector<double> out(n);
    if (argmin) argmin->assign(n, 0);
    for (int x = 0; x < n; ++x) {
        double best = std::numeric_limits<double>::infinity();
        int best_a = 0;
        for (int a = 0; a < model.action_count(x); ++a) {
            const double denom = alpha + model.exit_rate(x, a);
            double s = model.cost[x][a];
            const auto& q = model.rates[x][a];
            for (int y = 0; y < n; ++y)
                if (y != x) s += v[y] * q[y];
            const double value = s / denom;
            if (value < best) {
                best = value;
                best_a = a;
            }
        }
        out[x] = best;
        if (argmin) (*argmin)[x] = best_a;
    }
    return out;
}

namespace {

// One pass of the series recursion on a uniform grid with N panels over
// [0, t]. Returns the accumulated partial-sum matrix at time t together with
// the per-k row sums; stops after k_max terms or once the remaining mass
// max_x (1 - row sum) drops below mass_tol (every later term is nonnegative
// and elementwise below that defect for conservative models).
struct SeriesPass {
    Eigen::MatrixXd total;
    std::vector<std::vector<double>> row_sums_by_k;
    int k_used = 0;
};

SeriesPass series_on_grid(const MixedDynamics& mix, double t, int k_max, int N,
                          double mass_tol) {
    const int n = static_cast<int>(mix.exit_rate.size());
    const double h = t / N;

    Eigen::MatrixXd q_off(n, n); // jump rates, zero diagonal
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            q_off(x, y) = (x == y) ? 0.0 : mix.generator[x][y];

    // R[i] = p_k(0, ., u_i, .) at node u_i = i*h for the current k.
    std::vector<Eigen::MatrixXd> R(N + 1), A(N + 1), next(N + 1);
    for (int i = 0; i <= N; ++i) {
        R[i] = Eigen::MatrixXd::Zero(n, n);
        for (int x = 0; x < n; ++x)
            R[i](x, x) = std::exp(-mix.exit_rate[x] * (i * h));
    }

    SeriesPass pass;
    pass.total = R[N];
    {
        Eigen::VectorXd rs = pass.total.rowwise().sum();
        pass.row_sums_by_k.emplace_back(rs.data(), rs.data() + n);
    }

    for (int k = 1; k <= k_max; ++k) {
        const double defect = 1.0 - pass.total.rowwise().sum().minCoeff();
        if (defect < mass_tol) break;

        for (int i = 0; i <= N; ++i) A[i].noalias() = q_off * R[i];
        for (int i = 0; i <= N; ++i) next[i].setZero(n, n);

        for (int x = 0; x < n; ++x) {
            if (q_off.row(x).isZero(0.0)) continue; // no jumps out of x: p_k row stays 0
            const double qx = mix.exit_rate[x];
            const double e1 = std::exp(-qx * h);
            const double e2 = e1 * e1;
            // I(u_j) = int_0^{u_j} e^{-qx (u_j - u)} A_x(u) du, built stably by
            //   I(u_j) = e^{-2 qx h} I(u_{j-2}) + Simpson over [u_{j-2}, u_j],
            // with the first panel integrated by the half-range Newton-Cotes
            //   int_0^h f ~= h/12 (5 f0 + 8 f1 - f2).
            next[1].row(x) = (h / 12.0) * (5.0 * e1 * A[0].row(x) +
                                           8.0 * A[1].row(x) -
                                           (1.0 / e1) * A[2].row(x));
            for (int j = 2; j <= N; ++j) {
                next[j].row(x) = e2 * next[j - 2].row(x) +
                                 (h / 3.0) * (e2 * A[j - 2].row(x) +
                                              4.0 * e1 * A[j - 1].row(x) + A[j].row(x));
            }
        }

        // Quadrature can produce tiny negative entries near zero; clamp so the
        // partial sums stay monotone and sub-probabilistic.
        for (int i = 0; i <= N; ++i) next[i] = next[i].cwiseMax(0.0);

        R.swap(next);
        pass.total += R[N];
        pass.k_used = k;
        Eigen::VectorXd rs = pass.total.rowwise().sum();
        pass.row_sums_by_k.emplace_back(rs.data(), rs.data() + n);
    }
    return pass;
}

TransientKernel series_impl(const CtmdpModel& model, const PolicyRandomized& policy,
                            double t, int k_max, double quad_tol) {
    require_valid(model);
    if (t < 0.0) throw CtmdpError(ErrorKind::usage, "time t must be nonnegative");
    if (k_max < 0) throw CtmdpError(ErrorKind::usage, "k_max must be nonnegative");

    const MixedDynamics mix = mix_policy(model, policy);
    const int n = model.num_states;

    TransientKernel out;
    out.t = t;
    if (t == 0.0 || k_max == 0) {
        out.matrix = Eigen::MatrixXd::Zero(n, n);
        for (int x = 0; x < n; ++x)
            out.matrix(x, x) = std::exp(-mix.exit_rate[x] * t);
        out.k_max_used = 0;
        Eigen::VectorXd rs = out.matrix.rowwise().sum();
        out.row_sums_by_k.emplace_back(rs.data(), rs.data() + n);
        return out;
    }

    double qbar = 0.0;
    for (double r : mix.exit_rate) qbar = std::max(qbar, r);

    int N = 64;
    while (N < 8.0 * qbar * t) N *= 2;
    constexpr int kNodeCap = 1 << 15;
    constexpr double kMassTol = 1e-13;

    SeriesPass pass = series_on_grid(mix, t, k_max, N, kMassTol);
    while (N < kNodeCap) {
        SeriesPass finer = series_on_grid(mix, t, k_max, 2 * N, kMassTol);
        const double diff = (finer.total - pass.total).cwiseAbs().maxCoeff();
        pass = std::move(finer);
        N *= 2;
        if (diff <= quad_tol) break;
    }

    out.matrix = std::move(pass.total);
    out.k_max_used = pass.k_used;
    out.row_sums_by_k = std::move(pass.row_sums_by_k);
    return out;
}

} // namespace

TransientKernel transient_kernel_series(const CtmdpModel& model,
                                        const PolicyRandomized& policy, double t,
                                        int k_max, double quad_tol) {
    return series_impl(model, policy, t, k_max, quad_tol);
}

TransientKernel transient_kernel_series(const CtmdpModel& model,
                                        const PolicyDeterministic& policy, double t,
                                        int k_max, double quad_tol) {
    return series_impl(model, to_randomized(model, policy), t, k_max, quad_tol);
}

Eigen::MatrixXd matrix_exponential_oracle(const Eigen::MatrixXd& generator, double t) {
    const auto n = generator.rows();
    if (generator.cols() != n)
        throw CtmdpError(ErrorKind::invariant, "generator must be square");
    if (t < 0.0) throw CtmdpError(ErrorKind::usage, "time t must be nonnegative");
    const double scale = std::max(1.0, generator.cwiseAbs().maxCoeff());
    for (Eigen::Index x = 0; x < n; ++x) {
        if (std::abs(generator.row(x).sum()) > 1e-9 * scale)
            throw CtmdpError(ErrorKind::invariant,
                             "generator row " + std::to_string(x) + " does not sum to zero");
        for (Eigen::Index y = 0; y < n; ++y)
            if (y != x && generator(x, y) < 0.0)
                throw CtmdpError(ErrorKind::invariant,
                                 "generator has a negative off-diagonal entry");
    }

    Eigen::MatrixXd B = t * generator;
    int squarings = 0;
    double norm = B.cwiseAbs().rowwise().sum().maxCoeff();
    while (norm > 0.5) {
        B *= 0.5;
        norm *= 0.5;
        ++squarings;
    }

    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
    for (int j = 1; j <= 60; ++j) {
        term = (term * B) / static_cast<double>(j);
        result += term;
        if (term.cwiseAbs().maxCoeff() < 1e-20) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

} // namespace ctmdp
