#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ctmdp/discounted.hpp"
#include "ctmdp/kernels.hpp"
#include "ctmdp/rng.hpp"
#include "support/test_models.hpp"

using namespace ctmdp;
using testing::mm1_adm;
using testing::random_model;
using testing::random_policy;
using testing::single_state;
using testing::two_state_symmetric;

TEST_CASE("uniformization of the one-state zero generator") {
    const auto kernel = uniformize(single_state(2.0, 1.0), 1.0);
    CHECK(kernel.prob[0][0][0] == 0.5);
    CHECK(kernel.defect[0][0] == 0.5);
    CHECK(kernel.stage_cost[0][0] == 1.0);
}

TEST_CASE("uniformization of mm1-adm at alpha=1") {
    const auto kernel = uniformize(mm1_adm(), 1.0);
    // state 1, fast: Q(0) = (3/4)(3/3) = 3/4, Q(1) = (3/4)(-3/3 + 1) = 0
    CHECK(kernel.prob[1][1][0] == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(kernel.prob[1][1][1] == doctest::Approx(0.0));
    CHECK(kernel.defect[1][1] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(kernel.stage_cost[1][1] == doctest::Approx(1.25).epsilon(1e-15));
    // state 1, slow: Q(0) = 1/4, Q(1) = 1/2, stage cost 1/2
    CHECK(kernel.prob[1][0][0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(kernel.prob[1][0][1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(kernel.stage_cost[1][0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("uniformized rows are probability rows with defect alpha/(w+alpha)") {
    for (std::uint64_t i = 0; i < 20; ++i) {
        const CtmdpModel m = random_model(404, i);
        for (double alpha : {0.05, 1.0, 20.0}) {
            const auto kernel = uniformize(m, alpha);
            for (int x = 0; x < m.num_states; ++x)
                for (int a = 0; a < m.action_count(x); ++a) {
                    double sum = 0.0;
                    for (int y = 0; y < m.num_states; ++y) {
                        CHECK(kernel.prob[x][a][y] >= 0.0);
                        sum += kernel.prob[x][a][y];
                    }
                    CHECK(kernel.defect[x][a] == alpha / (m.weight[x] + alpha));
                    CHECK(sum + kernel.defect[x][a] == doctest::Approx(1.0).epsilon(1e-12));
                    CHECK(kernel.stage_cost[x][a] >= 0.0);
                }
        }
    }
}

TEST_CASE("defect mass grows with alpha") {
    const CtmdpModel m = mm1_adm();
    double previous = 0.0;
    for (double alpha : {0.1, 1.0, 10.0, 100.0}) {
        const auto kernel = uniformize(m, alpha);
        CHECK(kernel.defect[0][0] > previous);
        previous = kernel.defect[0][0];
    }
}

TEST_CASE("uniformize rejects nonpositive alpha") {
    CHECK_THROWS_AS(uniformize(mm1_adm(), 0.0), CtmdpError);
    CHECK_THROWS_AS(uniformize(mm1_adm(), -1.0), CtmdpError);
}

TEST_CASE("T operator on the one-state model") {
    const CtmdpModel m = single_state(2.0, 1.0);
    CHECK(bellman_T(m, 1.0, {0.0})[0] == 1.0);
    CHECK(bellman_T(m, 1.0, {2.0})[0] == 2.0); // fixed point c/alpha
}

TEST_CASE("T operator on mm1-adm picks slow at the zero vector") {
    std::vector<int> argmin;
    const auto tv = bellman_T(mm1_adm(), 1.0, {0.0, 0.0}, &argmin);
    CHECK(tv[0] == doctest::Approx(0.0));
    CHECK(tv[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(argmin[1] == 0);
}

TEST_CASE("T-tilde operator hand values") {
    CHECK(bellman_T_tilde(single_state(2.0, 1.0), 1.0, {7.0})[0] == 2.0);
    const auto tv = bellman_T_tilde(mm1_adm(), 1.0, {0.0, 0.0});
    CHECK(tv[1] == doctest::Approx(1.0)); // min{2/2, 5/4}
}

TEST_CASE("T fixed point satisfies the exit-rate-normalized equation") {
    const auto sol = value_iteration(mm1_adm(), 1.0, 1e-12);
    REQUIRE(sol.converged);
    const auto tv = bellman_T_tilde(mm1_adm(), 1.0, sol.values);
    for (int x = 0; x < 2; ++x)
        CHECK(std::abs(tv[x] - sol.values[x]) <= 1e-9);
}

TEST_CASE("both operators are monotone") {
    CounterRng rng(505, 0);
    for (std::uint64_t i = 0; i < 20; ++i) {
        const CtmdpModel m = random_model(505, i);
        const double alpha = 0.1 + 2.0 * rng.next_uniform();
        std::vector<double> v(m.num_states), vp(m.num_states);
        for (int x = 0; x < m.num_states; ++x) {
            v[x] = 10.0 * rng.next_uniform();
            vp[x] = v[x] + 5.0 * rng.next_uniform();
        }
        const auto tv = bellman_T(m, alpha, v);
        const auto tvp = bellman_T(m, alpha, vp);
        const auto sv = bellman_T_tilde(m, alpha, v);
        const auto svp = bellman_T_tilde(m, alpha, vp);
        for (int x = 0; x < m.num_states; ++x) {
            CHECK(tv[x] <= tvp[x]);
            CHECK(sv[x] <= svp[x]);
        }
    }
}

TEST_CASE("E1/E2 residual transfer bound on solver output") {
    for (std::uint64_t i = 0; i < 10; ++i) {
        const CtmdpModel m = random_model(606, i);
        for (double alpha : {0.1, 1.0}) {
            const auto sol = value_iteration(m, alpha, 1e-12);
            REQUIRE(sol.converged);
            double c_bound = 0.0;
            for (double w : m.weight) c_bound = std::max(c_bound, (w + alpha) / alpha);
            const auto tv = bellman_T_tilde(m, alpha, sol.values);
            for (int x = 0; x < m.num_states; ++x)
                CHECK(std::abs(tv[x] - sol.values[x]) <= c_bound * 1e-12 + 1e-9);
        }
    }
}

TEST_CASE("transient series of a jump-free state is the identity") {
    const CtmdpModel m = single_state(2.0, 1.0);
    for (int k_max : {0, 3, 10}) {
        const auto kernel =
            transient_kernel_series(m, PolicyDeterministic{{0}}, 1.0, k_max);
        CHECK(kernel.matrix(0, 0) == 1.0);
    }
}

TEST_CASE("transient series matches the two-state closed form") {
    const auto kernel =
        transient_kernel_series(two_state_symmetric(), PolicyDeterministic{{0, 0}}, 1.0, 30);
    const double expected = (1.0 + std::exp(-2.0)) / 2.0; // 0.5676676416183064
    CHECK(std::abs(kernel.matrix(0, 0) - expected) <= 1e-9);
    CHECK(std::abs(kernel.matrix(0, 1) - (1.0 - expected)) <= 1e-9);
}

TEST_CASE("k_max = 0 keeps only the no-jump term") {
    const CtmdpModel m = mm1_adm();
    const PolicyDeterministic slow{{0, 0}};
    const double t = 0.7;
    const auto kernel = transient_kernel_series(m, slow, t, 0);
    CHECK(kernel.matrix(0, 0) == doctest::Approx(std::exp(-1.0 * t)).epsilon(1e-14));
    CHECK(kernel.matrix(1, 1) == doctest::Approx(std::exp(-1.0 * t)).epsilon(1e-14));
    CHECK(kernel.matrix(0, 1) == 0.0);
}

TEST_CASE("series row sums are monotone in k and bounded by the exponential") {
    for (std::uint64_t i = 0; i < 8; ++i) {
        const CtmdpModel m = random_model(707, i);
        const PolicyDeterministic policy = random_policy(m, 707, i);
        const MixedDynamics mix = mix_policy(m, policy);
        double qbar = 0.0;
        for (double r : mix.exit_rate) qbar = std::max(qbar, r);
        const double t = 0.4;
        const int k_max = static_cast<int>(std::ceil(10.0 * qbar * t)) + 20;
        const auto kernel = transient_kernel_series(m, policy, t, k_max);

        Eigen::MatrixXd gen(m.num_states, m.num_states);
        for (int x = 0; x < m.num_states; ++x)
            for (int y = 0; y < m.num_states; ++y) gen(x, y) = mix.generator[x][y];
        const Eigen::MatrixXd expm = matrix_exponential_oracle(gen, t);

        for (std::size_t k = 1; k < kernel.row_sums_by_k.size(); ++k)
            for (int x = 0; x < m.num_states; ++x)
                CHECK(kernel.row_sums_by_k[k][x] >= kernel.row_sums_by_k[k - 1][x]);
        for (int x = 0; x < m.num_states; ++x) {
            const double series_sum = kernel.row_sums_by_k.back()[x];
            CHECK(series_sum <= 1.0 + 1e-10);
            CHECK(std::abs(series_sum - expm.row(x).sum()) <= 1e-8);
        }
        CHECK((kernel.matrix - expm).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("series rejects negative time and negative k_max") {
    CHECK_THROWS_AS(transient_kernel_series(mm1_adm(), PolicyDeterministic{{0, 0}}, -1.0, 3),
                    CtmdpError);
    CHECK_THROWS_AS(transient_kernel_series(mm1_adm(), PolicyDeterministic{{0, 0}}, 1.0, -1),
                    CtmdpError);
}

TEST_CASE("matrix exponential oracle basics") {
    SUBCASE("t = 0 gives the identity") {
        Eigen::MatrixXd gen(2, 2);
        gen << -1.0, 1.0, 1.0, -1.0;
        CHECK(matrix_exponential_oracle(gen, 0.0).isIdentity(1e-15));
    }
    SUBCASE("two-state symmetric closed form") {
        Eigen::MatrixXd gen(2, 2);
        gen << -1.0, 1.0, 1.0, -1.0;
        const auto p = matrix_exponential_oracle(gen, 1.0);
        CHECK(p(0, 0) == doctest::Approx((1.0 + std::exp(-2.0)) / 2.0).epsilon(1e-12));
    }
    SUBCASE("one state") {
        Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(1, 1);
        CHECK(matrix_exponential_oracle(gen, 5.0)(0, 0) == 1.0);
    }
    SUBCASE("invalid generators are rejected") {
        Eigen::MatrixXd bad(2, 2);
        bad << -1.0, 0.5, 1.0, -1.0;
        CHECK_THROWS_AS(matrix_exponential_oracle(bad, 1.0), CtmdpError);
        bad << 1.0, -1.0, -1.0, 1.0;
        CHECK_THROWS_AS(matrix_exponential_oracle(bad, 1.0), CtmdpError);
    }
    SUBCASE("rows sum to one on random generators") {
        for (std::uint64_t i = 0; i < 10; ++i) {
            const CtmdpModel m = random_model(808, i);
            const MixedDynamics mix = mix_policy(m, random_policy(m, 808, i));
            Eigen::MatrixXd gen(m.num_states, m.num_states);
            for (int x = 0; x < m.num_states; ++x)
                for (int y = 0; y < m.num_states; ++y) gen(x, y) = mix.generator[x][y];
            const auto p = matrix_exponential_oracle(gen, 2.5);
            for (int x = 0; x < m.num_states; ++x)
                CHECK(p.row(x).sum() == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}
