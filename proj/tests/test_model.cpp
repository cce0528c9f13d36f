#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>
#include <string>

#include "ctmdp/model.hpp"
#include "ctmdp/model_io.hpp"
#include "support/test_models.hpp"

using namespace ctmdp;
using testing::mm1_adm;
using testing::pure_birth;
using testing::random_model;
using testing::single_state;

namespace {

bool has_violation(const ValidationReport& report, const std::string& invariant,
                   int state, int action = -1) {
    for (const auto& v : report.violations)
        if (v.invariant == invariant && v.state == state && v.action == action)
            return true;
    return false;
}

} // namespace

TEST_CASE("zero generator validates") {
    const auto report = validate_model(single_state());
    CHECK(report.ok);
    CHECK(report.violations.empty());
}

TEST_CASE("non-conservative row is rejected with its magnitude") {
    CtmdpModel m;
    m.num_states = 2;
    m.actions = {{"a"}, {"a"}};
    m.rates = {{{-0.5, 1.0}}, {{0.0, 0.0}}};
    m.cost = {{0.0}, {0.0}};
    m.weight = {1.0, 1.0};
    const auto report = validate_model(m);
    CHECK_FALSE(report.ok);
    REQUIRE(has_violation(report, "conservative", 0, 0));
    for (const auto& v : report.violations)
        if (v.invariant == "conservative") CHECK(v.magnitude == doctest::Approx(0.5));
}

TEST_CASE("mm1-adm validates") {
    CHECK(validate_model(mm1_adm()).ok);
}

TEST_CASE("each invariant is reported individually") {
    CtmdpModel m = mm1_adm();

    SUBCASE("negative off-diagonal") {
        m.rates[1][0][0] = -0.25;
        CHECK(has_violation(validate_model(m), "off_diagonal_nonneg", 1, 0));
    }
    SUBCASE("weight below max exit rate") {
        m.weight[1] = 2.0;
        const auto report = validate_model(m);
        REQUIRE(has_violation(report, "stable_dominated", 1));
        CHECK(report.violations[0].magnitude == doctest::Approx(1.0));
    }
    SUBCASE("negative cost") {
        m.cost[1][1] = -1.0;
        CHECK(has_violation(validate_model(m), "cost_nonneg", 1, 1));
    }
    SUBCASE("nonpositive weight") {
        m.weight[0] = 0.0;
        const auto report = validate_model(m);
        CHECK(has_violation(report, "weight_positive", 0));
        CHECK(has_violation(report, "stable_dominated", 0));
    }
    SUBCASE("empty action set") {
        m.actions[0].clear();
        m.rates[0].clear();
        m.cost[0].clear();
        CHECK(has_violation(validate_model(m), "actions_nonempty", 0));
    }
    SUBCASE("weight equal to max exit rate is allowed") {
        m.weight[1] = 3.0;
        CHECK(validate_model(m).ok);
    }
}

TEST_CASE("dimension mismatch is a structural error, not a violation") {
    CtmdpModel m = mm1_adm();
    m.rates[1].pop_back();
    CHECK_THROWS_AS(validate_model(m), CtmdpError);
    try {
        validate_model(m);
    } catch (const CtmdpError& e) {
        CHECK(e.kind() == ErrorKind::structure);
    }
}

TEST_CASE("save/load round trip is bit exact") {
    CtmdpModel m = mm1_adm();
    m.rates[1][1][0] = 3.000000000000123; // exercise full double precision
    m.rates[1][1][1] = -3.000000000000123;
    const CtmdpModel loaded = load_model(save_model(m));
    CHECK(validate_model(loaded).ok);
    REQUIRE(loaded.num_states == m.num_states);
    for (int x = 0; x < m.num_states; ++x) {
        CHECK(loaded.actions[x] == m.actions[x]);
        CHECK(loaded.weight[x] == m.weight[x]);
        for (int a = 0; a < m.action_count(x); ++a) {
            CHECK(loaded.cost[x][a] == m.cost[x][a]);
            for (int y = 0; y < m.num_states; ++y)
                CHECK(loaded.rates[x][a][y] == m.rates[x][a][y]);
        }
    }
}

TEST_CASE("round trip stability on random models") {
    for (std::uint64_t i = 0; i < 25; ++i) {
        const CtmdpModel m = random_model(101, i);
        REQUIRE(validate_model(m).ok);
        CHECK(validate_model(load_model(save_model(m))).ok);
    }
}

TEST_CASE("loader distinguishes parse, schema, and invariant failures") {
    SUBCASE("malformed JSON") {
        try {
            load_model("{not json");
            FAIL("expected parse error");
        } catch (const CtmdpError& e) {
            CHECK(e.kind() == ErrorKind::parse);
        }
    }
    SUBCASE("missing weight names the field") {
        std::string text = save_model(single_state());
        const auto pos = text.find("\"weight\"");
        REQUIRE(pos != std::string::npos);
        text.replace(pos, 8, "\"weighx\"");
        try {
            load_model(text);
            FAIL("expected schema error");
        } catch (const CtmdpError& e) {
            CHECK(e.kind() == ErrorKind::schema);
            CHECK(std::string(e.what()).find("weight") != std::string::npos);
        }
    }
    SUBCASE("negative cost is an invariant error with a report") {
        CtmdpModel m = single_state(/*cost=*/-1.0);
        try {
            load_model(save_model(m));
            FAIL("expected validation failure");
        } catch (const ValidationFailure& e) {
            CHECK(e.kind() == ErrorKind::invariant);
            CHECK(has_violation(e.report(), "cost_nonneg", 0, 0));
        }
    }
}

TEST_CASE("exit rates are dominated by the weight on validated models") {
    for (std::uint64_t i = 0; i < 25; ++i) {
        const CtmdpModel m = random_model(202, i);
        for (int x = 0; x < m.num_states; ++x) {
            const double qbar = m.max_exit_rate(x);
            for (int a = 0; a < m.action_count(x); ++a) CHECK(m.exit_rate(x, a) <= qbar);
            CHECK(qbar <= m.weight[x]);
        }
    }
}

TEST_CASE("drift check: trivial and hand-computed cases") {
    SUBCASE("one state, both constraints tight") {
        CHECK(check_lyapunov(single_state(2.0, 1.0), 0.0, 0.0, 1.0).ok);
    }
    SUBCASE("mm1-adm with c0=0, b0=2, M0=1") {
        // drifts: (0,idle) -> 2, (1,slow) -> -2, (1,fast) -> -6; bound is 2.
        CHECK(check_lyapunov(mm1_adm(), 0.0, 2.0, 1.0).ok);
        CHECK_FALSE(check_lyapunov(mm1_adm(), 0.0, 1.9, 1.0).ok);
    }
    SUBCASE("pure birth with quadratic weights violates the drift bound") {
        // drift at level n < 50 is (n+1)^2 (2n+3) against 3 (n+1)^2 + 4:
        // satisfied at n = 0 (3 <= 7), violated from n = 1 on (20 > 16).
        const auto report = check_lyapunov(pure_birth(50), 3.0, 4.0, 1.0);
        CHECK_FALSE(report.ok);
        CHECK_FALSE(has_violation(report, "lyapunov_drift", 0, 0));
        REQUIRE(has_violation(report, "lyapunov_drift", 1, 0));
        for (const auto& v : report.violations)
            if (v.state == 1) CHECK(v.magnitude == doctest::Approx(4.0));
        for (const auto& v : report.violations) CHECK(v.invariant == "lyapunov_drift");
    }
}

TEST_CASE("drift check: the finite max always witnesses the condition") {
    for (std::uint64_t i = 0; i < 25; ++i) {
        const CtmdpModel m = random_model(303, i);
        double c0 = -std::numeric_limits<double>::infinity();
        for (int x = 0; x < m.num_states; ++x)
            for (int a = 0; a < m.action_count(x); ++a) {
                double drift = 0.0;
                for (int y = 0; y < m.num_states; ++y)
                    drift += m.weight[y] * m.rates[x][a][y];
                c0 = std::max(c0, drift / m.weight[x]);
            }
        CHECK(check_lyapunov(m, c0, 0.0, 1.0).ok);
    }
}

TEST_CASE("sufficient condition for bounded relative values") {
    SUBCASE("single state: empty constraint set") {
        const auto report = check_condition2_sufficient(single_state(), 0, {0.0});
        CHECK(report.ok);
        REQUIRE_FALSE(report.notes.empty());
    }
    SUBCASE("mm1-adm, z=0, v=(0,5): both rows satisfied") {
        // slow: 2 + (-1)(5) = -3 <= 0, fast: 5 + (-3)(5) = -10 <= 0
        const auto report = check_condition2_sufficient(mm1_adm(), 0, {0.0, 5.0});
        CHECK(report.ok);
        CHECK(report.notes[0].find("separated") != std::string::npos);
    }
    SUBCASE("mm1-adm, z=0, v=(0,1): both rows fail") {
        const auto report = check_condition2_sufficient(mm1_adm(), 0, {0.0, 1.0});
        CHECK_FALSE(report.ok);
        REQUIRE(has_violation(report, "condition2_sufficient", 1, 1));
        for (const auto& v : report.violations) {
            if (v.action == 1) CHECK(v.magnitude == doctest::Approx(2.0)); // fast: 5 - 3
            if (v.action == 0) CHECK(v.magnitude == doctest::Approx(1.0)); // slow: 2 - 1
        }
    }
    SUBCASE("z out of range") {
        CHECK_THROWS_AS(check_condition2_sufficient(mm1_adm(), 7, {0.0, 0.0}), CtmdpError);
    }
}

TEST_CASE("policy admissibility checks") {
    const CtmdpModel m = mm1_adm();
    CHECK_NOTHROW(check_policy(m, PolicyDeterministic{{0, 1}}));
    CHECK_THROWS_AS(check_policy(m, PolicyDeterministic{{0, 2}}), CtmdpError);
    CHECK_THROWS_AS(check_policy(m, PolicyDeterministic{{0}}), CtmdpError);
    CHECK_NOTHROW(check_policy(m, PolicyRandomized{{{1.0}, {0.25, 0.75}}}));
    CHECK_THROWS_AS(check_policy(m, PolicyRandomized{{{1.0}, {0.5, 0.4}}}), CtmdpError);
    CHECK_THROWS_AS(check_policy(m, PolicyRandomized{{{1.0}, {-0.1, 1.1}}}), CtmdpError);
}
