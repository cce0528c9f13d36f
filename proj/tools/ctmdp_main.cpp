// ctmdp: command-line front end for the CTMDP solver toolkit.
// Structured JSON on stdout, human-readable summary on stderr.
// Exit codes: 0 success, 1 validation failure, 2 usage/IO, 3 non-convergence.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctmdp/average.hpp"
#include "ctmdp/discounted.hpp"
#include "ctmdp/model_io.hpp"
#include "ctmdp/oracle.hpp"
#include "ctmdp/simulate.hpp"

namespace {

using nlohmann::json;
using namespace ctmdp;

constexpr const char* kVersion = "0.1.0";

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CtmdpError(ErrorKind::io, "cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

json make_manifest(const std::string& command, const std::string& model_path,
                   const std::string& model_text, const json& parameters) {
    return json{{"command", command},
                {"model_path", model_path},
                {"model_hash_fnv1a64", fnv1a64_hex(model_text)},
                {"parameters", parameters},
                {"tool_version", kVersion}};
}

json report_to_json(const ValidationReport& report) {
    json violations = json::array();
    for (const auto& v : report.violations)
        violations.push_back({{"invariant", v.invariant},
                              {"state", v.state},
                              {"action", v.action},
                              {"magnitude", v.magnitude}});
    return json{{"ok", report.ok}, {"violations", violations}, {"notes", report.notes}};
}

json certificate_to_json(const CertificateReport& report) {
    return json{{"kind", report.kind},       {"ok", report.ok},
                {"slack", report.slack},     {"worst_state", report.worst_state},
                {"tolerance", report.tolerance}, {"notes", report.notes}};
}

json policy_ids(const CtmdpModel& model, const PolicyDeterministic& policy) {
    json ids = json::array();
    for (int x = 0; x < model.num_states; ++x)
        ids.push_back(model.actions[x][policy.choice[x]]);
    return ids;
}

int exit_code_for(const CtmdpError& e) {
    switch (e.kind()) {
    case ErrorKind::invariant: return 1;
    case ErrorKind::non_convergence:
    case ErrorKind::numerical: return 3;
    default: return 2;
    }
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("CTMDP_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

int cmd_validate(const std::string& model_path) {
    Timer timer;
    const std::string text = read_file(model_path);
    const CtmdpModel model = parse_model(text);
    const ValidationReport report = validate_model(model);

    json doc;
    doc["manifest"] = make_manifest("validate", model_path, text, json::object());
    doc["report"] = report_to_json(report);
    std::cout << doc.dump(2) << "\n";
    std::cerr << "validate: " << (report.ok ? "ok" : "invalid") << " ("
              << report.violations.size() << " violation(s), " << timer.seconds()
              << " s)\n";
    return report.ok ? 0 : 1;
}

int cmd_solve_discounted(const std::string& model_path, double alpha, double tol,
                         long max_iter) {
    Timer timer;
    const std::string text = read_file(model_path);
    const CtmdpModel model = load_model(text);
    const DiscountedSolution sol = value_iteration(model, alpha, tol, max_iter);

    json doc;
    doc["manifest"] = make_manifest(
        "solve-discounted", model_path, text,
        json{{"alpha", alpha}, {"tol", tol}, {"max_iter", max_iter}});
    doc["alpha"] = sol.alpha;
    doc["values"] = sol.values;
    doc["policy"] = policy_ids(model, sol.policy);
    doc["iterations"] = sol.iterations;
    doc["residual"] = sol.residual;
    doc["converged"] = sol.converged;
    std::cout << doc.dump(2) << "\n";
    std::cerr << "solve-discounted: " << (sol.converged ? "converged" : "NOT converged")
              << " in " << sol.iterations << " sweeps, residual " << sol.residual << " ("
              << timer.seconds() << " s)\n";
    return sol.converged ? 0 : 3;
}

int cmd_solve_average(const std::string& model_path, const AverageOptions& options,
                      bool check_cond1) {
    Timer timer;
    const std::string text = read_file(model_path);
    const CtmdpModel model = load_model(text);
    const AverageSolution sol = vanishing_discount(model, options);

    json trace = json::array();
    for (const auto& rec : sol.trace)
        trace.push_back({{"alpha", rec.alpha},
                         {"m_alpha", rec.m_alpha},
                         {"g_alpha", rec.g_alpha},
                         {"h_alpha", rec.h_alpha}});

    json certificates = json::object();
    const CertificateReport opt = optimality_inequality_residual(model, sol.g, sol.h);
    const CertificateReport upper = verify_upper_bound(model, sol.policy, sol.g, sol.h);
    certificates["optimality_inequality"] = certificate_to_json(opt);
    certificates["upper_bound"] = certificate_to_json(upper);
    std::optional<CertificateReport> cond2;
    if (sol.trace.size() >= 5) {
        cond2 = check_condition2(sol.trace);
        certificates["condition2"] = certificate_to_json(*cond2);
    }
    std::optional<CertificateReport> cond1;
    if (check_cond1) {
        cond1 = check_condition1(model);
        certificates["condition1"] = certificate_to_json(*cond1);
    }

    json doc;
    doc["manifest"] = make_manifest("solve-average", model_path, text,
                                    json{{"alpha0", options.alpha0},
                                         {"ratio", options.ratio},
                                         {"steps", options.steps},
                                         {"vi_tol", options.vi_tol},
                                         {"tol_g", options.tol_g},
                                         {"tol_h", options.tol_h}});
    doc["g"] = sol.g;
    doc["h"] = sol.h;
    doc["policy"] = policy_ids(model, sol.policy);
    doc["trace"] = trace;
    doc["converged"] = sol.converged;
    doc["notes"] = sol.notes;
    doc["certificates"] = certificates;
    std::cout << doc.dump(2) << "\n";

    std::cerr << "solve-average: g = " << sol.g
              << (sol.converged ? " (converged" : " (NOT converged") << ", "
              << sol.trace.size() << " grid points, " << timer.seconds() << " s)\n";
    for (const auto& note : sol.notes) std::cerr << "note: " << note << "\n";
    if (!opt.ok)
        std::cerr << "warning: optimality-inequality certificate failed (min slack "
                  << opt.min_slack() << ")\n";
    if (!upper.ok)
        std::cerr << "warning: upper-bound certificate failed (min slack "
                  << upper.min_slack() << ")\n";
    if (cond2 && !cond2->ok) std::cerr << "warning: condition2 diagnostic not ok\n";
    if (cond1 && !cond1->ok) std::cerr << "warning: condition1 diagnostic not ok\n";
    return 0; // certification is advisory
}

int cmd_simulate(const std::string& model_path, const std::string& policy_path,
                 bool policy_from_solver, double horizon, int reps,
                 std::uint64_t seed, std::optional<double> alpha, int start,
                 long max_jumps, const std::string& trace_path, int threads) {
    Timer timer;
    const std::string text = read_file(model_path);
    const CtmdpModel model = load_model(text);

    PolicyRandomized policy;
    json policy_desc;
    if (policy_from_solver) {
        const AverageSolution sol = vanishing_discount(model, AverageOptions{});
        policy = to_randomized(model, sol.policy);
        policy_desc = {{"source", "solver"}, {"choice", policy_ids(model, sol.policy)}};
    } else {
        const ParsedPolicy parsed = parse_policy(model, read_file(policy_path));
        if (parsed.deterministic) {
            policy = to_randomized(model, *parsed.deterministic);
            policy_desc = {{"source", policy_path},
                           {"choice", policy_ids(model, *parsed.deterministic)}};
        } else {
            policy = *parsed.randomized;
            policy_desc = {{"source", policy_path}, {"kind", "randomized"}};
        }
    }

    SimulationConfig config;
    config.horizon = horizon;
    config.replications = reps;
    config.seed = seed;
    config.start_state = start;
    config.max_jumps = max_jumps;

    if (!trace_path.empty()) {
        std::ofstream out(trace_path);
        if (!out) throw CtmdpError(ErrorKind::io, "cannot write trace file: " + trace_path);
        out << "rep,t,state,action,sojourn\n";
        for (int r = 0; r < reps; ++r) {
            SimulationConfig cfg = config;
            cfg.alpha = alpha;
            simulate_trajectory(model, policy, cfg, r,
                                [&](double t, int x, double sojourn) {
                                    out << r << "," << t << "," << x << ",*," << sojourn
                                        << "\n";
                                });
        }
    }

    Estimate est;
    if (alpha)
        est = estimate_discounted_cost(model, policy, *alpha, config, threads);
    else
        est = estimate_average_cost(model, policy, config, threads);

    json parameters = {{"horizon", horizon},   {"replications", reps},
                       {"seed", seed},         {"start_state", start},
                       {"max_jumps", max_jumps}, {"policy", policy_desc}};
    if (alpha) parameters["alpha"] = *alpha;

    json doc;
    doc["manifest"] = make_manifest("simulate", model_path, text, parameters);
    doc["kind"] = alpha ? "discounted" : "average";
    doc["mean"] = est.mean;
    doc["std_error"] = est.std_error;
    doc["replications"] = est.replications;
    if (est.truncation_bias_bound) doc["truncation_bias_bound"] = *est.truncation_bias_bound;
    if (!est.warnings.empty()) doc["warnings"] = est.warnings;
    std::cout << doc.dump(2) << "\n";
    std::cerr << "simulate: mean " << est.mean << " +- " << est.std_error << " ("
              << reps << " reps, " << timer.seconds() << " s)\n";
    for (const auto& w : est.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

int cmd_oracle(const std::string& model_path, long cap) {
    Timer timer;
    const std::string text = read_file(model_path);
    const CtmdpModel model = load_model(text);
    const OracleResult oracle = brute_force_optimal_average(model, cap);

    json table = json::array();
    for (const auto& row : oracle.table)
        table.push_back({{"policy", policy_ids(model, row.policy)},
                         {"classification", to_string(row.classification)},
                         {"class_gains", row.class_gains},
                         {"value_per_start", row.value_per_start},
                         {"worst_start_value", row.worst_start_value}});

    json doc;
    doc["manifest"] = make_manifest("oracle", model_path, text, json{{"cap", cap}});
    doc["best_g"] = oracle.best_g;
    doc["best_policy"] = policy_ids(model, oracle.best_policy);
    doc["table"] = table;
    std::cout << doc.dump(2) << "\n";
    std::cerr << "oracle: best_g = " << oracle.best_g << " over " << oracle.table.size()
              << " policies (" << timer.seconds() << " s)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite CTMDP solver and verification toolkit"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker thread cap (default: cores, or CTMDP_THREADS)");

    std::string model_path;

    auto* validate = app.add_subcommand("validate", "check a model file");
    validate->add_option("model", model_path, "model JSON file")->required();

    auto* disc = app.add_subcommand("solve-discounted", "discounted value iteration");
    double alpha = 1.0, tol = 1e-10;
    long max_iter = 10'000'000;
    disc->add_option("model", model_path)->required();
    disc->add_option("--alpha", alpha, "discount rate (> 0)")->required();
    disc->add_option("--tol", tol, "residual tolerance");
    disc->add_option("--max-iter", max_iter, "sweep limit");

    auto* avg = app.add_subcommand("solve-average", "vanishing-discount average solver");
    AverageOptions avg_options;
    bool check_cond1 = false;
    avg->add_option("model", model_path)->required();
    avg->add_option("--alpha0", avg_options.alpha0, "initial discount");
    avg->add_option("--ratio", avg_options.ratio, "grid ratio in (0,1)");
    avg->add_option("--steps", avg_options.steps, "grid length");
    avg->add_option("--vi-tol", avg_options.vi_tol, "per-solve residual tolerance");
    avg->add_option("--tol-g", avg_options.tol_g, "gain convergence tolerance");
    avg->add_option("--tol-h", avg_options.tol_h, "relative-value convergence tolerance");
    avg->add_flag("--check-condition1", check_cond1, "run the enumeration-based diagnostic");

    auto* sim = app.add_subcommand("simulate", "Monte Carlo cost estimation");
    std::string policy_path, trace_path;
    bool policy_from_solver = false;
    double horizon = 1e4;
    int reps = 64, start = 0;
    std::uint64_t seed = 0;
    long max_jumps = 10'000'000;
    std::optional<double> sim_alpha;
    double sim_alpha_value = 0.0;
    sim->add_option("model", model_path)->required();
    auto* pf = sim->add_option("--policy-file", policy_path, "policy JSON file");
    auto* ps = sim->add_flag("--policy-from-solver", policy_from_solver,
                             "use the average solver's policy");
    pf->excludes(ps);
    sim->add_option("--horizon", horizon, "time horizon");
    sim->add_option("--reps", reps, "replications (>= 2)");
    sim->add_option("--seed", seed, "stream seed");
    auto* alpha_opt = sim->add_option("--alpha", sim_alpha_value, "discounted estimation");
    sim->add_option("--start", start, "start state");
    sim->add_option("--max-jumps", max_jumps, "jump cap per trajectory");
    sim->add_option("--trace", trace_path, "write per-sojourn CSV trace");

    auto* orc = app.add_subcommand("oracle", "enumerate deterministic policies");
    long cap = 1'000'000;
    orc->add_option("model", model_path)->required();
    orc->add_option("--cap", cap, "enumeration cap");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    try {
        if (*validate) return cmd_validate(model_path);
        if (*disc) {
            if (!(alpha > 0.0)) throw CtmdpError(ErrorKind::usage, "--alpha must be positive");
            return cmd_solve_discounted(model_path, alpha, tol, max_iter);
        }
        if (*avg) return cmd_solve_average(model_path, avg_options, check_cond1);
        if (*sim) {
            if (*alpha_opt) sim_alpha = sim_alpha_value;
            if (policy_path.empty() && !policy_from_solver)
                throw CtmdpError(ErrorKind::usage,
                                 "simulate needs --policy-file or --policy-from-solver");
            return cmd_simulate(model_path, policy_path, policy_from_solver, horizon,
                                reps, seed, sim_alpha, start, max_jumps, trace_path,
                                resolve_threads(threads));
        }
        if (*orc) return cmd_oracle(model_path, cap);
    } catch (const ctmdp::ValidationFailure& e) {
        json doc;
        doc["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
        doc["report"] = report_to_json(e.report());
        std::cout << doc.dump(2) << "\n";
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const CtmdpError& e) {
        json doc;
        doc["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
        std::cout << doc.dump(2) << "\n";
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return 2;
}
