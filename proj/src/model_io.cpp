#include "ctmdp/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ctmdp {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& what) {
    throw CtmdpError(ErrorKind::schema, "model schema: " + what);
}

const json& field(const json& doc, const char* name) {
    auto it = doc.find(name);
    if (it == doc.end()) schema_error(std::string("missing field \"") + name + "\"");
    return *it;
}

std::string rate_key(int x, const std::string& action) {
    return std::to_string(x) + ":" + action;
}

} // namespace

CtmdpModel parse_model(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw CtmdpError(ErrorKind::parse, std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) schema_error("top level must be an object");

    CtmdpModel model;
    const json& ns = field(doc, "num_states");
    if (!ns.is_number_integer() || ns.get<long>() <= 0)
        schema_error("\"num_states\" must be a positive integer");
    model.num_states = ns.get<int>();
    const int n = model.num_states;

    const json& actions = field(doc, "actions");
    if (!actions.is_array() || actions.size() != static_cast<std::size_t>(n))
        schema_error("\"actions\" must be an array with one entry per state");
    model.actions.resize(n);
    for (int x = 0; x < n; ++x) {
        if (!actions[x].is_array())
            schema_error("\"actions\" entries must be arrays of strings");
        for (const auto& a : actions[x]) {
            if (!a.is_string()) schema_error("action identifiers must be strings");
            model.actions[x].push_back(a.get<std::string>());
        }
    }

    const json& rates = field(doc, "rates");
    const json& cost = field(doc, "cost");
    if (!rates.is_object()) schema_error("\"rates\" must be an object");
    if (!cost.is_object()) schema_error("\"cost\" must be an object");
    model.rates.resize(n);
    model.cost.resize(n);
    for (int x = 0; x < n; ++x) {
        for (const auto& action : model.actions[x]) {
            const std::string key = rate_key(x, action);
            auto rit = rates.find(key);
            if (rit == rates.end())
                schema_error("missing \"rates\" entry \"" + key + "\"");
            if (!rit->is_array() || rit->size() != static_cast<std::size_t>(n))
                schema_error("\"rates\" entry \"" + key + "\" must be an array of " +
                             std::to_string(n) + " numbers");
            std::vector<double> row;
            row.reserve(n);
            for (const auto& q : *rit) {
                if (!q.is_number()) schema_error("rate entries must be numbers");
                row.push_back(q.get<double>());
            }
            model.rates[x].push_back(std::move(row));

            auto cit = cost.find(key);
            if (cit == cost.end())
                schema_error("missing \"cost\" entry \"" + key + "\"");
            if (!cit->is_number())
                schema_error("\"cost\" entry \"" + key + "\" must be a number");
            model.cost[x].push_back(cit->get<double>());
        }
    }

    const json& weight = field(doc, "weight");
    if (!weight.is_array() || weight.size() != static_cast<std::size_t>(n))
        schema_error("\"weight\" must be an array of " + std::to_string(n) + " numbers");
    for (const auto& w : weight) {
        if (!w.is_number()) schema_error("weight entries must be numbers");
        model.weight.push_back(w.get<double>());
    }

    if (doc.contains("labels")) {
        const json& labels = doc["labels"];
        if (!labels.is_object()) schema_error("\"labels\" must be an object");
        if (labels.contains("states")) {
            const json& st = labels["states"];
            if (!st.is_array() || st.size() != static_cast<std::size_t>(n))
                schema_error("\"labels.states\" must be an array of " +
                             std::to_string(n) + " strings");
            for (const auto& s : st) {
                if (!s.is_string()) schema_error("state labels must be strings");
                model.state_labels.push_back(s.get<std::string>());
            }
        }
    }

    check_structure(model);
    return model;
}

CtmdpModel load_model(const std::string& text) {
    CtmdpModel model = parse_model(text);
    require_valid(model);
    return model;
}

CtmdpModel load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CtmdpError(ErrorKind::io, "cannot open model file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_model(buf.str());
}

std::string save_model(const CtmdpModel& model) {
    check_structure(model);
    json doc;
    doc["num_states"] = model.num_states;
    doc["actions"] = model.actions;
    json rates = json::object();
    json cost = json::object();
    for (int x = 0; x < model.num_states; ++x) {
        for (int a = 0; a < model.action_count(x); ++a) {
            const std::string key = rate_key(x, model.actions[x][a]);
            rates[key] = model.rates[x][a];
            cost[key] = model.cost[x][a];
        }
    }
    doc["rates"] = std::move(rates);
    doc["cost"] = std::move(cost);
    doc["weight"] = model.weight;
    if (!model.state_labels.empty()) doc["labels"] = {{"states", model.state_labels}};
    return doc.dump(2) + "\n";
}

std::string policy_to_json(const CtmdpModel& model, const PolicyDeterministic& policy) {
    check_policy(model, policy);
    json doc;
    doc["kind"] = "deterministic";
    json choice = json::array();
    for (int x = 0; x < model.num_states; ++x)
        choice.push_back(model.actions[x][policy.choice[x]]);
    doc["choice"] = std::move(choice);
    return doc.dump(2) + "\n";
}

ParsedPolicy parse_policy(const CtmdpModel& model, const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw CtmdpError(ErrorKind::parse, std::string("malformed policy JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("kind"))
        throw CtmdpError(ErrorKind::schema, "policy schema: missing field \"kind\"");

    ParsedPolicy out;
    const std::string kind = doc["kind"].get<std::string>();
    if (kind == "deterministic") {
        const json& choice = field(doc, "choice");
        if (!choice.is_array() || choice.size() != static_cast<std::size_t>(model.num_states))
            schema_error("\"choice\" must list one action id per state");
        PolicyDeterministic policy;
        for (int x = 0; x < model.num_states; ++x) {
            const std::string id = choice[x].get<std::string>();
            const int a = model.action_index(x, id);
            if (a < 0)
                throw CtmdpError(ErrorKind::invariant,
                                 "policy action \"" + id + "\" not admissible at state " +
                                     std::to_string(x));
            policy.choice.push_back(a);
        }
        check_policy(model, policy);
        out.deterministic = std::move(policy);
    } else if (kind == "randomized") {
        const json& dist = field(doc, "dist");
        if (!dist.is_array() || dist.size() != static_cast<std::size_t>(model.num_states))
            schema_error("\"dist\" must list one probability row per state");
        PolicyRandomized policy;
        for (const auto& row : dist)
            policy.dist.push_back(row.get<std::vector<double>>());
        check_policy(model, policy);
        out.randomized = std::move(policy);
    } else {
        schema_error("\"kind\" must be \"deterministic\" or \"randomized\"");
    }
    return out;
}

} // namespace ctmdp
