#include "cataq/config.hpp"

#include <nlohmann/json.hpp>
#include <sstream>

namespace cataq {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& violations) {
    std::ostringstream os;
    os << "invalid configuration:";
    for (const auto& v : violations) os << "\n  - " << v;
    return os.str();
}

// Collects violations so one parse reports every problem at once.
struct Check {
    std::vector<std::string> violations;

    void fail(const std::string& path, const std::string& what) {
        violations.push_back(path + ": " + what);
    }

    void known_keys(const json& obj, const std::string& path,
                    std::initializer_list<const char*> allowed) {
        for (const auto& [key, _] : obj.items()) {
            bool ok = false;
            for (const char* a : allowed)
                if (key == a) ok = true;
            if (!ok) fail(path + "." + key, "unknown key");
        }
    }

    double number(const json& obj, const std::string& path, const char* key,
                  double fallback = 0.0, bool required = true) {
        if (!obj.contains(key)) {
            if (required) fail(path, std::string("missing key '") + key + "'");
            return fallback;
        }
        if (!obj[key].is_number()) {
            fail(path + "." + key, "expected a number");
            return fallback;
        }
        return obj[key].get<double>();
    }

    std::vector<double> number_list(const json& obj, const std::string& path,
                                    const char* key) {
        std::vector<double> out;
        if (!obj.contains(key) || !obj[key].is_array()) {
            fail(path + "." + key, "expected an array of numbers");
            return out;
        }
        for (const auto& v : obj[key]) {
            if (!v.is_number()) {
                fail(path + "." + key, "expected an array of numbers");
                return {};
            }
            out.push_back(v.get<double>());
        }
        return out;
    }
};

RateFunction parse_rate(const json& node, const std::string& path, Check& ck) {
    try {
        if (node.is_number()) return RateFunction::constant(node.get<double>());
        if (node.is_object()) {
            ck.known_keys(node, path, {"breakpoints", "values"});
            auto bps = ck.number_list(node, path, "breakpoints");
            auto vals = ck.number_list(node, path, "values");
            return RateFunction::piecewise(bps, vals);
        }
        ck.fail(path, "expected a number or {breakpoints, values}");
    } catch (const std::invalid_argument& e) {
        ck.fail(path, e.what());
    }
    return RateFunction::constant(0.0);
}

ServiceDistribution parse_service(const json& node, const std::string& path,
                                  Check& ck) {
    auto fallback = ServiceDistribution::exponential(1.0);
    if (!node.is_object() || !node.contains("type") ||
        !node["type"].is_string()) {
        ck.fail(path, "expected an object with a 'type' string");
        return fallback;
    }
    const std::string type = node["type"].get<std::string>();
    try {
        if (type == "deterministic") {
            ck.known_keys(node, path, {"type", "b"});
            return ServiceDistribution::deterministic(
                ck.number(node, path, "b"));
        }
        if (type == "exponential") {
            ck.known_keys(node, path, {"type", "rate"});
            return ServiceDistribution::exponential(
                ck.number(node, path, "rate"));
        }
        if (type == "erlang") {
            ck.known_keys(node, path, {"type", "shape", "rate"});
            return ServiceDistribution::erlang(
                static_cast<int>(ck.number(node, path, "shape")),
                ck.number(node, path, "rate"));
        }
        if (type == "hyperexponential") {
            ck.known_keys(node, path, {"type", "weights", "rates"});
            return ServiceDistribution::hyperexponential(
                ck.number_list(node, path, "weights"),
                ck.number_list(node, path, "rates"));
        }
        if (type == "empirical") {
            ck.known_keys(node, path, {"type", "times", "probs"});
            return ServiceDistribution::empirical(
                ck.number_list(node, path, "times"),
                ck.number_list(node, path, "probs"));
        }
        ck.fail(path + ".type", "unknown service law '" + type + "'");
    } catch (const std::invalid_argument& e) {
        ck.fail(path, e.what());
    }
    return fallback;
}

BatchLaw parse_univariate_batch(const json& node, const std::string& path,
                                Check& ck) {
    if (!node.is_object()) {
        ck.fail(path, "expected an object of {size: probability}");
        return BatchLaw::single();
    }
    std::map<int, double> mass;
    double total = 0.0;
    for (const auto& [key, value] : node.items()) {
        int size = 0;
        try {
            size = std::stoi(key);
        } catch (const std::exception&) {
            ck.fail(path, "batch size '" + key + "' is not an integer");
            continue;
        }
        if (!value.is_number()) {
            ck.fail(path, "probability for size " + key + " is not a number");
            continue;
        }
        mass[size] = value.get<double>();
        total += value.get<double>();
    }
    if (std::abs(total - 1.0) > 1e-9) {
        std::ostringstream os;
        os << "masses sum to " << total;
        ck.fail(path, os.str());
        return BatchLaw::single();
    }
    try {
        return BatchLaw::univariate(mass);
    } catch (const std::invalid_argument& e) {
        ck.fail(path, e.what());
        return BatchLaw::single();
    }
}

BatchLaw parse_shared_batch(const json& node, const std::string& path,
                            Check& ck) {
    std::vector<std::pair<std::vector<int>, double>> entries;
    if (!node.is_array()) {
        ck.fail(path, "expected an array of {sizes, prob} entries");
        return BatchLaw::single();
    }
    for (std::size_t i = 0; i < node.size(); ++i) {
        const auto& e = node[i];
        const std::string epath = path + "[" + std::to_string(i) + "]";
        ck.known_keys(e, epath, {"sizes", "prob"});
        std::vector<int> sizes;
        for (const auto& s : e.value("sizes", json::array()))
            sizes.push_back(s.get<int>());
        entries.emplace_back(std::move(sizes), ck.number(e, epath, "prob"));
    }
    try {
        return BatchLaw::multivariate(std::move(entries));
    } catch (const std::invalid_argument& e) {
        ck.fail(path, e.what());
        return BatchLaw::single();
    }
}

ModelSpec parse_model(const json& node, Check& ck) {
    ck.known_keys(node, "model",
                  {"classes", "catastrophe_rate", "shared_batch"});
    std::vector<CustomerClass> classes;
    if (!node.contains("classes") || !node["classes"].is_array() ||
        node["classes"].empty()) {
        ck.fail("model.classes", "expected a non-empty array");
    } else {
        for (std::size_t i = 0; i < node["classes"].size(); ++i) {
            const auto& c = node["classes"][i];
            const std::string path = "model.classes[" + std::to_string(i) + "]";
            ck.known_keys(c, path, {"arrival_rate", "service", "batch"});
            RateFunction rate = c.contains("arrival_rate")
                                    ? parse_rate(c["arrival_rate"],
                                                 path + ".arrival_rate", ck)
                                    : (ck.fail(path, "missing key 'arrival_rate'"),
                                       RateFunction::constant(0.0));
            ServiceDistribution service =
                c.contains("service")
                    ? parse_service(c["service"], path + ".service", ck)
                    : (ck.fail(path, "missing key 'service'"),
                       ServiceDistribution::exponential(1.0));
            BatchLaw batch =
                c.contains("batch")
                    ? parse_univariate_batch(c["batch"], path + ".batch", ck)
                    : BatchLaw::single();
            classes.push_back(
                {std::move(rate), std::move(service), std::move(batch)});
        }
    }
    RateFunction cat = node.contains("catastrophe_rate")
                           ? parse_rate(node["catastrophe_rate"],
                                        "model.catastrophe_rate", ck)
                           : RateFunction::constant(0.0);
    std::optional<ModelSpec::SharedBatch> shared;
    if (node.contains("shared_batch")) {
        const auto& sb = node["shared_batch"];
        ck.known_keys(sb, "model.shared_batch", {"arrival_rate", "entries"});
        RateFunction rate =
            sb.contains("arrival_rate")
                ? parse_rate(sb["arrival_rate"],
                             "model.shared_batch.arrival_rate", ck)
                : (ck.fail("model.shared_batch", "missing key 'arrival_rate'"),
                   RateFunction::constant(0.0));
        BatchLaw law = parse_shared_batch(sb.value("entries", json::array()),
                                          "model.shared_batch.entries", ck);
        shared = ModelSpec::SharedBatch{std::move(rate), std::move(law)};
    }
    if (classes.empty())
        classes.push_back({RateFunction::constant(0.0),
                           ServiceDistribution::exponential(1.0),
                           BatchLaw::single()});
    try {
        return ModelSpec(std::move(classes), std::move(cat), std::move(shared));
    } catch (const std::invalid_argument& e) {
        ck.fail("model", e.what());
        return ModelSpec({{RateFunction::constant(0.0),
                           ServiceDistribution::exponential(1.0),
                           BatchLaw::single()}},
                         RateFunction::constant(0.0));
    }
}

json rate_to_json(const RateFunction& rate) {
    if (rate.is_constant()) return rate.constant_value();
    json node;
    // breakpoints() reports interior kinks only; the leading 0 is implicit.
    std::vector<double> bps{0.0};
    for (double bp : rate.breakpoints()) bps.push_back(bp);
    node["breakpoints"] = bps;
    std::vector<double> values;
    for (double bp : bps) values.push_back(rate.value(bp));
    node["values"] = values;
    return node;
}

json service_to_json(const ServiceDistribution& dist) {
    json node;
    std::visit(
        [&](const auto& d) {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, ServiceDistribution::Deterministic>) {
                node["type"] = "deterministic";
                node["b"] = d.b;
            } else if constexpr (std::is_same_v<D,
                                                ServiceDistribution::Exponential>) {
                node["type"] = "exponential";
                node["rate"] = d.rate;
            } else if constexpr (std::is_same_v<D, ServiceDistribution::Erlang>) {
                node["type"] = "erlang";
                node["shape"] = d.shape;
                node["rate"] = d.rate;
            } else if constexpr (std::is_same_v<
                                     D, ServiceDistribution::HyperExponential>) {
                node["type"] = "hyperexponential";
                node["weights"] = d.weights;
                node["rates"] = d.rates;
            } else {
                node["type"] = "empirical";
                node["times"] = d.times;
                node["probs"] = d.probs;
            }
        },
        dist.variant());
    return node;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

RunConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({e.what()});
    }
    Check ck;
    ck.known_keys(root, "$",
                  {"model", "transient", "busy", "simulate", "compare"});
    if (!root.contains("model")) {
        ck.fail("$", "missing key 'model'");
        throw ConfigError(std::move(ck.violations));
    }
    RunConfig config{parse_model(root["model"], ck)};

    if (root.contains("transient")) {
        const auto& t = root["transient"];
        ck.known_keys(t, "transient",
                      {"times", "state_cutoff", "tol", "marks"});
        if (t.contains("times"))
            config.transient.times = ck.number_list(t, "transient", "times");
        config.transient.state_cutoff = static_cast<int>(
            ck.number(t, "transient", "state_cutoff",
                      config.transient.state_cutoff, false));
        config.transient.tol =
            ck.number(t, "transient", "tol", config.transient.tol, false);
        if (t.contains("marks")) {
            const auto& m = t["marks"];
            ck.known_keys(m, "transient.marks", {"in_system", "served"});
            MarkVector marks;
            marks.in_system = ck.number_list(m, "transient.marks", "in_system");
            marks.served = ck.number_list(m, "transient.marks", "served");
            try {
                marks.validate(config.spec.num_classes());
                config.transient.marks = std::move(marks);
            } catch (const std::invalid_argument& e) {
                ck.fail("transient.marks", e.what());
            }
        }
    }
    if (root.contains("busy")) {
        const auto& b = root["busy"];
        ck.known_keys(b, "busy", {"s_values", "t_grid"});
        if (b.contains("s_values"))
            config.busy.s_values = ck.number_list(b, "busy", "s_values");
        if (b.contains("t_grid"))
            config.busy.t_grid = ck.number_list(b, "busy", "t_grid");
    }
    if (root.contains("simulate")) {
        const auto& s = root["simulate"];
        ck.known_keys(s, "simulate",
                      {"horizon", "checkpoints", "replications", "seed",
                       "busy_cycle_target", "events_csv"});
        config.sim.horizon =
            ck.number(s, "simulate", "horizon", config.sim.horizon, false);
        if (s.contains("checkpoints"))
            config.sim.checkpoints =
                ck.number_list(s, "simulate", "checkpoints");
        config.sim.replications = static_cast<std::size_t>(ck.number(
            s, "simulate", "replications",
            static_cast<double>(config.sim.replications), false));
        config.sim.seed = static_cast<std::uint64_t>(
            ck.number(s, "simulate", "seed",
                      static_cast<double>(config.sim.seed), false));
        config.sim.busy_cycle_target = static_cast<std::size_t>(ck.number(
            s, "simulate", "busy_cycle_target",
            static_cast<double>(config.sim.busy_cycle_target), false));
        if (s.contains("events_csv")) {
            if (s["events_csv"].is_string())
                config.sim.events_csv = s["events_csv"].get<std::string>();
            else
                ck.fail("simulate.events_csv", "expected a string path");
        }
    }
    if (root.contains("compare")) {
        const auto& c = root["compare"];
        ck.known_keys(c, "compare", {"tol"});
        config.compare_tol =
            ck.number(c, "compare", "tol", config.compare_tol, false);
    }
    if (!ck.violations.empty()) throw ConfigError(std::move(ck.violations));
    return config;
}

std::string serialize_model(const ModelSpec& spec) {
    json model;
    json classes = json::array();
    for (const auto& c : spec.classes()) {
        json node;
        node["arrival_rate"] = rate_to_json(c.arrival_rate);
        node["service"] = service_to_json(c.service);
        if (!c.batch.is_single()) {
            json batch;
            for (const auto& [sizes, mass] : c.batch.entries())
                batch[std::to_string(sizes[0])] = mass;
            node["batch"] = batch;
        }
        classes.push_back(node);
    }
    model["classes"] = classes;
    model["catastrophe_rate"] = rate_to_json(spec.catastrophe_rate());
    if (spec.shared_mode()) {
        json sb;
        sb["arrival_rate"] = rate_to_json(spec.shared().arrival_rate);
        json entries = json::array();
        for (const auto& [sizes, mass] : spec.shared().law.entries()) {
            json e;
            e["sizes"] = sizes;
            e["prob"] = mass;
            entries.push_back(e);
        }
        sb["entries"] = entries;
        model["shared_batch"] = sb;
    }
    json root;
    root["model"] = model;
    return root.dump(2);
}

bool equivalent(const ModelSpec& a, const ModelSpec& b) {
    return serialize_model(a) == serialize_model(b);
}

}  // namespace cataq
