#include "hsic/report_json.hpp"

#include "hsic/error.hpp"

#include <cstdio>
#include <set>
#include <sstream>

namespace hsic {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const std::vector<std::string> kSim2NullKeys = {"generator", "model", "n", "p", "rho", "method", "methods"};
const std::vector<std::string> kSim2AltKeys = {"generator", "n", "p", "rho", "delta", "method", "methods"};
const std::vector<std::string> kSim3Keys = {"generator", "f", "m", "n", "k", "model", "method", "methods"};

void require_known_keys(const Json& j, const std::vector<std::string>& allowed, const std::string& where) {
    const std::set<std::string> known(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) {
            throw InputError(where + ": unknown key '" + key + "'");
        }
    }
}

template <typename T>
T get_field(const Json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) {
        throw InputError(where + ": missing key '" + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw InputError(where + ": bad value for '" + key + "': " + e.what());
    }
}

template <typename T>
T get_field_or(const Json& j, const char* key, T fallback, const std::string& where) {
    return j.contains(key) ? get_field<T>(j, key, where) : fallback;
}

std::string model_name(const Json& j, const std::string& where) {
    const Json& v = j.at("model");
    if (v.is_number_integer()) return std::to_string(v.get<int>());
    return get_field<std::string>(j, "model", where);
}

std::string fmt(const char* spec, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

// Expands list-valued keys of one scenario object into scalar objects.
std::vector<Json> expand(const Json& scenario) {
    std::vector<Json> out{Json::object()};
    for (const auto& [key, value] : scenario.items()) {
        if (key == "methods") {
            for (auto& o : out) o[key] = value;
            continue;
        }
        if (!value.is_array()) {
            for (auto& o : out) o[key] = value;
            continue;
        }
        if (value.empty()) {
            throw InputError("scenario key '" + key + "' has an empty list");
        }
        std::vector<Json> next;
        for (const auto& o : out) {
            for (const auto& v : value) {
                Json copy = o;
                copy[key] = v;
                next.push_back(std::move(copy));
            }
        }
        out = std::move(next);
    }
    return out;
}

std::vector<Method> methods_of(const Json& j, std::vector<Method> fallback, const std::string& where) {
    if (j.contains("method") && j.contains("methods")) {
        throw InputError(where + ": give either 'method' or 'methods', not both");
    }
    if (j.contains("method")) {
        return {parse_method(get_field<std::string>(j, "method", where))};
    }
    if (j.contains("methods")) {
        std::vector<Method> out;
        for (const auto& name : get_field<std::vector<std::string>>(j, "methods", where)) {
            out.push_back(parse_method(name));
        }
        if (out.empty()) throw InputError(where + ": 'methods' is empty");
        return out;
    }
    return fallback;
}

}  // namespace

Json to_json(const TestResult& r) {
    Json detail = std::visit(
        overloaded{
            [](const NewDetail& d) {
                Json j;
                j["fallback"] = d.fallback.has_value();
                if (d.match) {
                    j["beta0"] = d.match->beta0;
                    j["beta1"] = d.match->beta1;
                    j["d"] = d.match->d;
                    j["skewness"] = d.match->skewness();
                }
                if (d.fallback) {
                    j["shape"] = d.fallback->shape;
                    j["scale"] = d.fallback->scale;
                }
                return j;
            },
            [](const GammaDetail& d) { return Json{{"shape", d.fit.shape}, {"scale", d.fit.scale}}; },
            [](const PermutationDetail& d) {
                return Json{{"permutations", d.permutations}, {"exceed_count", d.exceed_count}, {"seed", d.seed}};
            },
        },
        r.detail);

    Json j;
    j["method"] = std::string(to_string(r.method));
    j["n"] = r.n;
    j["statistic"] = r.statistic;
    j["hsic_estimate"] = r.statistic / static_cast<double>(r.n);
    j["p_value"] = r.p_value;
    j["sigma2_x"] = r.sigma2_x;
    j["sigma2_y"] = r.sigma2_y;
    j["detail"] = std::move(detail);
    return j;
}

Json to_json(const Scenario& s) {
    return std::visit(overloaded{
                          [](const Sim2NullSpec& v) {
                              return Json{{"generator", "sim2_null"}, {"model", std::string(to_string(v.model))},
                                          {"n", v.n}, {"p", v.p}, {"rho", v.rho}};
                          },
                          [](const Sim2AltSpec& v) {
                              return Json{{"generator", "sim2_alt"}, {"n", v.n}, {"p", v.p},
                                          {"rho", v.rho}, {"delta", v.delta}};
                          },
                          [](const Sim3Spec& v) {
                              return Json{{"generator", "sim3"}, {"f", std::string(to_string(v.f))},
                                          {"m", v.m}, {"n", v.n}, {"k", v.k},
                                          {"model", std::string(to_string(v.model))}};
                          },
                      },
                      s);
}

Scenario scenario_from_json(const Json& j) {
    if (!j.is_object()) {
        throw InputError("scenario must be a JSON object");
    }
    const auto generator = get_field<std::string>(j, "generator", "scenario");
    const std::string where = "scenario '" + generator + "'";
    Scenario s;
    if (generator == "sim2_null") {
        require_known_keys(j, kSim2NullKeys, where);
        Sim2NullSpec v;
        if (j.contains("model")) v.model = parse_innovation_model(model_name(j, where));
        v.n = get_field<int>(j, "n", where);
        v.p = get_field<int>(j, "p", where);
        v.rho = get_field<double>(j, "rho", where);
        s = v;
    } else if (generator == "sim2_alt") {
        require_known_keys(j, kSim2AltKeys, where);
        Sim2AltSpec v;
        v.n = get_field<int>(j, "n", where);
        v.p = get_field<int>(j, "p", where);
        v.rho = get_field<double>(j, "rho", where);
        v.delta = get_field<double>(j, "delta", where);
        s = v;
    } else if (generator == "sim3") {
        require_known_keys(j, kSim3Keys, where);
        Sim3Spec v;
        v.f = parse_link_function(get_field_or<std::string>(j, "f", "square", where));
        v.m = get_field<int>(j, "m", where);
        v.n = get_field<int>(j, "n", where);
        v.k = get_field<int>(j, "k", where);
        if (j.contains("model")) v.model = parse_innovation_model(model_name(j, where));
        s = v;
    } else {
        throw InputError("unknown generator '" + generator + "' (expected sim2_null, sim2_alt or sim3)");
    }
    validate(s);
    return s;
}

Json to_json(const StudyReport& r) {
    Json rows = Json::array();
    for (const auto& row : r.rows) {
        rows.push_back(Json{{"scenario", to_json(row.scenario)},
                            {"method", std::string(to_string(row.method))},
                            {"runs", row.runs},
                            {"rejections", row.rejections},
                            {"fallbacks", row.fallbacks},
                            {"empirical_rate", row.empirical_rate}});
    }
    Json j;
    j["alpha"] = r.alpha;
    j["master_seed"] = r.master_seed;
    j["variate_version"] = r.variate_version;
    j["rows"] = std::move(rows);
    if (r.are) j["are"] = *r.are;
    return j;
}

StudyReport study_report_from_json(const Json& j) {
    try {
        StudyReport r;
        r.alpha = j.at("alpha").get<double>();
        r.master_seed = j.at("master_seed").get<std::uint64_t>();
        r.variate_version = j.at("variate_version").get<int>();
        if (j.contains("are")) r.are = j.at("are").get<double>();
        for (const auto& row : j.at("rows")) {
            ScenarioResult out;
            out.scenario = scenario_from_json(row.at("scenario"));
            out.method = parse_method(row.at("method").get<std::string>());
            out.runs = row.at("runs").get<int>();
            out.rejections = row.at("rejections").get<int>();
            out.fallbacks = row.at("fallbacks").get<int>();
            out.empirical_rate = row.at("empirical_rate").get<double>();
            r.rows.push_back(std::move(out));
        }
        return r;
    } catch (const Json::exception& e) {
        throw InputError(std::string("malformed study report: ") + e.what());
    }
}

std::string study_report_csv(const StudyReport& r) {
    std::ostringstream out;
    out << kStudyCsvHeader << '\n';
    for (const auto& row : r.rows) {
        std::visit(overloaded{
                       [&](const Sim2NullSpec& v) {
                           out << "sim2_null," << to_string(v.model) << ",,," << v.n << ',' << v.p << ",,"
                               << fmt("%.10g", v.rho) << ",,";
                       },
                       [&](const Sim2AltSpec& v) {
                           out << "sim2_alt,,,," << v.n << ',' << v.p << ",," << fmt("%.10g", v.rho) << ','
                               << fmt("%.10g", v.delta) << ',';
                       },
                       [&](const Sim3Spec& v) {
                           out << "sim3," << to_string(v.model) << ',' << to_string(v.f) << ',' << v.m << ','
                               << v.n << ",," << v.k << ",,,";
                       },
                   },
                   row.scenario);
        out << to_string(row.method) << ',' << row.runs << ',' << row.rejections << ',' << row.fallbacks << ','
            << fmt("%.6g", row.empirical_rate) << '\n';
    }
    if (r.are) {
        out << "# ARE," << fmt("%.6g", *r.are) << '\n';
    }
    return out.str();
}

StudyPlan parse_study_spec(const Json& j) {
    if (!j.is_object()) {
        throw InputError("study spec must be a JSON object");
    }
    require_known_keys(j, {"runs", "alpha", "seed", "permutations", "method", "methods", "scenarios"}, "study spec");
    StudyPlan plan;
    plan.options.runs = get_field_or<int>(j, "runs", plan.options.runs, "study spec");
    plan.options.alpha = get_field_or<double>(j, "alpha", plan.options.alpha, "study spec");
    plan.options.master_seed = get_field_or<std::uint64_t>(j, "seed", 0, "study spec");
    plan.options.permutations = get_field_or<int>(j, "permutations", plan.options.permutations, "study spec");
    if (plan.options.runs < 1) throw InputError("study spec: runs must be at least 1");
    if (!(plan.options.alpha > 0.0 && plan.options.alpha < 1.0)) {
        throw InputError("study spec: alpha must lie in (0, 1)");
    }
    if (plan.options.permutations < 1) throw InputError("study spec: permutations must be at least 1");

    const std::vector<Method> defaults = methods_of(j, {Method::new_chi_sq}, "study spec");
    if (!j.contains("scenarios") || !j.at("scenarios").is_array() || j.at("scenarios").empty()) {
        throw InputError("study spec: 'scenarios' must be a non-empty list");
    }
    for (const auto& raw : j.at("scenarios")) {
        if (!raw.is_object()) throw InputError("study spec: every scenario must be an object");
        for (const Json& one : expand(raw)) {
            const std::vector<Method> methods = methods_of(one, defaults, "scenario");
            Json params = one;
            params.erase("method");
            params.erase("methods");
            const Scenario s = scenario_from_json(params);
            for (Method m : methods) plan.entries.push_back({s, m});
        }
    }
    return plan;
}

}  // namespace hsic
