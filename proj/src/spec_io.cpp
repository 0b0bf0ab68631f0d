#include "mrw/spec_io.hpp"

#include <fstream>
#include <sstream>

#include "mrw/errors.hpp"
#include "mrw/zoo.hpp"

namespace mrw {

namespace {

std::string line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

std::string value_string(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number() || v.is_boolean()) return v.dump();
    return v.dump();
}

FiniteSpec parse_finite(const nlohmann::json& j, const std::string& src) {
    FiniteSpec fs;
    if (!j.contains("states") || !j["states"].is_array() || j["states"].empty())
        throw ConfigError(src + ": /states: expected a nonempty array of state names");
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < j["states"].size(); ++i) {
        const auto& s = j["states"][i];
        std::string name = s.is_string() ? s.get<std::string>() : s.is_number_integer() ? s.dump() : "";
        if (name.empty()) throw ConfigError(src + ": /states/" + std::to_string(i) + ": expected a string or integer");
        if (index.count(name)) throw ConfigError(src + ": /states/" + std::to_string(i) + ": duplicate state '" + name + "'");
        index[name] = static_cast<int>(i);
        fs.names.push_back(name);
    }
    const std::size_t n = fs.names.size();
    fs.P.assign(n, std::vector<double>(n, 0.0));
    std::vector<std::vector<std::string>> exact(n, std::vector<std::string>(n, "0/1"));
    bool all_exact = true;
    if (!j.contains("transitions") || !j["transitions"].is_object())
        throw ConfigError(src + ": /transitions: expected an object {from: {to: probability}}");
    for (auto it = j["transitions"].begin(); it != j["transitions"].end(); ++it) {
        std::string where = src + ": /transitions/" + it.key();
        if (!index.count(it.key())) throw ConfigError(where + ": unknown state");
        if (!it.value().is_object()) throw ConfigError(where + ": expected an object {to: probability}");
        int a = index[it.key()];
        for (auto jt = it.value().begin(); jt != it.value().end(); ++jt) {
            std::string w2 = where + "/" + jt.key();
            if (!index.count(jt.key())) throw ConfigError(w2 + ": unknown state");
            int b = index[jt.key()];
            const auto& v = jt.value();
            if (v.is_string()) {
                try {
                    auto [p, r] = parse_probability(v.get<std::string>());
                    fs.P[a][b] = p;
                    exact[a][b] = r;
                } catch (const ConfigError& e) {
                    throw ConfigError(w2 + ": " + e.what());
                }
            } else if (v.is_number()) {
                fs.P[a][b] = v.get<double>();
                all_exact = false;
            } else {
                throw ConfigError(w2 + ": expected a probability (number or \"p/q\" string)");
            }
        }
    }
    if (all_exact) fs.P_exact = exact;
    if (j.contains("kernels")) {
        if (!j["kernels"].is_object()) throw ConfigError(src + ": /kernels: expected an object {\"a->b\": kernel}");
        for (auto it = j["kernels"].begin(); it != j["kernels"].end(); ++it) {
            std::string where = src + ": /kernels/" + it.key();
            auto arrow = it.key().find("->");
            if (arrow == std::string::npos) throw ConfigError(where + ": key must look like \"from->to\"");
            std::string a = it.key().substr(0, arrow), b = it.key().substr(arrow + 2);
            if (!index.count(a) || !index.count(b)) throw ConfigError(where + ": unknown state");
            fs.kernels[{index[a], index[b]}] = Kernel::from_json(it.value(), where);
        }
    }
    return fs;
}

}  // namespace

ModelSpec parse_model_json(const std::string& text, const std::string& src) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(src + ": " + line_col(text, e.byte) + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError(src + ": top level must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        if (k != "name" && k != "states" && k != "transitions" && k != "kernels" && k != "family" && k != "parameters")
            throw ConfigError(src + ": /" + k + ": unknown section");
    }
    std::string name = "model";
    if (j.contains("name")) {
        if (!j["name"].is_string()) throw ConfigError(src + ": /name: expected a string");
        name = j["name"].get<std::string>();
    }
    ModelSpec spec;
    if (j.contains("family")) {
        const auto& f = j["family"];
        if (!f.is_object() || !f.contains("zoo") || !f["zoo"].is_string())
            throw ConfigError(src + ": /family: expected {\"zoo\": name, \"params\": {...}}");
        std::string zoo = f["zoo"].get<std::string>();
        if (zoo == "affine-env" && j.contains("states")) {
            spec = zoo_affine_env(parse_finite(j, src));
        } else {
            std::string text_spec = zoo;
            if (f.contains("params")) {
                if (!f["params"].is_object()) throw ConfigError(src + ": /family/params: expected an object");
                std::string sep = ":";
                for (auto it = f["params"].begin(); it != f["params"].end(); ++it) {
                    text_spec += sep + it.key() + "=" + value_string(it.value());
                    sep = ",";
                }
            }
            spec = zoo_from_string(text_spec);
        }
        if (j.contains("name")) spec.name = name;
        return spec;
    }
    spec = finite_spec_model(name, parse_finite(j, src));
    if (j.contains("parameters")) spec.parameters = j["parameters"];
    return spec;
}

ModelSpec read_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model_json(ss.str(), path);
}

ojson model_spec_to_json(const ModelSpec& spec) {
    if (!spec.finite) throw ConfigError("only finite specs serialise to a model file");
    const FiniteSpec& fs = *spec.finite;
    ojson j;
    j["name"] = spec.name;
    j["states"] = fs.names;
    ojson tr = ojson::object();
    for (std::size_t a = 0; a < fs.P.size(); ++a) {
        ojson row = ojson::object();
        for (std::size_t b = 0; b < fs.P.size(); ++b) {
            if (fs.P[a][b] <= 0.0) continue;
            if (!fs.P_exact.empty()) row[fs.names[b]] = fs.P_exact[a][b];
            else row[fs.names[b]] = fs.P[a][b];
        }
        tr[fs.names[a]] = row;
    }
    j["transitions"] = tr;
    ojson k = ojson::object();
    for (const auto& [e, ker] : fs.kernels) k[fs.names[e.first] + "->" + fs.names[e.second]] = ker.to_json();
    j["kernels"] = k;
    return j;
}

}  // namespace mrw
