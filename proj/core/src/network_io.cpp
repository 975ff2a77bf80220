#include "mfbn/network_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "mfbn/errors.hpp"

namespace mfbn {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::size_t line_of(std::string_view text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

const json& require(const json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end()) throw ParseError(std::string("missing field '") + key + "'");
    return *it;
}

double as_real(const json& v, const std::string& where) {
    if (!v.is_number()) throw ParseError(where + ": expected a number");
    return v.get<double>();
}

long long as_int(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ParseError(where + ": expected an integer");
    return v.get<long long>();
}

}  // namespace

std::string serialize(const BeliefNetwork& net) {
    ordered_json doc;
    doc["n_units"] = net.n_units();
    doc["activation"] = std::string(to_string(net.activation.kind()));
    doc["biases"] = net.biases;
    ordered_json edges = ordered_json::array();
    for (std::size_t i = 0; i < net.n_units(); ++i) {
        for (std::size_t j = 0; j < net.n_units(); ++j) {
            const double w = net.weight(i, j);
            if (w == 0.0) continue;
            ordered_json e;
            e["i"] = i + 1;
            e["j"] = j + 1;
            e["w"] = w;
            edges.push_back(std::move(e));
        }
    }
    doc["edges"] = std::move(edges);
    ordered_json visible = ordered_json::array();
    for (std::size_t v : net.visible) visible.push_back(v + 1);
    doc["visible"] = std::move(visible);
    return doc.dump(2) + "\n";
}

BeliefNetwork parse_network(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError("line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
    }
    if (!doc.is_object()) throw ParseError("network document must be a JSON object");

    static const std::set<std::string> known = {"n_units", "activation", "biases", "edges", "visible"};
    for (const auto& item : doc.items()) {
        if (!known.contains(item.key())) throw ParseError("unknown field '" + item.key() + "'");
    }

    const long long n = as_int(require(doc, "n_units"), "n_units");
    if (n <= 0) throw ParseError("n_units: must be positive");
    const json& act = require(doc, "activation");
    if (!act.is_string()) throw ParseError("activation: expected a string");
    ActivationKind kind;
    try {
        kind = activation_from_string(act.get<std::string>());
    } catch (const ConfigError& e) {
        throw ParseError(std::string("activation: ") + e.what());
    }

    BeliefNetwork net(static_cast<std::size_t>(n), Activation(kind));

    const json& biases = require(doc, "biases");
    if (!biases.is_array() || biases.size() != static_cast<std::size_t>(n)) {
        throw ParseError("biases: expected an array of " + std::to_string(n) + " numbers");
    }
    for (std::size_t i = 0; i < biases.size(); ++i) {
        net.biases[i] = as_real(biases[i], "biases[" + std::to_string(i) + "]");
    }

    const json& edges = require(doc, "edges");
    if (!edges.is_array()) throw ParseError("edges: expected an array");
    std::set<std::pair<long long, long long>> seen;
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const std::string where = "edges[" + std::to_string(k) + "]";
        const json& e = edges[k];
        if (!e.is_object()) throw ParseError(where + ": expected an object {i, j, w}");
        for (const auto& item : e.items()) {
            if (item.key() != "i" && item.key() != "j" && item.key() != "w") {
                throw ParseError(where + ": unknown field '" + item.key() + "'");
            }
        }
        if (!e.contains("i") || !e.contains("j") || !e.contains("w")) {
            throw ParseError(where + ": requires fields i, j and w");
        }
        const long long i = as_int(e["i"], where + ".i");
        const long long j = as_int(e["j"], where + ".j");
        const double w = as_real(e["w"], where + ".w");
        if (i < 1 || i > n || j < 1 || j > n) throw ParseError(where + ": unit index out of range");
        if (!seen.insert({i, j}).second) throw ParseError(where + ": duplicate edge");
        if (j >= i) {
            throw ValidationError(where + ": acyclicity violated, edge (" + std::to_string(i) + "," +
                                  std::to_string(j) + ") requires j < i");
        }
        net.weight(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1)) = w;
    }

    const json& visible = require(doc, "visible");
    if (!visible.is_array()) throw ParseError("visible: expected an array");
    for (std::size_t k = 0; k < visible.size(); ++k) {
        const long long v = as_int(visible[k], "visible[" + std::to_string(k) + "]");
        if (v < 1 || v > n) throw ValidationError("bad visible index " + std::to_string(v));
        net.visible.push_back(static_cast<std::size_t>(v - 1));
    }
    std::sort(net.visible.begin(), net.visible.end());
    if (std::adjacent_find(net.visible.begin(), net.visible.end()) != net.visible.end()) {
        throw ParseError("visible: duplicate index");
    }

    validate(net);
    return net;
}

BeliefNetwork load_network(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open network file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_network(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void save_network(const BeliefNetwork& net, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write network file " + path.string());
    out << serialize(net);
}

}  // namespace mfbn
