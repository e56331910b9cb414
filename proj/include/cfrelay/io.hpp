#pragma once

// Network, distribution and report documents (JSON) and the sweep CSV.
//
// Network document:
//   {"n": 1,
//    "alphabets": {"x": 2, "y": 4, "x_i": [2], "y_i": [2], "yhat_i": [2]},
//    "channel": [...]}     // p(y, y_1..y_n | x, x_1..x_n), input tuple major
// Distribution document:
//   {"p_x": [...], "p_x_i": [[...], ...], "q_i": [[...], ...]}
//   q_i rows are (x_i, y_i) with y_i fastest; columns yhat_i.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfrelay/error.hpp"
#include "cfrelay/network_model.hpp"
#include "cfrelay/optimizer.hpp"
#include "cfrelay/rate_engine.hpp"

namespace cfrelay::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* tool_version = "0.1.0";

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// FNV-1a, 64 bit, as lowercase hex.
inline std::string digest(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream ss;
    ss << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
    return ss.str();
}

inline Json parse_json(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(what + ": " + e.what());
    }
}

namespace detail {

inline const Json& require(const Json& obj, const std::string& key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key))
        throw InputError(where + ": missing key \"" + key + "\"");
    return obj.at(key);
}

inline int as_int(const Json& v, const std::string& key) {
    if (!v.is_number_integer())
        throw InputError("key \"" + key + "\" must be an integer");
    return v.get<int>();
}

inline std::vector<double> as_reals(const Json& v, const std::string& key) {
    if (!v.is_array())
        throw InputError("key \"" + key + "\" must be an array of numbers");
    std::vector<double> out;
    for (const Json& e : v) {
        if (!e.is_number())
            throw InputError("key \"" + key + "\" must contain only numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

inline std::vector<int> as_ints(const Json& v, const std::string& key) {
    if (!v.is_array())
        throw InputError("key \"" + key + "\" must be an array of integers");
    std::vector<int> out;
    for (const Json& e : v)
        out.push_back(as_int(e, key));
    return out;
}

inline std::vector<std::vector<double>> as_real_rows(const Json& v, const std::string& key) {
    if (!v.is_array())
        throw InputError("key \"" + key + "\" must be an array of arrays");
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(as_reals(v[i], key + "[" + std::to_string(i) + "]"));
    return out;
}

} // namespace detail

// Parses and validates; the returned spec has channel slices renormalized.
inline RelayNetworkSpec parse_network(const Json& doc) {
    RelayNetworkSpec s;
    s.relays = detail::as_int(detail::require(doc, "n", "network"), "n");
    if (s.relays < 0 || s.relays > max_relays)
        throw InputError("key \"n\" out of range");
    const Json& al = detail::require(doc, "alphabets", "network");
    s.x_card = detail::as_int(detail::require(al, "x", "alphabets"), "alphabets.x");
    s.y_card = detail::as_int(detail::require(al, "y", "alphabets"), "alphabets.y");
    auto relay_list = [&](const char* key) {
        if (s.relays == 0 && !al.contains(key))
            return std::vector<int>{};
        return detail::as_ints(detail::require(al, key, "alphabets"), std::string("alphabets.") + key);
    };
    s.x_relay_card = relay_list("x_i");
    s.y_relay_card = relay_list("y_i");
    s.yhat_card = relay_list("yhat_i");
    s.channel = detail::as_reals(detail::require(doc, "channel", "network"), "channel");
    return validated(s);
}

inline CodingDistribution parse_distribution(const Json& doc, const RelayNetworkSpec& spec) {
    CodingDistribution d;
    d.p_x = detail::as_reals(detail::require(doc, "p_x", "distribution"), "p_x");
    if (spec.relays == 0 && !doc.contains("p_x_i") && !doc.contains("q_i"))
        return validated(spec, d);
    d.p_x_relay = detail::as_real_rows(detail::require(doc, "p_x_i", "distribution"), "p_x_i");
    d.test_channel = detail::as_real_rows(detail::require(doc, "q_i", "distribution"), "q_i");
    return validated(spec, d);
}

inline Json to_json(const RelayNetworkSpec& s) {
    Json al;
    al["x"] = s.x_card;
    al["y"] = s.y_card;
    al["x_i"] = s.x_relay_card;
    al["y_i"] = s.y_relay_card;
    al["yhat_i"] = s.yhat_card;
    Json doc;
    doc["n"] = s.relays;
    doc["alphabets"] = al;
    doc["channel"] = s.channel;
    return doc;
}

inline Json to_json(const CodingDistribution& d) {
    Json doc;
    doc["p_x"] = d.p_x;
    doc["p_x_i"] = d.p_x_relay;
    doc["q_i"] = d.test_channel;
    return doc;
}

inline Json rate_vector_json(const RateVector& r) { return Json(r); }

inline Json to_json(const RateReport& rep) {
    Json out;
    out["n"] = rep.relays;
    auto opt = [](const auto& v) { return v ? Json(*v) : Json(nullptr); };
    out["classical"] = {{"rate", opt(rep.classical_rate)}, {"feasible", opt(rep.classical_feasible)}};
    out["thm1"] = {{"rate", opt(rep.thm1_rate)}, {"raw", opt(rep.thm1_raw)}, {"decodable", opt(rep.thm1_decodable)}};
    out["thm2"] = {{"rate", rep.thm2.rate},
                   {"raw", rep.thm2.raw},
                   {"status", to_string(rep.thm2.status)},
                   {"rate_vector", rate_vector_json(rep.thm2.rates)}};
    out["thm3"] = {{"rate", rep.thm3.rate},
                   {"raw", rep.thm3.raw},
                   {"status", to_string(rep.thm3.status)},
                   {"rate_vector", rate_vector_json(rep.thm3.rates)}};
    Json dec = Json::array();
    for (const DecodingVerdict& v : rep.decoding) {
        dec.push_back({{"set", v.set},
                       {"thm2_decodable", v.thm2.verdict},
                       {"thm2_witness", v.thm2.witness ? Json(*v.thm2.witness) : Json(nullptr)},
                       {"thm2_rate_with_decoding", v.thm2.rate},
                       {"thm3_decodable", v.thm3}});
    }
    out["decoding"] = dec;
    const InformationMeasures& m = rep.measures;
    out["measures"] = {{"I(X;Y,Y_N|X_N)", m.ceiling},
                       {"I(X;Yhat_N,Y|X_N)", m.compressed_info},
                       {"I(X;Y|X_N)", m.direct_info},
                       {"H(Yhat_i|Y_i,X_i)", m.yhat_given_relay}};
    if (rep.relays == 1) {
        out["measures"]["I(X_1;Y)"] = m.relay_link;
        out["measures"]["I(Y_1;Yhat_1|X_1,Y)"] = m.compression_cost;
        out["measures"]["I(Y_1;Yhat_1|X_1,Y,X)"] = m.compression_cost_x;
    }
    out["subset_functions"] = {{"f", rep.functions.f}, {"g", rep.functions.g}, {"h", rep.functions.h}};
    return out;
}

inline Json tolerances_json() {
    return {{"stochastic", stochastic_tolerance},
            {"closure_slack", closure_slack},
            {"lp_pivot", lp_tolerance::pivot},
            {"lp_feasibility", lp_tolerance::feasibility}};
}

inline Json to_json(const OptimizationResult& r, const OptimizerConfig& cfg) {
    Json trace = Json::array();
    for (const RestartTrace& t : r.trace) {
        trace.push_back({{"initial_rate", t.initial_rate},
                         {"final_rate", t.final_rate},
                         {"iterations", t.iterations},
                         {"error", t.error ? Json(*t.error) : Json(nullptr)}});
    }
    Json c = {{"objective", to_string(cfg.objective)},
              {"restarts", cfg.restarts},
              {"max_iterations", cfg.max_iterations},
              {"tolerance", cfg.tolerance},
              {"fd_step", cfg.fd_step},
              {"grid_steps", cfg.grid_steps ? Json(*cfg.grid_steps) : Json(nullptr)}};
    return {{"config", c}, {"seed", r.seed}, {"best_rate", r.best_rate}, {"restarts", trace}};
}

// Dumps with a trailing newline.
inline std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InputError("cannot write " + path);
    out << text;
    if (!out)
        throw InputError("write failed for " + path);
}

// Writes a distribution document and re-reads it through the parser.
inline void write_distribution(const std::string& path, const CodingDistribution& d, const RelayNetworkSpec& spec) {
    const std::string text = dump(to_json(d));
    write_file(path, text);
    parse_distribution(parse_json(read_file(path), path), spec);
}

// Writes a report document and checks it parses with the expected top-level keys.
inline void write_report(const std::string& path, const Json& doc) {
    write_file(path, dump(doc));
    const Json back = parse_json(read_file(path), path);
    for (const char* key : {"tool", "version", "tolerances", "report"})
        detail::require(back, key, path);
}

inline std::string format_number(double v) {
    if (std::isnan(v))
        return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline const char* sweep_csv_header() {
    return "param,classical_rate,classical_feasible,thm1_rate,thm2_rate,thm3_rate,thm3_status";
}

// One line per row, '\n' terminated; absent single-relay values print as NA.
inline void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
    out << sweep_csv_header() << '\n';
    for (const SweepRow& r : rows) {
        out << format_number(r.param) << ',';
        if (r.error) {
            out << "nan,NA,nan,nan,nan,error\n";
            continue;
        }
        out << (r.classical_rate ? format_number(*r.classical_rate) : "NA") << ','
            << (r.classical_feasible ? (*r.classical_feasible ? "true" : "false") : "NA") << ','
            << (r.thm1_rate ? format_number(*r.thm1_rate) : "NA") << ',' << format_number(r.thm2_rate) << ','
            << format_number(r.thm3_rate) << ',' << to_string(r.thm3_status) << '\n';
    }
}

} // namespace cfrelay::io
