#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "m2sp/common.hpp"

namespace m2sp {

using json = nlohmann::json;

// doubles are rounded to 12 significant digits before serialization so that
// identical reports serialize to identical bytes
inline double round12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::strtod(buf, nullptr);
}

// counts that fit in 64 bits stay JSON integers (exact round-trip); larger
// ones are carried as decimal strings
inline json json_count(u128 v) {
    if (v <= u128(~u64(0))) return json(u64(v));
    return json(to_string_u128(v));
}

struct ExperimentReport {
    std::string experiment;
    std::string q;  // "p^k"
    json parameters = json::object();
    std::map<std::string, json> measured;
    std::map<std::string, json> bounds;   // each entry: {value, constant, catalog}
    std::map<std::string, double> ratios;
    std::map<std::string, bool> pass_flags;  // exact assertions only
    std::vector<json> trials;                // one row per trial
    double runtime_ms = 0;

    bool all_passed() const {
        for (const auto& [k, v] : pass_flags)
            if (!v) return false;
        return true;
    }
};

inline json bound_entry(double value, double constant, const std::string& catalog) {
    return json{{"value", round12(value)}, {"constant", constant}, {"catalog", catalog}};
}

inline json report_to_json(const ExperimentReport& r) {
    json j;
    j["experiment"] = r.experiment;
    j["q"] = r.q;
    j["parameters"] = r.parameters;
    j["measured"] = json::object();
    for (const auto& [k, v] : r.measured) j["measured"][k] = v;
    j["bounds"] = json::object();
    for (const auto& [k, v] : r.bounds) j["bounds"][k] = v;
    j["ratios"] = json::object();
    for (const auto& [k, v] : r.ratios) j["ratios"][k] = round12(v);
    j["pass_flags"] = json::object();
    for (const auto& [k, v] : r.pass_flags) j["pass_flags"][k] = v;
    if (!r.trials.empty()) j["trials"] = r.trials;
    j["runtime_ms"] = round12(r.runtime_ms);
    return j;
}

namespace reportdetail {

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    return out + "\"";
}

inline std::string scalar_to_csv(const json& v) {
    if (v.is_string()) return csv_escape(v.get<std::string>());
    if (v.is_number_float()) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.12g", v.get<double>());
        return buf;
    }
    return v.dump();
}

}  // namespace reportdetail

// csv: one row per trial when trials exist, otherwise a single row of the
// measured quantities
inline std::string report_to_csv(const ExperimentReport& r) {
    using reportdetail::scalar_to_csv;
    std::string out;
    if (!r.trials.empty()) {
        std::vector<std::string> cols;
        for (auto it = r.trials[0].begin(); it != r.trials[0].end(); ++it)
            cols.push_back(it.key());
        for (size_t i = 0; i < cols.size(); ++i)
            out += (i ? "," : "") + reportdetail::csv_escape(cols[i]);
        out += "\n";
        for (const json& row : r.trials) {
            for (size_t i = 0; i < cols.size(); ++i) {
                if (i) out += ",";
                if (row.contains(cols[i])) out += scalar_to_csv(row.at(cols[i]));
            }
            out += "\n";
        }
        return out;
    }
    std::string header, row;
    bool first = true;
    for (const auto& [k, v] : r.measured) {
        if (!first) {
            header += ",";
            row += ",";
        }
        first = false;
        header += reportdetail::csv_escape(k);
        row += scalar_to_csv(v);
    }
    return header + "\n" + row + "\n";
}

inline void emit_report(const ExperimentReport& r, const std::string& format,
                        const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(Errc::IoFailure, "cannot open " + path);
    if (format == "json") {
        out << report_to_json(r).dump(2) << "\n";
    } else if (format == "csv") {
        out << report_to_csv(r);
    } else {
        fail(Errc::ConfigInvalid, "unknown format: " + format);
    }
    if (!out) fail(Errc::IoFailure, "write failed: " + path);
}

}  // namespace m2sp
