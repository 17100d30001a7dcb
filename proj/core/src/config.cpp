#include "trajtree/config.hpp"

#include <set>
#include <stdexcept>
#include <string>

#include "trajtree/error.hpp"

namespace trajtree {

namespace {

template <typename T>
T get_as(const Json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const Json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

std::size_t get_count(const Json& j, const std::string& key) {
    if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
        throw ConfigError("config key '" + key + "' must be a non-negative integer");
    }
    return j.get<std::size_t>();
}

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [k, _] : j.items()) {
        if (!allowed.contains(k)) throw ConfigError("unknown config key '" + where + k + "'");
    }
}

}  // namespace

void validate(const PipelineConfig& config) {
    if (config.ingest.loop_threshold < 2) {
        throw ConfigError("loop_threshold must be >= 2, got " + std::to_string(config.ingest.loop_threshold));
    }
    if (config.ingest.outlier_min_prefix < 1) {
        throw ConfigError("outlier_min_prefix must be >= 1, got " + std::to_string(config.ingest.outlier_min_prefix));
    }
    validate_threshold(config.critical_threshold);
    if (config.jobs < 1) throw ConfigError("jobs must be >= 1");
}

PipelineConfig config_from_json(const Json& j, PipelineConfig base) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(j,
                   {"canonicalization", "loop_threshold", "outlier_min_prefix", "merge_mode", "critical_threshold",
                    "pair_mode", "sft_reduction", "strict_parse", "seed", "jobs"},
                   "");

    if (auto it = j.find("canonicalization"); it != j.end()) {
        if (!it->is_object()) throw ConfigError("config key 'canonicalization' must be an object");
        reject_unknown(*it, {"collapse_whitespace"}, "canonicalization.");
        if (auto c = it->find("collapse_whitespace"); c != it->end()) {
            if (!c->is_boolean()) throw ConfigError("'canonicalization.collapse_whitespace' must be a boolean");
            base.ingest.canon.collapse_whitespace = c->get<bool>();
        }
    }
    if (auto it = j.find("loop_threshold"); it != j.end()) base.ingest.loop_threshold = get_count(*it, "loop_threshold");
    if (auto it = j.find("outlier_min_prefix"); it != j.end()) {
        base.ingest.outlier_min_prefix = get_count(*it, "outlier_min_prefix");
    }
    if (auto it = j.find("merge_mode"); it != j.end()) {
        base.merge_mode = parse_merge_mode(get_as<std::string>(*it, "merge_mode"));
    }
    if (auto it = j.find("critical_threshold"); it != j.end()) {
        // Strings keep the threshold exact ("1/2"); plain numbers are read via
        // their shortest decimal spelling.
        std::string text = it->is_string() ? it->get<std::string>() : it->is_number() ? it->dump() : "";
        if (text.empty()) throw ConfigError("config key 'critical_threshold' must be a string or number");
        try {
            base.critical_threshold = Rational::parse(text);
        } catch (const std::exception& e) {
            throw ConfigError("critical_threshold: " + std::string(e.what()));
        }
    }
    if (auto it = j.find("pair_mode"); it != j.end()) {
        base.pair_mode = parse_pair_mode(get_as<std::string>(*it, "pair_mode"));
    }
    if (auto it = j.find("sft_reduction"); it != j.end()) {
        base.sft_reduction = loss::parse_reduction(get_as<std::string>(*it, "sft_reduction"));
    }
    if (auto it = j.find("strict_parse"); it != j.end()) {
        if (!it->is_boolean()) throw ConfigError("config key 'strict_parse' must be a boolean");
        base.ingest.strict_parse = it->get<bool>();
    }
    if (auto it = j.find("seed"); it != j.end()) base.seed = get_count(*it, "seed");
    if (auto it = j.find("jobs"); it != j.end()) base.jobs = static_cast<unsigned>(get_count(*it, "jobs"));

    validate(base);
    return base;
}

Json config_to_json(const PipelineConfig& config) {
    Json canon = Json::object();
    canon["collapse_whitespace"] = config.ingest.canon.collapse_whitespace;
    Json j = Json::object();
    j["canonicalization"] = std::move(canon);
    j["loop_threshold"] = config.ingest.loop_threshold;
    j["outlier_min_prefix"] = config.ingest.outlier_min_prefix;
    j["merge_mode"] = to_string(config.merge_mode);
    j["critical_threshold"] = config.critical_threshold.str();
    j["pair_mode"] = to_string(config.pair_mode);
    j["sft_reduction"] = to_string(config.sft_reduction);
    j["strict_parse"] = config.ingest.strict_parse;
    j["seed"] = config.seed;
    return j;
}

}  // namespace trajtree
