#include "trajtree/trajectory.hpp"

#include <istream>
#include <set>
#include <utility>

#include "trajtree/error.hpp"

namespace trajtree {

namespace {

constexpr std::string_view kWhitespace = " \t\n\r\f\v";

bool is_space(char c) { return kWhitespace.find(c) != std::string_view::npos; }

const std::set<std::string, std::less<>> kKnownFields = {
    "instance_id", "trajectory_id", "prompt", "steps", "resolved", "meta"};

std::string require_string(const Json& record, const char* field, std::size_t line) {
    auto it = record.find(field);
    if (it == record.end()) throw InputError(line, std::string("missing field '") + field + "'");
    if (!it->is_string()) throw InputError(line, std::string("field '") + field + "' must be a string");
    return it->get<std::string>();
}

}  // namespace

CanonicalAction canonicalize_action(std::string_view raw, const CanonConfig& config) {
    auto first = raw.find_first_not_of(kWhitespace);
    if (first == std::string_view::npos) throw InputError("empty action after trimming whitespace");
    auto last = raw.find_last_not_of(kWhitespace);
    std::string_view body = raw.substr(first, last - first + 1);

    std::string key;
    if (!config.collapse_whitespace) {
        key.assign(body);
    } else {
        key.reserve(body.size());
        bool in_run = false;
        for (char c : body) {
            if (is_space(c)) {
                in_run = true;
                continue;
            }
            if (in_run) key.push_back(' ');
            in_run = false;
            key.push_back(c);
        }
    }
    return {std::move(key), std::string(raw)};
}

std::vector<std::string> action_keys(const Trajectory& t, const CanonConfig& config) {
    std::vector<std::string> keys;
    keys.reserve(t.steps.size());
    for (const auto& step : t.steps) keys.push_back(canonicalize_action(step.action, config).key);
    return keys;
}

void validate(const Trajectory& t) {
    if (t.resolved != 0 && t.resolved != 1) {
        throw InputError("resolved must be 0 or 1, got " + std::to_string(t.resolved));
    }
    if (t.steps.empty()) throw InputError("trajectory '" + t.trajectory_id + "' has no steps");
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        if (t.steps[i].action.find_first_not_of(kWhitespace) == std::string::npos) {
            throw InputError("step " + std::to_string(i) + " has an empty action");
        }
        if (i + 1 < t.steps.size() && !t.steps[i].observation) {
            throw InputError("step " + std::to_string(i) + " is not final but has no observation");
        }
    }
    if (!t.meta.is_object()) throw InputError("meta must be an object");
}

Trajectory parse_trajectory_line(std::string_view text, std::size_t line) {
    Json record;
    try {
        record = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw InputError(line, std::string("malformed JSON: ") + e.what());
    }
    if (!record.is_object()) throw InputError(line, "record is not an object");

    Trajectory t;
    t.instance_id = require_string(record, "instance_id", line);
    t.trajectory_id = require_string(record, "trajectory_id", line);
    t.prompt = require_string(record, "prompt", line);

    auto resolved = record.find("resolved");
    if (resolved == record.end()) throw InputError(line, "missing field 'resolved'");
    if (!resolved->is_number_integer()) throw InputError(line, "field 'resolved' must be an integer");
    auto value = resolved->get<std::int64_t>();
    if (value != 0 && value != 1) {
        throw InputError(line, "resolved must be 0 or 1, got " + std::to_string(value));
    }
    t.resolved = static_cast<int>(value);

    auto steps = record.find("steps");
    if (steps == record.end() || !steps->is_array()) throw InputError(line, "field 'steps' must be an array");
    if (steps->empty()) throw InputError(line, "field 'steps' is empty");
    for (std::size_t i = 0; i < steps->size(); ++i) {
        const Json& s = (*steps)[i];
        const std::string where = "steps[" + std::to_string(i) + "]";
        if (!s.is_object()) throw InputError(line, where + " is not an object");
        auto action = s.find("action");
        if (action == s.end() || !action->is_string()) throw InputError(line, where + ".action must be a string");
        Step step{action->get<std::string>(), std::nullopt};
        if (auto obs = s.find("observation"); obs != s.end()) {
            if (!obs->is_string()) throw InputError(line, where + ".observation must be a string");
            step.observation = obs->get<std::string>();
        }
        for (const auto& [k, _] : s.items()) {
            if (k != "action" && k != "observation") throw InputError(line, where + " has unknown field '" + k + "'");
        }
        t.steps.push_back(std::move(step));
    }

    if (auto meta = record.find("meta"); meta != record.end()) {
        if (!meta->is_object()) throw InputError(line, "field 'meta' must be an object");
        t.meta = *meta;
    }
    for (const auto& [k, v] : record.items()) {
        if (kKnownFields.contains(k)) continue;
        if (t.meta.contains(k)) throw InputError(line, "unknown field '" + k + "' collides with a meta key");
        t.meta[k] = v;
    }

    try {
        validate(t);
    } catch (const InputError& e) {
        throw InputError(line, e.what());
    }
    return t;
}

ParseResult parse_trajectory_stream(std::istream& source, bool strict) {
    ParseResult result;
    std::set<std::pair<std::string, std::string>> seen;
    std::string text;
    std::size_t line = 0;
    while (std::getline(source, text)) {
        ++line;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        if (text.find_first_not_of(kWhitespace) == std::string::npos) continue;
        try {
            Trajectory t = parse_trajectory_line(text, line);
            if (!seen.emplace(t.instance_id, t.trajectory_id).second) {
                throw InputError(line, "duplicate (instance_id, trajectory_id) = (" + t.instance_id + ", " +
                                           t.trajectory_id + ")");
            }
            result.trajectories.push_back(std::move(t));
        } catch (const InputError& e) {
            if (strict) throw;
            result.skipped.push_back({line, e.what()});
        }
    }
    return result;
}

Json trajectory_to_json(const Trajectory& t) {
    Json steps = Json::array();
    for (const auto& s : t.steps) {
        Json step = Json::object();
        step["action"] = s.action;
        if (s.observation) step["observation"] = *s.observation;
        steps.push_back(std::move(step));
    }
    Json record = Json::object();
    record["instance_id"] = t.instance_id;
    record["trajectory_id"] = t.trajectory_id;
    record["prompt"] = t.prompt;
    record["steps"] = std::move(steps);
    record["resolved"] = t.resolved;
    record["meta"] = t.meta;
    return record;
}

std::string serialize_trajectory(const Trajectory& t) { return trajectory_to_json(t).dump(); }

}  // namespace trajtree
