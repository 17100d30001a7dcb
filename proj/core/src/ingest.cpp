#include "trajtree/ingest.hpp"

#include <algorithm>
#include <istream>
#include <set>
#include <tuple>
#include <unordered_map>

#include "trajtree/error.hpp"

namespace trajtree {

namespace {

std::size_t common_prefix(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    auto [ia, ib] = std::mismatch(a.begin(), a.end(), b.begin(), b.end());
    return static_cast<std::size_t>(ia - a.begin());
}

}  // namespace

StageResult deduplicate(std::vector<Trajectory> ts, const CanonConfig& canon) {
    StageResult out;
    std::set<std::tuple<std::string, int, std::vector<std::string>>> seen;
    for (auto& t : ts) {
        if (seen.emplace(t.instance_id, t.resolved, action_keys(t, canon)).second) {
            out.kept.push_back(std::move(t));
        } else {
            ++out.removed;
        }
    }
    return out;
}

std::size_t longest_identical_run(const std::vector<std::string>& keys) {
    std::size_t best = 0;
    std::size_t run = 0;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        run = (i > 0 && keys[i] == keys[i - 1]) ? run + 1 : 1;
        best = std::max(best, run);
    }
    return best;
}

StageResult filter_loops(std::vector<Trajectory> ts, std::size_t n, const CanonConfig& canon) {
    if (n < 2) throw ConfigError("loop threshold must be >= 2, got " + std::to_string(n));
    StageResult out;
    for (auto& t : ts) {
        if (longest_identical_run(action_keys(t, canon)) >= n) {
            ++out.removed;
        } else {
            out.kept.push_back(std::move(t));
        }
    }
    return out;
}

StageResult filter_outliers(std::vector<Trajectory> ts, std::size_t k, const CanonConfig& canon) {
    if (k < 1) throw ConfigError("outlier minimum prefix must be >= 1, got " + std::to_string(k));

    std::vector<std::vector<std::string>> keys;
    keys.reserve(ts.size());
    std::unordered_map<std::string, std::vector<std::size_t>> by_instance;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        keys.push_back(action_keys(ts[i], canon));
        by_instance[ts[i].instance_id].push_back(i);
    }

    std::vector<bool> keep(ts.size(), true);
    for (const auto& [_, members] : by_instance) {
        if (members.size() < 2) continue;
        for (std::size_t i : members) {
            std::size_t best = 0;
            for (std::size_t j : members) {
                if (i != j) best = std::max(best, common_prefix(keys[i], keys[j]));
            }
            keep[i] = best >= k;
        }
    }

    StageResult out;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (keep[i]) {
            out.kept.push_back(std::move(ts[i]));
        } else {
            ++out.removed;
        }
    }
    return out;
}

std::vector<InstanceGroup> group_by_instance(std::vector<Trajectory> ts) {
    std::vector<InstanceGroup> groups;
    std::unordered_map<std::string, std::size_t> index;
    for (auto& t : ts) {
        auto [it, inserted] = index.try_emplace(t.instance_id, groups.size());
        if (inserted) {
            groups.push_back({t.instance_id, t.prompt, {}});
        } else if (groups[it->second].prompt != t.prompt) {
            throw InputError("instance '" + t.instance_id + "': trajectory '" + t.trajectory_id +
                             "' has a different prompt than earlier trajectories");
        }
        groups[it->second].trajectories.push_back(std::move(t));
    }
    return groups;
}

IngestResult ingest(std::vector<Trajectory> ts, const IngestConfig& config) {
    IngestResult result;
    IngestReport& report = result.report;
    report.input_count = ts.size();

    // Prompt consistency is checked up front so a mismatch is reported even
    // when one side would have been filtered out.
    {
        std::unordered_map<std::string, const std::string*> prompts;
        for (const auto& t : ts) {
            auto [it, inserted] = prompts.try_emplace(t.instance_id, &t.prompt);
            if (!inserted && *it->second != t.prompt) {
                throw InputError("instance '" + t.instance_id + "': trajectory '" + t.trajectory_id +
                                 "' has a different prompt than earlier trajectories");
            }
        }
    }

    auto dedup = deduplicate(std::move(ts), config.canon);
    report.duplicates_removed = dedup.removed;
    auto loops = filter_loops(std::move(dedup.kept), config.loop_threshold, config.canon);
    report.loops_removed = loops.removed;
    auto outliers = filter_outliers(std::move(loops.kept), config.outlier_min_prefix, config.canon);
    report.outliers_removed = outliers.removed;
    report.retained = outliers.kept.size();

    result.groups = group_by_instance(std::move(outliers.kept));
    for (const auto& g : result.groups) report.per_instance_retained[g.instance_id] = g.trajectories.size();

    if (!report.conserved()) throw InvariantError("ingest counts do not add up to the input count");
    return result;
}

IngestResult ingest_pipeline(std::istream& source, const IngestConfig& config) {
    // Validate stage parameters before touching the input.
    if (config.loop_threshold < 2) {
        throw ConfigError("loop threshold must be >= 2, got " + std::to_string(config.loop_threshold));
    }
    if (config.outlier_min_prefix < 1) {
        throw ConfigError("outlier minimum prefix must be >= 1, got " + std::to_string(config.outlier_min_prefix));
    }
    ParseResult parsed = parse_trajectory_stream(source, config.strict_parse);
    IngestResult result = ingest(std::move(parsed.trajectories), config);
    result.report.malformed_skipped = parsed.skipped.size();
    result.skipped = std::move(parsed.skipped);
    return result;
}

std::vector<Trajectory> flatten(const std::vector<InstanceGroup>& groups) {
    std::vector<Trajectory> out;
    for (const auto& g : groups) out.insert(out.end(), g.trajectories.begin(), g.trajectories.end());
    return out;
}

Json ingest_report_to_json(const IngestReport& report) {
    Json per_instance = Json::object();
    for (const auto& [id, n] : report.per_instance_retained) per_instance[id] = n;
    Json j = Json::object();
    j["input_count"] = report.input_count;
    j["duplicates_removed"] = report.duplicates_removed;
    j["loops_removed"] = report.loops_removed;
    j["outliers_removed"] = report.outliers_removed;
    j["retained"] = report.retained;
    j["malformed_skipped"] = report.malformed_skipped;
    j["per_instance_retained"] = std::move(per_instance);
    return j;
}

}  // namespace trajtree
