#include "trajtree/emit.hpp"

namespace trajtree {

SftExample sft_example(const Trajectory& t) {
    SftExample ex{t.instance_id, t.trajectory_id, {}};
    ex.segments.push_back({SegmentRole::prompt, t.prompt, false});
    for (const auto& step : t.steps) {
        ex.segments.push_back({SegmentRole::action, step.action, true});
        if (step.observation) ex.segments.push_back({SegmentRole::observation, *step.observation, false});
    }
    return ex;
}

SftEmission emit_sft(std::span<const InstanceGroup> groups) {
    SftEmission out;
    for (const auto& g : groups) {
        for (const auto& t : g.trajectories) {
            if (t.succeeded()) out.examples.push_back(sft_example(t));
        }
    }
    if (out.examples.empty()) out.warnings.emplace_back("no resolved trajectories; SFT dataset is empty");
    return out;
}

std::vector<DpoExample> emit_dpo(std::span<const CriticalPair> pairs) {
    std::vector<DpoExample> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        out.push_back({p.instance_id, p.context, p.chosen, p.rejected, p.score_chosen, p.score_rejected});
    }
    return out;
}

StatsRecord emit_stats(const IngestReport& report, std::span<const TrajTree> trees,
                       std::span<const CriticalPair> pairs) {
    StatsRecord stats;
    stats.ingest = report;
    stats.trees = tree_stats(trees);
    stats.critical_pairs = pairs.size();
    stats.trees.critical_pairs = pairs.size();
    stats.dpo_examples = pairs.size();
    stats.sft_examples = stats.trees.successful;
    return stats;
}

Json sft_example_to_json(const SftExample& ex) {
    Json segments = Json::array();
    for (const auto& s : ex.segments) {
        Json j = Json::object();
        j["role"] = to_string(s.role);
        j["content"] = s.content;
        j["loss"] = s.loss;
        segments.push_back(std::move(j));
    }
    Json j = Json::object();
    j["instance_id"] = ex.instance_id;
    j["trajectory_id"] = ex.trajectory_id;
    j["segments"] = std::move(segments);
    return j;
}

Json dpo_example_to_json(const DpoExample& ex) {
    Json context = Json::array();
    for (const auto& s : ex.context) {
        Json j = Json::object();
        j["role"] = to_string(s.role);
        j["content"] = s.content;
        context.push_back(std::move(j));
    }
    Json j = Json::object();
    j["instance_id"] = ex.instance_id;
    j["context"] = std::move(context);
    j["chosen"] = ex.chosen;
    j["rejected"] = ex.rejected;
    j["score_chosen"] = ex.score_chosen.str();
    j["score_rejected"] = ex.score_rejected.str();
    return j;
}

Json stats_to_json(const StatsRecord& stats) {
    const TreeStats& t = stats.trees;
    Json j = Json::object();
    j["instances"] = t.instances;
    j["trajectories"] = t.trajectories;
    j["successful_trajectories"] = t.successful;
    j["wrong_trajectories"] = t.wrong;
    j["avg_token_len"] = t.avg_token_len;
    j["avg_char_len"] = t.avg_char_len;
    j["total_chars"] = t.total_chars;
    j["avg_path_len"] = t.avg_path_len;
    j["critical_pairs"] = stats.critical_pairs;
    j["sft_examples"] = stats.sft_examples;
    j["dpo_examples"] = stats.dpo_examples;
    j["observation_divergences"] = t.observation_divergences;
    j["ingest"] = ingest_report_to_json(stats.ingest);
    return j;
}

}  // namespace trajtree
