#include "trajtree/pipeline.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <set>
#include <tuple>

#include "trajtree/error.hpp"
#include "trajtree/parallel.hpp"

namespace trajtree {

namespace {

struct InstanceAnalysis {
    TrajTree tree;
    NodeScores scores;
    std::vector<CriticalTriple> triples;
    std::vector<CriticalPair> pairs;
};

InstanceAnalysis analyze_instance(const InstanceGroup& group, const PipelineConfig& config) {
    InstanceAnalysis a;
    a.tree = build_tree(group.instance_id, group.prompt, group.trajectories, config.tree_config());
    a.scores = score_nodes(a.tree);
    a.triples = identify_critical_actions(a.tree, a.scores, config.critical_threshold, config.pair_mode);
    a.pairs = extract_critical_pairs(a.tree, a.scores, a.triples, group.trajectories, config.ingest.canon);
    return a;
}

Json with_config(const PipelineConfig& config, const Json& body) {
    Json j = Json::object();
    j["config"] = config_to_json(config);
    for (const auto& [k, v] : body.items()) j[k] = v;
    return j;
}

/// Non-leaf node -> canonical key path from the root.
std::map<NodeId, std::vector<std::string>> node_prefixes(const TrajTree& tree) {
    std::map<NodeId, std::vector<std::string>> out;
    std::vector<std::pair<NodeId, std::vector<std::string>>> stack{{tree.root_id, {}}};
    while (!stack.empty()) {
        auto [id, prefix] = std::move(stack.back());
        stack.pop_back();
        for (NodeId c : tree.nodes[id].children) {
            if (tree.nodes[c].kind != NodeKind::action) continue;
            auto next = prefix;
            next.push_back(tree.nodes[c].action_key);
            stack.emplace_back(c, std::move(next));
        }
        out.emplace(id, std::move(prefix));
    }
    return out;
}

bool is_verbatim_prefix(const CriticalPair& pair, const Trajectory& t) {
    if (pair.context.empty() || pair.context.size() % 2 == 0) return false;
    if (pair.context[0].role != SegmentRole::prompt || pair.context[0].content != t.prompt) return false;
    const std::size_t depth = (pair.context.size() - 1) / 2;
    if (t.steps.size() <= depth) return false;
    for (std::size_t i = 0; i < depth; ++i) {
        const Segment& a = pair.context[1 + 2 * i];
        const Segment& o = pair.context[2 + 2 * i];
        if (a.role != SegmentRole::action || a.content != t.steps[i].action) return false;
        if (o.role != SegmentRole::observation || !t.steps[i].observation || o.content != *t.steps[i].observation) {
            return false;
        }
    }
    return t.steps[depth].action == pair.chosen;
}

bool default_ingest(const PipelineConfig& c) {
    const IngestConfig defaults;
    return c.ingest.loop_threshold == defaults.loop_threshold &&
           c.ingest.outlier_min_prefix == defaults.outlier_min_prefix &&
           c.ingest.canon.collapse_whitespace == defaults.canon.collapse_whitespace;
}

}  // namespace

std::vector<CriticalPair> PipelineResult::all_pairs() const {
    std::vector<CriticalPair> out;
    for (const auto& p : pairs) out.insert(out.end(), p.begin(), p.end());
    return out;
}

void analyze(PipelineResult& result, const PipelineConfig& config) {
    validate(config);
    const auto& groups = result.ingest.groups;
    auto analyses = parallel_map(groups.size(), config.jobs,
                                 [&](std::size_t i) { return analyze_instance(groups[i], config); });

    result.trees.clear();
    result.scores.clear();
    result.triples.clear();
    result.pairs.clear();
    for (auto& a : analyses) {
        result.trees.push_back(std::move(a.tree));
        result.scores.push_back(std::move(a.scores));
        result.triples.push_back(std::move(a.triples));
        result.pairs.push_back(std::move(a.pairs));
    }

    auto pairs = result.all_pairs();
    result.sft = emit_sft(groups);
    result.dpo = emit_dpo(pairs);
    result.stats = emit_stats(result.ingest.report, result.trees, pairs);
    result.stats.sft_examples = result.sft.examples.size();
}

PipelineResult run_pipeline(std::vector<Trajectory> corpus, const PipelineConfig& config) {
    validate(config);
    PipelineResult result;
    result.ingest = ingest(std::move(corpus), config.ingest);
    analyze(result, config);
    return result;
}

PipelineResult run_pipeline(std::istream& source, const PipelineConfig& config) {
    validate(config);
    PipelineResult result;
    result.ingest = ingest_pipeline(source, config.ingest);
    analyze(result, config);
    return result;
}

std::string_view artifact_filename(Artifact a) {
    switch (a) {
        case Artifact::retained: return "retained.jsonl";
        case Artifact::ingest_report: return "ingest_report.json";
        case Artifact::trees: return "trees.jsonl";
        case Artifact::scored_trees: return "scored_trees.jsonl";
        case Artifact::pairs: return "pairs.jsonl";
        case Artifact::sft: return "sft.jsonl";
        case Artifact::dpo: return "dpo.jsonl";
        case Artifact::stats: return "stats.json";
    }
    return "";
}

std::string render_jsonl(const std::vector<Json>& records) {
    std::string out;
    for (const auto& r : records) {
        out += r.dump();
        out += '\n';
    }
    return out;
}

std::string render(const PipelineResult& result, Artifact a, const PipelineConfig& config) {
    std::vector<Json> records;
    switch (a) {
        case Artifact::retained:
            for (const auto& g : result.ingest.groups) {
                for (const auto& t : g.trajectories) records.push_back(trajectory_to_json(t));
            }
            break;
        case Artifact::ingest_report: {
            Json body = ingest_report_to_json(result.ingest.report);
            Json skipped = Json::array();
            for (const auto& s : result.ingest.skipped) {
                Json j = Json::object();
                j["line"] = s.line;
                j["reason"] = s.reason;
                skipped.push_back(std::move(j));
            }
            body["skipped_lines"] = std::move(skipped);
            return with_config(config, body).dump(2) + "\n";
        }
        case Artifact::trees:
            for (const auto& t : result.trees) records.push_back(tree_to_json(t));
            break;
        case Artifact::scored_trees:
            for (std::size_t i = 0; i < result.trees.size(); ++i) {
                records.push_back(scored_tree_to_json(result.trees[i], result.scores[i]));
            }
            break;
        case Artifact::pairs:
            for (const auto& per_instance : result.pairs) {
                for (const auto& p : per_instance) records.push_back(critical_pair_to_json(p));
            }
            break;
        case Artifact::sft:
            for (const auto& ex : result.sft.examples) records.push_back(sft_example_to_json(ex));
            break;
        case Artifact::dpo:
            for (const auto& ex : result.dpo) records.push_back(dpo_example_to_json(ex));
            break;
        case Artifact::stats: {
            Json body = stats_to_json(result.stats);
            body["warnings"] = result.sft.warnings;
            return with_config(config, body).dump(2) + "\n";
        }
    }
    return render_jsonl(records);
}

Json OracleCheck::to_json() const {
    Json j = Json::object();
    j["ok"] = ok();
    j["checks"] = checks;
    j["oracle_compared"] = oracle_compared;
    j["ground_truth_compared"] = ground_truth_compared;
    j["failures"] = failures;
    return j;
}

OracleCheck check_against_oracles(const PipelineResult& result, const PipelineConfig& config,
                                  const synth::GroundTruth* truth) {
    OracleCheck check;
    auto expect = [&](bool cond, const std::string& what) {
        ++check.checks;
        if (!cond) check.failures.push_back(what);
    };

    const auto& report = result.ingest.report;
    const auto& groups = result.ingest.groups;
    expect(report.conserved(), "ingest counts are not conserved");
    expect(result.trees.size() == groups.size(), "tree count differs from instance count");
    if (result.trees.size() != groups.size()) return check;

    check.oracle_compared = config.merge_mode == MergeMode::action_only;
    const auto& canon = config.ingest.canon;
    std::size_t total_pairs = 0;
    std::size_t successful = 0;

    for (std::size_t i = 0; i < groups.size(); ++i) {
        const auto& group = groups[i];
        const auto& tree = result.trees[i];
        const auto& scores = result.scores[i];
        const std::string where = "instance '" + group.instance_id + "': ";

        // Reconstruction: leaves and paths equal the retained set.
        expect(tree.path_count == group.trajectories.size(), where + "leaf count != retained count");
        using PathKey = std::tuple<std::vector<std::string>, int, std::string>;
        std::vector<PathKey> from_tree;
        for (auto& p : enumerate_paths(tree)) from_tree.emplace_back(std::move(p.action_keys), p.outcome, p.trajectory_id);
        std::vector<PathKey> from_input;
        for (const auto& t : group.trajectories) {
            from_input.emplace_back(action_keys(t, canon), t.resolved, t.trajectory_id);
            successful += t.succeeded() ? 1 : 0;
        }
        std::sort(from_tree.begin(), from_tree.end());
        std::sort(from_input.begin(), from_input.end());
        expect(from_tree == from_input, where + "enumerated paths differ from retained trajectories");

        // Score conservation at every internal node.
        for (const auto& node : tree.nodes) {
            if (node.is_leaf()) continue;
            std::size_t s = 0, t = 0;
            for (NodeId c : node.children) {
                s += scores[c].successes;
                t += scores[c].total;
            }
            expect(scores[node.id].successes == s && scores[node.id].total == t,
                   where + "score of node " + std::to_string(node.id) + " is not the sum of its children");
        }

        const auto oracle_scores = synth::brute_force_scores(group.trajectories, canon);
        const auto oracle_pairs = synth::brute_force_pairs(oracle_scores, config.critical_threshold);

        if (check.oracle_compared) {
            auto prefixes = node_prefixes(tree);
            expect(prefixes.size() == oracle_scores.size(), where + "tree has " + std::to_string(prefixes.size()) +
                                                                " prefix nodes, oracle has " +
                                                                std::to_string(oracle_scores.size()));
            for (const auto& [id, prefix] : prefixes) {
                auto it = oracle_scores.find(prefix);
                bool same = it != oracle_scores.end() && it->second.successes == scores[id].successes &&
                            it->second.total == scores[id].total;
                expect(same, where + "node " + std::to_string(id) + " score disagrees with brute-force counting");
            }

            std::set<synth::OraclePair> found;
            for (const auto& tr : result.triples[i]) {
                found.insert({prefixes[tr.parent], tree.nodes[tr.chosen].action_key, tree.nodes[tr.rejected].action_key});
            }
            if (config.pair_mode == PairMode::all_pairs) {
                expect(found == oracle_pairs, where + "critical pairs differ from brute-force pairs");
            } else {
                expect(std::includes(oracle_pairs.begin(), oracle_pairs.end(), found.begin(), found.end()),
                       where + "max-min pairs are not a subset of brute-force pairs");
            }
        }

        for (const auto& pair : result.pairs[i]) {
            ++total_pairs;
            expect(pair.score_chosen - pair.score_rejected > config.critical_threshold,
                   where + "emitted pair does not exceed the threshold");
            expect(canonicalize_action(pair.chosen, canon).key != canonicalize_action(pair.rejected, canon).key,
                   where + "emitted pair contrasts identical actions");
            bool verbatim = std::any_of(group.trajectories.begin(), group.trajectories.end(),
                                        [&](const Trajectory& t) { return is_verbatim_prefix(pair, t); });
            expect(verbatim, where + "pair context is not a verbatim prefix of any retained trajectory");
        }

        if (truth && default_ingest(config)) {
            auto it = std::find_if(truth->instances.begin(), truth->instances.end(),
                                   [&](const auto& t) { return t.instance_id == group.instance_id; });
            expect(it != truth->instances.end(), where + "retained but absent from ground truth");
            if (it == truth->instances.end()) continue;
            std::vector<std::string> ids;
            for (const auto& t : group.trajectories) ids.push_back(t.trajectory_id);
            expect(ids == it->retained_ids, where + "retained ids differ from ground truth");
            expect(it->prefix_scores == oracle_scores, where + "ground-truth prefix scores differ");
            for (const auto& planted : it->planted_pairs) {
                expect(oracle_pairs.contains(planted), where + "planted critical pair missing from oracle pairs");
            }
        }
    }

    if (truth && default_ingest(config)) {
        check.ground_truth_compared = true;
        std::size_t dups = 0, loops = 0, outliers = 0, generated = 0;
        for (const auto& it : truth->instances) {
            dups += it.duplicates_removed;
            loops += it.loops_removed;
            outliers += it.outliers_removed;
            generated += it.generated;
            bool present = std::any_of(groups.begin(), groups.end(),
                                       [&](const auto& g) { return g.instance_id == it.instance_id; });
            expect(present == !it.retained_ids.empty(),
                   "instance '" + it.instance_id + "': presence after ingest differs from ground truth");
        }
        expect(report.input_count == generated, "input count differs from ground truth");
        expect(report.duplicates_removed == dups, "duplicates removed differs from ground truth");
        expect(report.loops_removed == loops, "loops removed differs from ground truth");
        expect(report.outliers_removed == outliers, "outliers removed differs from ground truth");
        expect(report.retained == truth->retained(), "retained count differs from ground truth");
        expect(result.stats.trees.successful == truth->successful(), "successful count differs from ground truth");
    }

    const auto& stats = result.stats;
    expect(stats.trees.trajectories == report.retained, "stats trajectory count != retained");
    expect(stats.trees.successful == successful, "stats successful count is wrong");
    expect(stats.trees.successful + stats.trees.wrong == stats.trees.trajectories, "successful + wrong != total");
    expect(stats.critical_pairs == total_pairs, "stats critical pair count is wrong");
    expect(result.sft.examples.size() == successful, "SFT example count != resolved trajectories");
    expect(result.dpo.size() == total_pairs, "DPO example count != pair count");
    return check;
}

SelfCheckRun self_check(const synth::SynthConfig& synth_config, const PipelineConfig& config) {
    SelfCheckRun run;
    run.synth = synth::generate(synth_config);
    run.result = run_pipeline(run.synth.corpus, config);
    run.check = check_against_oracles(run.result, config, &run.synth.truth);
    return run;
}

}  // namespace trajtree
