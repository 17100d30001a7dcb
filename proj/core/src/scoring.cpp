#include "trajtree/scoring.hpp"

#include <set>
#include <unordered_map>
#include <utility>

#include "trajtree/error.hpp"

namespace trajtree {

std::string_view to_string(PairMode mode) { return mode == PairMode::max_min ? "max-min" : "all-pairs"; }

PairMode parse_pair_mode(std::string_view text) {
    if (text == "all-pairs") return PairMode::all_pairs;
    if (text == "max-min") return PairMode::max_min;
    throw ConfigError("unknown pair mode '" + std::string(text) + "' (expected all-pairs or max-min)");
}

std::string_view to_string(SegmentRole role) {
    switch (role) {
        case SegmentRole::prompt: return "prompt";
        case SegmentRole::action: return "action";
        case SegmentRole::observation: return "observation";
    }
    return "?";
}

NodeScores score_nodes(const TrajTree& tree) {
    NodeScores scores(tree.nodes.size());
    // Explicit post-order: a node is finalized once all of its children are.
    std::vector<std::pair<NodeId, bool>> stack{{tree.root_id, false}};
    while (!stack.empty()) {
        auto [id, expanded] = stack.back();
        stack.pop_back();
        const TreeNode& node = tree.nodes[id];
        NodeScore& s = scores[id];
        s.node_id = id;
        if (node.is_leaf()) {
            s.successes = node.outcome == 1 ? 1 : 0;
            s.total = 1;
            continue;
        }
        if (!expanded) {
            stack.emplace_back(id, true);
            for (NodeId c : node.children) stack.emplace_back(c, false);
            continue;
        }
        s.successes = 0;
        s.total = 0;
        for (NodeId c : node.children) {
            s.successes += scores[c].successes;
            s.total += scores[c].total;
        }
    }
    return scores;
}

void validate_threshold(const Rational& threshold) {
    if (threshold <= Rational::integer(0) || threshold >= Rational::integer(1)) {
        throw ConfigError("critical threshold must lie strictly between 0 and 1, got " + threshold.str());
    }
}

std::vector<CriticalTriple> identify_critical_actions(const TrajTree& tree, const NodeScores& scores,
                                                      const Rational& threshold, PairMode mode) {
    validate_threshold(threshold);
    std::vector<CriticalTriple> triples;

    auto consider = [&](NodeId parent, NodeId a, NodeId b) {
        if (tree.nodes[a].action_key == tree.nodes[b].action_key) return;
        Rational sa = scores[a].value();
        Rational sb = scores[b].value();
        if (sa < sb) {
            std::swap(a, b);
            std::swap(sa, sb);
        }
        if (sa - sb > threshold) triples.push_back({parent, a, b});
    };

    for (const auto& node : tree.nodes) {
        if (node.is_leaf()) continue;
        std::vector<NodeId> actions;
        for (NodeId c : node.children) {
            if (tree.nodes[c].kind == NodeKind::action) actions.push_back(c);
        }
        if (actions.size() < 2) continue;

        if (mode == PairMode::all_pairs) {
            for (std::size_t i = 0; i < actions.size(); ++i) {
                for (std::size_t j = i + 1; j < actions.size(); ++j) consider(node.id, actions[i], actions[j]);
            }
        } else {
            NodeId best = actions.front();
            NodeId worst = actions.front();
            for (NodeId c : actions) {
                if (scores[c].value() > scores[best].value()) best = c;
                if (scores[c].value() < scores[worst].value()) worst = c;
            }
            if (best != worst) consider(node.id, best, worst);
        }
    }
    return triples;
}

namespace {

/// The first trajectory through a node created it, and it also created the
/// node's first child, so the first-child chain ends at its leaf.
const TreeNode& first_leaf_under(const TrajTree& tree, NodeId id) {
    const TreeNode* node = &tree.nodes[id];
    while (!node->is_leaf()) node = &tree.nodes[node->children.front()];
    return *node;
}

}  // namespace

std::vector<CriticalPair> extract_critical_pairs(const TrajTree& tree, const NodeScores& scores,
                                                 const std::vector<CriticalTriple>& triples,
                                                 std::span<const Trajectory> sources, const CanonConfig& canon) {
    std::unordered_map<std::string_view, const Trajectory*> by_id;
    for (const auto& t : sources) {
        if (t.instance_id == tree.instance_id) by_id.emplace(t.trajectory_id, &t);
    }
    auto source_of = [&](NodeId id) -> const Trajectory& {
        const TreeNode& leaf = first_leaf_under(tree, id);
        auto it = by_id.find(leaf.trajectory_id);
        if (it == by_id.end()) {
            throw InvariantError("instance '" + tree.instance_id + "': source trajectory '" + leaf.trajectory_id +
                                 "' not supplied");
        }
        return *it->second;
    };

    std::vector<CriticalPair> pairs;
    std::set<std::vector<std::string>> emitted;

    for (const auto& triple : triples) {
        const std::size_t depth = path_to(tree, triple.parent).size();
        const Trajectory& winner = source_of(triple.chosen);
        const Trajectory& loser = source_of(triple.rejected);
        if (winner.steps.size() <= depth || loser.steps.size() <= depth) {
            throw InvariantError("instance '" + tree.instance_id + "': source trajectory shorter than its tree path");
        }

        CriticalPair pair;
        pair.instance_id = tree.instance_id;
        pair.parent_node_id = triple.parent;
        pair.context.push_back({SegmentRole::prompt, winner.prompt});

        // Dedup key: prompt, canonical actions, verbatim observations, chosen, rejected.
        std::vector<std::string> key{winner.prompt};
        for (std::size_t i = 0; i < depth; ++i) {
            const Step& step = winner.steps[i];
            if (!step.observation) {
                throw InvariantError("instance '" + tree.instance_id + "': context step " + std::to_string(i) +
                                     " of '" + winner.trajectory_id + "' has no observation");
            }
            pair.context.push_back({SegmentRole::action, step.action});
            pair.context.push_back({SegmentRole::observation, *step.observation});
            key.push_back(canonicalize_action(step.action, canon).key);
            key.push_back(*step.observation);
        }

        pair.chosen = winner.steps[depth].action;
        pair.rejected = loser.steps[depth].action;
        pair.score_chosen = scores[triple.chosen].value();
        pair.score_rejected = scores[triple.rejected].value();

        auto chosen_key = canonicalize_action(pair.chosen, canon).key;
        auto rejected_key = canonicalize_action(pair.rejected, canon).key;
        if (chosen_key != tree.nodes[triple.chosen].action_key ||
            rejected_key != tree.nodes[triple.rejected].action_key) {
            throw InvariantError("instance '" + tree.instance_id + "': source trajectory disagrees with tree node");
        }
        if (chosen_key == rejected_key) {
            throw InvariantError("instance '" + tree.instance_id + "': critical pair contrasts identical actions");
        }
        key.push_back(std::move(chosen_key));
        key.push_back(std::move(rejected_key));
        if (emitted.insert(std::move(key)).second) pairs.push_back(std::move(pair));
    }
    return pairs;
}

Json scored_tree_to_json(const TrajTree& tree, const NodeScores& scores) {
    Json record = tree_to_json(tree);
    for (auto& j : record["nodes"]) {
        const NodeScore& s = scores.at(j["id"].get<NodeId>());
        j["successes"] = s.successes;
        j["total"] = s.total;
        j["score"] = s.value().str();
        j["score_decimal"] = s.value().to_double();
    }
    return record;
}

Json critical_pair_to_json(const CriticalPair& pair) {
    Json context = Json::array();
    for (const auto& seg : pair.context) {
        Json s = Json::object();
        s["role"] = to_string(seg.role);
        s["content"] = seg.content;
        context.push_back(std::move(s));
    }
    Json j = Json::object();
    j["instance_id"] = pair.instance_id;
    j["parent_node_id"] = pair.parent_node_id;
    j["context"] = std::move(context);
    j["chosen"] = pair.chosen;
    j["rejected"] = pair.rejected;
    j["score_chosen"] = pair.score_chosen.str();
    j["score_rejected"] = pair.score_rejected.str();
    j["score_chosen_decimal"] = pair.score_chosen.to_double();
    j["score_rejected_decimal"] = pair.score_rejected.to_double();
    return j;
}

}  // namespace trajtree
