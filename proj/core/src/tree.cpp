#include "trajtree/tree.hpp"

#include <map>
#include <tuple>
#include <utility>

#include "trajtree/error.hpp"

namespace trajtree {

namespace {

using ChildKey = std::tuple<NodeId, std::string, std::optional<std::string>>;

NodeId add_node(TrajTree& tree, TreeNode node) {
    node.id = static_cast<NodeId>(tree.nodes.size());
    tree.nodes.push_back(std::move(node));
    return tree.nodes.back().id;
}

/// Depth (in action nodes) of every node; root is 0, leaves inherit their parent's depth.
std::vector<std::size_t> action_depths(const TrajTree& tree) {
    std::vector<std::size_t> depth(tree.nodes.size(), 0);
    std::vector<NodeId> stack{tree.root_id};
    while (!stack.empty()) {
        NodeId id = stack.back();
        stack.pop_back();
        for (NodeId c : tree.nodes[id].children) {
            depth[c] = depth[id] + (tree.nodes[c].kind == NodeKind::action ? 1 : 0);
            stack.push_back(c);
        }
    }
    return depth;
}

}  // namespace

std::string_view to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::root: return "root";
        case NodeKind::action: return "action";
        case NodeKind::leaf: return "leaf";
    }
    return "?";
}

std::string_view to_string(MergeMode mode) {
    return mode == MergeMode::strict ? "strict" : "action-only";
}

MergeMode parse_merge_mode(std::string_view text) {
    if (text == "action-only") return MergeMode::action_only;
    if (text == "strict") return MergeMode::strict;
    throw ConfigError("unknown merge mode '" + std::string(text) + "' (expected action-only or strict)");
}

std::size_t trajectory_char_count(const Trajectory& t) {
    std::size_t n = t.prompt.size();
    for (const auto& s : t.steps) n += s.action.size() + (s.observation ? s.observation->size() : 0);
    return n;
}

std::size_t approx_tokens(std::size_t chars) { return (chars + 2) / 4; }

TrajTree build_tree(const std::string& instance_id, const std::string& prompt, std::span<const Trajectory> ts,
                    const TreeConfig& config) {
    if (ts.empty()) throw InputError("instance '" + instance_id + "': cannot build a tree from zero trajectories");

    TrajTree tree;
    tree.instance_id = instance_id;
    tree.prompt = prompt;
    tree.root_id = add_node(tree, TreeNode{});

    std::map<ChildKey, NodeId> child_index;
    for (const auto& t : ts) {
        if (t.instance_id != instance_id) {
            throw InputError("trajectory '" + t.trajectory_id + "' belongs to instance '" + t.instance_id +
                             "', not '" + instance_id + "'");
        }
        if (t.prompt != prompt) {
            throw InputError("instance '" + instance_id + "': trajectory '" + t.trajectory_id +
                             "' has a different prompt");
        }
        validate(t);

        NodeId cur = tree.root_id;
        for (const auto& step : t.steps) {
            auto canon = canonicalize_action(step.action, config.canon);
            std::optional<std::string> obs_key;
            if (config.merge_mode == MergeMode::strict) obs_key = step.observation;

            auto [it, inserted] = child_index.try_emplace(ChildKey{cur, canon.key, std::move(obs_key)}, NodeId{0});
            if (inserted) {
                TreeNode node;
                node.kind = NodeKind::action;
                node.action_key = std::move(canon.key);
                node.action_raw = step.action;
                node.observation = step.observation;
                NodeId id = add_node(tree, std::move(node));
                tree.nodes[cur].children.push_back(id);
                it->second = id;
            } else {
                TreeNode& node = tree.nodes[it->second];
                if (!node.observation) {
                    node.observation = step.observation;
                } else if (step.observation && *step.observation != *node.observation) {
                    ++tree.observation_divergences;
                }
            }
            cur = it->second;
        }

        TreeNode leaf_node;
        leaf_node.kind = NodeKind::leaf;
        leaf_node.outcome = t.resolved;
        leaf_node.trajectory_id = t.trajectory_id;
        leaf_node.char_count = trajectory_char_count(t);
        NodeId leaf = add_node(tree, std::move(leaf_node));
        tree.nodes[cur].children.push_back(leaf);
        tree.trajectory_ids.push_back(t.trajectory_id);
        ++tree.path_count;
    }
    return tree;
}

std::vector<TreePath> enumerate_paths(const TrajTree& tree) {
    std::vector<TreePath> paths;
    std::vector<std::string> keys;
    // (node, next child index)
    std::vector<std::pair<NodeId, std::size_t>> stack{{tree.root_id, 0}};
    while (!stack.empty()) {
        auto& [id, next] = stack.back();
        const TreeNode& node = tree.nodes[id];
        if (node.is_leaf()) {
            paths.push_back({keys, node.outcome, node.trajectory_id});
            stack.pop_back();
            continue;
        }
        if (next == node.children.size()) {
            if (node.kind == NodeKind::action) keys.pop_back();
            stack.pop_back();
            continue;
        }
        NodeId child = node.children[next++];
        if (tree.nodes[child].kind == NodeKind::action) keys.push_back(tree.nodes[child].action_key);
        stack.emplace_back(child, 0);
    }
    return paths;
}

std::vector<NodeId> path_to(const TrajTree& tree, NodeId id) {
    std::vector<NodeId> parent(tree.nodes.size(), tree.root_id);
    for (const auto& n : tree.nodes) {
        for (NodeId c : n.children) parent[c] = n.id;
    }
    std::vector<NodeId> path;
    for (NodeId cur = id; cur != tree.root_id; cur = parent[cur]) path.push_back(cur);
    return {path.rbegin(), path.rend()};
}

TreeStats tree_stats(std::span<const TrajTree> trees) {
    TreeStats stats;
    std::size_t tokens = 0;
    std::size_t path_steps = 0;
    for (const auto& tree : trees) {
        ++stats.instances;
        stats.observation_divergences += tree.observation_divergences;
        auto depth = action_depths(tree);
        for (const auto& node : tree.nodes) {
            if (!node.is_leaf()) continue;
            ++stats.trajectories;
            (node.outcome == 1 ? stats.successful : stats.wrong) += 1;
            stats.total_chars += node.char_count;
            tokens += approx_tokens(node.char_count);
            path_steps += depth[node.id];
        }
    }
    if (stats.trajectories > 0) {
        auto n = static_cast<double>(stats.trajectories);
        stats.avg_token_len = static_cast<double>(tokens) / n;
        stats.avg_char_len = static_cast<double>(stats.total_chars) / n;
        stats.avg_path_len = static_cast<double>(path_steps) / n;
    }
    return stats;
}

Json tree_to_json(const TrajTree& tree) {
    Json nodes = Json::array();
    for (const auto& n : tree.nodes) {
        Json j = Json::object();
        j["id"] = n.id;
        j["kind"] = to_string(n.kind);
        if (n.kind == NodeKind::action) {
            j["action_key"] = n.action_key;
            j["action_raw"] = n.action_raw;
            if (n.observation) j["observation"] = *n.observation;
        }
        if (n.kind == NodeKind::leaf) {
            j["outcome"] = n.outcome;
            j["trajectory_id"] = n.trajectory_id;
            j["char_count"] = n.char_count;
        } else {
            j["children"] = n.children;
        }
        nodes.push_back(std::move(j));
    }
    Json record = Json::object();
    record["instance_id"] = tree.instance_id;
    record["prompt"] = tree.prompt;
    record["root_id"] = tree.root_id;
    record["path_count"] = tree.path_count;
    record["observation_divergences"] = tree.observation_divergences;
    record["trajectory_ids"] = tree.trajectory_ids;
    record["nodes"] = std::move(nodes);
    return record;
}

TrajTree tree_from_json(const Json& record) {
    TrajTree tree;
    try {
        tree.instance_id = record.at("instance_id").get<std::string>();
        tree.prompt = record.at("prompt").get<std::string>();
        tree.root_id = record.at("root_id").get<NodeId>();
        tree.path_count = record.at("path_count").get<std::size_t>();
        tree.observation_divergences = record.value("observation_divergences", std::size_t{0});
        tree.trajectory_ids = record.at("trajectory_ids").get<std::vector<std::string>>();
        for (const auto& j : record.at("nodes")) {
            TreeNode n;
            n.id = j.at("id").get<NodeId>();
            if (n.id != tree.nodes.size()) throw InputError("tree node ids must be dense and ordered");
            auto kind = j.at("kind").get<std::string>();
            if (kind == "root") {
                n.kind = NodeKind::root;
            } else if (kind == "action") {
                n.kind = NodeKind::action;
                n.action_key = j.at("action_key").get<std::string>();
                n.action_raw = j.at("action_raw").get<std::string>();
                if (j.contains("observation")) n.observation = j.at("observation").get<std::string>();
            } else if (kind == "leaf") {
                n.kind = NodeKind::leaf;
                n.outcome = j.at("outcome").get<int>();
                n.trajectory_id = j.at("trajectory_id").get<std::string>();
                n.char_count = j.value("char_count", std::size_t{0});
            } else {
                throw InputError("unknown node kind '" + kind + "'");
            }
            if (n.kind != NodeKind::leaf) n.children = j.at("children").get<std::vector<NodeId>>();
            tree.nodes.push_back(std::move(n));
        }
    } catch (const Json::exception& e) {
        throw InputError(std::string("malformed tree record: ") + e.what());
    }

    // Structural checks: single root, every node reached exactly once, leaves well-formed.
    if (tree.root_id >= tree.nodes.size() || tree.nodes[tree.root_id].kind != NodeKind::root) {
        throw InputError("tree root_id does not name a root node");
    }
    std::vector<int> seen(tree.nodes.size(), 0);
    std::vector<NodeId> stack{tree.root_id};
    std::vector<std::string> leaf_ids;
    while (!stack.empty()) {
        NodeId id = stack.back();
        stack.pop_back();
        if (seen[id]++) throw InputError("tree node " + std::to_string(id) + " is reachable twice");
        const TreeNode& n = tree.nodes[id];
        if (n.is_leaf() && n.outcome != 0 && n.outcome != 1) throw InputError("leaf outcome must be 0 or 1");
        if (n.kind == NodeKind::action && n.children.empty()) {
            throw InputError("action node " + std::to_string(id) + " has no children");
        }
        for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) {
            if (*it >= tree.nodes.size() || tree.nodes[*it].kind == NodeKind::root) {
                throw InputError("tree node " + std::to_string(id) + " has an invalid child");
            }
            stack.push_back(*it);
        }
    }
    std::size_t leaves = 0;
    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (!seen[i]) throw InputError("tree node " + std::to_string(i) + " is unreachable");
        leaves += tree.nodes[i].is_leaf() ? 1 : 0;
    }
    if (leaves != tree.path_count || tree.trajectory_ids.size() != leaves) {
        throw InputError("tree path_count does not match its leaves");
    }
    return tree;
}

}  // namespace trajtree
