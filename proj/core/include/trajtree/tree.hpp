#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trajtree/trajectory.hpp"

namespace trajtree {

/// Index into TrajTree::nodes. Assigned in creation order, so ids are
/// deterministic for a fixed input order.
using NodeId = std::uint32_t;

enum class NodeKind { root, action, leaf };

enum class MergeMode {
    /// Nodes merge on the canonical action key alone.
    action_only,
    /// Nodes merge on (canonical action key, verbatim observation).
    strict,
};

struct TreeNode {
    NodeId id = 0;
    NodeKind kind = NodeKind::root;
    std::string action_key;                  ///< action nodes only
    std::string action_raw;                  ///< first merged occurrence
    std::optional<std::string> observation;  ///< first observation seen
    std::vector<NodeId> children;            ///< first-occurrence order
    int outcome = 0;                         ///< leaves only
    std::string trajectory_id;               ///< leaves only
    std::size_t char_count = 0;              ///< leaves only: source trajectory size

    bool is_leaf() const noexcept { return kind == NodeKind::leaf; }
};

struct TrajTree {
    std::string instance_id;
    std::string prompt;
    std::vector<TreeNode> nodes;
    NodeId root_id = 0;
    std::size_t path_count = 0;
    /// Source trajectory of each leaf, in leaf creation order.
    std::vector<std::string> trajectory_ids;
    /// Times a merged action node saw an observation different from the stored one.
    std::size_t observation_divergences = 0;

    const TreeNode& node(NodeId id) const { return nodes.at(id); }
    const TreeNode& root() const { return nodes.at(root_id); }
};

struct TreeConfig {
    CanonConfig canon;
    MergeMode merge_mode = MergeMode::action_only;
};

/// Prefix-merges `ts` under a root holding `prompt`; each trajectory ends in
/// its own leaf. Throws InputError on an empty set or a trajectory whose
/// instance or prompt differs.
TrajTree build_tree(const std::string& instance_id, const std::string& prompt, std::span<const Trajectory> ts,
                    const TreeConfig& config = {});

struct TreePath {
    std::vector<std::string> action_keys;
    int outcome = 0;
    std::string trajectory_id;
};

/// Depth-first root-to-leaf paths in child order.
std::vector<TreePath> enumerate_paths(const TrajTree& tree);

/// Node ids from the root (exclusive) down to `id` (inclusive).
std::vector<NodeId> path_to(const TrajTree& tree, NodeId id);

/// Summary figures over a set of trees (trajectory/tree statistics table).
struct TreeStats {
    std::size_t instances = 0;
    std::size_t trajectories = 0;
    std::size_t successful = 0;
    std::size_t wrong = 0;
    /// Mean of per-trajectory round(chars / 4).
    double avg_token_len = 0.0;
    double avg_char_len = 0.0;
    /// Mean root-to-leaf length, counted in actions.
    double avg_path_len = 0.0;
    std::size_t total_chars = 0;
    std::optional<std::size_t> critical_pairs;
    std::size_t observation_divergences = 0;
};

TreeStats tree_stats(std::span<const TrajTree> trees);

/// Character count used for the approximate token length: prompt plus every
/// action and observation.
std::size_t trajectory_char_count(const Trajectory& t);

/// round(chars / 4), halves rounded up.
std::size_t approx_tokens(std::size_t chars);

Json tree_to_json(const TrajTree& tree);

/// Rebuilds a tree from its export record; throws InputError if the record
/// is not a well-formed tree.
TrajTree tree_from_json(const Json& record);

std::string_view to_string(NodeKind kind);
std::string_view to_string(MergeMode mode);
MergeMode parse_merge_mode(std::string_view text);

}  // namespace trajtree
