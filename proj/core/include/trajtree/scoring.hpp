#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trajtree/rational.hpp"
#include "trajtree/tree.hpp"

namespace trajtree {

/// Successful and total root-to-leaf path counts through a node's subtree.
struct NodeScore {
    NodeId node_id = 0;
    std::size_t successes = 0;
    std::size_t total = 0;

    Rational value() const {
        return Rational(static_cast<std::int64_t>(successes), static_cast<std::int64_t>(total));
    }
};

/// Indexed by NodeId.
using NodeScores = std::vector<NodeScore>;

enum class PairMode {
    /// Every qualifying unordered pair of action children.
    all_pairs,
    /// At most one pair per parent: best child against worst child.
    max_min,
};

struct CriticalTriple {
    NodeId parent = 0;
    NodeId chosen = 0;
    NodeId rejected = 0;

    friend bool operator==(const CriticalTriple&, const CriticalTriple&) = default;
};

enum class SegmentRole { prompt, action, observation };

struct Segment {
    SegmentRole role = SegmentRole::prompt;
    std::string content;

    friend bool operator==(const Segment&, const Segment&) = default;
};

/// A preference pair of sibling actions under a shared context.
struct CriticalPair {
    std::string instance_id;
    /// prompt, then (action, observation) for every step on the root->parent path.
    std::vector<Segment> context;
    std::string chosen;
    std::string rejected;
    Rational score_chosen;
    Rational score_rejected;
    NodeId parent_node_id = 0;
};

/// Post-order aggregation: a leaf counts (outcome, 1); every other node sums
/// its children.
NodeScores score_nodes(const TrajTree& tree);

/// The default critical threshold, exactly one half.
inline Rational default_critical_threshold() { return Rational(1, 2); }

/// Throws ConfigError unless 0 < threshold < 1.
void validate_threshold(const Rational& threshold);

/// Sibling action pairs whose score difference strictly exceeds `threshold`,
/// oriented (higher, lower). Parents are visited in node-id order and pairs in
/// child order. Leaf children and siblings sharing an action key never pair.
std::vector<CriticalTriple> identify_critical_actions(const TrajTree& tree, const NodeScores& scores,
                                                      const Rational& threshold = default_critical_threshold(),
                                                      PairMode mode = PairMode::all_pairs);

/// Materializes each triple as a preference pair using raw texts.
///
/// The context and chosen action are copied verbatim from the first source
/// trajectory (leaf order) under the chosen child; the rejected action from
/// the first one under the rejected child. `sources` must contain every
/// trajectory the tree was built from. Pairs identical after action
/// canonicalization are emitted once. Throws InvariantError if a context step
/// lacks its observation or a leaf's trajectory is missing from `sources`.
std::vector<CriticalPair> extract_critical_pairs(const TrajTree& tree, const NodeScores& scores,
                                                 const std::vector<CriticalTriple>& triples,
                                                 std::span<const Trajectory> sources,
                                                 const CanonConfig& canon = {});

std::string_view to_string(PairMode mode);
PairMode parse_pair_mode(std::string_view text);
std::string_view to_string(SegmentRole role);

/// Tree export with successes/total/score joined onto every node.
Json scored_tree_to_json(const TrajTree& tree, const NodeScores& scores);

/// Pair export record; scores as "num/den" strings plus decimals.
Json critical_pair_to_json(const CriticalPair& pair);

}  // namespace trajtree
