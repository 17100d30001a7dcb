#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "trajtree/rational.hpp"
#include "trajtree/trajectory.hpp"

namespace trajtree::synth {

/// Shape of a generated corpus.
///
/// Every ordinary trajectory opens with the same action, so only planted
/// outliers fail the overlap rule. Planted critical points add two children
/// (a winning and a losing action) under a random decision node. Planted loops
/// end in three repeated actions, so with `depth` below 4 they run longer than
/// `depth`; loops never survive ingest.
struct SynthConfig {
    std::uint64_t seed = 0;
    std::size_t instances = 4;
    std::size_t branching = 3;
    std::size_t depth = 6;
    std::size_t trajectories_per_instance = 8;
    std::size_t planted_critical = 1;
    double loop_rate = 0.1;
    double outlier_rate = 0.1;
    double duplicate_rate = 0.1;
    /// Make repeated observations differ so strict merging has work to do.
    bool nondeterministic_observations = false;
    /// Perturb raw action whitespace so canonicalization has work to do.
    bool whitespace_jitter = true;
};

/// Throws ConfigError on a zero depth or branching, or a probability outside [0, 1].
void validate(const SynthConfig& config);

struct PrefixCount {
    std::size_t successes = 0;
    std::size_t total = 0;

    friend bool operator==(const PrefixCount&, const PrefixCount&) = default;
};

/// Canonical action prefix -> counts over trajectories extending it.
using PrefixScores = std::map<std::vector<std::string>, PrefixCount>;

struct OraclePair {
    std::vector<std::string> prefix;
    std::string chosen;
    std::string rejected;

    friend auto operator<=>(const OraclePair&, const OraclePair&) = default;
    friend bool operator==(const OraclePair&, const OraclePair&) = default;
};

struct InstanceTruth {
    std::string instance_id;
    /// Trajectory ids that should survive ingest at default settings, in input order.
    std::vector<std::string> retained_ids;
    std::size_t generated = 0;
    std::size_t duplicates_removed = 0;
    std::size_t loops_removed = 0;
    std::size_t outliers_removed = 0;
    PrefixScores prefix_scores;
    std::vector<OraclePair> planted_pairs;
};

struct GroundTruth {
    std::vector<InstanceTruth> instances;

    std::size_t retained() const;
    std::size_t successful() const;
};

struct SynthOutput {
    std::vector<Trajectory> corpus;
    GroundTruth truth;
};

/// Pure function of `config`. Instances use independently mixed seeds, so
/// instance i is the same whatever `instances` is.
SynthOutput generate(const SynthConfig& config);

/// Counts, for every canonical action prefix (including the empty one), the
/// trajectories extending it and how many of those resolved.
PrefixScores brute_force_scores(std::span<const Trajectory> ts, const CanonConfig& canon = {});

/// Every prefix's pairs of one-step extensions whose success-rate gap
/// strictly exceeds `threshold`, oriented (higher, lower).
std::set<OraclePair> brute_force_pairs(const PrefixScores& scores, const Rational& threshold);

Json config_to_json(const SynthConfig& config);
Json ground_truth_to_json(const GroundTruth& truth);

}  // namespace trajtree::synth
