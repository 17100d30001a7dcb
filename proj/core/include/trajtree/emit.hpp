#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "trajtree/ingest.hpp"
#include "trajtree/scoring.hpp"

namespace trajtree {

struct SftSegment {
    SegmentRole role = SegmentRole::prompt;
    std::string content;
    /// Whether the segment contributes to the SFT loss. Only actions do.
    bool loss = false;
};

struct SftExample {
    std::string instance_id;
    std::string trajectory_id;
    std::vector<SftSegment> segments;
};

struct SftEmission {
    std::vector<SftExample> examples;
    std::vector<std::string> warnings;
};

/// One example per resolved trajectory, masked so only actions carry loss.
SftEmission emit_sft(std::span<const InstanceGroup> groups);

SftExample sft_example(const Trajectory& t);

struct DpoExample {
    std::string instance_id;
    std::vector<Segment> context;
    std::string chosen;
    std::string rejected;
    Rational score_chosen;
    Rational score_rejected;
};

/// One example per pair, in pair order.
std::vector<DpoExample> emit_dpo(std::span<const CriticalPair> pairs);

/// Ingest bookkeeping plus the trajectory/tree statistics table.
struct StatsRecord {
    IngestReport ingest;
    TreeStats trees;
    std::size_t critical_pairs = 0;
    std::size_t sft_examples = 0;
    std::size_t dpo_examples = 0;
};

StatsRecord emit_stats(const IngestReport& report, std::span<const TrajTree> trees,
                       std::span<const CriticalPair> pairs);

Json sft_example_to_json(const SftExample& ex);
Json dpo_example_to_json(const DpoExample& ex);
Json stats_to_json(const StatsRecord& stats);

}  // namespace trajtree
