#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "trajtree/trajectory.hpp"

namespace trajtree {

struct IngestConfig {
    CanonConfig canon;
    /// Minimum run of identical consecutive actions that marks a loop.
    std::size_t loop_threshold = 3;
    /// Minimum shared leading-action count with some peer of the same instance.
    std::size_t outlier_min_prefix = 1;
    bool strict_parse = true;
};

/// Output of one filtering stage.
struct StageResult {
    std::vector<Trajectory> kept;
    std::size_t removed = 0;
};

/// All retained trajectories of one task, in input order.
struct InstanceGroup {
    std::string instance_id;
    std::string prompt;
    std::vector<Trajectory> trajectories;
};

struct IngestReport {
    std::size_t input_count = 0;
    std::size_t duplicates_removed = 0;
    std::size_t loops_removed = 0;
    std::size_t outliers_removed = 0;
    std::size_t retained = 0;
    /// Lines dropped by lenient parsing. Not part of input_count.
    std::size_t malformed_skipped = 0;
    std::map<std::string, std::size_t> per_instance_retained;

    bool conserved() const noexcept {
        return input_count == duplicates_removed + loops_removed + outliers_removed + retained;
    }
};

struct IngestResult {
    std::vector<InstanceGroup> groups;
    IngestReport report;
    std::vector<SkippedLine> skipped;
};

/// Keeps the first trajectory of each (instance_id, resolved, action keys) class.
StageResult deduplicate(std::vector<Trajectory> ts, const CanonConfig& canon = {});

/// Length of the longest run of identical consecutive action keys.
std::size_t longest_identical_run(const std::vector<std::string>& keys);

/// Drops trajectories with `n` or more consecutive identical action keys.
/// Throws ConfigError when n < 2.
StageResult filter_loops(std::vector<Trajectory> ts, std::size_t n, const CanonConfig& canon = {});

/// Within each instance, drops a trajectory whose common action-key prefix
/// with every peer is shorter than `k`. Single-trajectory instances are kept.
/// Throws ConfigError when k < 1.
StageResult filter_outliers(std::vector<Trajectory> ts, std::size_t k, const CanonConfig& canon = {});

/// Groups by instance_id in order of first appearance. Throws InputError if
/// two trajectories of one instance disagree on the prompt.
std::vector<InstanceGroup> group_by_instance(std::vector<Trajectory> ts);

/// dedup -> loops -> outliers on an already-parsed corpus.
IngestResult ingest(std::vector<Trajectory> ts, const IngestConfig& config = {});

/// parse -> dedup -> loops -> outliers.
IngestResult ingest_pipeline(std::istream& source, const IngestConfig& config = {});

/// Flattens groups back to a corpus in group order.
std::vector<Trajectory> flatten(const std::vector<InstanceGroup>& groups);

Json ingest_report_to_json(const IngestReport& report);

}  // namespace trajtree
