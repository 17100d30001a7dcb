#pragma once

#include <cstdint>

#include "trajtree/ingest.hpp"
#include "trajtree/loss.hpp"
#include "trajtree/rational.hpp"
#include "trajtree/scoring.hpp"
#include "trajtree/tree.hpp"

namespace trajtree {

/// Every tunable of the pipeline stages.
///
/// JSON form (all keys optional, unknown keys rejected):
///
///     {
///       "canonicalization": {"collapse_whitespace": true},
///       "loop_threshold": 3,
///       "outlier_min_prefix": 1,
///       "merge_mode": "action-only",
///       "critical_threshold": "1/2",
///       "pair_mode": "all-pairs",
///       "sft_reduction": "sum",
///       "strict_parse": true,
///       "seed": 0,
///       "jobs": 1
///     }
struct PipelineConfig {
    IngestConfig ingest;
    MergeMode merge_mode = MergeMode::action_only;
    Rational critical_threshold = default_critical_threshold();
    PairMode pair_mode = PairMode::all_pairs;
    loss::Reduction sft_reduction = loss::Reduction::sum;
    std::uint64_t seed = 0;
    /// Worker threads for per-instance stages. Never changes output bytes.
    unsigned jobs = 1;

    TreeConfig tree_config() const { return {ingest.canon, merge_mode}; }
};

/// Throws ConfigError if any stage precondition fails.
void validate(const PipelineConfig& config);

/// Overlays the keys present in `j` onto `base`, then validates.
PipelineConfig config_from_json(const Json& j, PipelineConfig base = {});

/// The settings that influence output bytes. `jobs` is left out so reports
/// are identical across parallelism degrees.
Json config_to_json(const PipelineConfig& config);

}  // namespace trajtree
