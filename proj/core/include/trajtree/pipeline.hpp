#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "trajtree/config.hpp"
#include "trajtree/emit.hpp"
#include "trajtree/ingest.hpp"
#include "trajtree/scoring.hpp"
#include "trajtree/synth.hpp"
#include "trajtree/tree.hpp"

namespace trajtree {

/// Everything the stages produce for one corpus. The per-instance vectors are
/// parallel to `ingest.groups`.
struct PipelineResult {
    IngestResult ingest;
    std::vector<TrajTree> trees;
    std::vector<NodeScores> scores;
    std::vector<std::vector<CriticalTriple>> triples;
    std::vector<std::vector<CriticalPair>> pairs;
    SftEmission sft;
    std::vector<DpoExample> dpo;
    StatsRecord stats;

    /// Pairs of all instances, in instance order.
    std::vector<CriticalPair> all_pairs() const;
};

/// Runs every stage after ingest on an already-ingested corpus.
void analyze(PipelineResult& result, const PipelineConfig& config);

PipelineResult run_pipeline(std::vector<Trajectory> corpus, const PipelineConfig& config);
PipelineResult run_pipeline(std::istream& source, const PipelineConfig& config);

/// Output files, one per stage.
enum class Artifact { retained, ingest_report, trees, scored_trees, pairs, sft, dpo, stats };

std::string_view artifact_filename(Artifact a);

/// The exact bytes of an output file. Line-delimited files end every record
/// with '\n'; single-record files are indented JSON plus a final '\n'.
std::string render(const PipelineResult& result, Artifact a, const PipelineConfig& config);

/// Joins records as compact JSON lines.
std::string render_jsonl(const std::vector<Json>& records);

/// Outcome of comparing a pipeline run with the brute-force oracles.
struct OracleCheck {
    std::size_t checks = 0;
    std::vector<std::string> failures;
    bool ground_truth_compared = false;
    bool oracle_compared = false;

    bool ok() const noexcept { return failures.empty(); }
    Json to_json() const;
};

/// Cross-checks `result` against independent prefix-counting oracles and, if
/// given, generator ground truth. Ground truth is only compared when the
/// ingest settings are the defaults the generator plans for; oracle scores
/// and pairs are only compared under action-only merging.
OracleCheck check_against_oracles(const PipelineResult& result, const PipelineConfig& config,
                                  const synth::GroundTruth* truth = nullptr);

struct SelfCheckRun {
    synth::SynthOutput synth;
    PipelineResult result;
    OracleCheck check;
};

/// generate -> pipeline -> oracle comparison.
SelfCheckRun self_check(const synth::SynthConfig& synth_config, const PipelineConfig& config);

}  // namespace trajtree
