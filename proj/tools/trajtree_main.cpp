// trajtree: turns agent trajectory corpora into SFT/DPO datasets.
//
// Exit codes: 0 success, 1 usage/config error, 2 invalid input data,
// 3 internal invariant violation (oracle mismatch, conservation failure).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "trajtree/config.hpp"
#include "trajtree/error.hpp"
#include "trajtree/loss_io.hpp"
#include "trajtree/pipeline.hpp"
#include "trajtree/synth.hpp"

namespace fs = std::filesystem;
using namespace trajtree;

namespace {

constexpr const char* kConfigEnv = "TRAJTREE_CONFIG";

/// Command-line overrides; unset fields leave the config file's value alone.
struct PipelineFlags {
    std::string config_path;
    std::optional<std::size_t> loop_threshold;
    std::optional<std::size_t> outlier_k;
    std::optional<std::string> merge_mode;
    std::optional<std::string> threshold;
    std::optional<std::string> pair_mode;
    std::optional<std::string> sft_reduction;
    std::optional<bool> collapse_whitespace;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> jobs;
    bool lenient = false;
};

struct SynthFlags {
    synth::SynthConfig config;
};

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& f) {
    cmd->add_option("--config", f.config_path, std::string("JSON config file (default: $") + kConfigEnv + ")");
    cmd->add_option("--loop-threshold", f.loop_threshold, "identical consecutive actions that mark a loop (>= 2)");
    cmd->add_option("--outlier-k", f.outlier_k, "minimum shared leading actions with some peer (>= 1)");
    cmd->add_option("--merge-mode", f.merge_mode, "action-only | strict")->check(CLI::IsMember({"action-only", "strict"}));
    cmd->add_option("--threshold", f.threshold, "critical score-difference threshold, e.g. 1/2");
    cmd->add_option("--pair-mode", f.pair_mode, "all-pairs | max-min")->check(CLI::IsMember({"all-pairs", "max-min"}));
    cmd->add_option("--sft-reduction", f.sft_reduction, "sum | mean")->check(CLI::IsMember({"sum", "mean"}));
    cmd->add_option("--collapse-whitespace", f.collapse_whitespace, "collapse internal whitespace in merge keys");
    cmd->add_option("--seed", f.seed, "seed for synthetic corpora");
    cmd->add_option("-j,--jobs", f.jobs, "worker threads for per-instance stages");
    cmd->add_flag("--lenient", f.lenient, "skip malformed corpus lines instead of failing");
}

void add_synth_flags(CLI::App* cmd, SynthFlags& f) {
    auto& c = f.config;
    cmd->add_option("--instances", c.instances, "number of task instances");
    cmd->add_option("--branching", c.branching, "choices per decision point");
    cmd->add_option("--depth", c.depth, "maximum actions per trajectory");
    cmd->add_option("--trajectories", c.trajectories_per_instance, "trajectories per instance");
    cmd->add_option("--planted", c.planted_critical, "planted critical decision points per instance");
    cmd->add_option("--loop-rate", c.loop_rate, "probability of a looping trajectory");
    cmd->add_option("--outlier-rate", c.outlier_rate, "probability of an outlier trajectory");
    cmd->add_option("--duplicate-rate", c.duplicate_rate, "probability of a duplicated trajectory");
    cmd->add_flag("--nondeterministic", c.nondeterministic_observations, "inject divergent observations");
    cmd->add_option("--jitter", c.whitespace_jitter, "perturb raw action whitespace");
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
}

PipelineConfig resolve_config(const PipelineFlags& f) {
    PipelineConfig config;
    std::string path = f.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv(kConfigEnv); env && *env) path = env;
    }
    if (!path.empty()) config = config_from_json(read_json_file(path));

    if (f.loop_threshold) config.ingest.loop_threshold = *f.loop_threshold;
    if (f.outlier_k) config.ingest.outlier_min_prefix = *f.outlier_k;
    if (f.merge_mode) config.merge_mode = parse_merge_mode(*f.merge_mode);
    if (f.threshold) {
        try {
            config.critical_threshold = Rational::parse(*f.threshold);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("--threshold: ") + e.what());
        }
    }
    if (f.pair_mode) config.pair_mode = parse_pair_mode(*f.pair_mode);
    if (f.sft_reduction) config.sft_reduction = loss::parse_reduction(*f.sft_reduction);
    if (f.collapse_whitespace) config.ingest.canon.collapse_whitespace = *f.collapse_whitespace;
    if (f.seed) config.seed = *f.seed;
    if (f.jobs) config.jobs = *f.jobs;
    if (f.lenient) config.ingest.strict_parse = false;
    validate(config);
    return config;
}

/// Writes via a temporary sibling and rename, so a reader never sees a
/// partial file.
void write_file(const fs::path& path, const std::string& bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
        out << bytes;
        out.flush();
        if (!out) throw ConfigError("failed writing '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

/// corpus.jsonl plus ground_truth.json (with the generator settings echoed).
void write_synth(const synth::SynthOutput& generated, const synth::SynthConfig& sc, const fs::path& out_dir) {
    std::string corpus;
    for (const auto& t : generated.corpus) corpus += serialize_trajectory(t) + "\n";
    Json truth = Json::object();
    truth["synth_config"] = synth::config_to_json(sc);
    Json gt = synth::ground_truth_to_json(generated.truth);
    for (const auto& [k, v] : gt.items()) truth[k] = v;
    std::string truth_bytes = truth.dump(2) + "\n";
    write_file(out_dir / "corpus.jsonl", corpus);
    write_file(out_dir / "ground_truth.json", truth_bytes);
}

PipelineResult run_on_file(const std::string& input, const PipelineConfig& config) {
    std::ifstream in(input, std::ios::binary);
    if (!in) throw ConfigError("cannot open input '" + input + "'");
    return run_pipeline(in, config);
}

/// Renders every requested artifact before writing any of them.
void emit(const PipelineResult& result, const PipelineConfig& config, const std::vector<Artifact>& artifacts,
          const fs::path& out_dir) {
    std::vector<std::pair<fs::path, std::string>> files;
    for (Artifact a : artifacts) files.emplace_back(out_dir / artifact_filename(a), render(result, a, config));
    for (const auto& [path, bytes] : files) write_file(path, bytes);
}

void report_summary(const PipelineResult& result) {
    const auto& r = result.ingest.report;
    std::cerr << "trajtree: " << r.input_count << " trajectories in, " << r.retained << " retained ("
              << r.duplicates_removed << " duplicates, " << r.loops_removed << " loops, " << r.outliers_removed
              << " outliers); " << result.trees.size() << " trees, " << result.stats.critical_pairs
              << " critical pairs\n";
    for (const auto& s : result.ingest.skipped) std::cerr << "trajtree: skipped line " << s.line << ": " << s.reason << "\n";
    for (const auto& w : result.sft.warnings) std::cerr << "trajtree: warning: " << w << "\n";
}

int run(int argc, char** argv) {
    CLI::App app{"trajtree: mine critical action pairs from agent trajectory corpora"};
    app.require_subcommand(1);

    PipelineFlags flags;
    SynthFlags synth_flags;
    std::string input;
    std::string out_dir;
    std::string output;

    struct Stage {
        const char* name;
        const char* help;
        std::vector<Artifact> artifacts;
    };
    const std::vector<Stage> stages = {
        {"ingest", "deduplicate and filter a corpus", {Artifact::retained, Artifact::ingest_report}},
        {"tree", "build per-instance trajectory trees", {Artifact::trees}},
        {"score", "score tree nodes by subtree success rate", {Artifact::scored_trees}},
        {"pairs", "extract critical action pairs", {Artifact::pairs}},
        {"sft", "emit the masked SFT dataset", {Artifact::sft}},
        {"dpo", "emit the DPO dataset", {Artifact::dpo}},
        {"stats", "emit corpus and tree statistics", {Artifact::stats}},
        {"all",
         "run every stage",
         {Artifact::retained, Artifact::ingest_report, Artifact::trees, Artifact::scored_trees, Artifact::pairs,
          Artifact::sft, Artifact::dpo, Artifact::stats}},
    };
    std::vector<std::pair<CLI::App*, const Stage*>> stage_cmds;
    for (const auto& stage : stages) {
        CLI::App* cmd = app.add_subcommand(stage.name, stage.help);
        cmd->add_option("-i,--input", input, "trajectory corpus (JSONL)")->required();
        cmd->add_option("-o,--out", out_dir, "output directory")->required();
        add_pipeline_flags(cmd, flags);
        stage_cmds.emplace_back(cmd, &stage);
    }

    CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus with ground truth");
    synth_cmd->add_option("-o,--out", out_dir, "output directory")->required();
    synth_cmd->add_option("--seed", synth_flags.config.seed, "generator seed");
    add_synth_flags(synth_cmd, synth_flags);

    CLI::App* selfcheck_cmd = app.add_subcommand("selfcheck", "generate, run the pipeline, compare with oracles");
    selfcheck_cmd->add_option("-o,--out", out_dir, "also write the corpus and all outputs here");
    add_pipeline_flags(selfcheck_cmd, flags);
    add_synth_flags(selfcheck_cmd, synth_flags);

    CLI::App* loss_cmd = app.add_subcommand("loss", "evaluate SFT/DPO losses and gradients per input line");
    loss_cmd->add_option("-i,--input", input, "loss input records (JSONL), - for stdin")->required();
    loss_cmd->add_option("--output", output, "result file (default stdout)");
    add_pipeline_flags(loss_cmd, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    for (const auto& [cmd, stage] : stage_cmds) {
        if (!cmd->parsed()) continue;
        PipelineConfig config = resolve_config(flags);
        PipelineResult result = run_on_file(input, config);
        emit(result, config, stage->artifacts, out_dir);
        report_summary(result);
        return 0;
    }

    if (synth_cmd->parsed()) {
        auto generated = synth::generate(synth_flags.config);
        write_synth(generated, synth_flags.config, out_dir);
        std::cerr << "trajtree: wrote " << generated.corpus.size() << " trajectories for "
                  << synth_flags.config.instances << " instances\n";
        return 0;
    }

    if (selfcheck_cmd->parsed()) {
        PipelineConfig config = resolve_config(flags);
        synth::SynthConfig sc = synth_flags.config;
        sc.seed = config.seed;
        SelfCheckRun run = self_check(sc, config);

        Json report = Json::object();
        report["config"] = config_to_json(config);
        report["synth_config"] = synth::config_to_json(sc);
        report["trajectories"] = run.synth.corpus.size();
        report["retained"] = run.result.ingest.report.retained;
        report["instances"] = run.result.trees.size();
        report["critical_pairs"] = run.result.stats.critical_pairs;
        report["check"] = run.check.to_json();
        std::string report_bytes = report.dump(2) + "\n";

        if (!out_dir.empty()) {
            write_synth(run.synth, sc, out_dir);
            emit(run.result, config, stages.back().artifacts, out_dir);
            write_file(fs::path(out_dir) / "selfcheck.json", report_bytes);
        }
        std::cout << report_bytes;
        if (!run.check.ok()) {
            for (const auto& f : run.check.failures) std::cerr << "trajtree: selfcheck failure: " << f << "\n";
            return 3;
        }
        std::cerr << "trajtree: selfcheck passed " << run.check.checks << " checks\n";
        return 0;
    }

    if (loss_cmd->parsed()) {
        PipelineConfig config = resolve_config(flags);
        std::string results;
        if (input == "-") {
            results = loss::evaluate_stream(std::cin, config.sft_reduction);
        } else {
            std::ifstream in(input, std::ios::binary);
            if (!in) throw ConfigError("cannot open input '" + input + "'");
            results = loss::evaluate_stream(in, config.sft_reduction);
        }
        if (output.empty()) {
            std::cout << results;
        } else {
            write_file(output, results);
        }
        return 0;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    std::ios::sync_with_stdio(false);
    try {
        return run(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "trajtree: config error: " << e.what() << "\n";
        return 1;
    } catch (const InputError& e) {
        std::cerr << "trajtree: invalid input: " << e.what() << "\n";
        return 2;
    } catch (const InvariantError& e) {
        std::cerr << "trajtree: invariant violation: " << e.what() << "\n";
        return 3;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "trajtree: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "trajtree: internal error: " << e.what() << "\n";
        return 3;
    }
}
