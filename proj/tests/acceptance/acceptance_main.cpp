// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "trajtree/emit.hpp"
#include "trajtree/ingest.hpp"
#include "trajtree/loss.hpp"
#include "trajtree/pipeline.hpp"
#include "trajtree/scoring.hpp"
#include "trajtree/synth.hpp"
#include "trajtree/tree.hpp"

namespace fs = std::filesystem;
using namespace trajtree;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;
    std::size_t checks = 0;

    void expect(bool cond, const std::string& what) {
        ++checks;
        if (!cond) {
            pass = false;
            if (notes.size() < 5) notes.push_back(what);
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::string> prefix_of(const TrajTree& tree, NodeId id) {
    std::vector<std::string> keys;
    for (NodeId n : path_to(tree, id)) keys.push_back(tree.node(n).action_key);
    return keys;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Segment-delimited rendering used for substring reconstruction.
std::string render_segments(const std::vector<Segment>& segs) {
    std::string s;
    for (const auto& seg : segs) {
        s += std::string(to_string(seg.role)) + '\x1f' + seg.content + '\x1e';
    }
    return s;
}

std::string render_trajectory(const Trajectory& t) {
    std::vector<Segment> segs{{SegmentRole::prompt, t.prompt}};
    for (const auto& step : t.steps) {
        segs.push_back({SegmentRole::action, step.action});
        if (step.observation) segs.push_back({SegmentRole::observation, *step.observation});
    }
    return render_segments(segs);
}

synth::SynthConfig ac1_config(std::uint64_t seed) {
    synth::SynthConfig c;
    c.seed = seed;
    c.instances = 250;
    c.trajectories_per_instance = 8;
    c.depth = 6;
    c.branching = 3;
    return c;
}

// --- AC1 -------------------------------------------------------------------

Outcome ac1() {
    Outcome o;
    auto t0 = Clock::now();
    std::size_t instances = 0, pairs_compared = 0, nodes_compared = 0;
    for (std::uint64_t seed : {1u, 2u}) {
        auto sc = ac1_config(seed);
        auto corpus = synth::generate(sc).corpus;
        auto result = run_pipeline(corpus, PipelineConfig{});
        for (std::size_t i = 0; i < result.trees.size(); ++i) {
            ++instances;
            const auto& group = result.ingest.groups[i];
            const auto& tree = result.trees[i];
            const auto& scores = result.scores[i];
            o.expect(group.trajectories.size() <= 8, group.instance_id + ": more than 8 trajectories");
            for (const auto& t : group.trajectories) o.expect(t.steps.size() <= 6, t.trajectory_id + ": depth > 6");

            auto oracle = synth::brute_force_scores(group.trajectories);
            std::size_t action_nodes = 1;
            for (const auto& n : tree.nodes) {
                if (n.is_leaf()) continue;
                if (n.kind == NodeKind::action) ++action_nodes;
                auto it = oracle.find(prefix_of(tree, n.id));
                bool same = it != oracle.end() &&
                            scores[n.id].value() == Rational(static_cast<std::int64_t>(it->second.successes),
                                                             static_cast<std::int64_t>(it->second.total));
                o.expect(same, group.instance_id + ": node " + std::to_string(n.id) + " score differs from oracle");
                ++nodes_compared;
            }
            o.expect(action_nodes == oracle.size(), group.instance_id + ": node count differs from prefix count");

            std::set<synth::OraclePair> found;
            for (const auto& tr : result.triples[i]) {
                found.insert({prefix_of(tree, tr.parent), tree.node(tr.chosen).action_key, tree.node(tr.rejected).action_key});
            }
            auto expected = synth::brute_force_pairs(oracle, default_critical_threshold());
            o.expect(found == expected, group.instance_id + ": critical pair set differs from oracle");
            pairs_compared += expected.size();
        }
    }
    double secs = seconds_since(t0);
    o.expect(instances >= 200, "fewer than 200 instances");
    o.expect(secs < 30.0, "runtime " + std::to_string(secs) + " s >= 30 s");
    o.notes.insert(o.notes.begin(), std::to_string(instances) + " instances, " + std::to_string(nodes_compared) +
                                        " nodes, " + std::to_string(pairs_compared) + " pairs, " +
                                        std::to_string(secs).substr(0, 5) + " s");
    return o;
}

// --- AC2 -------------------------------------------------------------------

Outcome ac2() {
    Outcome o;
    std::ifstream in(TRAJTREE_TEST_DATA "/fixture_corpus.jsonl");
    o.expect(static_cast<bool>(in), "fixture corpus missing");
    if (!in) return o;
    auto result = run_pipeline(in, PipelineConfig{});
    o.expect(result.trees.size() == 1, "expected one tree");
    if (result.trees.size() != 1) return o;
    const auto& tree = result.trees[0];
    const auto& scores = result.scores[0];

    auto find = [&](std::vector<std::string> keys) -> NodeId {
        NodeId cur = tree.root_id;
        for (const auto& k : keys) {
            auto& ch = tree.node(cur).children;
            auto it = std::find_if(ch.begin(), ch.end(), [&](NodeId c) { return tree.node(c).action_key == k; });
            if (it == ch.end()) throw std::runtime_error("fixture node missing: " + k);
            cur = *it;
        }
        return cur;
    };
    NodeId search = find({"search"}), edit = find({"search", "edit"}), del = find({"search", "delete"});
    NodeId test = find({"search", "edit", "test"}), submit1 = find({"search", "edit", "submit"});
    o.expect(scores[test].value() == Rational(1, 1), "score(test) != 1");
    o.expect(scores[submit1].value() == Rational(0, 1), "score(submit under edit) != 0");
    o.expect(scores[edit].value() == Rational(1, 2), "score(edit) != 1/2");
    o.expect(scores[del].value() == Rational(0, 1), "score(delete) != 0");
    o.expect(scores[search].value() == Rational(1, 3), "score(search) != 1/3");

    auto pairs = result.all_pairs();
    o.expect(pairs.size() == 1, "expected exactly one pair, got " + std::to_string(pairs.size()));
    if (!pairs.empty()) {
        o.expect(pairs[0].chosen == "test" && pairs[0].rejected == "submit", "pair is not (test, submit)");
    }
    bool edit_delete = std::any_of(pairs.begin(), pairs.end(), [](const CriticalPair& p) {
        return (p.chosen == "edit" && p.rejected == "delete") || (p.chosen == "delete" && p.rejected == "edit");
    });
    o.expect(!edit_delete, "(edit, delete) pair extracted at a difference of exactly 1/2");
    return o;
}

// --- AC3 -------------------------------------------------------------------

Outcome ac3() {
    using namespace trajtree::loss;
    Outcome o;
    auto t0 = Clock::now();
    std::mt19937_64 rng(20240601);
    const double ln2 = 0.69314718055994530942;

    std::uniform_real_distribution<double> beta_d(1e-3, 10.0), lp_d(-50.0, 0.0);
    double worst_ln2 = 0.0;
    for (int i = 0; i < 100; ++i) {
        double c = lp_d(rng), r = lp_d(rng);
        double err = std::fabs(dpo_loss({c, r, c, r, beta_d(rng)}) - ln2);
        worst_ln2 = std::max(worst_ln2, err);
        o.expect(err <= 1e-12, "policy=ref loss differs from ln 2 by " + std::to_string(err));
    }

    // pc - rc = +0.5, pr - rr = -1.0
    DpoInputs worked{-2.0, -3.0, -2.5, -2.0, 0.1};
    double worked_loss = dpo_loss(worked);
    o.expect(std::fabs(worked_loss - 0.62095) <= 1e-4, "worked example loss " + std::to_string(worked_loss));
    o.expect(std::fabs(worked_loss - 0.62095704778953207751) <= 1e-4, "worked example differs from reference");

    std::uniform_real_distribution<double> in_d(-50.0, 0.0), b_d(1e-6, 5.0);
    const double h = 1e-6;
    double worst_fd = 0.0;
    for (int i = 0; i < 1000; ++i) {
        DpoInputs x{in_d(rng), in_d(rng), in_d(rng), in_d(rng), b_d(rng)};
        auto g = dpo_loss_grad(x);
        double* fields[] = {&x.policy_chosen, &x.policy_rejected, &x.ref_chosen, &x.ref_rejected};
        double analytic[] = {g.policy_chosen, g.policy_rejected, g.ref_chosen, g.ref_rejected};
        for (int k = 0; k < 4; ++k) {
            double saved = *fields[k];
            *fields[k] = saved + h;
            double up = dpo_loss(x);
            *fields[k] = saved - h;
            double down = dpo_loss(x);
            *fields[k] = saved;
            double err = std::fabs((up - down) / (2 * h) - analytic[k]);
            worst_fd = std::max(worst_fd, err);
            o.expect(err <= 1e-6, "finite-difference mismatch " + std::to_string(err));
        }
    }

    for (double delta : {700.0, -700.0}) {
        DpoInputs x{delta, 0.0, 0.0, 0.0, 1.0};
        o.expect(dpo_margin(x) == delta, "margin is not +-700");
        auto g = dpo_loss_grad(x);
        o.expect(std::isfinite(dpo_loss(x)) && std::isfinite(g.policy_chosen) && std::isfinite(g.policy_rejected),
                 "non-finite output at margin " + std::to_string(delta));
    }
    double secs = seconds_since(t0);
    o.expect(secs < 5.0, "runtime " + std::to_string(secs) + " s >= 5 s");
    char buf[160];
    std::snprintf(buf, sizeof buf, "ln2 err %.1e, worked %.14f, fd err %.1e, %.3f s", worst_ln2, worked_loss, worst_fd,
                  secs);
    o.notes.insert(o.notes.begin(), buf);
    return o;
}

// --- AC4 -------------------------------------------------------------------

Outcome ac4() {
    using namespace trajtree::loss;
    Outcome o;
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> lp(-25.0, 0.0);

    TrajectoryLogProbs base;
    for (int i = 0; i < 9; ++i) base.action_logps.push_back(lp(rng));
    for (int i = 0; i < 8; ++i) base.observation_logps.push_back(lp(rng));
    for (Reduction red : {Reduction::sum, Reduction::mean}) {
        const double ref = sft_loss(base, red);
        for (int i = 0; i < 100; ++i) {
            TrajectoryLogProbs p = base;
            for (auto& v : p.observation_logps) v = lp(rng) * static_cast<double>(1 + rng() % 1000);
            p.observation_logps.resize(rng() % 16, lp(rng));
            double got = sft_loss(p, red);
            o.expect(std::memcmp(&got, &ref, sizeof got) == 0, "observation perturbation changed the SFT loss");
        }
    }

    for (int i = 0; i < 100; ++i) {
        TrajectoryLogProbs p;
        std::size_t n = 1 + rng() % 30;
        double expect = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            p.action_logps.push_back(lp(rng));
            expect += -p.action_logps.back();
        }
        for (std::size_t k = 0; k < n; ++k) p.observation_logps.push_back(lp(rng));
        o.expect(sft_loss(p, Reduction::sum) == expect, "SFT loss != sum of negated action log-probs");
    }
    return o;
}

// --- AC5 -------------------------------------------------------------------

std::vector<synth::SynthConfig> corpus_family() {
    std::vector<synth::SynthConfig> out;
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        synth::SynthConfig c;
        c.seed = seed;
        c.instances = 40;
        c.loop_rate = 0.05 * static_cast<double>(seed);
        c.outlier_rate = 0.05 * static_cast<double>(7 - seed);
        c.duplicate_rate = 0.1 + 0.05 * static_cast<double>(seed % 3);
        c.nondeterministic_observations = seed % 2 == 0;
        c.whitespace_jitter = seed != 3;
        c.trajectories_per_instance = 2 + seed;
        out.push_back(c);
    }
    return out;
}

Outcome ac5() {
    Outcome o;
    std::size_t corpora = 0;
    for (const auto& sc : corpus_family()) {
        for (MergeMode mode : {MergeMode::action_only, MergeMode::strict}) {
            ++corpora;
            PipelineConfig cfg;
            cfg.merge_mode = mode;
            auto corpus = synth::generate(sc).corpus;
            auto result = run_pipeline(corpus, cfg);
            const auto& r = result.ingest.report;
            o.expect(r.input_count == corpus.size(), "input_count != corpus size");
            o.expect(r.input_count == r.duplicates_removed + r.loops_removed + r.outliers_removed + r.retained,
                     "ingest counts not conserved");
            for (std::size_t i = 0; i < result.trees.size(); ++i) {
                const auto& g = result.ingest.groups[i];
                const auto& tree = result.trees[i];
                std::size_t leaves = std::count_if(tree.nodes.begin(), tree.nodes.end(),
                                                   [](const TreeNode& n) { return n.is_leaf(); });
                o.expect(leaves == g.trajectories.size(), g.instance_id + ": leaf count != retained count");
                o.expect(r.per_instance_retained.at(g.instance_id) == g.trajectories.size(),
                         g.instance_id + ": per-instance count wrong");

                std::multiset<std::tuple<std::string, std::vector<std::string>, int>> paths, inputs;
                for (auto& p : enumerate_paths(tree)) paths.emplace(p.trajectory_id, p.action_keys, p.outcome);
                for (const auto& t : g.trajectories) inputs.emplace(t.trajectory_id, action_keys(t), t.resolved);
                o.expect(paths == inputs, g.instance_id + ": enumerate_paths does not reconstruct the retained set");
            }
        }
    }
    o.notes.insert(o.notes.begin(), std::to_string(corpora) + " corpora");
    return o;
}

// --- AC6 -------------------------------------------------------------------

Trajectory make(const std::string& inst, const std::string& id, const std::vector<std::string>& actions, int res) {
    Trajectory t;
    t.instance_id = inst;
    t.trajectory_id = id;
    t.prompt = "prompt " + inst;
    t.resolved = res;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        t.steps.push_back({actions[i], i + 1 < actions.size() ? std::optional<std::string>("ok") : std::nullopt});
    }
    return t;
}

std::vector<std::string> ids(const std::vector<Trajectory>& ts) {
    std::vector<std::string> out;
    for (const auto& t : ts) out.push_back(t.trajectory_id);
    return out;
}

Outcome ac6() {
    Outcome o;
    IngestConfig defaults;
    o.expect(defaults.loop_threshold == 3 && defaults.outlier_min_prefix == 1, "defaults are not n=3, k=1");

    auto loops = ingest({make("a", "loop", {"open", "run  tests", " run tests", "run tests\n", "fix"}, 1),
                         make("a", "two", {"open", "run tests", "run tests", "fix"}, 1)});
    o.expect(ids(flatten(loops.groups)) == std::vector<std::string>{"two"}, "3-run loop not removed or 2-run removed");
    o.expect(loops.report.loops_removed == 1, "loops_removed != 1");

    auto outliers = ingest({make("b", "s1", {"search", "edit"}, 1), make("b", "s2", {"search", "test"}, 0),
                            make("b", "rm", {"rm_rf", "search"}, 0)});
    o.expect(ids(flatten(outliers.groups)) == std::vector<std::string>{"s1", "s2"}, "zero-overlap outlier not removed");
    o.expect(outliers.report.outliers_removed == 1, "outliers_removed != 1");

    auto singleton = ingest({make("c", "only", {"rm_rf"}, 0)});
    o.expect(singleton.report.retained == 1, "singleton instance not exempt");

    std::size_t corpora = 0;
    for (const auto& sc : corpus_family()) {
        ++corpora;
        auto first = ingest(synth::generate(sc).corpus);
        auto second = ingest(flatten(first.groups));
        o.expect(second.report.retained == first.report.retained &&
                     second.report.duplicates_removed + second.report.loops_removed + second.report.outliers_removed == 0,
                 "ingest is not idempotent on its own output");
        o.expect(ids(flatten(second.groups)) == ids(flatten(first.groups)), "second ingest reordered trajectories");
    }
    o.notes.insert(o.notes.begin(), "idempotence over " + std::to_string(corpora) + " corpora");
    return o;
}

// --- AC7 -------------------------------------------------------------------

int shell(const std::string& cmd) {
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> dir_bytes(const fs::path& dir) {
    std::map<std::string, std::string> out;
    if (!fs::exists(dir)) return out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file()) out[e.path().filename().string()] = slurp(e.path());
    }
    return out;
}

Outcome ac7(const std::string& cli) {
    Outcome o;
    o.expect(!cli.empty() && fs::exists(cli), "CLI binary not available");
    if (!o.pass) return o;
    std::random_device rd;
    fs::path work = fs::temp_directory_path() / ("trajtree-acceptance-" + std::to_string(rd()));
    fs::create_directories(work);
    const std::string bin = "'" + cli + "'";
    const std::string quiet = " 2>/dev/null";

    o.expect(shell(bin + " synth --seed 11 --instances 60 -o '" + (work / "corpus").string() + "'" + quiet) == 0,
             "synth failed");
    const std::string corpus = (work / "corpus" / "corpus.jsonl").string();

    std::vector<std::map<std::string, std::string>> all_runs;
    for (const char* tag : {"a1", "a2", "a8"}) {
        std::string jobs = tag[1] == '8' ? "8" : "1";
        fs::path out = work / tag;
        o.expect(shell(bin + " all -i '" + corpus + "' -o '" + out.string() + "' --seed 11 -j " + jobs + quiet) == 0,
                 std::string("all run ") + tag + " failed");
        all_runs.push_back(dir_bytes(out));
    }
    o.expect(all_runs[0].size() == 8, "all did not write 8 files");
    o.expect(all_runs[0] == all_runs[1], "all differs between two runs");
    o.expect(all_runs[0] == all_runs[2], "all differs between -j 1 and -j 8");

    std::vector<std::map<std::string, std::string>> self_runs;
    for (const char* tag : {"s1", "s2", "s8"}) {
        std::string jobs = tag[1] == '8' ? "8" : "1";
        fs::path out = work / tag;
        fs::path stdout_file = work / (std::string(tag) + ".stdout");
        o.expect(shell(bin + " selfcheck --seed 11 --instances 60 -j " + jobs + " -o '" + out.string() + "' > '" +
                       stdout_file.string() + "'" + quiet) == 0,
                 std::string("selfcheck run ") + tag + " failed");
        auto files = dir_bytes(out);
        files["<stdout>"] = slurp(stdout_file);
        self_runs.push_back(std::move(files));
    }
    o.expect(self_runs[0].size() > 8, "selfcheck wrote too few files");
    o.expect(self_runs[0] == self_runs[1], "selfcheck differs between two runs");
    o.expect(self_runs[0] == self_runs[2], "selfcheck differs between -j 1 and -j 8");

    std::size_t bytes = 0;
    for (const auto& [_, b] : all_runs[0]) bytes += b.size();
    fs::remove_all(work);
    o.notes.insert(o.notes.begin(), std::to_string(all_runs[0].size()) + " + " + std::to_string(self_runs[0].size()) +
                                        " files compared, " + std::to_string(bytes) + " bytes per all run");
    return o;
}

// --- AC8 -------------------------------------------------------------------

Outcome ac8() {
    Outcome o;
    std::size_t pairs_checked = 0, sft_checked = 0;
    for (const auto& sc : corpus_family()) {
        PipelineConfig cfg;
        auto result = run_pipeline(synth::generate(sc).corpus, cfg);
        std::map<std::string, const Trajectory*> by_id;
        std::size_t resolved = 0;
        std::map<std::string, std::vector<const Trajectory*>> by_instance;
        for (const auto& g : result.ingest.groups) {
            for (const auto& t : g.trajectories) {
                by_id[t.trajectory_id] = &t;
                by_instance[t.instance_id].push_back(&t);
                resolved += t.succeeded() ? 1 : 0;
            }
        }

        o.expect(result.sft.examples.size() == resolved, "SFT count != resolved retained count");
        for (const auto& ex : result.sft.examples) {
            ++sft_checked;
            auto it = by_id.find(ex.trajectory_id);
            o.expect(it != by_id.end(), "SFT example from a non-retained trajectory");
            if (it == by_id.end()) continue;
            o.expect(it->second->resolved == 1, "SFT example from an unresolved trajectory");
            std::vector<Segment> segs;
            for (const auto& s : ex.segments) {
                o.expect(s.loss == (s.role == SegmentRole::action), "wrong SFT loss mask");
                segs.push_back({s.role, s.content});
            }
            o.expect(render_segments(segs) == render_trajectory(*it->second), "SFT segments differ from trajectory");
        }

        auto pairs = result.all_pairs();
        o.expect(result.dpo.size() == pairs.size(), "DPO count != pair count");
        for (const auto& d : result.dpo) {
            ++pairs_checked;
            std::string ctx = render_segments(d.context);
            std::string with_chosen = render_segments([&] {
                auto s = d.context;
                s.push_back({SegmentRole::action, d.chosen});
                return s;
            }());
            std::vector<std::string> ctx_keys;
            for (const auto& seg : d.context) {
                if (seg.role == SegmentRole::action) ctx_keys.push_back(canonicalize_action(seg.content).key);
            }
            bool ctx_ok = false, chosen_ok = false, rejected_ok = false;
            for (const Trajectory* t : by_instance[d.instance_id]) {
                std::string full = render_trajectory(*t);
                ctx_ok |= full.rfind(ctx, 0) == 0;
                chosen_ok |= full.rfind(with_chosen, 0) == 0;
                // The rejected action comes verbatim from its own trajectory,
                // which shares the context's canonical action prefix.
                auto keys = action_keys(*t);
                rejected_ok |= keys.size() > ctx_keys.size() && std::equal(ctx_keys.begin(), ctx_keys.end(), keys.begin()) &&
                               t->steps[ctx_keys.size()].action == d.rejected;
            }
            o.expect(ctx_ok, d.instance_id + ": DPO context is not a verbatim retained prefix");
            o.expect(chosen_ok, d.instance_id + ": context + chosen is not a verbatim retained prefix");
            o.expect(rejected_ok, d.instance_id + ": rejected action does not follow the context in a retained trajectory");
        }
    }
    o.notes.insert(o.notes.begin(),
                   std::to_string(sft_checked) + " SFT examples, " + std::to_string(pairs_checked) + " DPO examples");
    return o;
}

// --- AC9 -------------------------------------------------------------------

Outcome ac9() {
    Outcome o;
    synth::SynthConfig sc;
    sc.seed = 77;
    sc.instances = 50;
    auto generated = synth::generate(sc);
    auto result = run_pipeline(generated.corpus, PipelineConfig{});
    Json j = stats_to_json(result.stats);

    for (const char* field : {"instances", "trajectories", "successful_trajectories", "wrong_trajectories",
                              "avg_token_len", "avg_path_len", "critical_pairs"}) {
        o.expect(j.contains(field) && j[field].is_number(), std::string("stats field missing: ") + field);
    }

    // Expected values straight from the generator's ground truth.
    std::map<std::string, const Trajectory*> by_id;
    for (const auto& t : generated.corpus) by_id[t.trajectory_id] = &t;
    std::size_t instances = 0, trajectories = 0, successful = 0, tokens = 0, steps = 0, pairs = 0;
    for (const auto& it : generated.truth.instances) {
        if (it.retained_ids.empty()) continue;
        ++instances;
        for (const auto& id : it.retained_ids) {
            const Trajectory& t = *by_id.at(id);
            ++trajectories;
            successful += t.succeeded() ? 1 : 0;
            tokens += approx_tokens(trajectory_char_count(t));
            steps += t.steps.size();
        }
        pairs += synth::brute_force_pairs(it.prefix_scores, default_critical_threshold()).size();
    }
    const double n = static_cast<double>(trajectories);
    o.expect(trajectories == generated.truth.retained(), "ground-truth bookkeeping inconsistent");
    o.expect(j["instances"] == instances, "instances mismatch");
    o.expect(j["trajectories"] == trajectories, "trajectories mismatch");
    o.expect(j["successful_trajectories"] == successful, "successful mismatch");
    o.expect(j["wrong_trajectories"] == trajectories - successful, "wrong mismatch");
    o.expect(j["avg_token_len"].get<double>() == static_cast<double>(tokens) / n, "avg_token_len mismatch");
    o.expect(j["avg_path_len"].get<double>() == static_cast<double>(steps) / n, "avg_path_len mismatch");
    o.expect(j["critical_pairs"] == pairs, "critical_pairs mismatch");
    o.notes.insert(o.notes.begin(), std::to_string(instances) + " instances, " + std::to_string(trajectories) +
                                        " trajectories, " + std::to_string(successful) + " successful, " +
                                        std::to_string(pairs) + " pairs");
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    std::string cli = argc > 1 ? argv[1] : TRAJTREE_CLI;

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"AC1 oracle equivalence (>=200 instances, exact scores and pair sets, < 30 s)", ac1},
        {"AC2 fixture scores and single critical pair", ac2},
        {"AC3 loss oracle (ln 2, worked example, gradients, stability, < 5 s)", ac3},
        {"AC4 SFT masking invariance", ac4},
        {"AC5 conservation and path reconstruction", ac5},
        {"AC6 filtration rules and idempotence", ac6},
        {"AC7 byte-identical CLI outputs across runs and -j 1/8", [&] { return ac7(cli); }},
        {"AC8 SFT/DPO emission contracts", ac8},
        {"AC9 stats schema and ground-truth values", ac9},
    };

    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.notes.push_back(std::string("exception: ") + e.what());
        }
        std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << name << " (" << o.checks << " checks";
        for (const auto& n : o.notes) std::cout << "; " << n;
        std::cout << ")\n";
        failed += o.pass ? 0 : 1;
    }
    std::cout << (failed == 0 ? "all acceptance criteria passed" : std::to_string(failed) + " criteria failed") << "\n";
    return failed == 0 ? 0 : 1;
}
