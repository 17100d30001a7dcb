#include "trajtree/synth.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <utility>

#include "trajtree/error.hpp"

namespace trajtree::synth {

namespace {

__extension__ typedef __int128 i128;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// mt19937_64 output is fixed by the standard; the helpers below avoid the
// library-specific std distributions so corpora match across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    std::uint64_t next() { return engine_(); }
    std::size_t below(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(next() % n); }
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    bool chance(double p) { return unit() < p; }

private:
    std::mt19937_64 engine_;
};

constexpr std::array<const char*, 8> kVerbs = {"search_code", "open_file", "edit_file", "run_tests",
                                               "grep",        "view_dir",  "create_file", "scroll"};

enum class Kind { normal, planted, loop, outlier };

const char* kind_name(Kind k) {
    switch (k) {
        case Kind::normal: return "normal";
        case Kind::planted: return "planted";
        case Kind::loop: return "loop";
        case Kind::outlier: return "outlier";
    }
    return "?";
}

struct Slot {
    Kind kind = Kind::normal;
    std::vector<std::string> keys;
    int resolved = 0;
    bool duplicate = false;
};

std::string pad(std::size_t v, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%0*zu", width, v);
    return buf;
}

std::string choice_action(std::size_t pos, std::size_t choice) {
    return std::string(kVerbs[choice % kVerbs.size()]) + " src/module_" + std::to_string(pos) + "_" +
           std::to_string(choice) + ".py";
}

class InstanceGenerator {
public:
    InstanceGenerator(const SynthConfig& config, std::size_t index)
        : config_(config),
          index_(index),
          rng_(splitmix64(config.seed ^ splitmix64(index + 0x5bd1e995ULL))),
          instance_id_("synth-" + pad(index, 4)),
          prompt_("Resolve synthetic issue " + std::to_string(index) + " in repository synth-repo-" +
                  std::to_string(index % 7) + ". The failing test is tests/test_issue_" + std::to_string(index) +
                  ".py.") {}

    void run(std::vector<Trajectory>& corpus, GroundTruth& truth) {
        plan_slots();
        InstanceTruth it = classify();
        for (std::size_t j = 0; j < slots_.size(); ++j) corpus.push_back(materialize(j));

        std::vector<Trajectory> retained;
        for (const auto& t : corpus) {
            if (t.instance_id != instance_id_) continue;
            for (const auto& id : it.retained_ids) {
                if (id == t.trajectory_id) retained.push_back(t);
            }
        }
        it.prefix_scores = brute_force_scores(retained);
        it.planted_pairs = std::move(planted_);
        truth.instances.push_back(std::move(it));
    }

private:
    std::string first_action() const { return "view_issue issues/issue_" + std::to_string(index_) + ".md"; }

    std::vector<std::string> random_prefix(std::size_t length) {
        std::vector<std::string> keys{first_action()};
        for (std::size_t pos = 1; pos < length; ++pos) keys.push_back(choice_action(pos, rng_.below(config_.branching)));
        return keys;
    }

    void plan_slots() {
        const std::size_t n = config_.trajectories_per_instance;
        if (config_.depth >= 2) {
            for (std::size_t p = 0; p < config_.planted_critical && slots_.size() + 2 <= n; ++p) {
                auto prefix = random_prefix(1 + rng_.below(config_.depth - 1));
                const std::string tag = std::to_string(p);
                Slot good{Kind::planted, prefix, 1};
                good.keys.push_back("apply_patch patches/fix_" + tag + "_good.diff");
                Slot bad{Kind::planted, prefix, 0};
                bad.keys.push_back("apply_patch patches/fix_" + tag + "_bad.diff");
                planted_.push_back({prefix, good.keys.back(), bad.keys.back()});
                slots_.push_back(std::move(good));
                slots_.push_back(std::move(bad));
            }
        }
        while (slots_.size() < n) {
            const std::size_t j = slots_.size();
            if (j > 0 && rng_.chance(config_.duplicate_rate)) {
                Slot copy = slots_[rng_.below(j)];
                copy.duplicate = true;
                slots_.push_back(std::move(copy));
            } else if (j > 0 && rng_.chance(config_.loop_rate)) {
                std::size_t head = 1 + rng_.below(std::max<std::size_t>(1, config_.depth > 3 ? config_.depth - 3 : 1));
                Slot s{Kind::loop, random_prefix(head), rng_.chance(0.5) ? 1 : 0};
                for (int r = 0; r < 3; ++r) s.keys.push_back("run_tests tests/test_issue_" + std::to_string(index_) + ".py");
                slots_.push_back(std::move(s));
            } else if (j > 0 && rng_.chance(config_.outlier_rate)) {
                Slot s{Kind::outlier, {"rm_rf scratch_" + std::to_string(j)}, rng_.chance(0.5) ? 1 : 0};
                std::size_t length = 1 + rng_.below(config_.depth);
                for (std::size_t pos = 1; pos < length; ++pos) {
                    s.keys.push_back(choice_action(pos, rng_.below(config_.branching)));
                }
                slots_.push_back(std::move(s));
            } else {
                slots_.push_back({Kind::normal, random_prefix(1 + rng_.below(config_.depth)), rng_.chance(0.5) ? 1 : 0});
            }
        }
    }

    std::string trajectory_id(std::size_t j) const { return instance_id_ + "/t" + pad(j, 2); }

    // Closed-form expectation from the planted structure: ordinary and
    // planted trajectories all share the first action, outliers share none,
    // loops repeat an action three times.
    InstanceTruth classify() const {
        InstanceTruth it;
        it.instance_id = instance_id_;
        it.generated = slots_.size();

        std::set<std::pair<std::vector<std::string>, int>> seen;
        std::vector<std::size_t> candidates;
        for (std::size_t j = 0; j < slots_.size(); ++j) {
            if (!seen.emplace(slots_[j].keys, slots_[j].resolved).second) {
                ++it.duplicates_removed;
                continue;
            }
            if (slots_[j].kind == Kind::loop) {
                ++it.loops_removed;
                continue;
            }
            candidates.push_back(j);
        }

        std::vector<std::size_t> sharing;
        for (std::size_t j : candidates) {
            if (slots_[j].kind != Kind::outlier) sharing.push_back(j);
        }
        std::vector<std::size_t> kept;
        if (candidates.size() <= 1) {
            kept = candidates;
        } else if (sharing.size() >= 2) {
            kept = sharing;
        }
        it.outliers_removed = candidates.size() - kept.size();
        for (std::size_t j : kept) it.retained_ids.push_back(trajectory_id(j));
        return it;
    }

    std::string jitter(const std::string& key) {
        if (!config_.whitespace_jitter) return key;
        switch (rng_.below(4)) {
            case 1: return " " + key;
            case 2: return key + "\n";
            case 3: {
                std::string raw = key;
                if (auto sp = raw.find(' '); sp != std::string::npos) raw.insert(sp, " ");
                return raw;
            }
            default: return key;
        }
    }

    std::string observation(const std::vector<std::string>& keys, std::size_t upto) {
        std::string joined = instance_id_;
        for (std::size_t i = 0; i <= upto; ++i) {
            joined.push_back('\x1f');
            joined += keys[i];
        }
        char buf[32];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(joined)));
        std::string obs = "exit_code=0\noutput digest " + std::string(buf);
        if (config_.nondeterministic_observations && rng_.chance(0.5)) {
            obs += "\nelapsed_ms=" + std::to_string(rng_.below(1000));
        }
        return obs;
    }

    Trajectory materialize(std::size_t j) {
        const Slot& slot = slots_[j];
        Trajectory t;
        t.instance_id = instance_id_;
        t.trajectory_id = trajectory_id(j);
        t.prompt = prompt_;
        t.resolved = slot.resolved;
        for (std::size_t i = 0; i < slot.keys.size(); ++i) {
            Step step{jitter(slot.keys[i]), std::nullopt};
            bool last = i + 1 == slot.keys.size();
            if (!last || rng_.chance(0.5)) step.observation = observation(slot.keys, i);
            t.steps.push_back(std::move(step));
        }
        t.meta = Json::object();
        t.meta["source"] = "synth";
        t.meta["kind"] = kind_name(slot.kind);
        if (slot.duplicate) t.meta["duplicate"] = true;
        return t;
    }

    const SynthConfig& config_;
    std::size_t index_;
    Rng rng_;
    std::string instance_id_;
    std::string prompt_;
    std::vector<Slot> slots_;
    std::vector<OraclePair> planted_;
};

}  // namespace

void validate(const SynthConfig& config) {
    if (config.depth < 1) throw ConfigError("synth depth must be >= 1");
    if (config.branching < 1) throw ConfigError("synth branching must be >= 1");
    for (double p : {config.loop_rate, config.outlier_rate, config.duplicate_rate}) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("synth rates must lie in [0, 1]");
    }
}

std::size_t GroundTruth::retained() const {
    std::size_t n = 0;
    for (const auto& it : instances) n += it.retained_ids.size();
    return n;
}

std::size_t GroundTruth::successful() const {
    std::size_t n = 0;
    for (const auto& it : instances) {
        if (auto root = it.prefix_scores.find({}); root != it.prefix_scores.end()) n += root->second.successes;
    }
    return n;
}

SynthOutput generate(const SynthConfig& config) {
    validate(config);
    SynthOutput out;
    for (std::size_t i = 0; i < config.instances; ++i) {
        InstanceGenerator(config, i).run(out.corpus, out.truth);
    }
    return out;
}

PrefixScores brute_force_scores(std::span<const Trajectory> ts, const CanonConfig& canon) {
    PrefixScores scores;
    for (const auto& t : ts) {
        std::vector<std::string> prefix;
        auto bump = [&] {
            PrefixCount& c = scores[prefix];
            ++c.total;
            c.successes += t.resolved == 1 ? 1 : 0;
        };
        bump();
        for (const auto& step : t.steps) {
            prefix.push_back(canonicalize_action(step.action, canon).key);
            bump();
        }
    }
    return scores;
}

std::set<OraclePair> brute_force_pairs(const PrefixScores& scores, const Rational& threshold) {
    // parent prefix -> (next action, counts) for each one-step extension
    std::map<std::vector<std::string>, std::vector<std::pair<std::string, PrefixCount>>> extensions;
    for (const auto& [prefix, count] : scores) {
        if (prefix.empty()) continue;
        std::vector<std::string> parent(prefix.begin(), prefix.end() - 1);
        extensions[std::move(parent)].emplace_back(prefix.back(), count);
    }

    const i128 tn = threshold.num();
    const i128 td = threshold.den();
    std::set<OraclePair> pairs;
    for (const auto& [parent, next] : extensions) {
        for (std::size_t i = 0; i < next.size(); ++i) {
            for (std::size_t j = i + 1; j < next.size(); ++j) {
                const auto& [ka, a] = next[i];
                const auto& [kb, b] = next[j];
                // a.s/a.t - b.s/b.t, scaled by a.t * b.t
                i128 gap = static_cast<i128>(a.successes) * b.total - static_cast<i128>(b.successes) * a.total;
                i128 scale = static_cast<i128>(a.total) * b.total;
                if (gap * td > tn * scale) {
                    pairs.insert({parent, ka, kb});
                } else if (-gap * td > tn * scale) {
                    pairs.insert({parent, kb, ka});
                }
            }
        }
    }
    return pairs;
}

Json config_to_json(const SynthConfig& config) {
    Json j = Json::object();
    j["seed"] = config.seed;
    j["instances"] = config.instances;
    j["branching"] = config.branching;
    j["depth"] = config.depth;
    j["trajectories_per_instance"] = config.trajectories_per_instance;
    j["planted_critical"] = config.planted_critical;
    j["loop_rate"] = config.loop_rate;
    j["outlier_rate"] = config.outlier_rate;
    j["duplicate_rate"] = config.duplicate_rate;
    j["nondeterministic_observations"] = config.nondeterministic_observations;
    j["whitespace_jitter"] = config.whitespace_jitter;
    return j;
}

Json ground_truth_to_json(const GroundTruth& truth) {
    Json instances = Json::array();
    for (const auto& it : truth.instances) {
        Json prefixes = Json::array();
        for (const auto& [prefix, count] : it.prefix_scores) {
            Json p = Json::object();
            p["prefix"] = prefix;
            p["successes"] = count.successes;
            p["total"] = count.total;
            prefixes.push_back(std::move(p));
        }
        Json planted = Json::array();
        for (const auto& pair : it.planted_pairs) {
            Json p = Json::object();
            p["prefix"] = pair.prefix;
            p["chosen"] = pair.chosen;
            p["rejected"] = pair.rejected;
            planted.push_back(std::move(p));
        }
        Json j = Json::object();
        j["instance_id"] = it.instance_id;
        j["generated"] = it.generated;
        j["retained_ids"] = it.retained_ids;
        j["duplicates_removed"] = it.duplicates_removed;
        j["loops_removed"] = it.loops_removed;
        j["outliers_removed"] = it.outliers_removed;
        j["prefix_scores"] = std::move(prefixes);
        j["planted_pairs"] = std::move(planted);
        instances.push_back(std::move(j));
    }
    Json j = Json::object();
    j["retained"] = truth.retained();
    j["successful"] = truth.successful();
    j["instances"] = std::move(instances);
    return j;
}

}  // namespace trajtree::synth
