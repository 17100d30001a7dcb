#pragma once

#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "trajtree/trajectory.hpp"

namespace trajtree::fixtures {

/// Builds a trajectory whose observations are "o_<action>" on every step but
/// the last, which gets none.
inline Trajectory make_trajectory(std::string instance, std::string id, std::initializer_list<const char*> actions,
                                  int resolved, std::string prompt = "prompt") {
    Trajectory t;
    t.instance_id = std::move(instance);
    t.trajectory_id = std::move(id);
    t.prompt = std::move(prompt);
    t.resolved = resolved;
    std::size_t i = 0;
    for (const char* a : actions) {
        Step s{a, std::nullopt};
        if (++i < actions.size()) s.observation = std::string("o_") + a;
        t.steps.push_back(std::move(s));
    }
    return t;
}

/// The three-trajectory scoring fixture:
///   [search, edit, test] -> 1, [search, edit, submit] -> 0, [search, delete, submit] -> 0
inline std::vector<Trajectory> scoring_fixture() {
    return {
        make_trajectory("fx", "t1", {"search", "edit", "test"}, 1),
        make_trajectory("fx", "t2", {"search", "edit", "submit"}, 0),
        make_trajectory("fx", "t3", {"search", "delete", "submit"}, 0),
    };
}

}  // namespace trajtree::fixtures
