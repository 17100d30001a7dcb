#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace trajtree {

/// Insertion-ordered JSON; keeps meta maps and emitted records byte-stable.
using Json = nlohmann::ordered_json;

/// One agent turn: the action it emitted and the environment's reply.
/// Only the final step of a trajectory may lack an observation.
struct Step {
    std::string action;
    std::optional<std::string> observation;

    friend bool operator==(const Step&, const Step&) = default;
};

/// A task prompt followed by alternating actions/observations, plus the
/// binary resolved result.
struct Trajectory {
    std::string instance_id;
    std::string trajectory_id;
    std::string prompt;
    std::vector<Step> steps;
    int resolved = 0;
    /// Always a JSON object. Unknown top-level record fields land here.
    Json meta = Json::object();

    bool succeeded() const noexcept { return resolved == 1; }

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct CanonConfig {
    /// Collapse internal whitespace runs to one space.
    bool collapse_whitespace = true;
};

/// An action's merge key next to its verbatim text. Emission uses `raw`.
struct CanonicalAction {
    std::string key;
    std::string raw;
};

/// Trims ASCII whitespace and optionally collapses internal runs.
/// Throws InputError when nothing is left.
CanonicalAction canonicalize_action(std::string_view raw, const CanonConfig& config = {});

/// The canonical key sequence of a trajectory's actions.
std::vector<std::string> action_keys(const Trajectory& t, const CanonConfig& config = {});

/// Throws InputError if `t` breaks a type invariant.
void validate(const Trajectory& t);

struct SkippedLine {
    std::size_t line = 0;
    std::string reason;
};

struct ParseResult {
    std::vector<Trajectory> trajectories;
    std::vector<SkippedLine> skipped;
};

/// Reads line-delimited trajectory records. Blank lines are ignored.
///
/// In strict mode the first malformed line throws InputError carrying its
/// line number. In lenient mode malformed lines are recorded in
/// `ParseResult::skipped` and parsing continues. A repeated
/// (instance_id, trajectory_id) counts as malformed.
ParseResult parse_trajectory_stream(std::istream& source, bool strict);

/// Parses a single record; `line` is used only for diagnostics.
Trajectory parse_trajectory_line(std::string_view text, std::size_t line = 0);

Json trajectory_to_json(const Trajectory& t);

/// Exactly one line of compact JSON, no trailing newline.
std::string serialize_trajectory(const Trajectory& t);

}  // namespace trajtree
