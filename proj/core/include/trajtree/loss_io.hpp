#pragma once

#include <iosfwd>
#include <string>

#include "trajtree/loss.hpp"
#include "trajtree/trajectory.hpp"

namespace trajtree::loss {

/// Evaluates one loss-oracle input record.
///
///   {"kind": "sft", "action_logps": [...], "observation_logps": [...], "reduction": "sum"}
///   {"kind": "dpo", "policy_chosen": x, "policy_rejected": x, "ref_chosen": x, "ref_rejected": x, "beta": b}
///
/// "kind" may be omitted when the fields make it unambiguous. SFT records
/// without "reduction" use `default_reduction`. DPO results carry the loss,
/// the margin and the four partial derivatives.
Json evaluate_record(const Json& record, Reduction default_reduction = Reduction::sum);

/// Evaluates every non-blank line of `in`; errors carry the line number.
std::string evaluate_stream(std::istream& in, Reduction default_reduction = Reduction::sum);

}  // namespace trajtree::loss
