#pragma once

#include <string_view>
#include <vector>

namespace trajtree::loss {

/// Sequence-level log-likelihoods of one trajectory's segments.
struct TrajectoryLogProbs {
    std::vector<double> action_logps;
    /// Carried for completeness; never read by sft_loss.
    std::vector<double> observation_logps;
};

enum class Reduction { sum, mean };

Reduction parse_reduction(std::string_view text);
std::string_view to_string(Reduction r);

/// Negative log-likelihood of the actions only. Observations are masked out.
/// Throws InputError for an empty action list or any entry that is positive
/// or not finite.
double sft_loss(const TrajectoryLogProbs& lp, Reduction reduction = Reduction::sum);

struct DpoInputs {
    double policy_chosen = 0.0;
    double policy_rejected = 0.0;
    double ref_chosen = 0.0;
    double ref_rejected = 0.0;
    double beta = 0.1;
};

/// beta * ((policy_chosen - ref_chosen) - (policy_rejected - ref_rejected))
double dpo_margin(const DpoInputs& x);

/// -log(sigmoid(z)), evaluated without overflow for any finite z.
double neg_log_sigmoid(double z) noexcept;

/// Logistic function, evaluated without overflow for any finite z.
double sigmoid(double z) noexcept;

/// -log sigmoid(margin). Throws InputError when beta <= 0 or an input is not finite.
double dpo_loss(const DpoInputs& x);

struct DpoGradient {
    double policy_chosen = 0.0;
    double policy_rejected = 0.0;
    double ref_chosen = 0.0;
    double ref_rejected = 0.0;
};

/// Analytic partials of dpo_loss. With g = -beta * sigmoid(-margin):
/// d/policy_chosen = g, d/policy_rejected = -g, d/ref_chosen = -g, d/ref_rejected = g.
DpoGradient dpo_loss_grad(const DpoInputs& x);

}  // namespace trajtree::loss
