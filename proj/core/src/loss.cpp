#include "trajtree/loss.hpp"

#include <cmath>
#include <string>

#include "trajtree/error.hpp"

namespace trajtree::loss {

namespace {

void validate(const DpoInputs& x) {
    if (!std::isfinite(x.beta) || x.beta <= 0.0) throw InputError("beta must be a positive finite number");
    for (double v : {x.policy_chosen, x.policy_rejected, x.ref_chosen, x.ref_rejected}) {
        if (!std::isfinite(v)) throw InputError("log-likelihoods must be finite");
    }
}

}  // namespace

Reduction parse_reduction(std::string_view text) {
    if (text == "sum") return Reduction::sum;
    if (text == "mean") return Reduction::mean;
    throw ConfigError("unknown reduction '" + std::string(text) + "' (expected sum or mean)");
}

std::string_view to_string(Reduction r) { return r == Reduction::mean ? "mean" : "sum"; }

double sft_loss(const TrajectoryLogProbs& lp, Reduction reduction) {
    if (lp.action_logps.empty()) throw InputError("action_logps must not be empty");
    double total = 0.0;
    for (double v : lp.action_logps) {
        if (!std::isfinite(v)) throw InputError("action log-probabilities must be finite");
        if (v > 0.0) throw InputError("action log-probability " + std::to_string(v) + " is positive");
        total += -v;
    }
    if (reduction == Reduction::mean) total /= static_cast<double>(lp.action_logps.size());
    return total;
}

double dpo_margin(const DpoInputs& x) {
    return x.beta * ((x.policy_chosen - x.ref_chosen) - (x.policy_rejected - x.ref_rejected));
}

// softplus(-z) = max(-z, 0) + log1p(exp(-|z|))
double neg_log_sigmoid(double z) noexcept { return std::fmax(-z, 0.0) + std::log1p(std::exp(-std::fabs(z))); }

double sigmoid(double z) noexcept {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

double dpo_loss(const DpoInputs& x) {
    validate(x);
    return neg_log_sigmoid(dpo_margin(x));
}

DpoGradient dpo_loss_grad(const DpoInputs& x) {
    validate(x);
    double g = -x.beta * sigmoid(-dpo_margin(x));
    return {g, -g, -g, g};
}

}  // namespace trajtree::loss
