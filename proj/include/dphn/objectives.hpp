#pragma once

#include <span>
#include <vector>

#include "dphn/encoder.hpp"
#include "dphn/policy_codec.hpp"
#include "dphn/retrieval.hpp"

namespace dphn {

struct RewardConfig {
    double beta = 0.4;
    void validate() const;
};

struct TripletConfig {
    double margin = 1.0;  // must be > 0
    void validate() const;
};

// AP above beta is rewarded as-is; otherwise the agent is punished with
// AP - 1. The boundary AP == beta falls on the punishment branch.
double reward(double ap, const RewardConfig& cfg);

struct PolicyGradOutput {
    double reward = 0.0;
    double baseline_reward = 0.0;
    double advantage = 0.0;  // reward - baseline_reward
    std::vector<double> grad_wrt_s;  // of L_policy = -J, all zero when advantage is 0
    double policy_loss_value = 0.0;
};

// Self-critical score-function estimator: the baseline action is the
// thresholded code, the sampled action's reward is treated as a constant of
// the sample (never differentiated through the ranking).
PolicyGradOutput policy_gradient(const RelaxedCode& s, const PackedCode& sampled_q,
                                 const CodeDatabase& db, const LabelSet& query_labels,
                                 const RewardConfig& cfg, const ApOptions& ap_options = {});

struct TripletResult {
    double loss = 0.0;
    std::vector<double> grad_anchor;
    std::vector<double> grad_positive;
    std::vector<double> grad_negative;
};

// Hinge on squared Euclidean distances of relaxed codes,
// max(0, m + |s-s+|^2 - |s-s-|^2). Exact subgradients; at the hinge
// boundary the zero subgradient is chosen.
TripletResult triplet_loss(const RelaxedCode& s, const RelaxedCode& s_pos,
                           const RelaxedCode& s_neg, const TripletConfig& cfg);

struct CombinedGrads {
    std::vector<double> anchor;
    std::vector<double> positive;
    std::vector<double> negative;
};

// Elementwise sum of the two loss terms: the anchor receives triplet +
// policy gradients, positive/negative receive only their triplet parts.
CombinedGrads combined_gradient(const TripletResult& triplet,
                                std::span<const double> policy_grad_anchor);

}  // namespace dphn
