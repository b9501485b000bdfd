#include "dphn/objectives.hpp"

#include <stdexcept>

namespace dphn {

void RewardConfig::validate() const {
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw std::invalid_argument("RewardConfig: beta must lie in [0,1]");
    }
}

void TripletConfig::validate() const {
    if (!(margin > 0.0)) {
        throw std::invalid_argument("TripletConfig: margin must be > 0");
    }
}

double reward(double ap, const RewardConfig& cfg) {
    cfg.validate();
    if (!(ap >= 0.0 && ap <= 1.0)) {
        throw std::invalid_argument("reward: ap must lie in [0,1]");
    }
    return ap > cfg.beta ? ap : ap - 1.0;
}

PolicyGradOutput policy_gradient(const RelaxedCode& s, const PackedCode& sampled_q,
                                 const CodeDatabase& db, const LabelSet& query_labels,
                                 const RewardConfig& cfg, const ApOptions& ap_options) {
    PolicyGradOutput out;
    const PackedCode baseline_q = threshold(s);

    out.reward = reward(average_precision(sampled_q, query_labels, db, ap_options), cfg);
    out.baseline_reward = reward(average_precision(baseline_q, query_labels, db, ap_options), cfg);
    out.advantage = out.reward - out.baseline_reward;

    out.grad_wrt_s.assign(static_cast<std::size_t>(s.bits()), 0.0);
    out.policy_loss_value = 0.0;
    if (out.advantage != 0.0) {
        const std::vector<double> score = log_prob_grad(s, sampled_q);
        for (std::size_t k = 0; k < score.size(); ++k) {
            out.grad_wrt_s[k] = -out.advantage * score[k];
        }
        out.policy_loss_value = -out.advantage * log_prob(s, sampled_q);
    }
    return out;
}

TripletResult triplet_loss(const RelaxedCode& s, const RelaxedCode& s_pos,
                           const RelaxedCode& s_neg, const TripletConfig& cfg) {
    cfg.validate();
    if (s.bits() != s_pos.bits() || s.bits() != s_neg.bits()) {
        throw std::invalid_argument("triplet_loss: codes differ in bit count");
    }

    const int k = s.bits();
    double dist_pos = 0.0;
    double dist_neg = 0.0;
    for (int i = 0; i < k; ++i) {
        const double dp = s[i] - s_pos[i];
        const double dn = s[i] - s_neg[i];
        dist_pos += dp * dp;
        dist_neg += dn * dn;
    }

    TripletResult result;
    const double hinge = cfg.margin + dist_pos - dist_neg;
    result.grad_anchor.assign(static_cast<std::size_t>(k), 0.0);
    result.grad_positive.assign(static_cast<std::size_t>(k), 0.0);
    result.grad_negative.assign(static_cast<std::size_t>(k), 0.0);
    if (hinge > 0.0) {
        result.loss = hinge;
        for (int i = 0; i < k; ++i) {
            const auto u = static_cast<std::size_t>(i);
            result.grad_anchor[u] = 2.0 * (s_neg[i] - s_pos[i]);
            result.grad_positive[u] = -2.0 * (s[i] - s_pos[i]);
            result.grad_negative[u] = 2.0 * (s[i] - s_neg[i]);
        }
    }
    return result;
}

CombinedGrads combined_gradient(const TripletResult& triplet,
                                std::span<const double> policy_grad_anchor) {
    if (triplet.grad_anchor.size() != policy_grad_anchor.size() ||
        triplet.grad_positive.size() != triplet.grad_anchor.size() ||
        triplet.grad_negative.size() != triplet.grad_anchor.size()) {
        throw std::invalid_argument("combined_gradient: shape mismatch");
    }
    CombinedGrads out;
    out.anchor.resize(triplet.grad_anchor.size());
    for (std::size_t i = 0; i < out.anchor.size(); ++i) {
        out.anchor[i] = triplet.grad_anchor[i] + policy_grad_anchor[i];
    }
    out.positive = triplet.grad_positive;
    out.negative = triplet.grad_negative;
    return out;
}

}  // namespace dphn
