#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dphn/dataset.hpp"
#include "dphn/encoder.hpp"
#include "dphn/objectives.hpp"

namespace dphn {

struct TrainConfig {
    int epochs = 100;       // M, joint training epochs
    int batch_size = 50;    // N
    int sync_period = 50;   // T, epochs between database refreshes
    double learning_rate = 0.001;
    double lr_decay_factor = 0.1;
    int lr_decay_every = 50;
    double momentum = 0.9;
    double weight_decay = 0.0005;
    RewardConfig reward{0.4};
    std::optional<double> margin;  // unset: max(1, round(code_bits / 12))
    std::uint64_t seed = 1;
    int pretrain_epochs = 30;
    double policy_weight = 1.0;  // scales the policy term of the joint loss
    int policy_samples = 1;      // Monte-Carlo samples per query per step

    void validate() const;
    double margin_for(int code_bits) const;
    // Learning rate in effect once `completed_epochs` epochs are done:
    // learning_rate * lr_decay_factor^floor(completed_epochs / lr_decay_every).
    double lr_after(int completed_epochs) const;
};

// Query network, its slowly updated copy, and the frozen code database the
// copy produced. database_codes changes only in sync_database.
struct DualNetworkState {
    EncoderParams query_params;
    EncoderParams database_params;
    CodeDatabase database_codes;
    int epoch = 0;  // completed joint epochs
};

struct EpochReport {
    std::string phase;  // "pretrain" or "joint"
    int epoch = 0;
    double lr = 0.0;
    double mean_ap = 0.0;
    double mean_reward = 0.0;
    double mean_triplet_loss = 0.0;
    double mean_policy_loss = 0.0;
    int skipped_anchors = 0;  // anchors with no relevant item in the database
};

struct TrainObserver {
    std::function<void(const EpochReport&)> on_report;  // every epoch, both phases
    std::function<void(const DualNetworkState&)> on_sync;
    std::function<void(const DualNetworkState&)> on_joint_epoch;  // after a possible sync
};

// Classical momentum: v <- momentum*v - lr*(grad + weight_decay*w); w <- w + v.
void sgd_update(EncoderParams& params, const EncoderGrads& grads, double lr, double momentum,
                double weight_decay);

// Triplet-only warm-up phase. Throws when an epoch forms no valid triplet
// or parameters go non-finite.
EncoderParams pretrain(EncoderParams params, const LabeledDataset& train, const TrainConfig& cfg,
                       const TrainObserver* observer = nullptr,
                       std::vector<EpochReport>* history = nullptr);

// Thresholded codes of every sample under the given parameters, in dataset order.
CodeDatabase encode_database(const EncoderParams& params, const LabeledDataset& ds);

// One joint pass: per anchor, sample a code, score it against the frozen
// database, combine the self-critical policy gradient with an in-batch
// triplet term, and take one SGD step per mini-batch.
EpochReport train_epoch(DualNetworkState& state, const LabeledDataset& train,
                        const TrainConfig& cfg, Rng& rng);

// Copies the query network into the database network and re-encodes B.
void sync_database(DualNetworkState& state, const LabeledDataset& train);

struct FitResult {
    EncoderParams params;  // final query network
    std::vector<EpochReport> pretrain_history;
    std::vector<EpochReport> joint_history;
    // MAP of the training set retrieved against its own thresholded codes
    // under the final query network.
    double final_train_map = 0.0;
};

FitResult fit(const LayerSpec& spec, const LabeledDataset& train, const TrainConfig& cfg,
              const TrainObserver* observer = nullptr);

}  // namespace dphn
