#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dphn/retrieval.hpp"

namespace dphn {

// Labeled feature vectors. Features are stored as 32-bit floats, matching
// the on-disk formats, and widened to double at the encoder boundary.
class LabeledDataset {
public:
    LabeledDataset(int dim, std::vector<float> features, std::vector<LabelSet> labels);

    std::size_t size() const { return labels_.size(); }
    int dim() const { return dim_; }
    std::span<const float> row(std::size_t i) const {
        return {features_.data() + i * static_cast<std::size_t>(dim_),
                static_cast<std::size_t>(dim_)};
    }
    std::vector<double> row_as_double(std::size_t i) const;
    const LabelSet& labels(std::size_t i) const { return labels_[i]; }
    const std::vector<float>& features() const { return features_; }
    const std::vector<LabelSet>& label_sets() const { return labels_; }

    LabeledDataset subset(std::span<const std::uint32_t> indices) const;

    bool operator==(const LabeledDataset&) const = default;

private:
    int dim_;
    std::vector<float> features_;  // row-major, size() * dim_
    std::vector<LabelSet> labels_;
};

// Gaussian cluster stand-in for extracted image features: class centers are
// drawn from a unit normal, samples add spread-scaled noise, one label per
// class.
LabeledDataset generate_synthetic(int classes, int per_class, int dim, double spread,
                                  std::uint64_t seed);

struct SplitSpec {
    int queries_per_class = 0;
    int train_per_class = 0;
    std::uint64_t seed = 0;
};

// Index sets into the source dataset. Queries and database are disjoint;
// the training set is a subset of the database.
struct DatasetSplit {
    std::vector<std::uint32_t> query_indices;
    std::vector<std::uint32_t> train_indices;
    std::vector<std::uint32_t> database_indices;
};

// Seeded per-class sampling. An item's class is the smallest id in its
// label set. Throws, naming the class, when a class is too small.
DatasetSplit split(const LabeledDataset& ds, const SplitSpec& spec);

// Classes with fewer than 2 members among the given training indices
// (such anchors can never find an in-batch positive).
std::vector<std::uint32_t> training_split_violations(const LabeledDataset& ds,
                                                     std::span<const std::uint32_t> train_indices);

enum class DatasetFormat { Csv, Binary };

DatasetFormat format_from_path(const std::filesystem::path& path);

void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path,
                  DatasetFormat format);
LabeledDataset load_dataset(const std::filesystem::path& path, DatasetFormat format);

}  // namespace dphn
