#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dphn/policy_codec.hpp"

namespace dphn {

// Set of class identifiers attached to one item. Two items are similar iff
// their label sets intersect.
class LabelSet {
public:
    LabelSet() = default;
    LabelSet(std::initializer_list<std::uint32_t> ids);
    explicit LabelSet(std::vector<std::uint32_t> ids);  // sorted + deduplicated

    bool intersects(const LabelSet& other) const;
    bool empty() const { return ids_.empty(); }
    std::size_t size() const { return ids_.size(); }
    const std::vector<std::uint32_t>& ids() const { return ids_; }
    std::uint32_t primary() const { return ids_.front(); }  // smallest id

    bool operator==(const LabelSet&) const = default;

private:
    std::vector<std::uint32_t> ids_;
};

// Immutable set of binary codes with their label sets; the listwise
// retrieval target. All codes share one bit width and n >= 1.
class CodeDatabase {
public:
    CodeDatabase(std::vector<PackedCode> codes, std::vector<LabelSet> labels);

    std::size_t size() const { return codes_.size(); }
    int code_bits() const { return code_bits_; }
    const PackedCode& code(std::size_t i) const { return codes_[i]; }
    const LabelSet& labels(std::size_t i) const { return labels_[i]; }
    const std::vector<PackedCode>& codes() const { return codes_; }
    const std::vector<LabelSet>& label_sets() const { return labels_; }

    // Exact bytes of the on-disk format; also used for change detection.
    std::vector<std::uint8_t> serialize() const;

    void save(const std::filesystem::path& path) const;
    static CodeDatabase load(const std::filesystem::path& path);

    bool operator==(const CodeDatabase&) const = default;

private:
    int code_bits_;
    std::vector<PackedCode> codes_;
    std::vector<LabelSet> labels_;
};

int hamming_distance(const PackedCode& a, const PackedCode& b);

// Database indices by ascending Hamming distance, ties broken by ascending
// index. Deterministic.
std::vector<std::uint32_t> rank(const PackedCode& query, const CodeDatabase& db);

struct ApOptions {
    // When set, only the top max_rank positions are scored and the
    // normalizer becomes min(N+, max_rank).
    std::optional<std::size_t> max_rank;
};

// Rank-weighted precision of the query's ranked list. Throws if no database
// item is similar to the query.
double average_precision(const PackedCode& query, const LabelSet& query_labels,
                         const CodeDatabase& db, const ApOptions& options = {});

struct QueryItem {
    PackedCode code;
    LabelSet labels;
};

double mean_average_precision(std::span<const QueryItem> queries, const CodeDatabase& db,
                              const ApOptions& options = {});

// Mean over queries of precision among items within the given Hamming
// radius; a query with no returns contributes 0.
double precision_at_hamming_radius(std::span<const QueryItem> queries, const CodeDatabase& db,
                                   int radius = 2);

// Mean over queries of precision among the top k ranked items, for each k.
std::vector<std::pair<int, double>> precision_at_k(std::span<const QueryItem> queries,
                                                   const CodeDatabase& db,
                                                   const std::vector<int>& ks);

struct RankingMetrics {
    double map = 0.0;
    double precision_at_hamming2 = 0.0;
    std::vector<std::pair<int, double>> precision_at_k;
    std::vector<double> per_query_ap;
    std::vector<std::size_t> skipped_queries;  // zero-relevant queries, excluded from map
};

// Full evaluation pass. With skip_zero_relevant, queries with no similar
// database item are excluded and reported by index instead of throwing.
RankingMetrics evaluate(std::span<const QueryItem> queries, const CodeDatabase& db,
                        const std::vector<int>& ks, int radius = 2,
                        bool skip_zero_relevant = false, const ApOptions& options = {});

std::string metrics_to_json(const RankingMetrics& metrics);
std::string metrics_to_csv(const RankingMetrics& metrics);

}  // namespace dphn
