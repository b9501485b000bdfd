#include "dphn/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "dphn/binary_io.hpp"

namespace dphn {

namespace {

constexpr char kCodeDbMagic[9] = "DPHNCDB1";

}  // namespace

LabelSet::LabelSet(std::initializer_list<std::uint32_t> ids)
    : LabelSet(std::vector<std::uint32_t>(ids)) {}

LabelSet::LabelSet(std::vector<std::uint32_t> ids) : ids_(std::move(ids)) {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

bool LabelSet::intersects(const LabelSet& other) const {
    auto a = ids_.begin();
    auto b = other.ids_.begin();
    while (a != ids_.end() && b != other.ids_.end()) {
        if (*a == *b) return true;
        if (*a < *b) {
            ++a;
        } else {
            ++b;
        }
    }
    return false;
}

CodeDatabase::CodeDatabase(std::vector<PackedCode> codes, std::vector<LabelSet> labels)
    : code_bits_(0), codes_(std::move(codes)), labels_(std::move(labels)) {
    if (codes_.empty()) throw std::invalid_argument("CodeDatabase: database must not be empty");
    if (codes_.size() != labels_.size()) {
        throw std::invalid_argument("CodeDatabase: codes and labels differ in length");
    }
    code_bits_ = codes_.front().bits();
    for (const PackedCode& c : codes_) {
        if (c.bits() != code_bits_) {
            throw std::invalid_argument("CodeDatabase: all codes must share code_bits");
        }
    }
    for (const LabelSet& l : labels_) {
        if (l.empty()) throw std::invalid_argument("CodeDatabase: empty label set");
    }
}

std::vector<std::uint8_t> CodeDatabase::serialize() const {
    std::ostringstream out(std::ios::binary);
    io::write_magic(out, kCodeDbMagic);
    io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(code_bits_));
    io::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(codes_.size()));
    for (const PackedCode& c : codes_) {
        for (std::uint64_t w : c.words()) io::write_le<std::uint64_t>(out, w);
    }
    for (const LabelSet& l : labels_) {
        io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.size()));
        for (std::uint32_t id : l.ids()) io::write_le<std::uint32_t>(out, id);
    }
    const std::string s = out.str();
    return {s.begin(), s.end()};
}

void CodeDatabase::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open code database for writing: " + path.string());
    const std::vector<std::uint8_t> bytes = serialize();
    io::write_bytes(out, bytes.data(), bytes.size());
    if (!out) throw std::runtime_error("failed writing code database: " + path.string());
}

CodeDatabase CodeDatabase::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open code database: " + path.string());

    io::expect_magic(in, kCodeDbMagic, "code database " + path.string());
    const int bits = static_cast<int>(io::read_le<std::uint32_t>(in));
    const std::uint64_t count = io::read_le<std::uint64_t>(in);
    if (bits < 1) throw std::runtime_error("code database: invalid code_bits");

    const std::size_t words = (static_cast<std::size_t>(bits) + 63) / 64;
    std::vector<PackedCode> codes;
    codes.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        PackedCode code(bits);
        for (std::size_t w = 0; w < words; ++w) {
            const std::uint64_t word = io::read_le<std::uint64_t>(in);
            for (int b = 0; b < 64; ++b) {
                const int k = static_cast<int>(w * 64) + b;
                if (k < bits && ((word >> b) & 1)) code.set(k, true);
            }
        }
        codes.push_back(std::move(code));
    }
    std::vector<LabelSet> labels;
    labels.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint32_t n = io::read_le<std::uint32_t>(in);
        std::vector<std::uint32_t> ids(n);
        for (auto& id : ids) id = io::read_le<std::uint32_t>(in);
        labels.emplace_back(std::move(ids));
    }
    return CodeDatabase(std::move(codes), std::move(labels));
}

int hamming_distance(const PackedCode& a, const PackedCode& b) {
    if (a.bits() != b.bits()) {
        throw std::invalid_argument("hamming_distance: code_bits mismatch");
    }
    int d = 0;
    const auto wa = a.words();
    const auto wb = b.words();
    for (std::size_t i = 0; i < wa.size(); ++i) d += std::popcount(wa[i] ^ wb[i]);
    return d;
}

std::vector<std::uint32_t> rank(const PackedCode& query, const CodeDatabase& db) {
    if (query.bits() != db.code_bits()) {
        throw std::invalid_argument("rank: query code_bits does not match database");
    }
    const std::size_t n = db.size();
    std::vector<int> dist(n);
    for (std::size_t i = 0; i < n; ++i) dist[i] = hamming_distance(query, db.code(i));

    // Counting sort over distances 0..K; within a distance bucket indices
    // stay ascending, which is exactly the tie rule.
    const int buckets = db.code_bits() + 1;
    std::vector<std::uint32_t> counts(static_cast<std::size_t>(buckets) + 1, 0);
    for (std::size_t i = 0; i < n; ++i) counts[static_cast<std::size_t>(dist[i]) + 1]++;
    for (int d = 0; d < buckets; ++d) counts[static_cast<std::size_t>(d) + 1] += counts[static_cast<std::size_t>(d)];

    std::vector<std::uint32_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[counts[static_cast<std::size_t>(dist[i])]++] = static_cast<std::uint32_t>(i);
    }
    return order;
}

double average_precision(const PackedCode& query, const LabelSet& query_labels,
                         const CodeDatabase& db, const ApOptions& options) {
    std::size_t relevant_total = 0;
    for (std::size_t i = 0; i < db.size(); ++i) {
        if (query_labels.intersects(db.labels(i))) ++relevant_total;
    }
    if (relevant_total == 0) {
        throw std::invalid_argument("average_precision: query has no relevant database items");
    }

    const std::vector<std::uint32_t> order = rank(query, db);
    const std::size_t limit =
        options.max_rank ? std::min(*options.max_rank, order.size()) : order.size();
    const std::size_t normalizer =
        options.max_rank ? std::min(relevant_total, *options.max_rank) : relevant_total;

    double sum = 0.0;
    std::size_t relevant_seen = 0;
    for (std::size_t j = 0; j < limit; ++j) {
        if (query_labels.intersects(db.labels(order[j]))) {
            ++relevant_seen;
            sum += static_cast<double>(relevant_seen) / static_cast<double>(j + 1);
        }
    }
    return sum / static_cast<double>(normalizer);
}

double mean_average_precision(std::span<const QueryItem> queries, const CodeDatabase& db,
                              const ApOptions& options) {
    if (queries.empty()) {
        throw std::invalid_argument("mean_average_precision: no queries");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        try {
            sum += average_precision(queries[i].code, queries[i].labels, db, options);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("query " + std::to_string(i) + ": " + e.what());
        }
    }
    return sum / static_cast<double>(queries.size());
}

double precision_at_hamming_radius(std::span<const QueryItem> queries, const CodeDatabase& db,
                                   int radius) {
    if (radius < 0) throw std::invalid_argument("precision_at_hamming_radius: radius must be >= 0");
    if (queries.empty()) return 0.0;

    double sum = 0.0;
    for (const QueryItem& q : queries) {
        std::size_t returned = 0;
        std::size_t similar = 0;
        for (std::size_t i = 0; i < db.size(); ++i) {
            if (hamming_distance(q.code, db.code(i)) <= radius) {
                ++returned;
                if (q.labels.intersects(db.labels(i))) ++similar;
            }
        }
        sum += returned == 0 ? 0.0
                             : static_cast<double>(similar) / static_cast<double>(returned);
    }
    return sum / static_cast<double>(queries.size());
}

std::vector<std::pair<int, double>> precision_at_k(std::span<const QueryItem> queries,
                                                   const CodeDatabase& db,
                                                   const std::vector<int>& ks) {
    for (int k : ks) {
        if (k < 1 || static_cast<std::size_t>(k) > db.size()) {
            throw std::invalid_argument("precision_at_k: k = " + std::to_string(k) +
                                        " out of range [1, n]");
        }
    }

    std::vector<std::pair<int, double>> result;
    result.reserve(ks.size());
    if (queries.empty()) {
        for (int k : ks) result.emplace_back(k, 0.0);
        return result;
    }

    std::vector<std::vector<std::uint32_t>> orders;
    orders.reserve(queries.size());
    for (const QueryItem& q : queries) orders.push_back(rank(q.code, db));

    for (int k : ks) {
        double sum = 0.0;
        for (std::size_t qi = 0; qi < queries.size(); ++qi) {
            std::size_t similar = 0;
            for (int j = 0; j < k; ++j) {
                if (queries[qi].labels.intersects(db.labels(orders[qi][static_cast<std::size_t>(j)]))) {
                    ++similar;
                }
            }
            sum += static_cast<double>(similar) / static_cast<double>(k);
        }
        result.emplace_back(k, sum / static_cast<double>(queries.size()));
    }
    return result;
}

RankingMetrics evaluate(std::span<const QueryItem> queries, const CodeDatabase& db,
                        const std::vector<int>& ks, int radius, bool skip_zero_relevant,
                        const ApOptions& options) {
    RankingMetrics metrics;
    std::vector<QueryItem> kept;
    kept.reserve(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) {
        bool has_relevant = false;
        for (std::size_t j = 0; j < db.size() && !has_relevant; ++j) {
            has_relevant = queries[i].labels.intersects(db.labels(j));
        }
        if (!has_relevant) {
            if (!skip_zero_relevant) {
                throw std::invalid_argument("query " + std::to_string(i) +
                                            " has no relevant database items");
            }
            metrics.skipped_queries.push_back(i);
            continue;
        }
        kept.push_back(queries[i]);
    }

    metrics.per_query_ap.reserve(kept.size());
    double ap_sum = 0.0;
    for (const QueryItem& q : kept) {
        const double ap = average_precision(q.code, q.labels, db, options);
        metrics.per_query_ap.push_back(ap);
        ap_sum += ap;
    }
    metrics.map = kept.empty() ? 0.0 : ap_sum / static_cast<double>(kept.size());
    metrics.precision_at_hamming2 = precision_at_hamming_radius(kept, db, radius);
    metrics.precision_at_k = precision_at_k(kept, db, ks);
    return metrics;
}

std::string metrics_to_json(const RankingMetrics& metrics) {
    nlohmann::json j;
    j["map"] = metrics.map;
    j["p_at_h2"] = metrics.precision_at_hamming2;
    auto& pk = j["p_at_k"] = nlohmann::json::array();
    for (const auto& [k, p] : metrics.precision_at_k) {
        pk.push_back({{"k", k}, {"precision", p}});
    }
    j["per_query_ap"] = metrics.per_query_ap;
    j["skipped_queries"] = metrics.skipped_queries;
    return j.dump();
}

std::string metrics_to_csv(const RankingMetrics& metrics) {
    std::ostringstream out;
    out << "query_index,ap\n";
    for (std::size_t i = 0; i < metrics.per_query_ap.size(); ++i) {
        out << i << ',' << nlohmann::json(metrics.per_query_ap[i]).dump() << '\n';
    }
    return out.str();
}

}  // namespace dphn
