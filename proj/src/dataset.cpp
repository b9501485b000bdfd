#include "dphn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "dphn/binary_io.hpp"
#include "dphn/rng.hpp"

namespace dphn {

namespace {

constexpr char kDatasetMagic[9] = "DPHNDAT1";

std::map<std::uint32_t, std::vector<std::uint32_t>> group_by_class(
    const LabeledDataset& ds, std::span<const std::uint32_t> indices) {
    std::map<std::uint32_t, std::vector<std::uint32_t>> groups;
    for (std::uint32_t i : indices) groups[ds.labels(i).primary()].push_back(i);
    return groups;
}

std::vector<std::uint32_t> all_indices(std::size_t n) {
    std::vector<std::uint32_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>(i);
    return idx;
}

float parse_float(const std::string& token, std::size_t line_no) {
    float value = 0.0f;
    const char* begin = token.data();
    const char* end = begin + token.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw std::runtime_error("dataset csv: bad feature value '" + token + "' at line " +
                                 std::to_string(line_no));
    }
    if (!std::isfinite(value)) {
        throw std::runtime_error("dataset csv: non-finite feature at line " +
                                 std::to_string(line_no));
    }
    return value;
}

std::string format_float(float value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) throw std::runtime_error("dataset csv: float formatting failed");
    return {buf, ptr};
}

}  // namespace

LabeledDataset::LabeledDataset(int dim, std::vector<float> features,
                               std::vector<LabelSet> labels)
    : dim_(dim), features_(std::move(features)), labels_(std::move(labels)) {
    if (dim_ < 1) throw std::invalid_argument("LabeledDataset: dim must be >= 1");
    if (labels_.empty()) throw std::invalid_argument("LabeledDataset: empty dataset");
    if (features_.size() != labels_.size() * static_cast<std::size_t>(dim_)) {
        throw std::invalid_argument("LabeledDataset: feature matrix shape mismatch");
    }
    for (float f : features_) {
        if (!std::isfinite(f)) throw std::invalid_argument("LabeledDataset: non-finite feature");
    }
    for (const LabelSet& l : labels_) {
        if (l.empty()) throw std::invalid_argument("LabeledDataset: empty label set");
    }
}

std::vector<double> LabeledDataset::row_as_double(std::size_t i) const {
    const auto r = row(i);
    return {r.begin(), r.end()};
}

LabeledDataset LabeledDataset::subset(std::span<const std::uint32_t> indices) const {
    std::vector<float> features;
    features.reserve(indices.size() * static_cast<std::size_t>(dim_));
    std::vector<LabelSet> labels;
    labels.reserve(indices.size());
    for (std::uint32_t i : indices) {
        const auto r = row(i);
        features.insert(features.end(), r.begin(), r.end());
        labels.push_back(labels_[i]);
    }
    return {dim_, std::move(features), std::move(labels)};
}

LabeledDataset generate_synthetic(int classes, int per_class, int dim, double spread,
                                  std::uint64_t seed) {
    if (classes < 2) throw std::invalid_argument("generate_synthetic: classes must be >= 2");
    if (per_class < 2) throw std::invalid_argument("generate_synthetic: per_class must be >= 2");
    if (dim < 1) throw std::invalid_argument("generate_synthetic: dim must be >= 1");
    if (!(spread > 0.0)) throw std::invalid_argument("generate_synthetic: spread must be > 0");

    constexpr double kCenterScale = 1.0;

    Rng rng(seed);
    std::vector<double> centers(static_cast<std::size_t>(classes) * dim);
    for (double& c : centers) c = kCenterScale * rng.gaussian();

    std::vector<float> features;
    features.reserve(static_cast<std::size_t>(classes) * per_class * dim);
    std::vector<LabelSet> labels;
    labels.reserve(static_cast<std::size_t>(classes) * per_class);
    for (int c = 0; c < classes; ++c) {
        const double* center = &centers[static_cast<std::size_t>(c) * dim];
        for (int i = 0; i < per_class; ++i) {
            for (int d = 0; d < dim; ++d) {
                features.push_back(static_cast<float>(center[d] + spread * rng.gaussian()));
            }
            labels.push_back(LabelSet{static_cast<std::uint32_t>(c)});
        }
    }
    return {dim, std::move(features), std::move(labels)};
}

DatasetSplit split(const LabeledDataset& ds, const SplitSpec& spec) {
    if (spec.queries_per_class < 0 || spec.train_per_class < 0) {
        throw std::invalid_argument("split: per-class counts must be >= 0");
    }

    const auto idx = all_indices(ds.size());
    auto groups = group_by_class(ds, idx);

    DatasetSplit out;
    Rng rng(spec.seed);
    for (auto& [cls, members] : groups) {
        const std::size_t need =
            static_cast<std::size_t>(spec.queries_per_class) + spec.train_per_class;
        if (members.size() < need) {
            throw std::invalid_argument("split: class " + std::to_string(cls) + " has " +
                                        std::to_string(members.size()) + " members, needs " +
                                        std::to_string(need));
        }
        rng.shuffle(members);
        for (int i = 0; i < spec.queries_per_class; ++i) {
            out.query_indices.push_back(members[static_cast<std::size_t>(i)]);
        }
        for (int i = 0; i < spec.train_per_class; ++i) {
            out.train_indices.push_back(
                members[static_cast<std::size_t>(spec.queries_per_class + i)]);
        }
    }

    std::sort(out.query_indices.begin(), out.query_indices.end());
    std::sort(out.train_indices.begin(), out.train_indices.end());

    // Database = everything except the queries; the training set is a subset.
    std::size_t qpos = 0;
    for (std::uint32_t i : idx) {
        if (qpos < out.query_indices.size() && out.query_indices[qpos] == i) {
            ++qpos;
        } else {
            out.database_indices.push_back(i);
        }
    }
    return out;
}

std::vector<std::uint32_t> training_split_violations(
    const LabeledDataset& ds, std::span<const std::uint32_t> train_indices) {
    auto groups = group_by_class(ds, train_indices);
    std::vector<std::uint32_t> violations;
    for (const auto& [cls, members] : groups) {
        if (members.size() < 2) violations.push_back(cls);
    }
    return violations;
}

DatasetFormat format_from_path(const std::filesystem::path& path) {
    return path.extension() == ".csv" ? DatasetFormat::Csv : DatasetFormat::Binary;
}

namespace {

void save_csv(const LabeledDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open dataset for writing: " + path.string());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (float f : ds.row(i)) out << format_float(f) << ',';
        const auto& ids = ds.labels(i).ids();
        for (std::size_t j = 0; j < ids.size(); ++j) {
            if (j) out << ';';
            out << ids[j];
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("failed writing dataset: " + path.string());
}

LabeledDataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset: " + path.string());

    std::vector<float> features;
    std::vector<LabelSet> labels;
    int dim = -1;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> tokens;
        std::stringstream ss(line);
        std::string token;
        while (std::getline(ss, token, ',')) tokens.push_back(token);
        if (tokens.size() < 2) {
            throw std::runtime_error("dataset csv: line " + std::to_string(line_no) +
                                     " needs at least one feature and a label field");
        }
        const int row_dim = static_cast<int>(tokens.size()) - 1;
        if (dim == -1) {
            dim = row_dim;
        } else if (row_dim != dim) {
            throw std::runtime_error("dataset csv: inconsistent column count at line " +
                                     std::to_string(line_no));
        }
        for (int d = 0; d < dim; ++d) {
            features.push_back(parse_float(tokens[static_cast<std::size_t>(d)], line_no));
        }
        std::vector<std::uint32_t> ids;
        std::stringstream ls(tokens.back());
        std::string id_token;
        while (std::getline(ls, id_token, ';')) {
            std::uint32_t id = 0;
            const auto [ptr, ec] = std::from_chars(id_token.data(),
                                                   id_token.data() + id_token.size(), id);
            if (ec != std::errc{} || ptr != id_token.data() + id_token.size()) {
                throw std::runtime_error("dataset csv: bad label '" + id_token + "' at line " +
                                         std::to_string(line_no));
            }
            ids.push_back(id);
        }
        if (ids.empty()) {
            throw std::runtime_error("dataset csv: empty label field at line " +
                                     std::to_string(line_no));
        }
        labels.emplace_back(std::move(ids));
    }
    if (labels.empty()) throw std::runtime_error("dataset csv: no rows in " + path.string());
    return {dim, std::move(features), std::move(labels)};
}

void save_binary(const LabeledDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open dataset for writing: " + path.string());

    // Header is 28 bytes; the label block sits right after the features.
    const std::uint64_t label_offset =
        28 + ds.size() * static_cast<std::uint64_t>(ds.dim()) * 4;
    io::write_magic(out, kDatasetMagic);
    io::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(ds.size()));
    io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(ds.dim()));
    io::write_le<std::uint64_t>(out, label_offset);
    for (float f : ds.features()) io::write_f32(out, f);
    for (const LabelSet& l : ds.label_sets()) {
        io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.size()));
        for (std::uint32_t id : l.ids()) io::write_le<std::uint32_t>(out, id);
    }
    if (!out) throw std::runtime_error("failed writing dataset: " + path.string());
}

LabeledDataset load_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset: " + path.string());

    io::expect_magic(in, kDatasetMagic, "dataset " + path.string());
    const std::uint64_t n = io::read_le<std::uint64_t>(in);
    const std::uint32_t d = io::read_le<std::uint32_t>(in);
    const std::uint64_t label_offset = io::read_le<std::uint64_t>(in);
    if (n == 0 || d == 0) throw std::runtime_error("dataset binary: empty header");

    std::vector<float> features(n * d);
    for (float& f : features) f = io::read_f32(in);

    in.seekg(static_cast<std::streamoff>(label_offset));
    if (!in) throw std::runtime_error("dataset binary: bad label block offset");
    std::vector<LabelSet> labels;
    labels.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint32_t count = io::read_le<std::uint32_t>(in);
        std::vector<std::uint32_t> ids(count);
        for (auto& id : ids) id = io::read_le<std::uint32_t>(in);
        labels.emplace_back(std::move(ids));
    }
    return {static_cast<int>(d), std::move(features), std::move(labels)};
}

}  // namespace

void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path,
                  DatasetFormat format) {
    if (format == DatasetFormat::Csv) {
        save_csv(ds, path);
    } else {
        save_binary(ds, path);
    }
}

LabeledDataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
    return format == DatasetFormat::Csv ? load_csv(path) : load_binary(path);
}

}  // namespace dphn
