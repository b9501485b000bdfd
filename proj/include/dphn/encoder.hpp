#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

namespace dphn {

// Sigmoid outputs are kept inside [kSigmoidFloor, 1 - kSigmoidFloor] so the
// Bernoulli log-likelihood downstream never evaluates log(0).
inline constexpr double kSigmoidFloor = 1e-7;

struct LayerSpec {
    int input_dim = 0;
    std::vector<int> hidden_dims;
    int code_bits = 0;

    void validate() const;  // throws std::invalid_argument
    int layer_count() const { return static_cast<int>(hidden_dims.size()) + 1; }
    // (output width, input width) of layer l, 0-based; the last layer is the
    // code_bits-wide sigmoid head.
    std::pair<int, int> layer_shape(int l) const;

    bool operator==(const LayerSpec&) const = default;
};

struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;  // row-major

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }

    bool operator==(const Mat&) const = default;
};

// Per-bit activation of the code head: a vector in [0,1]^K interpreted both
// as a soft code and as Bernoulli probabilities.
class RelaxedCode {
public:
    RelaxedCode() = default;
    explicit RelaxedCode(std::vector<double> values);  // validates entries in [0,1]

    int bits() const { return static_cast<int>(values_.size()); }
    double operator[](int k) const { return values_[static_cast<std::size_t>(k)]; }
    std::span<const double> values() const { return values_; }

    bool operator==(const RelaxedCode&) const = default;

private:
    std::vector<double> values_;
};

struct ForwardTrace {
    std::vector<double> input;
    std::vector<std::vector<double>> pre_acts;  // z per layer
    std::vector<std::vector<double>> acts;      // a per layer; back() equals the relaxed code
};

struct EncoderGrads {
    std::vector<Mat> weights;
    std::vector<std::vector<double>> biases;

    explicit EncoderGrads(const LayerSpec& spec);
    void add(const EncoderGrads& other);
    void scale(double factor);
};

// All weights and biases of one network copy, plus one momentum buffer per
// parameter tensor. Mutated only by the trainer between batch evaluations.
class EncoderParams {
public:
    explicit EncoderParams(LayerSpec spec);  // zero weights, zero momentum

    // Uniform(-1,1)/sqrt(fan_in) weights, zero biases, from the given seed.
    static EncoderParams random_init(LayerSpec spec, std::uint64_t seed);

    const LayerSpec& spec() const { return spec_; }
    int layer_count() const { return spec_.layer_count(); }

    Mat& weight(int l) { return weights_[static_cast<std::size_t>(l)]; }
    const Mat& weight(int l) const { return weights_[static_cast<std::size_t>(l)]; }
    std::vector<double>& bias(int l) { return biases_[static_cast<std::size_t>(l)]; }
    const std::vector<double>& bias(int l) const { return biases_[static_cast<std::size_t>(l)]; }

    Mat& weight_momentum(int l) { return w_momentum_[static_cast<std::size_t>(l)]; }
    std::vector<double>& bias_momentum(int l) { return b_momentum_[static_cast<std::size_t>(l)]; }

    std::size_t parameter_count() const;
    bool all_finite() const;

    // Weights and biases only; momentum buffers are excluded.
    bool same_function(const EncoderParams& other) const;
    double max_abs_difference(const EncoderParams& other) const;

private:
    LayerSpec spec_;
    std::vector<Mat> weights_;
    std::vector<std::vector<double>> biases_;
    std::vector<Mat> w_momentum_;
    std::vector<std::vector<double>> b_momentum_;
};

// Pure forward pass: hidden layers are linear + rectifier, the head is
// linear + sigmoid clamped to the floor above. Throws std::invalid_argument
// on an input length mismatch.
std::pair<RelaxedCode, ForwardTrace> forward(const EncoderParams& params,
                                             std::span<const double> input);

// Exact gradients of (grad_wrt_s . s) with respect to every parameter.
// The trace must come from forward() with these params.
EncoderGrads backward(const EncoderParams& params, const ForwardTrace& trace,
                      std::span<const double> grad_wrt_s);

// Max over parameters of |analytic - central difference| / max(1, |central difference|).
double check_gradients(const EncoderParams& params, std::span<const double> input,
                       std::span<const double> grad_wrt_s, double step);

// Flat binary checkpoint: layer spec, weights row-major, biases, and the
// global training epoch. Round-trips bit-exactly. Layout in docs/FORMATS.md.
struct Checkpoint {
    EncoderParams params;
    std::uint64_t epoch = 0;
};

void save_checkpoint(const std::filesystem::path& path, const EncoderParams& params,
                     std::uint64_t epoch);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dphn
