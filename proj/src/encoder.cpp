#include "dphn/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "dphn/binary_io.hpp"
#include "dphn/rng.hpp"

namespace dphn {

namespace {

constexpr char kCheckpointMagic[9] = "DPHNCKP1";

double sigmoid_clamped(double z) {
    const double s = 1.0 / (1.0 + std::exp(-z));
    return std::clamp(s, kSigmoidFloor, 1.0 - kSigmoidFloor);
}

}  // namespace

void LayerSpec::validate() const {
    if (input_dim < 1) throw std::invalid_argument("LayerSpec: input_dim must be >= 1");
    if (code_bits < 1) throw std::invalid_argument("LayerSpec: code_bits must be >= 1");
    for (int h : hidden_dims) {
        if (h < 1) throw std::invalid_argument("LayerSpec: hidden dims must be >= 1");
    }
}

std::pair<int, int> LayerSpec::layer_shape(int l) const {
    const int in = (l == 0) ? input_dim : hidden_dims[static_cast<std::size_t>(l - 1)];
    const int out = (l == layer_count() - 1) ? code_bits
                                             : hidden_dims[static_cast<std::size_t>(l)];
    return {out, in};
}

RelaxedCode::RelaxedCode(std::vector<double> values) : values_(std::move(values)) {
    for (double v : values_) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument("RelaxedCode: entries must lie in [0,1]");
        }
    }
}

EncoderGrads::EncoderGrads(const LayerSpec& spec) {
    const int layers = spec.layer_count();
    weights.reserve(static_cast<std::size_t>(layers));
    biases.reserve(static_cast<std::size_t>(layers));
    for (int l = 0; l < layers; ++l) {
        auto [out, in] = spec.layer_shape(l);
        weights.emplace_back(out, in);
        biases.emplace_back(static_cast<std::size_t>(out), 0.0);
    }
}

void EncoderGrads::add(const EncoderGrads& other) {
    if (weights.size() != other.weights.size()) {
        throw std::invalid_argument("EncoderGrads: layer count mismatch");
    }
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l].rows != other.weights[l].rows || weights[l].cols != other.weights[l].cols) {
            throw std::invalid_argument("EncoderGrads: shape mismatch");
        }
        for (std::size_t i = 0; i < weights[l].v.size(); ++i) weights[l].v[i] += other.weights[l].v[i];
        for (std::size_t i = 0; i < biases[l].size(); ++i) biases[l][i] += other.biases[l][i];
    }
}

void EncoderGrads::scale(double factor) {
    for (auto& w : weights) {
        for (double& x : w.v) x *= factor;
    }
    for (auto& b : biases) {
        for (double& x : b) x *= factor;
    }
}

EncoderParams::EncoderParams(LayerSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    const int layers = spec_.layer_count();
    for (int l = 0; l < layers; ++l) {
        auto [out, in] = spec_.layer_shape(l);
        weights_.emplace_back(out, in);
        biases_.emplace_back(static_cast<std::size_t>(out), 0.0);
        w_momentum_.emplace_back(out, in);
        b_momentum_.emplace_back(static_cast<std::size_t>(out), 0.0);
    }
}

EncoderParams EncoderParams::random_init(LayerSpec spec, std::uint64_t seed) {
    EncoderParams params(std::move(spec));
    Rng rng(seed);
    for (int l = 0; l < params.layer_count(); ++l) {
        Mat& w = params.weight(l);
        const double scale = 1.0 / std::sqrt(static_cast<double>(w.cols));
        for (double& x : w.v) x = rng.uniform(-1.0, 1.0) * scale;
    }
    return params;
}

std::size_t EncoderParams::parameter_count() const {
    std::size_t n = 0;
    for (const Mat& w : weights_) n += w.v.size();
    for (const auto& b : biases_) n += b.size();
    return n;
}

bool EncoderParams::all_finite() const {
    for (const Mat& w : weights_) {
        for (double x : w.v) {
            if (!std::isfinite(x)) return false;
        }
    }
    for (const auto& b : biases_) {
        for (double x : b) {
            if (!std::isfinite(x)) return false;
        }
    }
    return true;
}

bool EncoderParams::same_function(const EncoderParams& other) const {
    return spec_ == other.spec_ && weights_ == other.weights_ && biases_ == other.biases_;
}

double EncoderParams::max_abs_difference(const EncoderParams& other) const {
    if (spec_ != other.spec_) {
        throw std::invalid_argument("EncoderParams: spec mismatch");
    }
    double m = 0.0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        for (std::size_t i = 0; i < weights_[l].v.size(); ++i) {
            m = std::max(m, std::abs(weights_[l].v[i] - other.weights_[l].v[i]));
        }
        for (std::size_t i = 0; i < biases_[l].size(); ++i) {
            m = std::max(m, std::abs(biases_[l][i] - other.biases_[l][i]));
        }
    }
    return m;
}

std::pair<RelaxedCode, ForwardTrace> forward(const EncoderParams& params,
                                             std::span<const double> input) {
    const LayerSpec& spec = params.spec();
    if (static_cast<int>(input.size()) != spec.input_dim) {
        throw std::invalid_argument("forward: input length does not match input_dim");
    }

    ForwardTrace trace;
    trace.input.assign(input.begin(), input.end());
    const int layers = spec.layer_count();
    trace.pre_acts.resize(static_cast<std::size_t>(layers));
    trace.acts.resize(static_cast<std::size_t>(layers));

    const std::vector<double>* prev = &trace.input;
    for (int l = 0; l < layers; ++l) {
        const Mat& w = params.weight(l);
        const std::vector<double>& b = params.bias(l);
        std::vector<double>& z = trace.pre_acts[static_cast<std::size_t>(l)];
        std::vector<double>& a = trace.acts[static_cast<std::size_t>(l)];
        z.resize(static_cast<std::size_t>(w.rows));
        a.resize(static_cast<std::size_t>(w.rows));
        for (int r = 0; r < w.rows; ++r) {
            double sum = b[static_cast<std::size_t>(r)];
            const double* row = &w.v[static_cast<std::size_t>(r) * w.cols];
            for (int c = 0; c < w.cols; ++c) sum += row[c] * (*prev)[static_cast<std::size_t>(c)];
            z[static_cast<std::size_t>(r)] = sum;
            a[static_cast<std::size_t>(r)] = (l == layers - 1) ? sigmoid_clamped(sum)
                                                               : std::max(0.0, sum);
        }
        prev = &a;
    }

    return {RelaxedCode(trace.acts.back()), trace};
}

EncoderGrads backward(const EncoderParams& params, const ForwardTrace& trace,
                      std::span<const double> grad_wrt_s) {
    const LayerSpec& spec = params.spec();
    const int layers = spec.layer_count();
    if (static_cast<int>(trace.pre_acts.size()) != layers ||
        static_cast<int>(trace.acts.size()) != layers ||
        static_cast<int>(trace.input.size()) != spec.input_dim) {
        throw std::invalid_argument("backward: trace does not match params");
    }
    if (static_cast<int>(grad_wrt_s.size()) != spec.code_bits) {
        throw std::invalid_argument("backward: grad_wrt_s length must equal code_bits");
    }
    for (int l = 0; l < layers; ++l) {
        auto [out, in] = spec.layer_shape(l);
        (void)in;
        if (static_cast<int>(trace.acts[static_cast<std::size_t>(l)].size()) != out) {
            throw std::invalid_argument("backward: trace does not match params");
        }
    }

    EncoderGrads grads(spec);

    // Head: d(g.s)/dz = g * s(1-s), using the stored (clamped) activation.
    const std::vector<double>& s = trace.acts.back();
    std::vector<double> delta(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
        delta[k] = grad_wrt_s[k] * s[k] * (1.0 - s[k]);
    }

    for (int l = layers - 1; l >= 0; --l) {
        const Mat& w = params.weight(l);
        const std::vector<double>& below =
            (l == 0) ? trace.input : trace.acts[static_cast<std::size_t>(l - 1)];

        Mat& wg = grads.weights[static_cast<std::size_t>(l)];
        std::vector<double>& bg = grads.biases[static_cast<std::size_t>(l)];
        for (int r = 0; r < w.rows; ++r) {
            const double d = delta[static_cast<std::size_t>(r)];
            bg[static_cast<std::size_t>(r)] = d;
            double* row = &wg.v[static_cast<std::size_t>(r) * wg.cols];
            for (int c = 0; c < w.cols; ++c) row[c] = d * below[static_cast<std::size_t>(c)];
        }

        if (l > 0) {
            const std::vector<double>& z_below = trace.pre_acts[static_cast<std::size_t>(l - 1)];
            std::vector<double> next(static_cast<std::size_t>(w.cols), 0.0);
            for (int r = 0; r < w.rows; ++r) {
                const double d = delta[static_cast<std::size_t>(r)];
                const double* row = &w.v[static_cast<std::size_t>(r) * w.cols];
                for (int c = 0; c < w.cols; ++c) next[static_cast<std::size_t>(c)] += d * row[c];
            }
            // Rectifier subgradient: 0 at z == 0.
            for (int c = 0; c < w.cols; ++c) {
                if (z_below[static_cast<std::size_t>(c)] <= 0.0) next[static_cast<std::size_t>(c)] = 0.0;
            }
            delta = std::move(next);
        }
    }

    return grads;
}

namespace {

double objective(const EncoderParams& params, std::span<const double> input,
                 std::span<const double> grad_wrt_s) {
    auto [code, trace] = forward(params, input);
    (void)trace;
    double f = 0.0;
    for (int k = 0; k < code.bits(); ++k) f += grad_wrt_s[static_cast<std::size_t>(k)] * code[k];
    return f;
}

double relative_error(double analytic, double reference) {
    return std::abs(analytic - reference) / std::max(1.0, std::abs(reference));
}

}  // namespace

double check_gradients(const EncoderParams& params, std::span<const double> input,
                       std::span<const double> grad_wrt_s, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("check_gradients: step must be > 0");

    auto [code, trace] = forward(params, input);
    (void)code;
    const EncoderGrads analytic = backward(params, trace, grad_wrt_s);

    EncoderParams probe = params;
    double worst = 0.0;
    for (int l = 0; l < probe.layer_count(); ++l) {
        Mat& w = probe.weight(l);
        for (std::size_t i = 0; i < w.v.size(); ++i) {
            const double saved = w.v[i];
            w.v[i] = saved + step;
            const double hi = objective(probe, input, grad_wrt_s);
            w.v[i] = saved - step;
            const double lo = objective(probe, input, grad_wrt_s);
            w.v[i] = saved;
            const double central = (hi - lo) / (2.0 * step);
            worst = std::max(worst, relative_error(analytic.weights[static_cast<std::size_t>(l)].v[i], central));
        }
        std::vector<double>& b = probe.bias(l);
        for (std::size_t i = 0; i < b.size(); ++i) {
            const double saved = b[i];
            b[i] = saved + step;
            const double hi = objective(probe, input, grad_wrt_s);
            b[i] = saved - step;
            const double lo = objective(probe, input, grad_wrt_s);
            b[i] = saved;
            const double central = (hi - lo) / (2.0 * step);
            worst = std::max(worst, relative_error(analytic.biases[static_cast<std::size_t>(l)][i], central));
        }
    }
    return worst;
}

void save_checkpoint(const std::filesystem::path& path, const EncoderParams& params,
                     std::uint64_t epoch) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open checkpoint file for writing: " + path.string());

    const LayerSpec& spec = params.spec();
    io::write_magic(out, kCheckpointMagic);
    io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(spec.input_dim));
    io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(spec.hidden_dims.size()));
    for (int h : spec.hidden_dims) io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(h));
    io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(spec.code_bits));
    io::write_le<std::uint64_t>(out, epoch);
    for (int l = 0; l < params.layer_count(); ++l) {
        for (double x : params.weight(l).v) io::write_f64(out, x);
        for (double x : params.bias(l)) io::write_f64(out, x);
    }
    if (!out) throw std::runtime_error("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint file: " + path.string());

    io::expect_magic(in, kCheckpointMagic, "checkpoint " + path.string());
    LayerSpec spec;
    spec.input_dim = static_cast<int>(io::read_le<std::uint32_t>(in));
    const auto hidden = io::read_le<std::uint32_t>(in);
    spec.hidden_dims.resize(hidden);
    for (auto& h : spec.hidden_dims) h = static_cast<int>(io::read_le<std::uint32_t>(in));
    spec.code_bits = static_cast<int>(io::read_le<std::uint32_t>(in));
    const std::uint64_t epoch = io::read_le<std::uint64_t>(in);

    Checkpoint ckpt{EncoderParams(spec), epoch};
    for (int l = 0; l < ckpt.params.layer_count(); ++l) {
        for (double& x : ckpt.params.weight(l).v) x = io::read_f64(in);
        for (double& x : ckpt.params.bias(l)) x = io::read_f64(in);
    }
    return ckpt;
}

}  // namespace dphn
