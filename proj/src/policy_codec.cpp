#include "dphn/policy_codec.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dphn {

namespace {

std::size_t word_count(int bits) {
    return (static_cast<std::size_t>(bits) + 63) / 64;
}

double clamp_prob(double s) {
    return std::clamp(s, kSigmoidFloor, 1.0 - kSigmoidFloor);
}

void require_matching_bits(const RelaxedCode& s, const PackedCode& q) {
    if (s.bits() != q.bits()) {
        throw std::invalid_argument("relaxed code and packed code differ in bit count");
    }
}

}  // namespace

PackedCode::PackedCode(int bits) : bits_(bits), words_(word_count(bits), 0) {
    if (bits < 0) throw std::invalid_argument("PackedCode: negative bit count");
}

PackedCode PackedCode::from_bits(std::span<const std::uint8_t> bits) {
    PackedCode code(static_cast<int>(bits.size()));
    for (std::size_t k = 0; k < bits.size(); ++k) {
        if (bits[k] > 1) throw std::invalid_argument("PackedCode: bits must be 0 or 1");
        if (bits[k]) code.words_[k / 64] |= std::uint64_t{1} << (k % 64);
    }
    return code;
}

bool PackedCode::get(int k) const {
    if (k < 0 || k >= bits_) throw std::out_of_range("PackedCode: bit index out of range");
    const auto u = static_cast<std::size_t>(k);
    return (words_[u / 64] >> (u % 64)) & 1;
}

void PackedCode::set(int k, bool value) {
    if (k < 0 || k >= bits_) throw std::out_of_range("PackedCode: bit index out of range");
    const auto u = static_cast<std::size_t>(k);
    const std::uint64_t mask = std::uint64_t{1} << (u % 64);
    if (value) {
        words_[u / 64] |= mask;
    } else {
        words_[u / 64] &= ~mask;
    }
}

std::vector<std::uint8_t> PackedCode::to_bits() const {
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(bits_));
    for (int k = 0; k < bits_; ++k) bits[static_cast<std::size_t>(k)] = get(k) ? 1 : 0;
    return bits;
}

PackedCode threshold(const RelaxedCode& s) {
    PackedCode code(s.bits());
    for (int k = 0; k < s.bits(); ++k) {
        if (s[k] >= 0.5) code.set(k, true);
    }
    return code;
}

PackedCode sample(const RelaxedCode& s, Rng& rng) {
    PackedCode code(s.bits());
    for (int k = 0; k < s.bits(); ++k) {
        if (rng.uniform01() < s[k]) code.set(k, true);
    }
    return code;
}

double log_prob(const RelaxedCode& s, const PackedCode& q) {
    require_matching_bits(s, q);
    double sum = 0.0;
    for (int k = 0; k < s.bits(); ++k) {
        const double p = clamp_prob(s[k]);
        sum += q.get(k) ? std::log(p) : std::log(1.0 - p);
    }
    return sum;
}

std::vector<double> log_prob_grad(const RelaxedCode& s, const PackedCode& q) {
    require_matching_bits(s, q);
    std::vector<double> grad(static_cast<std::size_t>(s.bits()));
    for (int k = 0; k < s.bits(); ++k) {
        const double p = clamp_prob(s[k]);
        grad[static_cast<std::size_t>(k)] = q.get(k) ? 1.0 / p : -1.0 / (1.0 - p);
    }
    return grad;
}

}  // namespace dphn
