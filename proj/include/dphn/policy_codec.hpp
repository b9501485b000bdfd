#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dphn/encoder.hpp"
#include "dphn/rng.hpp"

namespace dphn {

// K-bit binary code stored bit-packed for popcount distance. Bit k lives at
// bit position (k % 64) of word (k / 64), little-endian within words;
// padding bits above K are always zero.
class PackedCode {
public:
    PackedCode() = default;
    explicit PackedCode(int bits);

    static PackedCode from_bits(std::span<const std::uint8_t> bits);

    int bits() const { return bits_; }
    bool get(int k) const;
    void set(int k, bool value);
    std::vector<std::uint8_t> to_bits() const;
    std::span<const std::uint64_t> words() const { return words_; }

    bool operator==(const PackedCode&) const = default;

private:
    int bits_ = 0;
    std::vector<std::uint64_t> words_;
};

// Binarization used for database codes and for the greedy baseline:
// bit k = 1 iff s_k >= 0.5.
PackedCode threshold(const RelaxedCode& s);

// Draws each bit independently, bit 0 first; bit k is 1 with probability s_k.
PackedCode sample(const RelaxedCode& s, Rng& rng);

// log of the per-bit Bernoulli product, with s clamped to the sigmoid floor.
double log_prob(const RelaxedCode& s, const PackedCode& q);

// d(log_prob)/ds, entry k = q_k/s_k - (1-q_k)/(1-s_k), clamped s.
std::vector<double> log_prob_grad(const RelaxedCode& s, const PackedCode& q);

}  // namespace dphn
