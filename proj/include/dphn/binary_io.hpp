#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace dphn::io {

// All on-disk integers and floats are little-endian regardless of host order.

inline void write_bytes(std::ostream& out, const void* data, std::size_t n) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

inline void read_bytes(std::istream& in, void* data, std::size_t n) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) {
        throw std::runtime_error("unexpected end of file");
    }
}

template <class T>
void write_le(std::ostream& out, T value) {
    static_assert(std::is_integral_v<T>);
    unsigned char buf[sizeof(T)];
    auto u = static_cast<std::make_unsigned_t<T>>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        buf[i] = static_cast<unsigned char>(u >> (8 * i));
    }
    write_bytes(out, buf, sizeof(T));
}

template <class T>
T read_le(std::istream& in) {
    static_assert(std::is_integral_v<T>);
    unsigned char buf[sizeof(T)];
    read_bytes(in, buf, sizeof(T));
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        u |= static_cast<std::make_unsigned_t<T>>(buf[i]) << (8 * i);
    }
    return static_cast<T>(u);
}

inline void write_f32(std::ostream& out, float value) {
    write_le(out, std::bit_cast<std::uint32_t>(value));
}

inline float read_f32(std::istream& in) {
    return std::bit_cast<float>(read_le<std::uint32_t>(in));
}

inline void write_f64(std::ostream& out, double value) {
    write_le(out, std::bit_cast<std::uint64_t>(value));
}

inline double read_f64(std::istream& in) {
    return std::bit_cast<double>(read_le<std::uint64_t>(in));
}

inline void write_magic(std::ostream& out, const char (&magic)[9]) {
    write_bytes(out, magic, 8);
}

inline void expect_magic(std::istream& in, const char (&magic)[9], const std::string& what) {
    char buf[8];
    read_bytes(in, buf, 8);
    if (std::memcmp(buf, magic, 8) != 0) {
        throw std::runtime_error("bad magic for " + what);
    }
}

}  // namespace dphn::io
