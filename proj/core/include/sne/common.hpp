#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sne {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape/axis disagreements between tensor operands.
class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// Bad user input: malformed specs, out-of-range config values, leaky eval requests.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// An encoder was asked to do something it structurally cannot
// (e.g. an architecture-locked baseline fed a different architecture).
class CapabilityError : public Error {
public:
    explicit CapabilityError(const std::string& msg) : Error(msg) {}
};

// Numerical divergence during optimization.
class DivergenceError : public Error {
public:
    explicit DivergenceError(const std::string& msg) : Error(msg) {}
};

// A NaN/Inf showed up in a forward or backward pass.
class NonFiniteError : public DivergenceError {
public:
    explicit NonFiniteError(const std::string& msg) : DivergenceError(msg) {}
};

// File I/O and container decoding failures.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// FNV-1a, used for config fingerprints and determinism checks.
inline std::uint64_t fnv1a64(const void* bytes, std::size_t n, std::uint64_t seed = 1469598103934665603ULL) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::string& s, std::uint64_t seed = 1469598103934665603ULL) {
    return fnv1a64(s.data(), s.size(), seed);
}

std::string hex64(std::uint64_t v);

// Shortest decimal form that round-trips a double; used everywhere a float
// value ends up in a text file so that reruns are byte-identical.
std::string format_double(double v);

}  // namespace sne
