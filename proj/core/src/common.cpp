#include "sne/common.hpp"

#include <charconv>

namespace sne {

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

std::string format_double(double v) {
    // Shortest decimal that round-trips; keeps every serialized float stable
    // across runs and platforms with IEEE-754 doubles.
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace sne
