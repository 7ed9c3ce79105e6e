#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <string>

namespace nrx {

// Fixed 4-d layout: (batch, height = OFDM symbols, width = subcarriers, channels).
// Scalars are represented as (1,1,1,1).
struct Shape {
    std::int64_t b = 0;
    std::int64_t h = 0;
    std::int64_t w = 0;
    std::int64_t c = 0;

    std::int64_t numel() const { return b * h * w * c; }
    std::int64_t spatial() const { return b * h * w; }

    bool operator==(const Shape&) const = default;

    std::string str() const {
        return "(" + std::to_string(b) + "," + std::to_string(h) + "," +
               std::to_string(w) + "," + std::to_string(c) + ")";
    }
};

inline std::ostream& operator<<(std::ostream& os, const Shape& s) { return os << s.str(); }

inline std::int64_t flat_index(const Shape& s, std::int64_t b, std::int64_t h,
                               std::int64_t w, std::int64_t c) {
    return ((b * s.h + h) * s.w + w) * s.c + c;
}

}  // namespace nrx
