#ifndef TOPOIMG_TEXTIO_HPP
#define TOPOIMG_TEXTIO_HPP

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "topoimg/types.hpp"

namespace topoimg {

// Shortest decimal representation that round-trips bit-exactly.
inline std::string fmt_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw InputError("malformed number: '" + std::string(s) + "'");
    }
    return v;
}

inline long parse_long(std::string_view s) {
    long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw InputError("malformed integer: '" + std::string(s) + "'");
    }
    return v;
}

// Whitespace/comma tokenizer for columnar text rows.
std::vector<std::string_view> split_fields(std::string_view line);

}  // namespace topoimg

#endif
