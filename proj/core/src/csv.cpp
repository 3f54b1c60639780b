#include "mmcf/csv.hpp"

#include <charconv>
#include <stdexcept>
#include <string>

namespace mmcf {

namespace {

template <typename T>
std::string shortest(T v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <typename T>
T parse(std::string_view text, const char* what) {
    T v{};
    const auto* end = text.data() + text.size();
    auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) {
        throw std::runtime_error(std::string("cannot parse ") + what + " from '" + std::string(text) + "'");
    }
    return v;
}

}  // namespace

std::string format_number(double v) { return shortest(v); }
std::string format_number(float v) { return shortest(v); }

double parse_double(std::string_view text) { return parse<double>(text, "number"); }
float parse_float(std::string_view text) { return parse<float>(text, "number"); }
long long parse_int(std::string_view text) { return parse<long long>(text, "integer"); }

std::vector<std::string_view> split_csv(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

}  // namespace mmcf
