#include "spectral/text.hpp"

#include "spectral/error.hpp"

#include <charconv>
#include <cmath>

namespace spectral {

std::string format_double(double value) {
    if (value == 0.0) return std::signbit(value) ? "-0" : "0";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw Error("cannot format number");
    return std::string(buf, end);
}

double parse_double(std::string_view token, std::string_view what) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || first == last) {
        throw InputError("invalid " + std::string(what) + " '" + std::string(token) + "'");
    }
    return value;
}

long long parse_integer(std::string_view token, std::string_view what) {
    long long value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
        throw InputError("invalid " + std::string(what) + " '" + std::string(token) + "'");
    }
    return value;
}

std::vector<std::string_view> split_tokens(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

} // namespace spectral
