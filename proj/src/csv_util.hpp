#pragma once

// Minimal CSV helpers shared by the loaders. Fields are RFC 4180-ish:
// optional double quotes with "" escapes, no embedded newlines.

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace washtrade::csv {

inline std::string_view trim_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

/// Splits one line into fields. Returns false on an unterminated quote.
inline bool split(std::string_view line, std::vector<std::string>& out) {
    out.clear();
    std::string field;
    std::size_t i = 0;
    while (true) {
        field.clear();
        if (i < line.size() && line[i] == '"') {
            ++i;
            bool closed = false;
            while (i < line.size()) {
                if (line[i] == '"') {
                    if (i + 1 < line.size() && line[i + 1] == '"') {
                        field += '"';
                        i += 2;
                    } else {
                        ++i;
                        closed = true;
                        break;
                    }
                } else {
                    field += line[i++];
                }
            }
            if (!closed) return false;
            while (i < line.size() && line[i] != ',') field += line[i++];
        } else {
            const std::size_t end = line.find(',', i);
            const std::size_t stop = end == std::string_view::npos ? line.size() : end;
            field.assign(line.substr(i, stop - i));
            i = stop;
        }
        out.push_back(field);
        if (i >= line.size()) break;
        ++i;  // skip comma
        if (i == line.size()) {
            out.emplace_back();
            break;
        }
    }
    return true;
}

/// Quotes a field only when needed.
inline std::string escape(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
    Int v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

/// Iterates over non-empty lines; `fn(line, line_number)` with 1-based numbers.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        ++line_no;
        std::string_view line = trim_cr(text.substr(pos, end - pos));
        if (!line.empty()) fn(line, line_no);
        pos = end + 1;
    }
}

}  // namespace washtrade::csv
