#pragma once

#include <charconv>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "rtpshape/error.hpp"
#include "rtpshape/media.hpp"

namespace rtpshape {

inline constexpr std::string_view kTraceCsvHeader = "seq,ssrc,payload_type,marker,send_ts_us,recv_ts_us,size_bytes";

inline std::string write_trace_csv(const StreamTrace& trace) {
    std::string out;
    out.reserve(32 + trace.packets.size() * 40);
    out.append(kTraceCsvHeader);
    out.push_back('\n');
    for (const auto& p : trace.packets) {
        out.append(std::to_string(p.seq)).push_back(',');
        out.append(std::to_string(p.ssrc)).push_back(',');
        out.append(std::to_string(p.payload_type)).push_back(',');
        out.push_back(p.marker ? '1' : '0');
        out.push_back(',');
        out.append(std::to_string(p.send_ts_us)).push_back(',');
        if (p.recv_ts_us) out.append(std::to_string(*p.recv_ts_us));
        out.push_back(',');
        out.append(std::to_string(p.size_bytes)).push_back('\n');
    }
    return out;
}

namespace detail {

// Splits on LF. A missing final newline is accepted; a trailing empty line is not a row.
inline std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

inline std::uint64_t parse_field(std::string_view field, std::uint64_t max, std::size_t row, std::size_t column,
                                 std::string_view name) {
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec == std::errc::invalid_argument || ptr != field.data() + field.size()) {
        throw ParseError(row, column, std::string(name) + " is not a non-negative integer: '" + std::string(field) + "'");
    }
    if (ec == std::errc::result_out_of_range || value > max) {
        throw ParseError(row, column, std::string(name) + " out of range: '" + std::string(field) + "'");
    }
    return value;
}

} // namespace detail

/// Inverse of write_trace_csv. Row numbers in errors are file line numbers.
inline StreamTrace read_trace_csv(std::string_view bytes, StreamKind kind, ValidationOptions options = {}) {
    auto lines = detail::split_lines(bytes);
    if (lines.empty() || lines.front() != kTraceCsvHeader) {
        throw FormatError(1, "expected header '" + std::string(kTraceCsvHeader) + "'");
    }
    constexpr auto kMaxTs = static_cast<std::uint64_t>(std::numeric_limits<Micros>::max());
    StreamTrace trace;
    trace.kind = kind;
    trace.packets.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t row = i + 1;
        auto fields = detail::split_fields(lines[i]);
        if (fields.size() != 7) {
            throw FormatError(row, "expected 7 fields, found " + std::to_string(fields.size()));
        }
        MediaPacket p;
        p.seq = static_cast<std::uint16_t>(detail::parse_field(fields[0], 0xFFFF, row, 1, "seq"));
        p.ssrc = static_cast<std::uint32_t>(detail::parse_field(fields[1], 0xFFFFFFFF, row, 2, "ssrc"));
        p.payload_type = static_cast<std::uint8_t>(detail::parse_field(fields[2], 127, row, 3, "payload_type"));
        p.marker = detail::parse_field(fields[3], 1, row, 4, "marker") == 1;
        p.send_ts_us = static_cast<Micros>(detail::parse_field(fields[4], kMaxTs, row, 5, "send_ts_us"));
        if (!fields[5].empty()) {
            p.recv_ts_us = static_cast<Micros>(detail::parse_field(fields[5], kMaxTs, row, 6, "recv_ts_us"));
        }
        p.size_bytes = static_cast<std::uint32_t>(detail::parse_field(fields[6], 0xFFFFFFFF, row, 7, "size_bytes"));
        trace.packets.push_back(p);
    }
    require_valid(trace, options);
    return trace;
}

} // namespace rtpshape
