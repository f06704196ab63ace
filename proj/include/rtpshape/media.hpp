#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rtpshape/error.hpp"

namespace rtpshape {

/// Integer microseconds. Every timestamp in the library uses this unit.
using Micros = std::int64_t;

enum class StreamKind { audio, video };

inline std::string_view to_string(StreamKind kind) {
    return kind == StreamKind::audio ? "audio" : "video";
}

inline StreamKind parse_stream_kind(std::string_view text) {
    if (text == "audio") return StreamKind::audio;
    if (text == "video") return StreamKind::video;
    throw ConfigError("unknown stream kind '" + std::string(text) + "' (expected audio or video)");
}

struct MediaPacket {
    std::uint16_t seq = 0;
    std::uint32_t ssrc = 0;
    std::uint8_t payload_type = 0;  // 7 bits
    bool marker = false;
    Micros send_ts_us = 0;
    std::optional<Micros> recv_ts_us;
    std::uint32_t size_bytes = 1;

    friend bool operator==(const MediaPacket&, const MediaPacket&) = default;
};

/// Arrival time as seen by a receiver-side stage. Callers check presence first.
inline Micros arrival_of(const MediaPacket& p) { return *p.recv_ts_us; }

/// RFC 1982 serial-number ordering for 16-bit sequence numbers.
inline bool seq_before(std::uint16_t a, std::uint16_t b) {
    return static_cast<std::int16_t>(static_cast<std::uint16_t>(b - a)) > 0;
}

struct StreamTrace {
    StreamKind kind = StreamKind::audio;
    std::vector<MediaPacket> packets;
    Micros clock_resolution_us = 1;

    /// True when every packet carries an arrival time (vacuously for an empty trace).
    bool all_received() const {
        for (const auto& p : packets) {
            if (!p.recv_ts_us) return false;
        }
        return true;
    }

    /// recv_ts_us when all packets have it, send_ts_us otherwise.
    std::vector<Micros> active_timestamps() const {
        std::vector<Micros> ts;
        ts.reserve(packets.size());
        bool received = all_received();
        for (const auto& p : packets) {
            ts.push_back(received ? *p.recv_ts_us : p.send_ts_us);
        }
        return ts;
    }

    friend bool operator==(const StreamTrace&, const StreamTrace&) = default;
};

enum class ViolationKind {
    unsorted,
    negative_delay,
    zero_size,
    negative_timestamp,
    payload_type_range,
    duplicate_id,
    clock_resolution,
};

inline std::string_view to_string(ViolationKind kind) {
    switch (kind) {
    case ViolationKind::unsorted: return "unsorted";
    case ViolationKind::negative_delay: return "negative delay";
    case ViolationKind::zero_size: return "zero size";
    case ViolationKind::negative_timestamp: return "negative timestamp";
    case ViolationKind::payload_type_range: return "payload type out of range";
    case ViolationKind::duplicate_id: return "duplicate (ssrc, seq)";
    case ViolationKind::clock_resolution: return "clock resolution";
    }
    return "unknown";
}

struct Violation {
    std::size_t index = 0;
    ViolationKind kind = ViolationKind::unsorted;

    std::string describe() const {
        return "packet " + std::to_string(index) + ": " + std::string(to_string(kind));
    }

    friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationOptions {
    /// Require equal timestamps to be in sequence-number order. Shaped output
    /// keeps FIFO order instead, so readers of shaper output switch this off.
    bool seq_tiebreak = true;
};

inline std::vector<Violation> validate_trace(const StreamTrace& trace, ValidationOptions options = {}) {
    std::vector<Violation> out;
    if (trace.clock_resolution_us < 1) {
        out.push_back({0, ViolationKind::clock_resolution});
    }
    const auto ts = trace.active_timestamps();
    constexpr std::size_t kSeqWindow = 65536;
    std::unordered_map<std::uint64_t, std::size_t> last_seen;
    for (std::size_t i = 0; i < trace.packets.size(); ++i) {
        const auto& p = trace.packets[i];
        if (p.size_bytes < 1) out.push_back({i, ViolationKind::zero_size});
        if (p.payload_type > 127) out.push_back({i, ViolationKind::payload_type_range});
        if (p.send_ts_us < 0 || (p.recv_ts_us && *p.recv_ts_us < 0)) {
            out.push_back({i, ViolationKind::negative_timestamp});
        }
        if (p.recv_ts_us && *p.recv_ts_us < p.send_ts_us) {
            out.push_back({i, ViolationKind::negative_delay});
        }
        if (i > 0) {
            const auto& prev = trace.packets[i - 1];
            if (ts[i] < ts[i - 1] ||
                (options.seq_tiebreak && ts[i] == ts[i - 1] && seq_before(p.seq, prev.seq))) {
                out.push_back({i, ViolationKind::unsorted});
            }
        }
        const std::uint64_t id = (std::uint64_t{p.ssrc} << 16) | p.seq;
        auto [it, inserted] = last_seen.try_emplace(id, i);
        if (!inserted) {
            if (i - it->second < kSeqWindow) {
                out.push_back({i, ViolationKind::duplicate_id});
            }
            it->second = i;
        }
    }
    return out;
}

/// Throws ValidationError listing every violation.
inline void require_valid(const StreamTrace& trace, ValidationOptions options = {}) {
    auto violations = validate_trace(trace, options);
    if (violations.empty()) return;
    std::vector<std::string> details;
    details.reserve(violations.size());
    for (const auto& v : violations) details.push_back(v.describe());
    std::string what = "invalid trace: " + details.front();
    if (details.size() > 1) what += " (+" + std::to_string(details.size() - 1) + " more)";
    throw ValidationError(what, std::move(details));
}

} // namespace rtpshape
