#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "rtpshape/error.hpp"
#include "rtpshape/media.hpp"

namespace rtpshape {

enum class DropReason {
    bucket_full,  // leaky bucket at capacity
    queue_full,   // token bucket byte queue limit
    oversize,     // token bucket: packet larger than the bucket can ever hold
};

inline std::string_view to_string(DropReason reason) {
    switch (reason) {
    case DropReason::bucket_full: return "bucket full";
    case DropReason::queue_full: return "queue full";
    case DropReason::oversize: return "oversize";
    }
    return "unknown";
}

inline DropReason parse_drop_reason(std::string_view text) {
    if (text == "bucket full") return DropReason::bucket_full;
    if (text == "queue full") return DropReason::queue_full;
    if (text == "oversize") return DropReason::oversize;
    throw ConfigError("unknown drop reason '" + std::string(text) + "'");
}

struct DroppedPacket {
    MediaPacket packet;
    DropReason reason = DropReason::bucket_full;

    friend bool operator==(const DroppedPacket&, const DroppedPacket&) = default;
};

enum class ShaperEvent { arrival, departure, drop };

/// Shaper state right after one event. Between events the state is constant.
struct OccupancySample {
    Micros ts_us = 0;
    std::uint64_t queued_packets = 0;
    std::uint64_t queued_bytes = 0;
    std::uint64_t tokens = 0;
    ShaperEvent event = ShaperEvent::arrival;

    friend bool operator==(const OccupancySample&, const OccupancySample&) = default;
};

struct ShapeResult {
    /// Input packets in FIFO order, recv_ts_us overwritten with the departure time.
    StreamTrace shaped;
    std::vector<DroppedPacket> dropped;
    std::vector<OccupancySample> occupancy;
    /// Index into shaped.packets where the shaper reached steady state. For the
    /// leaky bucket this is the last restart of an idle drain clock; every later
    /// departure is exactly one drain interval after its predecessor. Token
    /// bucket results report 0.
    std::size_t settled_from = 0;

    friend bool operator==(const ShapeResult&, const ShapeResult&) = default;
};

namespace detail {

inline void require_arrivals(const StreamTrace& trace, std::string_view shaper) {
    for (std::size_t i = 0; i < trace.packets.size(); ++i) {
        if (!trace.packets[i].recv_ts_us) {
            throw PreconditionError(std::string(shaper) + " needs arrival timestamps (recv_ts_us); packet " +
                                    std::to_string(i) + " has none");
        }
        if (i > 0 && *trace.packets[i].recv_ts_us < *trace.packets[i - 1].recv_ts_us) {
            throw PreconditionError(std::string(shaper) + " needs packets in arrival order; packet " +
                                    std::to_string(i) + " arrives earlier than its predecessor");
        }
    }
}

} // namespace detail

} // namespace rtpshape
