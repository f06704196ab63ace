#pragma once

#include <cstdint>
#include <deque>
#include <string>

#include "rtpshape/error.hpp"
#include "rtpshape/media.hpp"
#include "rtpshape/shape_result.hpp"

namespace rtpshape {

struct LeakyBucketConfig {
    std::uint64_t capacity_packets = 15;
    Micros drain_interval_us = 20'000;

    void validate() const {
        if (capacity_packets < 1) throw ConfigError("leaky bucket capacity_packets must be >= 1");
        if (drain_interval_us < 1) throw ConfigError("leaky bucket drain_interval_us must be >= 1");
    }

    friend bool operator==(const LeakyBucketConfig&, const LeakyBucketConfig&) = default;
};

/// Packet-based leaky bucket for constant-size media.
///
/// Packets queue in a bucket of capacity_packets and leave one per drain
/// interval. A packet that finds the bucket empty and the drain clock idle
/// leaves immediately and starts the clock; a tick that finds the bucket empty
/// stops it. Overflow drops the arriving packet. Arrivals must be fed in
/// arrival order; finish() drains whatever is still queued.
class LeakyBucket {
public:
    explicit LeakyBucket(LeakyBucketConfig cfg, StreamKind kind = StreamKind::audio) : cfg_(cfg) {
        cfg_.validate();
        result_.shaped.kind = kind;
    }

    void arrive(const MediaPacket& packet) {
        const Micros t = arrival_of(packet);
        drain_until(t);
        if (queue_.empty() && !clock_running_) {
            queue_.push_back(packet);
            sample(t, ShaperEvent::arrival);
            result_.settled_from = result_.shaped.packets.size();
            depart(t);
            clock_running_ = true;
            next_tick_ = t + cfg_.drain_interval_us;
        } else if (queue_.size() < cfg_.capacity_packets) {
            queue_.push_back(packet);
            sample(t, ShaperEvent::arrival);
        } else {
            result_.dropped.push_back({packet, DropReason::bucket_full});
            sample(t, ShaperEvent::drop);
        }
    }

    /// Emits every departure scheduled at or before t.
    void drain_until(Micros t) {
        while (clock_running_ && next_tick_ <= t) {
            if (queue_.empty()) {
                clock_running_ = false;
                break;
            }
            depart(next_tick_);
            next_tick_ += cfg_.drain_interval_us;
        }
    }

    ShapeResult finish() && {
        while (!queue_.empty()) {
            depart(next_tick_);
            next_tick_ += cfg_.drain_interval_us;
        }
        return std::move(result_);
    }

private:
    void depart(Micros t) {
        MediaPacket p = queue_.front();
        queue_.pop_front();
        queued_bytes_ -= p.size_bytes;
        p.recv_ts_us = t;
        result_.shaped.packets.push_back(p);
        sample(t, ShaperEvent::departure);
    }

    void sample(Micros t, ShaperEvent event) {
        if (event == ShaperEvent::arrival) queued_bytes_ += queue_.back().size_bytes;
        result_.occupancy.push_back({t, queue_.size(), queued_bytes_, 0, event});
    }

    LeakyBucketConfig cfg_;
    std::deque<MediaPacket> queue_;
    std::uint64_t queued_bytes_ = 0;
    bool clock_running_ = false;
    Micros next_tick_ = 0;
    ShapeResult result_;
};

inline ShapeResult leaky_bucket_shape(const StreamTrace& trace, const LeakyBucketConfig& cfg) {
    cfg.validate();
    detail::require_arrivals(trace, "leaky bucket");
    LeakyBucket bucket(cfg, trace.kind);
    for (const auto& p : trace.packets) bucket.arrive(p);
    ShapeResult result = std::move(bucket).finish();
    result.shaped.clock_resolution_us = trace.clock_resolution_us;
    return result;
}

} // namespace rtpshape
