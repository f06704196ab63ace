#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "rtpshape/error.hpp"
#include "rtpshape/media.hpp"
#include "rtpshape/shape_result.hpp"

namespace rtpshape {

/// Exact token rate in tokens (bytes) per second, kept reduced.
struct TokenRate {
    std::uint64_t num = 1;
    std::uint64_t den = 1;

    static TokenRate per_second(std::uint64_t n, std::uint64_t d = 1) {
        if (n == 0 || d == 0) throw ConfigError("token rate must be a positive rational");
        auto g = std::gcd(n, d);
        return {n / g, d / g};
    }

    friend bool operator==(const TokenRate&, const TokenRate&) = default;
};

struct TokenBucketConfig {
    TokenRate rate;
    std::uint64_t capacity_tokens = 1;
    std::optional<std::uint64_t> initial_tokens;  // defaults to capacity_tokens
    std::optional<std::uint64_t> queue_limit_bytes;

    std::uint64_t start_tokens() const { return initial_tokens.value_or(capacity_tokens); }

    void validate() const {
        constexpr std::uint64_t kMaxRateTerm = std::uint64_t{1} << 62;
        if (rate.num == 0 || rate.den == 0) throw ConfigError("token bucket rate must be > 0");
        if (rate.num > kMaxRateTerm || rate.den > kMaxRateTerm) {
            throw ConfigError("token bucket rate numerator/denominator must be < 2^62");
        }
        if (capacity_tokens < 1 || capacity_tokens > 0xFFFFFFFFu) {
            throw ConfigError("token bucket capacity_tokens must be in [1, 2^32)");
        }
        if (start_tokens() > capacity_tokens) {
            throw ConfigError("token bucket initial_tokens must be <= capacity_tokens");
        }
        if (queue_limit_bytes && *queue_limit_bytes < 1) {
            throw ConfigError("token bucket queue_limit_bytes must be >= 1");
        }
        // Refilling a whole bucket must take a representable number of microseconds.
        const __int128 refill_us = static_cast<__int128>(capacity_tokens) * rate.den * 1'000'000 / rate.num;
        if (refill_us > (static_cast<__int128>(1) << 60)) {
            throw ConfigError("token bucket rate too small for its capacity");
        }
    }

    friend bool operator==(const TokenBucketConfig&, const TokenBucketConfig&) = default;
};

/// Byte-based token bucket: one token is one byte.
///
/// Credit is tracked in units of 1 / (rate.den * 1e6) tokens, so accrual over
/// any whole number of microseconds is an exact integer and no fraction of a
/// token is ever lost. A full bucket holds exactly capacity_tokens.
class TokenBucket {
public:
    explicit TokenBucket(TokenBucketConfig cfg, StreamKind kind = StreamKind::video)
        : cfg_(cfg),
          unit_(static_cast<__int128>(cfg.rate.den) * 1'000'000),
          full_(unit_ * static_cast<__int128>(cfg.capacity_tokens)) {
        cfg_.validate();
        credit_ = unit_ * static_cast<__int128>(cfg_.start_tokens());
        result_.shaped.kind = kind;
    }

    void arrive(const MediaPacket& packet) {
        const Micros t = arrival_of(packet);
        if (!started_) {
            started_ = true;
            last_ = t;
        }
        drain_until(t);
        accrue(t);
        if (static_cast<__int128>(packet.size_bytes) * unit_ > full_) {
            result_.dropped.push_back({packet, DropReason::oversize});
            sample(t, ShaperEvent::drop);
            return;
        }
        if (cfg_.queue_limit_bytes && queued_bytes_ + packet.size_bytes > *cfg_.queue_limit_bytes) {
            result_.dropped.push_back({packet, DropReason::queue_full});
            sample(t, ShaperEvent::drop);
            return;
        }
        queue_.push_back(packet);
        queued_bytes_ += packet.size_bytes;
        sample(t, ShaperEvent::arrival);
        drain_until(t);
    }

    /// Emits every departure that becomes affordable at or before t.
    void drain_until(Micros t) {
        while (!queue_.empty()) {
            const Micros ready = head_ready_time();
            if (ready > t) break;
            depart(ready);
        }
    }

    ShapeResult finish() && {
        drain_until(std::numeric_limits<Micros>::max());
        return std::move(result_);
    }

    std::uint64_t tokens() const { return static_cast<std::uint64_t>(credit_ / unit_); }

private:
    void accrue(Micros t) {
        if (t <= last_) return;
        const __int128 grown = credit_ + static_cast<__int128>(t - last_) * cfg_.rate.num;
        credit_ = grown < full_ ? grown : full_;
        last_ = t;
    }

    Micros head_ready_time() const {
        const __int128 need = static_cast<__int128>(queue_.front().size_bytes) * unit_;
        if (credit_ >= need) return last_;
        const __int128 missing = need - credit_;
        const __int128 num = cfg_.rate.num;
        return last_ + static_cast<Micros>((missing + num - 1) / num);
    }

    void depart(Micros t) {
        accrue(t);
        MediaPacket p = queue_.front();
        queue_.pop_front();
        queued_bytes_ -= p.size_bytes;
        credit_ -= static_cast<__int128>(p.size_bytes) * unit_;
        p.recv_ts_us = t;
        result_.shaped.packets.push_back(p);
        sample(t, ShaperEvent::departure);
    }

    void sample(Micros t, ShaperEvent event) {
        result_.occupancy.push_back({t, queue_.size(), queued_bytes_, tokens(), event});
    }

    TokenBucketConfig cfg_;
    __int128 unit_;
    __int128 full_;
    __int128 credit_ = 0;
    Micros last_ = 0;
    bool started_ = false;
    std::deque<MediaPacket> queue_;
    std::uint64_t queued_bytes_ = 0;
    ShapeResult result_;
};

inline ShapeResult token_bucket_shape(const StreamTrace& trace, const TokenBucketConfig& cfg) {
    cfg.validate();
    detail::require_arrivals(trace, "token bucket");
    TokenBucket bucket(cfg, trace.kind);
    for (const auto& p : trace.packets) bucket.arrive(p);
    ShapeResult result = std::move(bucket).finish();
    result.shaped.clock_resolution_us = trace.clock_resolution_us;
    return result;
}

} // namespace rtpshape
