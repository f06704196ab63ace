#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <variant>
#include <vector>

#include "rtpshape/error.hpp"
#include "rtpshape/media.hpp"
#include "rtpshape/random.hpp"

namespace rtpshape {

struct NoJitter {
    friend bool operator==(const NoJitter&, const NoJitter&) = default;
};

struct UniformJitter {
    Micros lo_us = 0;
    Micros hi_us = 0;
    friend bool operator==(const UniformJitter&, const UniformJitter&) = default;
};

struct ExponentialJitter {
    Micros mean_us = 0;
    friend bool operator==(const ExponentialJitter&, const ExponentialJitter&) = default;
};

using JitterModel = std::variant<NoJitter, UniformJitter, ExponentialJitter>;

/// Loss probability num / den, 0 <= num < den.
struct LossProbability {
    std::uint64_t num = 0;
    std::uint64_t den = 1;
    friend bool operator==(const LossProbability&, const LossProbability&) = default;
};

struct ChannelModel {
    Micros base_delay_us = 0;
    JitterModel jitter = NoJitter{};
    LossProbability loss;
    std::uint64_t seed = 0;

    void validate() const {
        if (base_delay_us < 0) throw ConfigError("channel.base_delay_us must be >= 0");
        if (loss.den == 0 || loss.num >= loss.den) throw ConfigError("channel.loss must be in [0, 1)");
        if (auto* u = std::get_if<UniformJitter>(&jitter)) {
            if (u->lo_us > u->hi_us) throw ConfigError("channel.jitter_lo_us must be <= channel.jitter_hi_us");
        }
        if (auto* e = std::get_if<ExponentialJitter>(&jitter); e && e->mean_us < 0) {
            throw ConfigError("channel.jitter_mean_us must be >= 0");
        }
    }

    friend bool operator==(const ChannelModel&, const ChannelModel&) = default;
};

/// The two independent draws for packet `index`: SplitMix64 seeded with
/// seed XOR index; first output decides loss, second output the delay.
struct ChannelDraw {
    std::uint64_t loss;
    std::uint64_t delay;
};

inline ChannelDraw channel_draw(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 rng(seed ^ index);
    const auto loss = rng.next();
    return {loss, rng.next()};
}

inline Micros sample_jitter(const JitterModel& model, std::uint64_t draw) {
    if (auto* u = std::get_if<UniformJitter>(&model)) {
        return std::max<Micros>(0, uniform_in(draw, u->lo_us, u->hi_us));
    }
    if (auto* e = std::get_if<ExponentialJitter>(&model)) {
        const double x = -static_cast<double>(e->mean_us) * std::log1p(-unit_interval(draw));
        return static_cast<Micros>(std::floor(x));
    }
    return 0;
}

inline bool lost(const LossProbability& p, std::uint64_t draw) {
    return p.num != 0 && scale_draw(draw, p.den) < p.num;
}

/// Applies delay, jitter and independent loss; survivors come back sorted by
/// arrival, ties in original order, so the channel may reorder packets.
inline StreamTrace apply_channel(const StreamTrace& trace, const ChannelModel& ch) {
    ch.validate();
    StreamTrace out;
    out.kind = trace.kind;
    out.clock_resolution_us = trace.clock_resolution_us;
    out.packets.reserve(trace.packets.size());
    for (std::size_t i = 0; i < trace.packets.size(); ++i) {
        const auto draw = channel_draw(ch.seed, i);
        if (lost(ch.loss, draw.loss)) continue;
        MediaPacket p = trace.packets[i];
        p.recv_ts_us = p.send_ts_us + ch.base_delay_us + sample_jitter(ch.jitter, draw.delay);
        out.packets.push_back(p);
    }
    std::stable_sort(out.packets.begin(), out.packets.end(),
                     [](const MediaPacket& a, const MediaPacket& b) { return *a.recv_ts_us < *b.recv_ts_us; });
    return out;
}

} // namespace rtpshape
