#pragma once

#include <cstdint>
#include <string>

#include "rtpshape/error.hpp"
#include "rtpshape/media.hpp"
#include "rtpshape/random.hpp"

namespace rtpshape {

struct AudioGenConfig {
    Micros ptime_us = 20'000;
    std::uint32_t payload_bytes = 125;
    std::uint32_t ssrc = 0x0A0D1001;
    std::uint8_t payload_type = 96;

    void validate() const {
        if (ptime_us < 1000) throw ConfigError("generator.ptime_us must be >= 1000");
        if (payload_bytes < 1) throw ConfigError("generator.payload_bytes must be >= 1");
        if (payload_type > 127) throw ConfigError("generator.payload_type must be <= 127");
    }

    friend bool operator==(const AudioGenConfig&, const AudioGenConfig&) = default;
};

struct VideoGenConfig {
    std::uint32_t fps = 25;
    std::uint32_t gop = 12;
    std::uint32_t i_frame_bytes = 8000;
    std::uint32_t p_frame_bytes = 1500;
    std::uint32_t size_jitter_pct = 20;
    std::uint32_t mtu_payload_bytes = 1200;
    std::uint32_t ssrc = 0x0B0D1002;
    std::uint8_t payload_type = 97;

    void validate() const {
        if (fps < 1 || fps > 1'000'000) throw ConfigError("generator.fps must be in [1, 1000000]");
        if (gop < 1) throw ConfigError("generator.gop must be >= 1");
        if (p_frame_bytes < 1) throw ConfigError("generator.p_frame_bytes must be >= 1");
        if (i_frame_bytes < p_frame_bytes) throw ConfigError("generator.i_frame_bytes must be >= p_frame_bytes");
        if (size_jitter_pct > 100) throw ConfigError("generator.size_jitter_pct must be in [0, 100]");
        if (mtu_payload_bytes < 64) throw ConfigError("generator.mtu_payload_bytes must be >= 64");
        if (payload_type > 127) throw ConfigError("generator.payload_type must be <= 127");
    }

    Micros frame_time(std::uint64_t k) const { return static_cast<Micros>(k * 1'000'000 / fps); }

    friend bool operator==(const VideoGenConfig&, const VideoGenConfig&) = default;
};

/// Constant-bit-rate audio: one payload_bytes packet every ptime_us in [0, duration_us).
inline StreamTrace generate_audio(const AudioGenConfig& cfg, Micros duration_us) {
    cfg.validate();
    if (duration_us < cfg.ptime_us) {
        throw EmptyTraceError("duration_us " + std::to_string(duration_us) + " is shorter than one packet interval (" +
                              std::to_string(cfg.ptime_us) + " us)");
    }
    StreamTrace trace;
    trace.kind = StreamKind::audio;
    const auto count = static_cast<std::size_t>((duration_us - 1) / cfg.ptime_us + 1);
    trace.packets.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        MediaPacket p;
        p.seq = static_cast<std::uint16_t>(i);
        p.ssrc = cfg.ssrc;
        p.payload_type = cfg.payload_type;
        p.send_ts_us = static_cast<Micros>(i) * cfg.ptime_us;
        p.size_bytes = cfg.payload_bytes;
        trace.packets.push_back(p);
    }
    return trace;
}

/// Frame size for a given mean: mean * (1 + u), u uniform over +/- size_jitter_pct
/// in steps of 0.01 %, at least one byte.
inline std::uint32_t noisy_frame_size(std::uint32_t mean, std::uint32_t jitter_pct, std::uint64_t draw) {
    const std::int64_t spread = std::int64_t{jitter_pct} * 100;
    const std::int64_t bp = uniform_in(draw, -spread, spread);
    const std::int64_t size = std::int64_t{mean} * (10'000 + bp) / 10'000;
    return static_cast<std::uint32_t>(size < 1 ? 1 : size);
}

/// Two-size GOP model of a video stream. Each frame is one back-to-back burst
/// of MTU-sized fragments sharing the frame's send time; the last fragment
/// carries the marker bit.
inline StreamTrace generate_video(const VideoGenConfig& cfg, Micros duration_us, std::uint64_t seed) {
    cfg.validate();
    if (duration_us < cfg.frame_time(1)) {
        throw EmptyTraceError("duration_us " + std::to_string(duration_us) + " is shorter than one frame interval (" +
                              std::to_string(cfg.frame_time(1)) + " us)");
    }
    StreamTrace trace;
    trace.kind = StreamKind::video;
    SplitMix64 rng(seed);
    std::uint16_t seq = 0;
    for (std::uint64_t k = 0; cfg.frame_time(k) < duration_us; ++k) {
        const bool intra = k % cfg.gop == 0;
        std::uint32_t remaining =
            noisy_frame_size(intra ? cfg.i_frame_bytes : cfg.p_frame_bytes, cfg.size_jitter_pct, rng.next());
        while (remaining > 0) {
            MediaPacket p;
            p.seq = seq++;
            p.ssrc = cfg.ssrc;
            p.payload_type = cfg.payload_type;
            p.send_ts_us = cfg.frame_time(k);
            p.size_bytes = remaining < cfg.mtu_payload_bytes ? remaining : cfg.mtu_payload_bytes;
            remaining -= p.size_bytes;
            p.marker = remaining == 0;
            trace.packets.push_back(p);
        }
    }
    return trace;
}

} // namespace rtpshape
