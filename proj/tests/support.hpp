#pragma once

// Shared test helpers: seeded random traces and hand-assembled capture bytes.

#include <cstdint>
#include <random>
#include <vector>

#include "rtpshape/media.hpp"
#include "rtpshape/shape_result.hpp"

namespace testing_support {

using rtpshape::MediaPacket;
using rtpshape::Micros;
using rtpshape::StreamTrace;

/// Packets with seq = index, arrivals non-decreasing with frequent ties.
inline StreamTrace random_arrivals(std::mt19937_64& rng, std::size_t n, Micros max_gap, std::uint32_t max_size) {
    StreamTrace t;
    t.kind = rtpshape::StreamKind::video;
    std::uniform_int_distribution<Micros> gap(0, max_gap);
    std::uniform_int_distribution<std::uint32_t> size(1, max_size);
    std::bernoulli_distribution burst(0.3);
    Micros now = std::uniform_int_distribution<Micros>(0, 1000)(rng);
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && !burst(rng)) now += gap(rng);
        MediaPacket p;
        p.seq = static_cast<std::uint16_t>(i);
        p.ssrc = 42;
        p.payload_type = 96;
        p.send_ts_us = now;
        p.recv_ts_us = now;
        p.size_bytes = size(rng);
        t.packets.push_back(p);
    }
    return t;
}

/// Any valid trace: random ids, optional receive times, wrap-around sequence numbers.
inline StreamTrace random_valid_trace(std::mt19937_64& rng, std::size_t max_packets) {
    StreamTrace t;
    t.kind = rng() % 2 ? rtpshape::StreamKind::audio : rtpshape::StreamKind::video;
    const std::size_t n = std::uniform_int_distribution<std::size_t>(0, max_packets)(rng);
    const bool received = rng() % 2 == 0;
    auto seq = static_cast<std::uint16_t>(rng());
    const auto ssrc = static_cast<std::uint32_t>(rng());
    Micros send = static_cast<Micros>(rng() % 1'000'000'000'000ull);
    for (std::size_t i = 0; i < n; ++i) {
        MediaPacket p;
        p.seq = seq++;
        p.ssrc = ssrc;
        p.payload_type = static_cast<std::uint8_t>(rng() % 128);
        p.marker = rng() % 2 == 0;
        send += static_cast<Micros>(rng() % 40'000);
        p.send_ts_us = send;
        if (received) p.recv_ts_us = send;  // constant delay keeps arrival order
        p.size_bytes = 1 + static_cast<std::uint32_t>(rng() % 0xFFFFFFFEu);
        t.packets.push_back(p);
    }
    if (received) {
        const Micros delay = static_cast<Micros>(rng() % 500'000);
        for (auto& p : t.packets) *p.recv_ts_us += delay;
    }
    return t;
}

/// Departure per input index (-1 when dropped); inputs must have seq = index.
inline std::vector<std::int64_t> departures_by_index(const rtpshape::ShapeResult& r, std::size_t n) {
    std::vector<std::int64_t> d(n, -1);
    for (const auto& p : r.shaped.packets) d[p.seq] = *p.recv_ts_us;
    return d;
}

inline std::vector<std::size_t> dropped_indices(const rtpshape::ShapeResult& r) {
    std::vector<std::size_t> out;
    for (const auto& d : r.dropped) out.push_back(d.packet.seq);
    return out;
}

// --- capture assembly -------------------------------------------------------

class Bytes {
public:
    Bytes& u8(std::uint8_t v) {
        data_.push_back(v);
        return *this;
    }
    Bytes& be16(std::uint16_t v) { return u8(static_cast<std::uint8_t>(v >> 8)).u8(static_cast<std::uint8_t>(v)); }
    Bytes& be32(std::uint32_t v) { return be16(static_cast<std::uint16_t>(v >> 16)).be16(static_cast<std::uint16_t>(v)); }
    Bytes& le16(std::uint16_t v) { return u8(static_cast<std::uint8_t>(v)).u8(static_cast<std::uint8_t>(v >> 8)); }
    Bytes& le32(std::uint32_t v) { return le16(static_cast<std::uint16_t>(v)).le16(static_cast<std::uint16_t>(v >> 16)); }
    Bytes& fill(std::size_t n, std::uint8_t v) {
        data_.insert(data_.end(), n, v);
        return *this;
    }
    Bytes& append(const std::vector<std::uint8_t>& more) {
        data_.insert(data_.end(), more.begin(), more.end());
        return *this;
    }
    const std::vector<std::uint8_t>& data() const { return data_; }
    std::size_t size() const { return data_.size(); }

private:
    std::vector<std::uint8_t> data_;
};

/// Little-endian classic pcap global header, Ethernet link type unless overridden.
inline Bytes pcap_header(std::uint32_t link_type = 1) {
    Bytes b;
    b.le32(0xa1b2c3d4).le16(2).le16(4).le32(0).le32(0).le32(65535).le32(link_type);
    return b;
}

/// Ethernet II + IPv4 (20-byte header unless extra option words are given) + UDP around a payload.
inline std::vector<std::uint8_t> udp_frame(const std::vector<std::uint8_t>& payload, std::uint16_t src_port,
                                           std::uint16_t dst_port, std::size_t ip_option_words = 0) {
    Bytes b;
    b.fill(6, 0x02).fill(6, 0x04).be16(0x0800);
    const std::size_t ihl = 5 + ip_option_words;
    const auto total = static_cast<std::uint16_t>(ihl * 4 + 8 + payload.size());
    b.u8(static_cast<std::uint8_t>(0x40 | ihl)).u8(0).be16(total).be16(0x1234).be16(0x4000);
    b.u8(64).u8(17).be16(0).be32(0x0A000001).be32(0x0A000002);
    b.fill(ip_option_words * 4, 0x01);
    b.be16(src_port).be16(dst_port).be16(static_cast<std::uint16_t>(8 + payload.size())).be16(0);
    b.append(payload);
    return b.data();
}

inline std::vector<std::uint8_t> rtp_packet(std::uint16_t seq, std::uint32_t ssrc, std::uint8_t pt, bool marker,
                                            std::size_t payload_bytes) {
    Bytes b;
    b.u8(0x80).u8(static_cast<std::uint8_t>((marker ? 0x80 : 0) | pt)).be16(seq).be32(160u * seq).be32(ssrc);
    b.fill(payload_bytes, 0xAB);
    return b.data();
}

inline void pcap_record(Bytes& file, std::uint32_t sec, std::uint32_t usec, const std::vector<std::uint8_t>& frame) {
    file.le32(sec).le32(usec).le32(static_cast<std::uint32_t>(frame.size())).le32(static_cast<std::uint32_t>(frame.size()));
    file.append(frame);
}

} // namespace testing_support
