#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "rtpshape/error.hpp"
#include "rtpshape/media.hpp"

namespace rtpshape {

// Classic libpcap capture reader: Ethernet II -> IPv4 -> UDP -> RTP.
// Captures only carry arrival times, so imported packets get send_ts_us = recv_ts_us.

namespace pcap_detail {

inline constexpr std::uint32_t kMagic = 0xa1b2c3d4;
inline constexpr std::uint32_t kMagicSwapped = 0xd4c3b2a1;
inline constexpr std::uint32_t kLinkEthernet = 1;
inline constexpr std::size_t kGlobalHeader = 24;
inline constexpr std::size_t kRecordHeader = 16;

inline std::uint16_t be16(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}

inline std::uint32_t be32(std::span<const std::uint8_t> b, std::size_t at) {
    return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) |
           std::uint32_t{b[at + 3]};
}

inline std::uint32_t le32(std::span<const std::uint8_t> b, std::size_t at) {
    return (std::uint32_t{b[at + 3]} << 24) | (std::uint32_t{b[at + 2]} << 16) | (std::uint32_t{b[at + 1]} << 8) |
           std::uint32_t{b[at]};
}

struct RtpView {
    std::uint16_t seq;
    std::uint32_t ssrc;
    std::uint8_t payload_type;
    bool marker;
    std::uint32_t payload_bytes;
};

// Returns nullopt when the datagram is not a well-formed RTP v2 packet with payload.
inline std::optional<RtpView> parse_rtp(std::span<const std::uint8_t> udp_payload) {
    if (udp_payload.size() < 12 || (udp_payload[0] >> 6) != 2) return std::nullopt;
    const std::size_t csrc_count = udp_payload[0] & 0x0F;
    const bool has_extension = (udp_payload[0] & 0x10) != 0;
    const bool has_padding = (udp_payload[0] & 0x20) != 0;
    std::size_t header = 12 + 4 * csrc_count;
    if (has_extension) {
        if (udp_payload.size() < header + 4) return std::nullopt;
        header += 4 + 4 * std::size_t{be16(udp_payload, header + 2)};
    }
    std::size_t padding = 0;
    if (has_padding) {
        padding = udp_payload.back();
        if (padding == 0) return std::nullopt;
    }
    if (udp_payload.size() < header + padding + 1) return std::nullopt;
    return RtpView{
        be16(udp_payload, 2),
        be32(udp_payload, 8),
        static_cast<std::uint8_t>(udp_payload[1] & 0x7F),
        (udp_payload[1] & 0x80) != 0,
        static_cast<std::uint32_t>(udp_payload.size() - header - padding),
    };
}

struct Datagram {
    std::uint16_t src_port;
    std::uint16_t dst_port;
    std::span<const std::uint8_t> payload;
};

// Ethernet II / IPv4 / UDP. Non-matching or fragmented frames yield nullopt.
inline std::optional<Datagram> parse_udp_frame(std::span<const std::uint8_t> frame) {
    constexpr std::size_t kEth = 14;
    if (frame.size() < kEth + 20 || be16(frame, 12) != 0x0800) return std::nullopt;
    auto ip = frame.subspan(kEth);
    if ((ip[0] >> 4) != 4) return std::nullopt;
    const std::size_t ihl = std::size_t{ip[0] & 0x0Fu} * 4;
    const std::size_t total = be16(ip, 2);
    if (ihl < 20 || total < ihl || total > ip.size() || ip[9] != 17) return std::nullopt;
    const std::uint16_t frag = be16(ip, 6);
    if ((frag & 0x2000) != 0 || (frag & 0x1FFF) != 0) return std::nullopt;
    auto udp = ip.subspan(ihl, total - ihl);
    if (udp.size() < 8) return std::nullopt;
    const std::size_t udp_len = be16(udp, 4);
    if (udp_len < 8 || udp_len > udp.size()) return std::nullopt;
    return Datagram{be16(udp, 0), be16(udp, 2), udp.subspan(8, udp_len - 8)};
}

} // namespace pcap_detail

/// One trace per SSRC, in order of first appearance. port_filter keeps only
/// datagrams whose source or destination port matches.
inline std::vector<StreamTrace> import_pcap(std::span<const std::uint8_t> bytes,
                                            std::optional<std::uint16_t> port_filter = std::nullopt) {
    using namespace pcap_detail;
    if (bytes.size() < kGlobalHeader) {
        throw UnsupportedFormatError("input too short for a pcap global header");
    }
    const std::uint32_t magic = le32(bytes, 0);
    bool little;
    if (magic == kMagic) {
        little = true;
    } else if (magic == kMagicSwapped) {
        little = false;
    } else {
        throw UnsupportedFormatError("not a classic pcap file (bad magic)");
    }
    auto u32 = [&](std::size_t at) { return little ? le32(bytes, at) : be32(bytes, at); };
    if (u32(20) != kLinkEthernet) {
        throw UnsupportedLinkError("unsupported link type " + std::to_string(u32(20)) + " (only Ethernet)");
    }

    struct Captured {
        Micros ts;
        std::int64_t ext_seq;
        MediaPacket packet;
    };
    struct Stream {
        std::vector<Captured> packets;
        std::int64_t last_ext = 0;
    };
    std::vector<std::uint32_t> order;
    std::map<std::uint32_t, Stream> streams;
    std::optional<Micros> first_ts;

    std::size_t offset = kGlobalHeader;
    for (std::size_t record = 0; offset < bytes.size(); ++record) {
        if (bytes.size() - offset < kRecordHeader) {
            throw TruncationError(record, "record header truncated");
        }
        const Micros ts = Micros{u32(offset)} * 1'000'000 + Micros{u32(offset + 4)};
        const std::size_t incl = u32(offset + 8);
        const std::size_t orig = u32(offset + 12);
        offset += kRecordHeader;
        if (bytes.size() - offset < incl) {
            throw TruncationError(record, "record data truncated");
        }
        auto frame = bytes.subspan(offset, incl);
        offset += incl;
        if (incl < orig) continue;  // snapped by the capture's snaplen
        auto datagram = parse_udp_frame(frame);
        if (!datagram) continue;
        if (port_filter && datagram->src_port != *port_filter && datagram->dst_port != *port_filter) continue;
        auto rtp = parse_rtp(datagram->payload);
        if (!rtp) continue;

        first_ts = first_ts ? std::min(*first_ts, ts) : ts;
        auto [it, inserted] = streams.try_emplace(rtp->ssrc);
        Stream& s = it->second;
        if (inserted) {
            order.push_back(rtp->ssrc);
            s.last_ext = rtp->seq;
        } else {
            auto prev = static_cast<std::uint16_t>(s.last_ext & 0xFFFF);
            s.last_ext += static_cast<std::int16_t>(static_cast<std::uint16_t>(rtp->seq - prev));
        }
        MediaPacket p;
        p.seq = rtp->seq;
        p.ssrc = rtp->ssrc;
        p.payload_type = rtp->payload_type;
        p.marker = rtp->marker;
        p.size_bytes = rtp->payload_bytes;
        s.packets.push_back({ts, s.last_ext, p});
    }

    std::vector<StreamTrace> traces;
    for (auto ssrc : order) {
        auto& captured = streams[ssrc].packets;
        std::stable_sort(captured.begin(), captured.end(), [](const Captured& a, const Captured& b) {
            return a.ts != b.ts ? a.ts < b.ts : a.ext_seq < b.ext_seq;
        });
        StreamTrace trace;
        std::map<std::uint16_t, std::size_t> kept_at;  // seq -> index in trace
        bool constant_size = true;
        for (auto& c : captured) {
            c.packet.recv_ts_us = c.ts - *first_ts;
            c.packet.send_ts_us = *c.packet.recv_ts_us;
            const std::size_t index = trace.packets.size();
            // Retransmitted duplicates, and same-instant packets whose sequence
            // numbers cannot be put in serial order, are not kept.
            if (auto k = kept_at.find(c.packet.seq); k != kept_at.end() && index - k->second < 65536) continue;
            if (index > 0) {
                const auto& prev = trace.packets.back();
                if (*prev.recv_ts_us == *c.packet.recv_ts_us && seq_before(c.packet.seq, prev.seq)) continue;
                if (prev.size_bytes != c.packet.size_bytes) constant_size = false;
            }
            kept_at[c.packet.seq] = index;
            trace.packets.push_back(c.packet);
        }
        trace.kind = constant_size ? StreamKind::audio : StreamKind::video;
        traces.push_back(std::move(trace));
    }
    return traces;
}

} // namespace rtpshape
