#include <gtest/gtest.h>

#include <random>

#include "rtpshape/pcap.hpp"
#include "support.hpp"

using namespace rtpshape;
using namespace testing_support;

TEST(Pcap, SingleRtpPacket) {
    auto file = pcap_header();
    pcap_record(file, 1000, 250, udp_frame(rtp_packet(7, 0xDEADBEEF, 0, false, 125), 40000, 5004));
    ASSERT_EQ(file.size(), 24u + 16 + 14 + 20 + 8 + 12 + 125);

    auto traces = import_pcap(file.data());
    ASSERT_EQ(traces.size(), 1u);
    ASSERT_EQ(traces[0].packets.size(), 1u);
    const auto& p = traces[0].packets[0];
    EXPECT_EQ(p.seq, 7);
    EXPECT_EQ(p.ssrc, 0xDEADBEEFu);
    EXPECT_EQ(p.size_bytes, 125u);
    EXPECT_EQ(p.payload_type, 0);
    EXPECT_FALSE(p.marker);
    EXPECT_EQ(p.send_ts_us, 0);
    EXPECT_EQ(p.recv_ts_us, 0);
    EXPECT_TRUE(validate_trace(traces[0]).empty());
}

TEST(Pcap, DnsPacketIsNotRtp) {
    Bytes dns;
    dns.be16(0x1234).be16(0x0100).be16(1).be16(0).be16(0).be16(0);  // version bits 00
    dns.fill(20, 0x03);
    auto file = pcap_header();
    pcap_record(file, 0, 0, udp_frame(dns.data(), 53000, 53));
    EXPECT_TRUE(import_pcap(file.data()).empty());
}

TEST(Pcap, ShortInputIsUnsupportedFormat) {
    const std::vector<std::uint8_t> four{0xd4, 0xc3, 0xb2, 0xa1};
    EXPECT_THROW(import_pcap(four), UnsupportedFormatError);
}

TEST(Pcap, BadMagicAndLinkType) {
    auto file = pcap_header();
    auto bytes = file.data();
    bytes[0] = 0x0a;
    EXPECT_THROW(import_pcap(bytes), UnsupportedFormatError);
    EXPECT_THROW(import_pcap(pcap_header(113).data()), UnsupportedLinkError);
}

TEST(Pcap, TruncatedRecordNamesIndex) {
    auto file = pcap_header();
    pcap_record(file, 0, 0, udp_frame(rtp_packet(1, 5, 96, false, 40), 1, 2));
    pcap_record(file, 0, 20, udp_frame(rtp_packet(2, 5, 96, false, 40), 1, 2));
    auto bytes = file.data();
    bytes.resize(bytes.size() - 3);
    try {
        import_pcap(bytes);
        FAIL() << "expected TruncationError";
    } catch (const TruncationError& e) {
        EXPECT_EQ(e.record(), 1u);
    }
    bytes.resize(24 + 10);
    EXPECT_THROW(import_pcap(bytes), TruncationError);
}

TEST(Pcap, BigEndianCapture) {
    Bytes file;
    file.be32(0xa1b2c3d4).be16(2).be16(4).be32(0).be32(0).be32(65535).be32(1);
    const auto frame = udp_frame(rtp_packet(9, 77, 96, true, 30), 1, 2);
    file.be32(5).be32(10).be32(static_cast<std::uint32_t>(frame.size())).be32(static_cast<std::uint32_t>(frame.size()));
    file.append(frame);
    auto traces = import_pcap(file.data());
    ASSERT_EQ(traces.size(), 1u);
    EXPECT_EQ(traces[0].packets[0].seq, 9);
    EXPECT_TRUE(traces[0].packets[0].marker);
}

TEST(Pcap, HeaderExtensionsAndOptions) {
    // Two CSRCs, a one-word extension and 4 bytes of padding around 50 payload bytes.
    Bytes rtp;
    rtp.u8(0x80 | 0x20 | 0x10 | 2).u8(96).be16(100).be32(0).be32(0x1111);
    rtp.be32(1).be32(2);
    rtp.be16(0xBEDE).be16(1).be32(0);
    rtp.fill(50, 0xCD);
    rtp.fill(3, 0).u8(4);
    auto file = pcap_header();
    pcap_record(file, 0, 0, udp_frame(rtp.data(), 1, 2, 2));
    auto traces = import_pcap(file.data());
    ASSERT_EQ(traces.size(), 1u);
    EXPECT_EQ(traces[0].packets[0].size_bytes, 50u);
}

TEST(Pcap, StreamsSplitBySsrcWithOffsetTimes) {
    auto file = pcap_header();
    pcap_record(file, 10, 0, udp_frame(rtp_packet(1, 0xA, 0, false, 125), 5000, 6000));
    pcap_record(file, 10, 5000, udp_frame(rtp_packet(50, 0xB, 96, false, 900), 5002, 6002));
    pcap_record(file, 10, 20000, udp_frame(rtp_packet(2, 0xA, 0, false, 125), 5000, 6000));
    pcap_record(file, 10, 25000, udp_frame(rtp_packet(51, 0xB, 96, true, 300), 5002, 6002));

    auto traces = import_pcap(file.data());
    ASSERT_EQ(traces.size(), 2u);
    EXPECT_EQ(traces[0].packets[0].ssrc, 0xAu);
    EXPECT_EQ(traces[0].kind, StreamKind::audio);
    EXPECT_EQ(traces[1].kind, StreamKind::video);
    EXPECT_EQ(traces[0].packets[1].recv_ts_us, 20000);
    EXPECT_EQ(traces[1].packets[0].recv_ts_us, 5000);
    EXPECT_EQ(traces[1].packets[1].send_ts_us, 25000);

    auto only_b = import_pcap(file.data(), 6002);
    ASSERT_EQ(only_b.size(), 1u);
    EXPECT_EQ(only_b[0].packets.size(), 2u);
}

TEST(Pcap, RetransmittedDuplicateIsDropped) {
    auto file = pcap_header();
    pcap_record(file, 0, 0, udp_frame(rtp_packet(1, 3, 0, false, 20), 1, 2));
    pcap_record(file, 0, 10, udp_frame(rtp_packet(2, 3, 0, false, 20), 1, 2));
    pcap_record(file, 0, 20, udp_frame(rtp_packet(1, 3, 0, false, 20), 1, 2));
    auto traces = import_pcap(file.data());
    ASSERT_EQ(traces.size(), 1u);
    EXPECT_EQ(traces[0].packets.size(), 2u);
    EXPECT_TRUE(validate_trace(traces[0]).empty());
}

TEST(Pcap, FragmentsAndNonUdpAreSkipped) {
    auto frame = udp_frame(rtp_packet(1, 3, 0, false, 20), 1, 2);
    auto fragmented = frame;
    fragmented[14 + 6] = 0x20;  // more-fragments flag
    auto tcp = frame;
    tcp[14 + 9] = 6;
    auto file = pcap_header();
    pcap_record(file, 0, 0, fragmented);
    pcap_record(file, 0, 1, tcp);
    EXPECT_TRUE(import_pcap(file.data()).empty());
}

TEST(Pcap, RandomBytesNeverEscapeAsUntypedErrors) {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 2000; ++i) {
        std::vector<std::uint8_t> blob(rng() % 300);
        for (auto& b : blob) b = static_cast<std::uint8_t>(rng());
        if (i % 2 == 0 && blob.size() >= 24) {
            const auto header = pcap_header().data();
            std::copy(header.begin(), header.end(), blob.begin());
        }
        try {
            for (const auto& t : import_pcap(blob)) EXPECT_TRUE(validate_trace(t).empty());
        } catch (const Error&) {
        }
    }
}
