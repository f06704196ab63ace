#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rtpshape/compare.hpp"
#include "rtpshape/error.hpp"
#include "rtpshape/metrics.hpp"
#include "rtpshape/rational.hpp"
#include "rtpshape/shape_result.hpp"
#include "rtpshape/trace_csv.hpp"

namespace rtpshape {

inline constexpr std::string_view kDropsCsvHeader = "seq,ssrc,ts_us,reason";
inline constexpr std::string_view kOccupancyCsvHeader = "ts_us,queued_packets,queued_bytes,tokens";
inline constexpr std::string_view kInsufficient = "insufficient-data";
inline constexpr std::string_view kUndefined = "undefined";

/// Ordered `metric,value` lines; values are exact decimals.
using SummaryLines = std::vector<std::pair<std::string, std::string>>;

inline std::string render_summary(const SummaryLines& lines) {
    std::string out = "metric,value\n";
    for (const auto& [k, v] : lines) out += k + "," + v + "\n";
    return out;
}

inline void append_metrics_summary(SummaryLines& out, const MetricsReport& m, const std::string& prefix = "") {
    auto add = [&](const std::string& k, std::string v) { out.emplace_back(prefix + k, std::move(v)); };
    add("packets", std::to_string(m.total_packets));
    add("total_bytes", std::to_string(m.total_bytes));
    add("duration_us", std::to_string(m.duration_us));
    add("jitter_final_us", m.jitter ? to_decimal(m.jitter->final_us()) : std::string(kInsufficient));
    if (m.pdv) {
        add("pdv_min_us", std::to_string(m.pdv->stats.min));
        add("pdv_max_us", std::to_string(m.pdv->stats.max));
        add("pdv_mean_us", to_decimal(m.pdv->stats.mean));
        add("pdv_p50_us", std::to_string(m.pdv->stats.p50));
        add("pdv_p99_us", std::to_string(m.pdv->stats.p99));
    } else {
        for (auto k : {"pdv_min_us", "pdv_max_us", "pdv_mean_us", "pdv_p50_us", "pdv_p99_us"}) {
            add(k, std::string(kInsufficient));
        }
    }
    if (m.loss) {
        add("loss_expected", std::to_string(m.loss->expected));
        add("loss_received", std::to_string(m.loss->received));
        add("loss_count", std::to_string(m.loss->lost));
        add("loss_duplicates", std::to_string(m.loss->duplicates));
        add("loss_rate", to_decimal(m.loss->rate));
    } else {
        for (auto k : {"loss_expected", "loss_received", "loss_count", "loss_duplicates", "loss_rate"}) {
            add(k, std::string(kInsufficient));
        }
    }
}

inline SummaryLines metrics_summary(const MetricsReport& m) {
    SummaryLines lines;
    append_metrics_summary(lines, m);
    return lines;
}

inline SummaryLines comparison_summary(const ComparisonReport& c) {
    SummaryLines lines;
    append_metrics_summary(lines, c.before, "before_");
    append_metrics_summary(lines, c.after, "after_");
    auto pct = [](const std::optional<Rational>& r) { return r ? to_decimal(*r) : std::string(kUndefined); };
    lines.emplace_back("after_settled_pdv_max_us", c.after_settled_pdv ? std::to_string(c.after_settled_pdv->stats.max)
                                                                        : std::string(kInsufficient));
    lines.emplace_back("pdv_max_reduction_pct", pct(c.pdv_max_reduction_pct));
    lines.emplace_back("pdv_max_reduction_overall_pct", pct(c.pdv_max_reduction_overall_pct));
    lines.emplace_back("jitter_final_reduction_pct", pct(c.jitter_final_reduction_pct));
    lines.emplace_back("added_latency_mean_us", to_decimal(c.added_latency.mean_us));
    lines.emplace_back("added_latency_max_us", std::to_string(c.added_latency.max_us));
    lines.emplace_back("drops_introduced", std::to_string(c.drops_introduced));
    return lines;
}

inline std::string jitter_csv(const JitterSeries& series) {
    std::string out = "index,jitter_us\n";
    series.for_each([&](std::size_t i, const Dyadic& j) { out += std::to_string(i) + "," + to_decimal(j) + "\n"; });
    return out;
}

inline std::string pdv_csv(const PdvResult& r) {
    std::string out = "index,pdv_us\n";
    for (std::size_t i = 0; i < r.values.size(); ++i) out += std::to_string(i) + "," + std::to_string(r.values[i]) + "\n";
    return out;
}

inline std::string throughput_csv(const std::vector<ThroughputWindow>& series) {
    std::string out = "window_start_us,bytes\n";
    for (const auto& w : series) out += std::to_string(w.start_us) + "," + std::to_string(w.bytes) + "\n";
    return out;
}

inline std::string drops_csv(const std::vector<DroppedPacket>& dropped) {
    std::string out(kDropsCsvHeader);
    out += "\n";
    for (const auto& d : dropped) {
        out += std::to_string(d.packet.seq) + "," + std::to_string(d.packet.ssrc) + "," +
               std::to_string(d.packet.recv_ts_us.value_or(d.packet.send_ts_us)) + "," +
               std::string(to_string(d.reason)) + "\n";
    }
    return out;
}

inline std::string occupancy_csv(const std::vector<OccupancySample>& samples) {
    std::string out(kOccupancyCsvHeader);
    out += "\n";
    for (const auto& s : samples) {
        out += std::to_string(s.ts_us) + "," + std::to_string(s.queued_packets) + "," +
               std::to_string(s.queued_bytes) + "," + std::to_string(s.tokens) + "\n";
    }
    return out;
}

/// Reads occupancy rows back; the event kind is not part of the file format.
inline std::vector<OccupancySample> read_occupancy_csv(std::string_view text) {
    auto lines = detail::split_lines(text);
    if (lines.empty() || lines.front() != kOccupancyCsvHeader) {
        throw FormatError(1, "expected header '" + std::string(kOccupancyCsvHeader) + "'");
    }
    constexpr auto kMax = static_cast<std::uint64_t>(std::numeric_limits<Micros>::max());
    std::vector<OccupancySample> out;
    out.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto f = detail::split_fields(lines[i]);
        if (f.size() != 4) throw FormatError(i + 1, "expected 4 fields, found " + std::to_string(f.size()));
        OccupancySample s;
        s.ts_us = static_cast<Micros>(detail::parse_field(f[0], kMax, i + 1, 1, "ts_us"));
        s.queued_packets = detail::parse_field(f[1], kMax, i + 1, 2, "queued_packets");
        s.queued_bytes = detail::parse_field(f[2], kMax, i + 1, 3, "queued_bytes");
        s.tokens = detail::parse_field(f[3], kMax, i + 1, 4, "tokens");
        out.push_back(s);
    }
    return out;
}

struct DropRow {
    std::uint16_t seq = 0;
    std::uint32_t ssrc = 0;
    Micros ts_us = 0;
    DropReason reason = DropReason::bucket_full;
};

inline std::vector<DropRow> read_drops_csv(std::string_view text) {
    auto lines = detail::split_lines(text);
    if (lines.empty() || lines.front() != kDropsCsvHeader) {
        throw FormatError(1, "expected header '" + std::string(kDropsCsvHeader) + "'");
    }
    constexpr auto kMax = static_cast<std::uint64_t>(std::numeric_limits<Micros>::max());
    std::vector<DropRow> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto f = detail::split_fields(lines[i]);
        if (f.size() != 4) throw FormatError(i + 1, "expected 4 fields, found " + std::to_string(f.size()));
        DropRow r;
        r.seq = static_cast<std::uint16_t>(detail::parse_field(f[0], 0xFFFF, i + 1, 1, "seq"));
        r.ssrc = static_cast<std::uint32_t>(detail::parse_field(f[1], 0xFFFFFFFF, i + 1, 2, "ssrc"));
        r.ts_us = static_cast<Micros>(detail::parse_field(f[2], kMax, i + 1, 3, "ts_us"));
        try {
            r.reason = parse_drop_reason(f[3]);
        } catch (const ConfigError& e) {
            throw ParseError(i + 1, 4, e.what());
        }
        out.push_back(r);
    }
    return out;
}

} // namespace rtpshape
