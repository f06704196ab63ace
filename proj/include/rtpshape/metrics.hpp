#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rtpshape/error.hpp"
#include "rtpshape/media.hpp"
#include "rtpshape/rational.hpp"

namespace rtpshape {

namespace detail {

inline void require_timestamps(const StreamTrace& trace, const char* metric) {
    for (std::size_t i = 0; i < trace.packets.size(); ++i) {
        if (!trace.packets[i].recv_ts_us) {
            throw PreconditionError(std::string(metric) + " needs receive timestamps; packet " + std::to_string(i) +
                                    " has none");
        }
    }
}

} // namespace detail

/// RFC 3550 interarrival jitter in microseconds, kept exact.
///
/// With D_j = (R_j - R_{j-1}) - (S_j - S_{j-1}) and J_j = J_{j-1} + (|D_j| - J_{j-1}) / 16,
/// J_j * 16^j is an integer N_j = 15 N_{j-1} + |D_j| 16^{j-1}. The series stores
/// |D_j| and regenerates the exact points on demand; holding every point at
/// once would cost O(n^2) bits.
class JitterSeries {
public:
    explicit JitterSeries(std::vector<Micros> abs_transit_deltas) : deltas_(std::move(abs_transit_deltas)) {
        for_each([this](std::size_t, const Dyadic& j) { final_ = j; });
    }

    /// Number of points: one per packet after the first.
    std::size_t size() const { return deltas_.size(); }

    const Dyadic& final_us() const { return final_; }

    const std::vector<Micros>& abs_transit_deltas() const { return deltas_; }

    /// Calls f(packet_index, jitter_after_that_packet) for j = 1 .. n-1.
    template <class F>
    void for_each(F&& f) const {
        Dyadic j;
        BigInt weight = 1;  // 16^(j-1)
        for (std::size_t k = 0; k < deltas_.size(); ++k) {
            j.numerator = 15 * j.numerator + weight * deltas_[k];
            j.shift += 4;
            weight <<= 4;
            f(k + 1, static_cast<const Dyadic&>(j));
        }
    }

    std::vector<Dyadic> values() const {
        std::vector<Dyadic> out;
        out.reserve(size());
        for_each([&](std::size_t, const Dyadic& j) { out.push_back(j); });
        return out;
    }

private:
    std::vector<Micros> deltas_;
    Dyadic final_;
};

inline JitterSeries interarrival_jitter(const StreamTrace& trace) {
    if (trace.packets.size() < 2) {
        throw InsufficientDataError("jitter", "needs at least 2 packets, have " + std::to_string(trace.packets.size()));
    }
    detail::require_timestamps(trace, "jitter");
    std::vector<Micros> deltas;
    deltas.reserve(trace.packets.size() - 1);
    for (std::size_t i = 1; i < trace.packets.size(); ++i) {
        const auto& a = trace.packets[i - 1];
        const auto& b = trace.packets[i];
        const Micros d = (*b.recv_ts_us - *a.recv_ts_us) - (b.send_ts_us - a.send_ts_us);
        deltas.push_back(d < 0 ? -d : d);
    }
    return JitterSeries(std::move(deltas));
}

struct PdvStats {
    Micros min = 0;
    Micros max = 0;
    Rational mean = 0;
    Micros p50 = 0;
    Micros p99 = 0;
};

struct PdvResult {
    std::vector<Micros> values;  // per packet, trace order
    PdvStats stats;
};

/// Nearest-rank percentile of sorted data: element ceil(p/100 * n), 1-based.
inline Micros nearest_rank(const std::vector<Micros>& sorted, unsigned percent) {
    const std::size_t n = sorted.size();
    std::size_t rank = (percent * n + 99) / 100;
    if (rank < 1) rank = 1;
    return sorted[rank - 1];
}

/// Min-referenced PDV: one-way delay minus the smallest one-way delay in the trace.
inline PdvResult pdv(const StreamTrace& trace) {
    if (trace.packets.empty()) throw InsufficientDataError("pdv", "needs at least 1 packet");
    detail::require_timestamps(trace, "pdv");
    PdvResult r;
    r.values.reserve(trace.packets.size());
    Micros min_delay = *trace.packets.front().recv_ts_us - trace.packets.front().send_ts_us;
    for (const auto& p : trace.packets) min_delay = std::min(min_delay, *p.recv_ts_us - p.send_ts_us);
    BigInt sum = 0;
    for (const auto& p : trace.packets) {
        r.values.push_back(*p.recv_ts_us - p.send_ts_us - min_delay);
        sum += r.values.back();
    }
    auto sorted = r.values;
    std::sort(sorted.begin(), sorted.end());
    r.stats.min = sorted.front();
    r.stats.max = sorted.back();
    r.stats.mean = Rational(sum, BigInt(sorted.size()));
    r.stats.p50 = nearest_rank(sorted, 50);
    r.stats.p99 = nearest_rank(sorted, 99);
    return r;
}

struct LossResult {
    std::uint64_t expected = 0;
    std::uint64_t received = 0;  // distinct sequence numbers
    std::uint64_t lost = 0;
    std::uint64_t duplicates = 0;
    Rational rate = 0;
};

/// Wrap-aware loss count over the extended sequence numbers seen in trace order.
inline LossResult loss(const StreamTrace& trace) {
    if (trace.packets.empty()) throw InsufficientDataError("loss", "needs at least 1 packet");
    std::set<std::int64_t> seen;
    std::int64_t ext = trace.packets.front().seq;
    std::int64_t lo = ext;
    std::int64_t hi = ext;
    std::uint16_t prev = trace.packets.front().seq;
    for (const auto& p : trace.packets) {
        ext += static_cast<std::int16_t>(static_cast<std::uint16_t>(p.seq - prev));
        prev = p.seq;
        lo = std::min(lo, ext);
        hi = std::max(hi, ext);
        seen.insert(ext);
    }
    LossResult r;
    r.expected = static_cast<std::uint64_t>(hi - lo + 1);
    r.received = seen.size();
    r.lost = r.expected - r.received;
    r.duplicates = trace.packets.size() - seen.size();
    r.rate = Rational(BigInt(r.lost), BigInt(r.expected));
    return r;
}

struct ThroughputWindow {
    Micros start_us = 0;
    std::uint64_t bytes = 0;

    friend bool operator==(const ThroughputWindow&, const ThroughputWindow&) = default;
};

/// Bytes per half-open window [k*w, (k+1)*w) over the active timestamp, from
/// the first occupied window to the last, empty windows included.
inline std::vector<ThroughputWindow> throughput(const StreamTrace& trace, Micros window_us) {
    if (window_us < 1) throw ConfigError("throughput window must be >= 1 us");
    std::vector<ThroughputWindow> out;
    if (trace.packets.empty()) return out;
    const auto ts = trace.active_timestamps();
    const auto [lo, hi] = std::minmax_element(ts.begin(), ts.end());
    const Micros first = *lo / window_us;
    const Micros last = *hi / window_us;
    out.resize(static_cast<std::size_t>(last - first + 1));
    for (std::size_t k = 0; k < out.size(); ++k) out[k].start_us = (first + static_cast<Micros>(k)) * window_us;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        out[static_cast<std::size_t>(ts[i] / window_us - first)].bytes += trace.packets[i].size_bytes;
    }
    return out;
}

struct MetricsReport {
    std::optional<JitterSeries> jitter;
    std::optional<PdvResult> pdv;
    std::optional<LossResult> loss;
    std::vector<ThroughputWindow> throughput;
    std::uint64_t total_bytes = 0;
    std::uint64_t total_packets = 0;
    Micros duration_us = 0;
    /// Metrics that could not be computed for lack of packets.
    std::vector<std::string> insufficient;
};

/// Every metric the trace supports. Missing timestamps still throw.
inline MetricsReport measure(const StreamTrace& trace, Micros window_us) {
    MetricsReport r;
    auto attempt = [&](auto&& compute) {
        try {
            compute();
        } catch (const InsufficientDataError& e) {
            r.insufficient.push_back(e.metric());
        }
    };
    attempt([&] { r.jitter.emplace(interarrival_jitter(trace)); });
    attempt([&] { r.pdv.emplace(pdv(trace)); });
    attempt([&] { r.loss.emplace(loss(trace)); });
    r.throughput = throughput(trace, window_us);
    r.total_packets = trace.packets.size();
    for (const auto& p : trace.packets) r.total_bytes += p.size_bytes;
    if (!trace.packets.empty()) {
        const auto ts = trace.active_timestamps();
        r.duration_us = *std::max_element(ts.begin(), ts.end()) - *std::min_element(ts.begin(), ts.end());
    }
    return r;
}

/// Frame-level summary used to size shapers from the traffic itself. A frame
/// is a distinct send timestamp; a trace of F frames spanning S microseconds
/// covers F mean frame intervals, i.e. S * F / (F - 1) microseconds.
struct StreamProfile {
    std::uint64_t frames = 0;
    std::uint64_t total_bytes = 0;
    Micros covered_us = 0;  // rounded down; the rate below is exact
    Rational mean_rate_bytes_per_s = 0;
    Rational mean_frame_bytes = 0;
};

inline StreamProfile stream_profile(const StreamTrace& trace) {
    StreamProfile prof;
    std::set<Micros> sends;
    for (const auto& p : trace.packets) {
        sends.insert(p.send_ts_us);
        prof.total_bytes += p.size_bytes;
    }
    prof.frames = sends.size();
    if (prof.frames < 2) {
        throw InsufficientDataError("stream profile", "needs at least 2 distinct send times");
    }
    const BigInt span = *sends.rbegin() - *sends.begin();
    const BigInt f = prof.frames;
    prof.covered_us = static_cast<Micros>(span * f / (f - 1));
    prof.mean_rate_bytes_per_s = Rational(BigInt(prof.total_bytes) * 1'000'000 * (f - 1), span * f);
    prof.mean_frame_bytes = Rational(BigInt(prof.total_bytes), f);
    return prof;
}

} // namespace rtpshape
