#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>
#include <vector>

#include "rtpshape/error.hpp"
#include "rtpshape/media.hpp"
#include "rtpshape/metrics.hpp"
#include "rtpshape/rational.hpp"
#include "rtpshape/shape_result.hpp"

namespace rtpshape {

struct AddedLatency {
    Rational mean_us = 0;
    Micros max_us = 0;
};

struct ComparisonReport {
    MetricsReport before;
    MetricsReport after;
    /// PDV of the shaped packets from settled_from on, referenced to their own minimum.
    std::optional<PdvResult> after_settled_pdv;
    /// Reductions are nullopt ("undefined") when the before quantity is zero.
    std::optional<Rational> pdv_max_reduction_pct;          // before vs settled after
    std::optional<Rational> pdv_max_reduction_overall_pct;  // before vs whole after
    std::optional<Rational> jitter_final_reduction_pct;
    AddedLatency added_latency;
    std::uint64_t drops_introduced = 0;
};

namespace detail {

inline std::optional<Rational> reduction_pct(const Rational& before, const Rational& after) {
    if (before == 0) return std::nullopt;
    return (before - after) * 100 / before;
}

inline std::uint64_t identity_key(const MediaPacket& p) { return (std::uint64_t{p.ssrc} << 16) | p.seq; }

} // namespace detail

/// Before/after comparison of a shaping run. `before` is the shaper input;
/// result.shaped must be a FIFO subsequence of it (matched by ssrc and seq)
/// and result.dropped a subset of the rest.
inline ComparisonReport compare(const StreamTrace& before, const ShapeResult& result, Micros window_us) {
    std::unordered_map<std::uint64_t, std::deque<std::size_t>> by_id;
    for (std::size_t i = 0; i < before.packets.size(); ++i) {
        by_id[detail::identity_key(before.packets[i])].push_back(i);
    }
    auto claim = [&](const MediaPacket& p, const char* what) -> const MediaPacket& {
        auto it = by_id.find(detail::identity_key(p));
        if (it == by_id.end() || it->second.empty()) {
            throw InconsistentInputError(std::string(what) + " packet ssrc " + std::to_string(p.ssrc) + " seq " +
                                         std::to_string(p.seq) + " is not in the input trace");
        }
        const MediaPacket& orig = before.packets[it->second.front()];
        it->second.pop_front();
        if (orig.size_bytes != p.size_bytes || orig.send_ts_us != p.send_ts_us) {
            throw InconsistentInputError(std::string(what) + " packet ssrc " + std::to_string(p.ssrc) + " seq " +
                                         std::to_string(p.seq) + " differs from the input packet");
        }
        return orig;
    };

    ComparisonReport r;
    BigInt latency_sum = 0;
    for (const auto& p : result.shaped.packets) {
        const MediaPacket& orig = claim(p, "shaped");
        if (!orig.recv_ts_us || !p.recv_ts_us) {
            throw PreconditionError("comparison needs arrival and departure timestamps");
        }
        const Micros added = *p.recv_ts_us - *orig.recv_ts_us;
        if (added < 0) {
            throw InconsistentInputError("shaped packet seq " + std::to_string(p.seq) + " departs before it arrived");
        }
        latency_sum += added;
        r.added_latency.max_us = std::max(r.added_latency.max_us, added);
    }
    for (const auto& d : result.dropped) claim(d.packet, "dropped");
    if (!result.shaped.packets.empty()) {
        r.added_latency.mean_us = Rational(latency_sum, BigInt(result.shaped.packets.size()));
    }
    r.drops_introduced = before.packets.size() - result.shaped.packets.size();

    r.before = measure(before, window_us);
    r.after = measure(result.shaped, window_us);
    if (result.settled_from < result.shaped.packets.size()) {
        StreamTrace settled;
        settled.kind = result.shaped.kind;
        settled.packets.assign(result.shaped.packets.begin() + static_cast<std::ptrdiff_t>(result.settled_from),
                               result.shaped.packets.end());
        r.after_settled_pdv = pdv(settled);
    }
    if (r.before.pdv && r.after_settled_pdv) {
        r.pdv_max_reduction_pct = detail::reduction_pct(r.before.pdv->stats.max, r.after_settled_pdv->stats.max);
    }
    if (r.before.pdv && r.after.pdv) {
        r.pdv_max_reduction_overall_pct = detail::reduction_pct(r.before.pdv->stats.max, r.after.pdv->stats.max);
    }
    if (r.before.jitter && r.after.jitter) {
        r.jitter_final_reduction_pct = detail::reduction_pct(r.before.jitter->final_us().to_rational(),
                                                             r.after.jitter->final_us().to_rational());
    }
    return r;
}

} // namespace rtpshape
