#pragma once

// RFC 3550 section 6.4.1 recurrence applied literally with exact rationals:
// J += (|D| - J) / 16. Quadratic in bit growth, so only for short traces.

#include <boost/multiprecision/cpp_int.hpp>
#include <vector>

#include "rtpshape/media.hpp"

namespace oracle {

using boost::multiprecision::cpp_rational;

inline std::vector<cpp_rational> rfc3550_jitter(const rtpshape::StreamTrace& t) {
    std::vector<cpp_rational> out;
    cpp_rational j = 0;
    for (std::size_t i = 1; i < t.packets.size(); ++i) {
        const auto& a = t.packets[i - 1];
        const auto& b = t.packets[i];
        const std::int64_t transit_a = *a.recv_ts_us - a.send_ts_us;
        const std::int64_t transit_b = *b.recv_ts_us - b.send_ts_us;
        cpp_rational d = transit_b - transit_a;
        if (d < 0) d = -d;
        j += (d - j) / 16;
        out.push_back(j);
    }
    return out;
}

} // namespace oracle
