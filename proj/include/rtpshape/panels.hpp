#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rtpshape/media.hpp"
#include "rtpshape/shape_result.hpp"

namespace rtpshape {

enum class ShaperType { leaky, token };

inline std::string_view to_string(ShaperType t) { return t == ShaperType::leaky ? "leaky" : "token"; }

enum class PanelKind { scatter, step };

inline std::string_view to_string(PanelKind k) { return k == PanelKind::scatter ? "scatter" : "step"; }

struct PanelPoint {
    Micros ts_us = 0;
    std::int64_t value = 0;

    friend bool operator==(const PanelPoint&, const PanelPoint&) = default;
};

struct Panel {
    std::string title;
    PanelKind kind = PanelKind::scatter;
    std::string y_label;
    std::vector<PanelPoint> points;
};

/// Stacked time-series panels for one shaping stage. Leaky bucket: incoming
/// traffic, shaped traffic, bucket content. Token bucket: incoming traffic,
/// shaped traffic, packet queue in bytes, tokens available.
struct PanelReport {
    std::vector<Panel> panels;
};

inline PanelReport build_panels(ShaperType type, const StreamTrace& input, const StreamTrace& shaped,
                                const std::vector<OccupancySample>& occupancy) {
    auto packet_panel = [](std::string title, const StreamTrace& trace) {
        Panel p{std::move(title), PanelKind::scatter, "packet size (bytes)", {}};
        const auto ts = trace.active_timestamps();
        p.points.reserve(ts.size());
        for (std::size_t i = 0; i < ts.size(); ++i) p.points.push_back({ts[i], trace.packets[i].size_bytes});
        return p;
    };
    auto occupancy_panel = [&](std::string title, std::string y_label, auto field) {
        Panel p{std::move(title), PanelKind::step, std::move(y_label), {}};
        p.points.reserve(occupancy.size());
        for (const auto& s : occupancy) p.points.push_back({s.ts_us, static_cast<std::int64_t>(field(s))});
        return p;
    };

    PanelReport report;
    report.panels.push_back(packet_panel("incoming traffic", input));
    report.panels.push_back(packet_panel("shaped traffic", shaped));
    if (type == ShaperType::leaky) {
        report.panels.push_back(occupancy_panel("bucket content (packets)", "packets",
                                                [](const OccupancySample& s) { return s.queued_packets; }));
    } else {
        report.panels.push_back(occupancy_panel("packet queue (bytes)", "bytes",
                                                [](const OccupancySample& s) { return s.queued_bytes; }));
        report.panels.push_back(
            occupancy_panel("tokens available", "tokens", [](const OccupancySample& s) { return s.tokens; }));
    }
    return report;
}

inline std::string panels_csv(const PanelReport& report) {
    std::string out = "panel,title,kind,ts_us,value\n";
    for (std::size_t i = 0; i < report.panels.size(); ++i) {
        const auto& p = report.panels[i];
        const std::string head = std::to_string(i) + "," + p.title + "," + std::string(to_string(p.kind)) + ",";
        for (const auto& pt : p.points) out += head + std::to_string(pt.ts_us) + "," + std::to_string(pt.value) + "\n";
    }
    return out;
}

namespace svg_detail {

// Coordinates are computed in hundredths of a pixel with integer arithmetic
// so the rendered text is identical on every platform.
inline std::string fixed2(std::int64_t hundredths) {
    const bool neg = hundredths < 0;
    const std::int64_t a = neg ? -hundredths : hundredths;
    std::string frac = std::to_string(a % 100);
    if (frac.size() < 2) frac.insert(0, "0");
    return (neg ? "-" : "") + std::to_string(a / 100) + "." + frac;
}

inline std::string seconds(Micros us) {
    const bool neg = us < 0;
    const Micros a = neg ? -us : us;
    std::string frac = std::to_string(a % 1'000'000 / 1000);
    frac.insert(0, 3 - frac.size(), '0');
    return (neg ? "-" : "") + std::to_string(a / 1'000'000) + "." + frac;
}

inline std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace svg_detail

/// Standalone SVG, one <g class="panel"> per panel on a shared time axis.
/// Scatter panels draw one <circle> per point; step panels one <polyline>.
inline std::string render_svg(const PanelReport& report) {
    using svg_detail::fixed2;
    constexpr std::int64_t kWidth = 960;
    constexpr std::int64_t kLeft = 90;
    constexpr std::int64_t kRight = 30;
    constexpr std::int64_t kPanelHeight = 150;
    constexpr std::int64_t kPanelGap = 60;
    constexpr std::int64_t kTop = 40;
    const std::int64_t plot_w = kWidth - kLeft - kRight;
    const auto n = static_cast<std::int64_t>(report.panels.size());
    const std::int64_t height = kTop + n * (kPanelHeight + kPanelGap) + 10;

    Micros t_min = 0;
    Micros t_max = 0;
    bool any = false;
    for (const auto& p : report.panels) {
        for (const auto& pt : p.points) {
            t_min = any ? std::min(t_min, pt.ts_us) : pt.ts_us;
            t_max = any ? std::max(t_max, pt.ts_us) : pt.ts_us;
            any = true;
        }
    }
    const __int128 t_span = t_max > t_min ? t_max - t_min : 1;
    auto x_of = [&](Micros ts) {
        return static_cast<std::int64_t>(kLeft * 100 + static_cast<__int128>(ts - t_min) * plot_w * 100 / t_span);
    };

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) + "\" height=\"" +
           std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(kWidth) + " " + std::to_string(height) +
           "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(kWidth) + "\" height=\"" + std::to_string(height) +
           "\" fill=\"white\"/>\n";

    for (std::int64_t i = 0; i < n; ++i) {
        const auto& panel = report.panels[static_cast<std::size_t>(i)];
        const std::int64_t top = kTop + i * (kPanelHeight + kPanelGap);
        const std::int64_t bottom = top + kPanelHeight;
        std::int64_t v_max = 1;
        for (const auto& pt : panel.points) v_max = std::max(v_max, pt.value);
        auto y_of = [&](std::int64_t v) {
            return static_cast<std::int64_t>(bottom * 100 - static_cast<__int128>(v) * kPanelHeight * 100 / v_max);
        };

        out += "<g class=\"panel\" data-index=\"" + std::to_string(i) + "\" data-kind=\"" +
               std::string(to_string(panel.kind)) + "\" data-points=\"" + std::to_string(panel.points.size()) + "\">\n";
        out += "<text class=\"title\" x=\"" + std::to_string(kLeft) + "\" y=\"" + std::to_string(top - 8) +
               "\" font-size=\"13\" font-weight=\"bold\">" + svg_detail::escape(panel.title) + "</text>\n";
        out += "<line x1=\"" + std::to_string(kLeft) + "\" y1=\"" + std::to_string(bottom) + "\" x2=\"" +
               std::to_string(kLeft + plot_w) + "\" y2=\"" + std::to_string(bottom) + "\" stroke=\"black\"/>\n";
        out += "<line x1=\"" + std::to_string(kLeft) + "\" y1=\"" + std::to_string(top) + "\" x2=\"" +
               std::to_string(kLeft) + "\" y2=\"" + std::to_string(bottom) + "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + std::to_string(kLeft - 6) + "\" y=\"" + std::to_string(bottom) +
               "\" text-anchor=\"end\">0</text>\n";
        out += "<text x=\"" + std::to_string(kLeft - 6) + "\" y=\"" + std::to_string(top + 10) +
               "\" text-anchor=\"end\">" + std::to_string(v_max) + "</text>\n";
        out += "<text x=\"14\" y=\"" + std::to_string((top + bottom) / 2) + "\" transform=\"rotate(-90 14 " +
               std::to_string((top + bottom) / 2) + ")\" text-anchor=\"middle\">" + svg_detail::escape(panel.y_label) +
               "</text>\n";
        out += "<text x=\"" + std::to_string(kLeft) + "\" y=\"" + std::to_string(bottom + 14) + "\">" +
               svg_detail::seconds(t_min) + "</text>\n";
        out += "<text x=\"" + std::to_string(kLeft + plot_w) + "\" y=\"" + std::to_string(bottom + 14) +
               "\" text-anchor=\"end\">" + svg_detail::seconds(t_max) + "</text>\n";
        out += "<text x=\"" + std::to_string(kLeft + plot_w / 2) + "\" y=\"" + std::to_string(bottom + 28) +
               "\" text-anchor=\"middle\">time (s)</text>\n";

        if (panel.kind == PanelKind::scatter) {
            for (const auto& pt : panel.points) {
                out += "<circle cx=\"" + fixed2(x_of(pt.ts_us)) + "\" cy=\"" + fixed2(y_of(pt.value)) +
                       "\" r=\"1.5\" fill=\"steelblue\"/>\n";
            }
        } else if (!panel.points.empty()) {
            out += "<polyline fill=\"none\" stroke=\"firebrick\" stroke-width=\"1\" points=\"";
            std::int64_t prev_y = y_of(panel.points.front().value);
            for (std::size_t k = 0; k < panel.points.size(); ++k) {
                const auto& pt = panel.points[k];
                const auto x = fixed2(x_of(pt.ts_us));
                const auto y = y_of(pt.value);
                if (k > 0) out += " ";
                out += x + "," + fixed2(prev_y) + " " + x + "," + fixed2(y);
                prev_y = y;
            }
            out += "\"/>\n";
        }
        out += "</g>\n";
    }
    out += "</svg>\n";
    return out;
}

} // namespace rtpshape
