#pragma once

#include <charconv>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rtpshape/channel.hpp"
#include "rtpshape/error.hpp"
#include "rtpshape/generator.hpp"
#include "rtpshape/leaky_bucket.hpp"
#include "rtpshape/metrics.hpp"
#include "rtpshape/pipeline.hpp"
#include "rtpshape/rational.hpp"
#include "rtpshape/token_bucket.hpp"

namespace rtpshape {

// Scenario files are line oriented:
//
//   # comment
//   section.key = value
//
// Keys are unique. Blank lines and lines starting with '#' are ignored.
// Pipeline stages use numbered sections: pipeline.0.type = leaky, ...

struct ConfigEntry {
    std::string value;
    std::size_t line = 0;
};

using ConfigMap = std::map<std::string, ConfigEntry, std::less<>>;

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

} // namespace detail

inline ConfigMap parse_config_map(std::string_view text) {
    ConfigMap map;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = detail::trim(text.substr(start, end - start));
        ++line_no;
        start = end + 1;
        if (line.empty() || line.front() == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'section.key = value'");
        }
        auto key = detail::trim(line.substr(0, eq));
        auto value = detail::trim(line.substr(eq + 1));
        if (key.find('.') == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": key '" + std::string(key) + "' has no section");
        }
        if (!map.emplace(std::string(key), ConfigEntry{std::string(value), line_no}).second) {
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + std::string(key) + "'");
        }
    }
    return map;
}

struct GeneratorSection {
    std::variant<AudioGenConfig, VideoGenConfig> media = AudioGenConfig{};
    Micros duration_us = 60'000'000;
    std::uint64_t seed = 1;

    StreamKind kind() const {
        return std::holds_alternative<AudioGenConfig>(media) ? StreamKind::audio : StreamKind::video;
    }

    StreamTrace generate() const {
        if (auto* a = std::get_if<AudioGenConfig>(&media)) return generate_audio(*a, duration_us);
        return generate_video(std::get<VideoGenConfig>(media), duration_us, seed);
    }
};

/// Token bucket stage as written in a scenario. Rate and capacity may be given
/// directly or derived from the pipeline input's stream profile.
struct TokenStageSpec {
    std::optional<TokenRate> rate;
    std::optional<std::uint64_t> rate_pct_of_input;
    std::optional<std::uint64_t> capacity_tokens;
    std::optional<std::uint64_t> capacity_mean_frames;
    std::optional<std::uint64_t> initial_tokens;
    std::optional<std::uint64_t> queue_limit_bytes;
};

using StageSpec = std::variant<LeakyBucketConfig, TokenStageSpec>;

struct AnalysisSection {
    Micros throughput_window_us = 1'000'000;
};

struct ScenarioConfig {
    std::optional<GeneratorSection> generator;
    std::optional<ChannelModel> channel;
    std::vector<StageSpec> pipeline;
    AnalysisSection analysis;
};

namespace detail {

class ConfigReader {
public:
    explicit ConfigReader(const ConfigMap& map) : map_(map) {}

    const ConfigEntry* find(const std::string& key) {
        auto it = map_.find(key);
        if (it == map_.end()) return nullptr;
        used_.insert(key);
        return &it->second;
    }

    bool has_prefix(std::string_view prefix) const {
        auto it = map_.lower_bound(prefix);
        return it != map_.end() && it->first.starts_with(prefix);
    }

    template <class T>
    std::optional<T> integer(const std::string& key, T min = std::numeric_limits<T>::min(),
                             T max = std::numeric_limits<T>::max()) {
        const ConfigEntry* e = find(key);
        if (!e) return std::nullopt;
        T value{};
        const auto& s = e->value;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
            throw ConfigError(where(*e) + key + " must be an integer, got '" + s + "'");
        }
        if (value < min || value > max) {
            throw ConfigError(where(*e) + key + " must be in [" + std::to_string(min) + ", " + std::to_string(max) +
                              "], got " + s);
        }
        return value;
    }

    std::optional<std::string> text(const std::string& key) {
        const ConfigEntry* e = find(key);
        if (!e) return std::nullopt;
        return e->value;
    }

    std::optional<Rational> rational(const std::string& key) {
        const ConfigEntry* e = find(key);
        if (!e) return std::nullopt;
        try {
            return parse_rational(e->value);
        } catch (const ConfigError& err) {
            throw ConfigError(where(*e) + key + ": " + err.what());
        }
    }

    void reject_unused() const {
        for (const auto& [key, entry] : map_) {
            if (!used_.contains(key)) {
                throw ConfigError(where(entry) + "unknown or inapplicable key '" + key + "'");
            }
        }
    }

    static std::string where(const ConfigEntry& e) { return "line " + std::to_string(e.line) + ": "; }

private:
    const ConfigMap& map_;
    std::set<std::string, std::less<>> used_;
};

inline TokenRate rate_from_rational(const Rational& r, const std::string& key) {
    if (r <= 0) throw ConfigError(key + " must be > 0");
    const BigInt limit = BigInt(1) << 62;
    if (numerator(r) > limit || denominator(r) > limit) {
        throw ConfigError(key + " numerator/denominator must be < 2^62");
    }
    return TokenRate::per_second(static_cast<std::uint64_t>(numerator(r)), static_cast<std::uint64_t>(denominator(r)));
}

} // namespace detail

inline ScenarioConfig parse_scenario(std::string_view text) {
    const ConfigMap map = parse_config_map(text);
    detail::ConfigReader in(map);
    ScenarioConfig cfg;

    if (in.has_prefix("generator.")) {
        GeneratorSection gen;
        const auto kind = parse_stream_kind(in.text("generator.kind").value_or("audio"));
        gen.duration_us = in.integer<Micros>("generator.duration_us", 1).value_or(gen.duration_us);
        gen.seed = in.integer<std::uint64_t>("generator.seed").value_or(gen.seed);
        if (kind == StreamKind::audio) {
            AudioGenConfig a;
            a.ptime_us = in.integer<Micros>("generator.ptime_us").value_or(a.ptime_us);
            a.payload_bytes = in.integer<std::uint32_t>("generator.payload_bytes").value_or(a.payload_bytes);
            a.ssrc = in.integer<std::uint32_t>("generator.ssrc").value_or(a.ssrc);
            a.payload_type = in.integer<std::uint8_t>("generator.payload_type").value_or(a.payload_type);
            a.validate();
            gen.media = a;
        } else {
            VideoGenConfig v;
            v.fps = in.integer<std::uint32_t>("generator.fps").value_or(v.fps);
            v.gop = in.integer<std::uint32_t>("generator.gop").value_or(v.gop);
            v.i_frame_bytes = in.integer<std::uint32_t>("generator.i_frame_bytes").value_or(v.i_frame_bytes);
            v.p_frame_bytes = in.integer<std::uint32_t>("generator.p_frame_bytes").value_or(v.p_frame_bytes);
            v.size_jitter_pct = in.integer<std::uint32_t>("generator.size_jitter_pct").value_or(v.size_jitter_pct);
            v.mtu_payload_bytes =
                in.integer<std::uint32_t>("generator.mtu_payload_bytes").value_or(v.mtu_payload_bytes);
            v.ssrc = in.integer<std::uint32_t>("generator.ssrc").value_or(v.ssrc);
            v.payload_type = in.integer<std::uint8_t>("generator.payload_type").value_or(v.payload_type);
            v.validate();
            gen.media = v;
        }
        cfg.generator = gen;
    }

    if (in.has_prefix("channel.")) {
        ChannelModel ch;
        ch.base_delay_us = in.integer<Micros>("channel.base_delay_us", 0).value_or(0);
        ch.seed = in.integer<std::uint64_t>("channel.seed").value_or(0);
        const auto jitter = in.text("channel.jitter").value_or("none");
        if (jitter == "none") {
            ch.jitter = NoJitter{};
        } else if (jitter == "uniform") {
            UniformJitter u;
            u.lo_us = in.integer<Micros>("channel.jitter_lo_us", 0).value_or(0);
            u.hi_us = in.integer<Micros>("channel.jitter_hi_us", 0).value_or(0);
            ch.jitter = u;
        } else if (jitter == "exponential") {
            ch.jitter = ExponentialJitter{in.integer<Micros>("channel.jitter_mean_us", 0).value_or(0)};
        } else {
            throw ConfigError("channel.jitter must be none, uniform or exponential, got '" + jitter + "'");
        }
        if (auto loss = in.rational("channel.loss")) {
            if (*loss < 0 || *loss >= 1) throw ConfigError("channel.loss must be in [0, 1)");
            const BigInt limit = BigInt(1) << 63;
            if (denominator(*loss) > limit) throw ConfigError("channel.loss denominator too large");
            ch.loss = {static_cast<std::uint64_t>(numerator(*loss)), static_cast<std::uint64_t>(denominator(*loss))};
        }
        ch.validate();
        cfg.channel = ch;
    }

    for (std::size_t k = 0; in.has_prefix("pipeline." + std::to_string(k) + "."); ++k) {
        const std::string p = "pipeline." + std::to_string(k) + ".";
        const auto type = in.text(p + "type");
        if (!type) throw ConfigError(p + "type is required (leaky or token)");
        if (*type == "leaky") {
            LeakyBucketConfig leaky;
            leaky.capacity_packets = in.integer<std::uint64_t>(p + "capacity_packets").value_or(leaky.capacity_packets);
            auto drain = in.integer<Micros>(p + "drain_interval_us");
            if (drain) {
                leaky.drain_interval_us = *drain;
            } else if (cfg.generator && cfg.generator->kind() == StreamKind::audio) {
                leaky.drain_interval_us = std::get<AudioGenConfig>(cfg.generator->media).ptime_us;
            }
            leaky.validate();
            cfg.pipeline.emplace_back(leaky);
        } else if (*type == "token") {
            TokenStageSpec t;
            if (auto r = in.rational(p + "rate")) t.rate = detail::rate_from_rational(*r, p + "rate");
            t.rate_pct_of_input = in.integer<std::uint64_t>(p + "rate_pct_of_input", 1, 1'000'000);
            t.capacity_tokens = in.integer<std::uint64_t>(p + "capacity_tokens", 1, 0xFFFFFFFFu);
            t.capacity_mean_frames = in.integer<std::uint64_t>(p + "capacity_mean_frames", 1, 1'000'000);
            t.initial_tokens = in.integer<std::uint64_t>(p + "initial_tokens");
            t.queue_limit_bytes = in.integer<std::uint64_t>(p + "queue_limit_bytes", 1);
            if (t.rate.has_value() == t.rate_pct_of_input.has_value()) {
                throw ConfigError(p + "needs exactly one of rate, rate_pct_of_input");
            }
            if (t.capacity_tokens.has_value() == t.capacity_mean_frames.has_value()) {
                throw ConfigError(p + "needs exactly one of capacity_tokens, capacity_mean_frames");
            }
            if (t.capacity_tokens && t.initial_tokens && *t.initial_tokens > *t.capacity_tokens) {
                throw ConfigError(p + "initial_tokens must be <= capacity_tokens");
            }
            cfg.pipeline.emplace_back(t);
        } else {
            throw ConfigError(p + "type must be leaky or token, got '" + *type + "'");
        }
    }

    cfg.analysis.throughput_window_us =
        in.integer<Micros>("analysis.throughput_window_us", 1).value_or(cfg.analysis.throughput_window_us);

    in.reject_unused();
    return cfg;
}

/// --seed on the command line replaces both the generator and channel seeds.
inline void override_seed(ScenarioConfig& cfg, std::uint64_t seed) {
    if (cfg.generator) cfg.generator->seed = seed;
    if (cfg.channel) cfg.channel->seed = seed;
}

/// Turns stage specs into concrete shaper configs. Derived token bucket
/// parameters come from the profile of `input`, the trace entering the pipeline.
inline std::vector<ShaperStage> resolve_pipeline(const std::vector<StageSpec>& specs, const StreamTrace& input) {
    std::vector<ShaperStage> stages;
    std::optional<StreamProfile> profile;
    auto get_profile = [&]() -> const StreamProfile& {
        if (!profile) profile = stream_profile(input);
        return *profile;
    };
    for (std::size_t k = 0; k < specs.size(); ++k) {
        const std::string p = "pipeline." + std::to_string(k) + ".";
        if (auto* leaky = std::get_if<LeakyBucketConfig>(&specs[k])) {
            stages.emplace_back(*leaky);
            continue;
        }
        const auto& spec = std::get<TokenStageSpec>(specs[k]);
        TokenBucketConfig tb;
        if (spec.rate) {
            tb.rate = *spec.rate;
        } else {
            const Rational r = get_profile().mean_rate_bytes_per_s * Rational(BigInt(*spec.rate_pct_of_input), 100);
            tb.rate = detail::rate_from_rational(r, p + "rate_pct_of_input");
        }
        if (spec.capacity_tokens) {
            tb.capacity_tokens = *spec.capacity_tokens;
        } else {
            const Rational c = get_profile().mean_frame_bytes * BigInt(*spec.capacity_mean_frames);
            BigInt ceil_c = numerator(c) / denominator(c);
            if (ceil_c * denominator(c) != numerator(c)) ceil_c += 1;
            if (ceil_c > 0xFFFFFFFFu) throw ConfigError(p + "capacity_mean_frames gives a capacity >= 2^32");
            tb.capacity_tokens = static_cast<std::uint64_t>(ceil_c);
        }
        tb.initial_tokens = spec.initial_tokens;
        tb.queue_limit_bytes = spec.queue_limit_bytes;
        try {
            tb.validate();
        } catch (const ConfigError& e) {
            throw ConfigError(p + e.what());
        }
        stages.emplace_back(tb);
    }
    return stages;
}

} // namespace rtpshape
