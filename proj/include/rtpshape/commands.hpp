#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rtpshape/channel.hpp"
#include "rtpshape/compare.hpp"
#include "rtpshape/config.hpp"
#include "rtpshape/error.hpp"
#include "rtpshape/media.hpp"
#include "rtpshape/metrics.hpp"
#include "rtpshape/panels.hpp"
#include "rtpshape/pcap.hpp"
#include "rtpshape/pipeline.hpp"
#include "rtpshape/report_csv.hpp"
#include "rtpshape/trace_csv.hpp"

namespace rtpshape {

// Subcommands behind the rtpshape executable. Each returns the process exit
// status: 0 success, 2 usage/config/validation, 3 I/O. Diagnostics go to
// `err`; short machine-readable summaries go to `out`.

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("error reading '" + path + "'");
    return data;
}

inline void write_file(const std::string& path, std::string_view data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw IoError("error writing '" + path + "'");
}

inline bool file_exists(const std::string& path) {
    std::error_code ec;
    return std::filesystem::is_regular_file(path, ec);
}

/// Joins an output prefix and a file stem: "dir/" + "x" -> "dir/x", "run" + "x" -> "run.x".
inline std::string prefixed(const std::string& prefix, const std::string& stem) {
    if (prefix.empty() || prefix.back() == '/') return prefix + stem;
    return prefix + "." + stem;
}

inline std::string stage_prefix(const std::string& prefix, std::size_t k) {
    return prefixed(prefix, "stage" + std::to_string(k));
}

/// Constant packet size reads as audio, anything else as video.
inline StreamKind infer_kind(const StreamTrace& trace) {
    for (const auto& p : trace.packets) {
        if (p.size_bytes != trace.packets.front().size_bytes) return StreamKind::video;
    }
    return StreamKind::audio;
}

namespace cli_detail {

template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        for (const auto& d : e.details()) err << "  " << d << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

inline ScenarioConfig load_config(const std::string& path, std::optional<std::uint64_t> seed) {
    auto cfg = parse_scenario(read_file(path));
    if (seed) override_seed(cfg, *seed);
    return cfg;
}

inline StreamTrace load_trace(const std::string& path, std::optional<StreamKind> kind = std::nullopt) {
    // Shaper output keeps FIFO order among equal timestamps, so ties are not checked here.
    auto trace = read_trace_csv(read_file(path), kind.value_or(StreamKind::audio), {.seq_tiebreak = false});
    if (!kind) trace.kind = infer_kind(trace);
    return trace;
}

inline std::string stage_meta(const ShaperStage& stage, std::size_t index, const ShapeResult& result) {
    std::ostringstream m;
    m << "stage.index = " << index << "\n";
    if (auto* l = std::get_if<LeakyBucketConfig>(&stage)) {
        m << "stage.type = leaky\n";
        m << "stage.capacity_packets = " << l->capacity_packets << "\n";
        m << "stage.drain_interval_us = " << l->drain_interval_us << "\n";
    } else {
        const auto& t = std::get<TokenBucketConfig>(stage);
        m << "stage.type = token\n";
        m << "stage.rate = " << t.rate.num << "/" << t.rate.den << "\n";
        m << "stage.capacity_tokens = " << t.capacity_tokens << "\n";
        m << "stage.initial_tokens = " << t.start_tokens() << "\n";
        if (t.queue_limit_bytes) m << "stage.queue_limit_bytes = " << *t.queue_limit_bytes << "\n";
    }
    m << "stage.settled_from = " << result.settled_from << "\n";
    return m.str();
}

struct StageFiles {
    ShaperType type = ShaperType::leaky;
    std::size_t settled_from = 0;
    StreamTrace input;
    StreamTrace shaped;
    std::vector<OccupancySample> occupancy;
    std::vector<DropRow> drops;
};

inline StageFiles load_stage(const std::string& prefix) {
    StageFiles s;
    const auto meta = parse_config_map(read_file(prefix + ".meta"));
    auto type = meta.find("stage.type");
    if (type == meta.end()) throw ConfigError(prefix + ".meta: missing stage.type");
    if (type->second.value == "leaky") {
        s.type = ShaperType::leaky;
    } else if (type->second.value == "token") {
        s.type = ShaperType::token;
    } else {
        throw ConfigError(prefix + ".meta: unknown stage.type '" + type->second.value + "'");
    }
    if (auto settled = meta.find("stage.settled_from"); settled != meta.end()) {
        const auto& v = settled->second.value;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), s.settled_from);
        if (ec != std::errc{} || ptr != v.data() + v.size()) {
            throw ConfigError(prefix + ".meta: bad stage.settled_from '" + v + "'");
        }
    }
    s.input = load_trace(prefix + ".input.csv");
    s.shaped = load_trace(prefix + ".shaped.csv", s.input.kind);
    s.occupancy = read_occupancy_csv(read_file(prefix + ".occupancy.csv"));
    s.drops = read_drops_csv(read_file(prefix + ".drops.csv"));
    return s;
}

inline void write_stage(const std::string& prefix, const ShaperStage& stage, std::size_t index,
                        const StreamTrace& input, const ShapeResult& result) {
    write_file(prefix + ".input.csv", write_trace_csv(input));
    write_file(prefix + ".shaped.csv", write_trace_csv(result.shaped));
    write_file(prefix + ".drops.csv", drops_csv(result.dropped));
    write_file(prefix + ".occupancy.csv", occupancy_csv(result.occupancy));
    write_file(prefix + ".meta", stage_meta(stage, index, result));
}

inline void write_series(const std::string& prefix, const MetricsReport& m) {
    if (m.jitter) write_file(prefix + ".jitter.csv", jitter_csv(*m.jitter));
    if (m.pdv) write_file(prefix + ".pdv.csv", pdv_csv(*m.pdv));
    write_file(prefix + ".throughput.csv", throughput_csv(m.throughput));
}

inline void write_report(const std::string& svg_path, const PanelReport& panels) {
    std::string csv_path = svg_path;
    if (csv_path.ends_with(".svg")) csv_path.resize(csv_path.size() - 4);
    write_file(svg_path, render_svg(panels));
    write_file(csv_path + ".panels.csv", panels_csv(panels));
}

/// Applies the configured channel when the trace has no arrival times yet.
inline StreamTrace with_arrivals(StreamTrace trace, const ScenarioConfig& cfg) {
    if (cfg.channel && !trace.packets.empty() && !trace.all_received()) return apply_channel(trace, *cfg.channel);
    return trace;
}

// Merges a pipeline into one before/after result for comparison.
inline ShapeResult overall_result(const PipelineResult& run) {
    ShapeResult all;
    all.shaped = run.output;
    for (const auto& s : run.stages) {
        all.dropped.insert(all.dropped.end(), s.dropped.begin(), s.dropped.end());
    }
    all.settled_from = run.stages.empty() ? 0 : run.stages.back().settled_from;
    return all;
}

inline int report_insufficient(const std::vector<std::string>& names, std::ostream& err) {
    if (names.empty()) return kExitOk;
    for (const auto& n : names) err << "error: insufficient data for metric " << n << "\n";
    return kExitUsage;
}

} // namespace cli_detail

/// generate: generator (+ channel when configured) -> trace CSV.
inline int cmd_generate(const std::string& config_path, const std::string& output_path,
                        std::optional<std::uint64_t> seed, std::ostream& out, std::ostream& err) {
    return cli_detail::guarded(err, [&] {
        const auto cfg = cli_detail::load_config(config_path, seed);
        if (!cfg.generator) throw ConfigError("config has no generator section");
        auto trace = cfg.generator->generate();
        if (cfg.channel) trace = apply_channel(trace, *cfg.channel);
        write_file(output_path, write_trace_csv(trace));
        const auto ts = trace.active_timestamps();
        const Micros span = ts.empty() ? 0 : ts.back() - ts.front();
        out << "packets," << trace.packets.size() << "\n" << "duration_us," << span << "\n";
        return kExitOk;
    });
}

/// shape: runs the configured pipeline over a trace and writes per-stage files
/// <prefix>stageK.{input,shaped,drops,occupancy}.csv and <prefix>stageK.meta.
inline int cmd_shape(const std::string& config_path, const std::string& input_path, const std::string& output_prefix,
                     std::optional<std::uint64_t> seed, std::ostream& out, std::ostream& err) {
    return cli_detail::guarded(err, [&] {
        const auto cfg = cli_detail::load_config(config_path, seed);
        if (cfg.pipeline.empty()) throw ConfigError("pipeline is empty; nothing to shape");
        std::optional<StreamKind> kind;
        if (cfg.generator) kind = cfg.generator->kind();
        const auto input = cli_detail::with_arrivals(cli_detail::load_trace(input_path, kind), cfg);
        const auto stages = resolve_pipeline(cfg.pipeline, input);
        const auto run = run_pipeline(stages, input);
        const StreamTrace* stage_input = &input;
        for (std::size_t k = 0; k < stages.size(); ++k) {
            cli_detail::write_stage(stage_prefix(output_prefix, k), stages[k], k, *stage_input, run.stages[k]);
            out << "stage" << k << ".shaped," << run.stages[k].shaped.packets.size() << "\n";
            out << "stage" << k << ".dropped," << run.stages[k].dropped.size() << "\n";
            stage_input = &run.stages[k].shaped;
        }
        return kExitOk;
    });
}

/// analyze: metrics for one trace, or a before/after comparison when a second
/// input (shaped trace CSV or stage prefix written by `shape`) is given.
inline int cmd_analyze(const std::vector<std::string>& inputs, const std::string& output_prefix,
                       Micros window_us, std::ostream& out, std::ostream& err) {
    return cli_detail::guarded(err, [&] {
        if (inputs.empty() || inputs.size() > 2) throw ConfigError("analyze takes one or two inputs");
        const auto before = cli_detail::load_trace(inputs[0]);
        if (inputs.size() == 1) {
            const auto report = measure(before, window_us);
            const auto summary = render_summary(metrics_summary(report));
            if (!output_prefix.empty()) {
                write_file(prefixed(output_prefix, "summary.csv"), summary);
                cli_detail::write_series(prefixed(output_prefix, "metrics"), report);
            }
            out << summary;
            return cli_detail::report_insufficient(report.insufficient, err);
        }
        ShapeResult result;
        if (file_exists(inputs[1] + ".shaped.csv")) {
            auto stage = cli_detail::load_stage(inputs[1]);
            result.shaped = std::move(stage.shaped);
            result.settled_from = stage.settled_from;
        } else {
            result.shaped = cli_detail::load_trace(inputs[1], before.kind);
        }
        const auto cmp = compare(before, result, window_us);
        const auto summary = render_summary(comparison_summary(cmp));
        if (!output_prefix.empty()) {
            write_file(prefixed(output_prefix, "comparison.csv"), summary);
            cli_detail::write_series(prefixed(output_prefix, "before"), cmp.before);
            cli_detail::write_series(prefixed(output_prefix, "after"), cmp.after);
        }
        out << summary;
        auto missing = cmp.before.insufficient;
        for (const auto& m : cmp.after.insufficient) missing.push_back("after " + m);
        return cli_detail::report_insufficient(missing, err);
    });
}

/// report: SVG + panels CSV for one stage prefix written by `shape`.
inline int cmd_report(const std::string& stage, const std::string& svg_path, std::ostream& out, std::ostream& err) {
    return cli_detail::guarded(err, [&] {
        for (auto suffix : {".meta", ".input.csv", ".shaped.csv", ".occupancy.csv", ".drops.csv"}) {
            if (!file_exists(stage + suffix)) throw IoError("missing stage file '" + stage + suffix + "'");
        }
        const auto files = cli_detail::load_stage(stage);
        const auto panels = build_panels(files.type, files.input, files.shaped, files.occupancy);
        cli_detail::write_report(svg_path, panels);
        out << "panels," << panels.panels.size() << "\n";
        return kExitOk;
    });
}

/// run: generate -> channel -> shape -> analyze -> report into one directory.
/// With an empty pipeline only the trace and its metrics are written.
inline int cmd_run(const std::string& config_path, const std::string& output_dir, std::optional<std::uint64_t> seed,
                   std::ostream& out, std::ostream& err) {
    return cli_detail::guarded(err, [&] {
        const auto cfg = cli_detail::load_config(config_path, seed);
        if (!cfg.generator) throw ConfigError("config has no generator section");
        std::error_code ec;
        std::filesystem::create_directories(output_dir, ec);
        if (ec) throw IoError("cannot create directory '" + output_dir + "': " + ec.message());
        const std::string dir = output_dir.ends_with('/') ? output_dir : output_dir + "/";
        const Micros window = cfg.analysis.throughput_window_us;

        auto trace = cfg.generator->generate();
        if (cfg.channel) trace = apply_channel(trace, *cfg.channel);
        write_file(dir + "trace.csv", write_trace_csv(trace));

        const auto metrics = measure(trace, window);
        write_file(dir + "metrics.csv", render_summary(metrics_summary(metrics)));
        cli_detail::write_series(dir + "metrics", metrics);
        if (int rc = cli_detail::report_insufficient(metrics.insufficient, err); rc != kExitOk) return rc;
        out << "packets," << trace.packets.size() << "\n";
        if (cfg.pipeline.empty()) return kExitOk;

        const auto stages = resolve_pipeline(cfg.pipeline, trace);
        const auto run = run_pipeline(stages, trace);
        const StreamTrace* stage_input = &trace;
        for (std::size_t k = 0; k < stages.size(); ++k) {
            const auto prefix = stage_prefix(dir, k);
            cli_detail::write_stage(prefix, stages[k], k, *stage_input, run.stages[k]);
            const auto type = std::holds_alternative<LeakyBucketConfig>(stages[k]) ? ShaperType::leaky
                                                                                    : ShaperType::token;
            cli_detail::write_report(prefix + ".svg",
                                     build_panels(type, *stage_input, run.stages[k].shaped, run.stages[k].occupancy));
            stage_input = &run.stages[k].shaped;
        }

        const auto cmp = compare(trace, cli_detail::overall_result(run), window);
        const auto lines = comparison_summary(cmp);
        write_file(dir + "comparison.csv", render_summary(lines));
        cli_detail::write_series(dir + "after", cmp.after);
        for (const auto& [k, v] : lines) {
            if (k == "pdv_max_reduction_pct" || k == "jitter_final_reduction_pct" || k == "drops_introduced") {
                out << k << "," << v << "\n";
            }
        }
        return cli_detail::report_insufficient(cmp.after.insufficient, err);
    });
}

/// import: one trace CSV per RTP stream found in a classic pcap capture.
inline int cmd_import(const std::string& pcap_path, const std::string& output_prefix,
                      std::optional<std::uint16_t> port, std::ostream& out, std::ostream& err) {
    return cli_detail::guarded(err, [&] {
        const auto bytes = read_file(pcap_path);
        const auto traces = import_pcap(
            std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()), port);
        for (const auto& t : traces) {
            const auto ssrc = t.packets.front().ssrc;
            const auto path = prefixed(output_prefix, "ssrc" + std::to_string(ssrc) + ".csv");
            write_file(path, write_trace_csv(t));
            out << path << "," << t.packets.size() << "," << to_string(t.kind) << "\n";
        }
        return kExitOk;
    });
}

} // namespace rtpshape
