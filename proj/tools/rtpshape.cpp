// rtpshape: generate, shape, analyze and plot RTP-style media traces.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rtpshape/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Leaky/token bucket shaping and jitter analysis for RTP media traces"};
    app.require_subcommand(1);

    std::string config;
    std::string output;
    std::vector<std::string> inputs;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint16_t> port;
    rtpshape::Micros window = 1'000'000;

    auto* gen = app.add_subcommand("generate", "Generate a sender trace (and apply the channel, if configured)");
    gen->add_option("--config", config, "Scenario config file")->required();
    gen->add_option("--output", output, "Output trace CSV")->required();
    gen->add_option("--seed", seed, "Override generator and channel seeds");

    auto* shape = app.add_subcommand("shape", "Run the configured shaper pipeline over a trace");
    shape->add_option("--config", config, "Scenario config file")->required();
    shape->add_option("--input", inputs, "Input trace CSV")->required()->expected(1);
    shape->add_option("--output", output, "Output prefix (directory ending in '/' or file prefix)")->required();
    shape->add_option("--seed", seed, "Override channel seed");

    auto* analyze = app.add_subcommand("analyze", "Jitter, PDV, loss and throughput; compare with a second input");
    analyze->add_option("--input", inputs, "Trace CSV, then optionally a shaped trace CSV or stage prefix")
        ->required()
        ->expected(1, 2);
    analyze->add_option("--output", output, "Output prefix for CSV files");
    analyze->add_option("--config", config, "Scenario config (analysis.throughput_window_us)");
    analyze->add_option("--window", window, "Throughput window in microseconds")->check(CLI::PositiveNumber);

    auto* report = app.add_subcommand("report", "Render the panel figure for one shaped stage");
    report->add_option("--input", inputs, "Stage prefix written by shape, e.g. out/stage0")->required()->expected(1);
    report->add_option("--output", output, "Output SVG path")->required();

    auto* run = app.add_subcommand("run", "Generate, impair, shape, analyze and plot in one go");
    run->add_option("--config", config, "Scenario config file")->required();
    run->add_option("--output", output, "Output directory")->required();
    run->add_option("--seed", seed, "Override generator and channel seeds");

    auto* import = app.add_subcommand("import", "Extract RTP streams from a classic pcap capture");
    import->add_option("--input", inputs, "Capture file")->required()->expected(1);
    import->add_option("--output", output, "Output prefix")->required();
    import->add_option("--port", port, "Only UDP datagrams to or from this port");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e, std::cout, std::cerr);
        return rtpshape::kExitUsage;
    }

    using namespace rtpshape;
    if (gen->parsed()) return cmd_generate(config, output, seed, std::cout, std::cerr);
    if (shape->parsed()) return cmd_shape(config, inputs.front(), output, seed, std::cout, std::cerr);
    if (analyze->parsed()) {
        if (!config.empty() && analyze->count("--window") == 0) {
            try {
                window = parse_scenario(read_file(config)).analysis.throughput_window_us;
            } catch (const IoError& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitIo;
            } catch (const Error& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitUsage;
            }
        }
        return cmd_analyze(inputs, output, window, std::cout, std::cerr);
    }
    if (report->parsed()) return cmd_report(inputs.front(), output, std::cout, std::cerr);
    if (run->parsed()) return cmd_run(config, output, seed, std::cout, std::cerr);
    if (import->parsed()) return cmd_import(inputs.front(), output, port, std::cout, std::cerr);
    return kExitUsage;
}
