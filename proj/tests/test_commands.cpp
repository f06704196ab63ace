#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "rtpshape/commands.hpp"
#include "svg_inspect.hpp"

using namespace rtpshape;
namespace fs = std::filesystem;

namespace {

class Commands : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / ("rtpshape_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string config(const std::string& name, const std::string& text) const {
        write_file(path(name), text);
        return path(name);
    }

    std::set<std::string> listing(const std::string& sub = "") const {
        std::set<std::string> names;
        for (const auto& e : fs::directory_iterator(dir_ / sub)) names.insert(e.path().filename().string());
        return names;
    }

    static std::string scenario(const std::string& name) { return std::string(RTPSHAPE_SCENARIOS) + "/" + name; }

    std::ostringstream out_;
    std::ostringstream err_;
    fs::path dir_;
};

const std::string kShortAudio =
    "generator.kind = audio\ngenerator.duration_us = 2000000\n"
    "channel.base_delay_us = 50000\nchannel.jitter = uniform\nchannel.jitter_hi_us = 15000\nchannel.seed = 3\n"
    "pipeline.0.type = leaky\npipeline.0.capacity_packets = 15\n";

std::size_t rows(const std::string& csv_path) {
    const auto text = read_file(csv_path);
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) - 1;
}

} // namespace

TEST_F(Commands, GenerateWritesTrace) {
    const auto cfg = config("a.conf", "generator.kind = audio\ngenerator.duration_us = 1000000\n");
    EXPECT_EQ(cmd_generate(cfg, path("t.csv"), std::nullopt, out_, err_), kExitOk);
    EXPECT_EQ(rows(path("t.csv")), 50u);
    EXPECT_NE(out_.str().find("packets,50"), std::string::npos);
}

TEST_F(Commands, GenerateRejectsZeroPacketInterval) {
    const auto cfg = config("a.conf", "generator.ptime_us = 0\n");
    EXPECT_EQ(cmd_generate(cfg, path("t.csv"), std::nullopt, out_, err_), kExitUsage);
    EXPECT_NE(err_.str().find("ptime_us"), std::string::npos);
    EXPECT_FALSE(file_exists(path("t.csv")));
}

TEST_F(Commands, GenerateUnwritableOutputIsIoError) {
    const auto cfg = config("a.conf", "generator.duration_us = 100000\n");
    EXPECT_EQ(cmd_generate(cfg, path("missing/dir/t.csv"), std::nullopt, out_, err_), kExitIo);
    EXPECT_EQ(cmd_generate(path("nope.conf"), path("t.csv"), std::nullopt, out_, err_), kExitIo);
}

TEST_F(Commands, ShapeWritesStageFiles) {
    const auto cfg = config("a.conf", kShortAudio);
    ASSERT_EQ(cmd_generate(cfg, path("t.csv"), std::nullopt, out_, err_), kExitOk);
    ASSERT_EQ(cmd_shape(cfg, path("t.csv"), path("out/"), std::nullopt, out_, err_), kExitIo)
        << "output directory does not exist yet";
    fs::create_directories(dir_ / "out");
    ASSERT_EQ(cmd_shape(cfg, path("t.csv"), path("out/"), std::nullopt, out_, err_), kExitOk) << err_.str();
    EXPECT_EQ(listing("out"), (std::set<std::string>{"stage0.input.csv", "stage0.shaped.csv", "stage0.drops.csv",
                                                     "stage0.occupancy.csv", "stage0.meta"}));
    EXPECT_EQ(rows(path("out/stage0.shaped.csv")), rows(path("t.csv")) - rows(path("out/stage0.drops.csv")));
}

TEST_F(Commands, ShapeTwoStages) {
    const auto cfg = config("a.conf", kShortAudio + "pipeline.1.type = token\npipeline.1.rate = 6250\n"
                                                    "pipeline.1.capacity_tokens = 250\n");
    ASSERT_EQ(cmd_generate(cfg, path("t.csv"), std::nullopt, out_, err_), kExitOk);
    ASSERT_EQ(cmd_shape(cfg, path("t.csv"), path("run"), std::nullopt, out_, err_), kExitOk) << err_.str();
    EXPECT_TRUE(file_exists(path("run.stage0.shaped.csv")));
    EXPECT_TRUE(file_exists(path("run.stage1.shaped.csv")));
    EXPECT_EQ(read_file(path("run.stage1.input.csv")), read_file(path("run.stage0.shaped.csv")));
}

TEST_F(Commands, ShapeNeedsArrivalTimes) {
    const auto gen = config("g.conf", "generator.duration_us = 100000\n");
    ASSERT_EQ(cmd_generate(gen, path("t.csv"), std::nullopt, out_, err_), kExitOk);
    const auto shape = config("s.conf", "pipeline.0.type = leaky\n");
    EXPECT_EQ(cmd_shape(shape, path("t.csv"), path("x"), std::nullopt, out_, err_), kExitUsage);
    EXPECT_NE(err_.str().find("arrival"), std::string::npos);
    const auto empty = config("e.conf", "generator.duration_us = 100000\n");
    EXPECT_EQ(cmd_shape(empty, path("t.csv"), path("x"), std::nullopt, out_, err_), kExitUsage);
}

TEST_F(Commands, AnalyzePeriodicTrace) {
    const auto cfg = config("a.conf", "generator.duration_us = 1000000\nchannel.base_delay_us = 40000\n");
    ASSERT_EQ(cmd_generate(cfg, path("t.csv"), std::nullopt, out_, err_), kExitOk);
    std::ostringstream summary;
    ASSERT_EQ(cmd_analyze({path("t.csv")}, "", 1'000'000, summary, err_), kExitOk);
    EXPECT_NE(summary.str().find("\njitter_final_us,0\n"), std::string::npos);
    EXPECT_NE(summary.str().find("\npdv_max_us,0\n"), std::string::npos);
}

TEST_F(Commands, AnalyzeBeforeAfterLeaky) {
    const auto cfg = config("a.conf", kShortAudio);
    ASSERT_EQ(cmd_generate(cfg, path("t.csv"), std::nullopt, out_, err_), kExitOk);
    ASSERT_EQ(cmd_shape(cfg, path("t.csv"), path("s"), std::nullopt, out_, err_), kExitOk);
    std::ostringstream summary;
    ASSERT_EQ(cmd_analyze({path("t.csv"), path("s.stage0")}, path("cmp"), 1'000'000, summary, err_), kExitOk)
        << err_.str();
    EXPECT_NE(summary.str().find("\npdv_max_reduction_pct,100\n"), std::string::npos) << summary.str();
    EXPECT_EQ(read_file(path("cmp.comparison.csv")), summary.str());
}

TEST_F(Commands, AnalyzeSinglePacket) {
    write_file(path("one.csv"), "seq,ssrc,payload_type,marker,send_ts_us,recv_ts_us,size_bytes\n0,1,96,0,0,50000,125\n");
    std::ostringstream summary;
    EXPECT_EQ(cmd_analyze({path("one.csv")}, "", 1'000'000, summary, err_), kExitUsage);
    EXPECT_NE(summary.str().find("jitter_final_us,insufficient-data"), std::string::npos);
    EXPECT_NE(summary.str().find("pdv_max_us,0"), std::string::npos);
    EXPECT_NE(err_.str().find("jitter"), std::string::npos);
    EXPECT_EQ(cmd_analyze({path("absent.csv")}, "", 1'000'000, summary, err_), kExitIo);
}

TEST_F(Commands, ReportPanelCounts) {
    const auto audio = config("a.conf", kShortAudio);
    ASSERT_EQ(cmd_generate(audio, path("a.csv"), std::nullopt, out_, err_), kExitOk);
    ASSERT_EQ(cmd_shape(audio, path("a.csv"), path("a"), std::nullopt, out_, err_), kExitOk);
    ASSERT_EQ(cmd_report(path("a.stage0"), path("a.svg"), out_, err_), kExitOk) << err_.str();
    const auto leaky = testing_support::svg_panels(read_file(path("a.svg")));
    ASSERT_EQ(leaky.size(), 3u);
    EXPECT_EQ(leaky[0].circles, rows(path("a.csv")));

    const auto video = config("v.conf", "generator.kind = video\ngenerator.duration_us = 2000000\n"
                                        "channel.base_delay_us = 50000\n"
                                        "pipeline.0.type = token\npipeline.0.rate_pct_of_input = 110\n"
                                        "pipeline.0.capacity_mean_frames = 2\n");
    ASSERT_EQ(cmd_generate(video, path("v.csv"), std::nullopt, out_, err_), kExitOk);
    ASSERT_EQ(cmd_shape(video, path("v.csv"), path("v"), std::nullopt, out_, err_), kExitOk) << err_.str();
    ASSERT_EQ(cmd_report(path("v.stage0"), path("v.svg"), out_, err_), kExitOk) << err_.str();
    const auto token = testing_support::svg_panels(read_file(path("v.svg")));
    ASSERT_EQ(token.size(), 4u);
    EXPECT_EQ(token.back().title, "tokens available");

    EXPECT_EQ(cmd_report(path("nothing"), path("n.svg"), out_, err_), kExitIo);
}

TEST_F(Commands, ReportOnEmptyStage) {
    write_file(path("e.csv"), "seq,ssrc,payload_type,marker,send_ts_us,recv_ts_us,size_bytes\n");
    const auto cfg = config("s.conf", "pipeline.0.type = leaky\n");
    ASSERT_EQ(cmd_shape(cfg, path("e.csv"), path("e"), std::nullopt, out_, err_), kExitOk) << err_.str();
    ASSERT_EQ(cmd_report(path("e.stage0"), path("e.svg"), out_, err_), kExitOk) << err_.str();
    const auto panels = testing_support::svg_panels(read_file(path("e.svg")));
    ASSERT_EQ(panels.size(), 3u);
    for (const auto& p : panels) EXPECT_EQ(p.declared_points, 0u);
}

TEST_F(Commands, RunAudioScenarioIsDeterministic) {
    ASSERT_EQ(cmd_run(scenario("audio.conf"), path("r1"), std::nullopt, out_, err_), kExitOk) << err_.str();
    ASSERT_EQ(cmd_run(scenario("audio.conf"), path("r2"), std::nullopt, out_, err_), kExitOk) << err_.str();
    const auto files = listing("r1");
    for (auto name : {"trace.csv", "metrics.csv", "comparison.csv", "stage0.shaped.csv", "stage0.svg"}) {
        EXPECT_TRUE(files.count(name)) << name;
    }
    ASSERT_EQ(files, listing("r2"));
    for (const auto& f : files) EXPECT_EQ(read_file(path("r1/" + f)), read_file(path("r2/" + f))) << f;

    ASSERT_EQ(cmd_run(scenario("audio.conf"), path("r3"), 5, out_, err_), kExitOk);
    EXPECT_NE(read_file(path("r1/trace.csv")), read_file(path("r3/trace.csv")));
}

TEST_F(Commands, RunWithoutPipelineOnlyAnalyzes) {
    ASSERT_EQ(cmd_run(scenario("audio_analysis_only.conf"), path("r"), std::nullopt, out_, err_), kExitOk)
        << err_.str();
    for (const auto& f : listing("r")) {
        EXPECT_EQ(f.find("stage"), std::string::npos) << f;
        EXPECT_EQ(f.find("comparison"), std::string::npos) << f;
        EXPECT_EQ(f.find(".svg"), std::string::npos) << f;
    }
    EXPECT_TRUE(listing("r").count("metrics.csv"));
}

TEST_F(Commands, ImportWritesOneCsvPerStream) {
    // One RTP packet: Ethernet + IPv4 + UDP + 12-byte RTP header + 125 bytes.
    std::string pcap;
    auto le32 = [&](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) pcap += static_cast<char>((v >> (8 * i)) & 0xFF);
    };
    le32(0xa1b2c3d4);
    pcap += std::string("\x02\x00\x04\x00", 4);
    le32(0);
    le32(0);
    le32(65535);
    le32(1);
    const std::size_t frame = 14 + 20 + 8 + 12 + 125;
    le32(0);
    le32(0);
    le32(frame);
    le32(frame);
    pcap += std::string(12, '\x01') + std::string("\x08\x00", 2);
    pcap += std::string("\x45\x00\x00\xa5\x00\x00\x00\x00\x40\x11\x00\x00\x0a\x00\x00\x01\x0a\x00\x00\x02", 20);
    pcap += std::string("\x13\x88\x13\x8c\x00\x91\x00\x00", 8);
    pcap += std::string("\x80\x60\x00\x07\x00\x00\x00\x00\xde\xad\xbe\xef", 12);
    pcap += std::string(125, 'x');
    write_file(path("c.pcap"), pcap);
    ASSERT_EQ(cmd_import(path("c.pcap"), path("imp"), std::nullopt, out_, err_), kExitOk) << err_.str();
    EXPECT_EQ(read_file(path("imp.ssrc3735928559.csv")),
              "seq,ssrc,payload_type,marker,send_ts_us,recv_ts_us,size_bytes\n7,3735928559,96,0,0,0,125\n");
    write_file(path("bad.pcap"), "abcd");
    EXPECT_EQ(cmd_import(path("bad.pcap"), path("imp"), std::nullopt, out_, err_), kExitUsage);
}

TEST_F(Commands, CliBinaryExitCodes) {
    auto run = [&](const std::string& args) {
        const std::string cmd = std::string(RTPSHAPE_CLI) + " " + args + " >" + path("stdout") + " 2>" + path("stderr");
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    const auto cfg = config("a.conf", kShortAudio);
    EXPECT_EQ(run("generate --config " + cfg + " --output " + path("t.csv")), 0);
    EXPECT_EQ(run("generate --config " + cfg + " --output " + path("t2.csv") + " --seed 9"), 0);
    EXPECT_NE(read_file(path("t.csv")), read_file(path("t2.csv")));
    EXPECT_EQ(run("shape --config " + cfg + " --input " + path("t.csv") + " --output " + path("s")), 0);
    EXPECT_EQ(run("analyze --input " + path("t.csv") + " --input " + path("s.stage0")), 0);
    EXPECT_NE(read_file(path("stdout")).find("pdv_max_reduction_pct,100"), std::string::npos);
    EXPECT_EQ(run("report --input " + path("s.stage0") + " --output " + path("s.svg")), 0);
    EXPECT_EQ(run("run --config " + cfg + " --output " + path("run")), 0);
    EXPECT_EQ(run("frobnicate"), 2);
    EXPECT_EQ(run("generate --output " + path("x.csv")), 2);
    EXPECT_EQ(run("generate --config " + path("none.conf") + " --output " + path("x.csv")), 3);
}
