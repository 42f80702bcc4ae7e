#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "../tools/cli.hpp"
#include "stepfit/errors.hpp"
#include "stepfit/io.hpp"

using namespace stepfit;
namespace fs = std::filesystem;

namespace {

int call(std::vector<std::string> args, std::string* err = nullptr) {
    args.insert(args.begin(), "stepfit");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream e;
    const int rc = cli::main_entry(static_cast<int>(argv.size()), argv.data(), e);
    if (err) *err = e.str();
    return rc;
}

cli::RunConfig parse(std::vector<std::string> args) {
    args.insert(args.begin(), "stepfit");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli::parse_args(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("stepfit_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& f) const { return (path / f).string(); }
};

}  // namespace

TEST(Cli, ValidLearnConfig) {
    const auto c = parse({"learn", "--scheme", "fe", "--lambda", "-1,12.566", "--h", "0.01"});
    EXPECT_EQ(c.command, "learn");
    EXPECT_EQ(c.schemes, std::vector<std::string>{"fe"});
    EXPECT_EQ(c.lambda, Complex(-1.0, 12.566));
    EXPECT_EQ(c.h, 0.01);
}

TEST(Cli, UnknownSchemeIsUsageError) {
    std::string err;
    EXPECT_EQ(call({"learn", "--scheme", "xx", "--lambda", "1,0", "--h", "0.1"}, &err), cli::kExitUsage);
    EXPECT_NE(err.find("xx"), std::string::npos);
    EXPECT_EQ(call({"nope"}), cli::kExitUsage);
    EXPECT_EQ(call({"learn", "--scheme", "fe", "--lambda", "1", "--h", "0.1"}), cli::kExitUsage);
}

TEST(Cli, HelpExitsZero) {
    testing::internal::CaptureStdout();
    EXPECT_EQ(call({"--help"}), cli::kExitOk);
    const std::string out = testing::internal::GetCapturedStdout();
    EXPECT_NE(out.find("noise-sweep"), std::string::npos);
}

TEST(Cli, SubcommandHelpListsDefaults) {
    for (const char* sub : {"region", "locus", "rootsmap", "resign-map", "landscape", "noise-sweep", "gen"}) {
        testing::internal::CaptureStdout();
        EXPECT_EQ(call({sub, "--help"}), cli::kExitOk);
        const std::string out = testing::internal::GetCapturedStdout();
        EXPECT_NE(out.find('['), std::string::npos) << sub;
    }
}

TEST(Cli, RegionDefaultWindow) {
    TempDir t;
    const auto c = parse({"region", "--scheme", "leapfrog", "--out", t / "map.svg"});
    EXPECT_FALSE(c.window.has_value());
    EXPECT_EQ(c.nx, kDefaultGrid);
    ASSERT_EQ(call({"region", "--scheme", "leapfrog", "--nx", "40", "--ny", "40", "--out", t / "map.svg"}), 0);
    const std::string svg = slurp(t / "map.svg");
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("polyline"), std::string::npos);
    // Tick labels of the default window.
    EXPECT_NE(svg.find(">-4<"), std::string::npos);
    EXPECT_NE(svg.find(">3<"), std::string::npos);
}

TEST(Cli, LearnJsonKeys) {
    TempDir t;
    ASSERT_EQ(call({"learn", "--scheme", "rk4", "--lambda", "-1,2", "--h", "0.1", "--out", t / "r.json"}), 0);
    const auto j = nlohmann::ordered_json::parse(slurp(t / "r.json"));
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    EXPECT_EQ(keys, (std::vector<std::string>{"scheme", "lambda", "h", "lambda_hat", "lambda_hat_h", "candidates",
                                              "in_stability_region", "nyquist_ok", "re_sign", "im_sign_matches",
                                              "phase_class"}));
    EXPECT_EQ(j["candidates"].size(), 4u);
    EXPECT_EQ(j["scheme"], "rk4");
}

TEST(Cli, LandscapeSvgAndCsv) {
    TempDir t;
    ASSERT_EQ(call({"gen", "--lambda", "-0.5,3", "--N", "16", "--out", t / "d.csv"}), 0);
    ASSERT_EQ(call({"landscape", "--scheme", "fe", "--data", t / "d.csv", "--nx", "30", "--ny", "30", "--out",
                    t / "l.svg"}),
              0);
    const std::string svg = slurp(t / "l.svg");
    EXPECT_NE(svg.find("<path"), std::string::npos);
    EXPECT_NE(svg.find("min log10 objective"), std::string::npos);
    ASSERT_EQ(call({"landscape", "--scheme", "fe", "--data", t / "d.csv", "--nx", "5", "--ny", "4", "--out",
                    t / "l.csv"}),
              0);
    const std::string csv = slurp(t / "l.csv");
    EXPECT_EQ(csv.rfind("re,im,log10_objective\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 21);
}

TEST(Cli, TrajectoryCsvRoundTrip) {
    const TrajectoryData d = generate({-0.3, 1.7}, 0.1, 1, 12, {1.0, 0.25}, 0.05, 3);
    std::ostringstream os;
    io::write_trajectory_csv(os, d);
    const TrajectoryData back = io::parse_trajectory_csv(os.str());
    EXPECT_EQ(back.Z0, d.Z0);
    EXPECT_EQ(back.samples, d.samples);
    EXPECT_EQ(back.H, d.H);
    EXPECT_THROW(io::parse_trajectory_csv("t,re,im\n0,1,x\n"), IoError);
}

TEST(Cli, VectorCsvRoundTrip) {
    const Vector2 x0(1.0, 0.0);
    const auto data = matrix_trajectory(rotation_generator(1.0), x0, 1.0 / 128, 10, 0.01, 3);
    std::ostringstream os;
    io::write_vector_csv(os, x0, data, 1.0 / 128);
    Vector2 y0;
    std::vector<Vector2> back;
    double h = 0;
    io::parse_vector_csv(os.str(), y0, back, h);
    EXPECT_EQ(y0, x0);
    EXPECT_EQ(h, 1.0 / 128);
    ASSERT_EQ(back.size(), data.size());
    for (std::size_t i = 0; i < data.size(); ++i) EXPECT_EQ(back[i], data[i]);
}

TEST(Cli, DeterministicOutput) {
    TempDir t;
    for (const char* f : {"a.csv", "b.csv"})
        ASSERT_EQ(call({"noise-sweep", "--scheme", "fe", "--kind", "scalar", "--sigmas", "2^-8..2^-6", "--trials",
                        "2", "--seed", "7", "--out", t / f}),
                  0);
    EXPECT_EQ(slurp(t / "a.csv"), slurp(t / "b.csv"));
    for (const char* f : {"a.csv", "b.csv"})
        ASSERT_EQ(call({"gen", "--lambda", "-3,1", "--N", "10", "--sigma", "0.1", "--seed", "7", "--out", t / f}), 0);
    EXPECT_EQ(slurp(t / "a.csv"), slurp(t / "b.csv"));
}

TEST(Cli, ExitCodes) {
    TempDir t;
    EXPECT_EQ(call({"learn", "--scheme", "fe", "--lambda", "0,1", "--h", "0.1", "--out", "/nonexistent/dir/x.json"}),
              cli::kExitIo);
    EXPECT_EQ(call({"convdiff", "--scheme", "fe", "--k", "10", "--h", "0.05", "--out", t / "c.json"}),
              cli::kExitDomain);
    EXPECT_EQ(call({"repeated", "--scheme", "ab3", "--out", t / "r.json"}), cli::kExitDomain);
    EXPECT_EQ(call({"fit", "--scheme", "fe", "--data", t / "missing.csv"}), cli::kExitIo);
}

TEST(Cli, EverySubcommandRuns) {
    TempDir t;
    ASSERT_EQ(call({"gen", "--lambda", "-0.5,3", "--N", "16", "--out", t / "d.csv"}), 0);
    std::ofstream(t / "c.json") << R"({"k": 2, "alpha": [-1, 0, 1], "beta": [0, 2, 0]})";
    const std::vector<std::vector<std::string>> runs = {
        {"learn", "--custom", t / "c.json", "--lambda", "0,1", "--h", "0.1", "--format", "csv"},
        {"fit", "--scheme", "itrap", "--data", t / "d.csv"},
        {"region", "--scheme", "rk2", "--nx", "20", "--ny", "20"},
        {"region", "--custom", t / "c.json", "--nx", "20", "--ny", "20"},
        {"locus", "--scheme", "ab3", "--n", "64"},
        {"rootsmap", "--scheme", "bdf2", "--nx", "20", "--ny", "20", "--format", "svg"},
        {"resign-map", "--scheme", "am3", "--nx", "20", "--ny", "20"},
        {"repeated", "--scheme", "ab2", "--format", "csv"},
        {"phase", "--scheme", "rk2", "--samples", "8"},
        {"phase", "--scheme", "be", "--a", "-0.35", "--theta", "0.3"},
        {"extrap", "--lambda", "0,2", "--summary", t / "e.json"},
        {"order", "--scheme", "fe,leapfrog", "--lambda", "-1,2"},
        {"convdiff", "--scheme", "itrap", "--k", "10", "--h", "0.001"},
        {"noise-sweep", "--scheme", "rk2", "--kind", "scalar", "--sigmas", "0.001,0.002", "--trials", "2"},
        {"matrix-fit", "--scheme", "fe", "--N", "32", "--sigma", "0.001"},
    };
    for (auto args : runs) {
        args.push_back("--out");
        args.push_back(t / "out.txt");
        std::string err;
        EXPECT_EQ(call(args, &err), 0) << args[0] << ": " << err;
        EXPECT_GT(fs::file_size(t / "out.txt"), 0u) << args[0];
    }
    const auto e = nlohmann::json::parse(slurp(t / "e.json"));
    EXPECT_TRUE(e.contains("slope"));
    EXPECT_TRUE(e.contains("intercept"));
}

TEST(Cli, NumberLists) {
    const auto r = cli::parse_number_list("2^-3..2^-1");
    EXPECT_EQ(r, (std::vector<double>{0.125, 0.25, 0.5}));
    EXPECT_EQ(cli::parse_number_list("0.1,0.2"), (std::vector<double>{0.1, 0.2}));
    EXPECT_THROW(cli::parse_number_list("3..4"), cli::UsageError);
    EXPECT_THROW(cli::parse_window("1,0,0,1"), cli::UsageError);
}
