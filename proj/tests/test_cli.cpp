#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
    int status = -1;
    std::string out;
};

// Runs the CLI through the shell, capturing stdout and stderr together.
Outcome cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + MAGRELAX_CLI + std::string(" ") + args + " 2>&1";
    Outcome o;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return o;
    std::array<char, 4096> buf;
    while (std::fgets(buf.data(), int(buf.size()), pipe)) o.out += buf.data();
    const int raw = pclose(pipe);
    o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return o;
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("magrelax_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    std::string write_config(const json& j, const std::string& name = "config.json") {
        const auto path = (dir / name).string();
        std::ofstream(path) << j.dump(2);
        return path;
    }

    json small(const std::string& out) {
        return {{"model", {{"N", 10}, {"J", 0.3}, {"Omega", -1.0}, {"omega", -0.13}}},
                {"sector", {{"m", 3}}},
                {"initial", {{"sites", {1, 2, 3}}}},
                {"grid", {{"t_max", 30}, {"steps", 600}}},
                {"output", {{"directory", out}}}};
    }

    static std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    fs::path dir;
};

} // namespace

TEST_F(Cli, Version) {
    const auto o = cli("version");
    EXPECT_EQ(o.status, 0);
    EXPECT_EQ(o.out, "magrelax 1.0.0\n");
}

TEST_F(Cli, Dims) {
    EXPECT_EQ(cli("dims 30 3").out, "4930\n");
    EXPECT_EQ(cli("dims 10 3").out, "210\n");
    const auto bad = cli("dims 2 1");
    EXPECT_NE(bad.status, 0);
    EXPECT_NE(bad.out.find("at least 3 sites"), std::string::npos);
}

TEST_F(Cli, BasisDump) {
    const auto o = cli("basis 4 1");
    EXPECT_EQ(o.out, "index,excitations\n0,0001\n1,0010\n2,0100\n3,1000\n");
}

TEST_F(Cli, DryRunReportsDimensionWithoutOutputs) {
    auto j = small((dir / "never").string());
    j["model"]["N"] = 30;
    const auto o = cli("run --dry-run " + write_config(j));
    ASSERT_EQ(o.status, 0) << o.out;
    EXPECT_NE(o.out.find("\"dimension\": 4930"), std::string::npos);
    EXPECT_NE(o.out.find("\"config\""), std::string::npos);
    EXPECT_FALSE(fs::exists(dir / "never"));
}

TEST_F(Cli, InvalidConfigNamesTheField) {
    auto j = small((dir / "out").string());
    j["initial"]["sites"] = {1, 1, 1};
    const auto o = cli("run " + write_config(j));
    EXPECT_EQ(o.status, 2);
    EXPECT_NE(o.out.find("initial.sites"), std::string::npos) << o.out;

    std::ofstream(dir / "broken.json") << "{ not json";
    EXPECT_EQ(cli("run " + (dir / "broken.json").string()).status, 2);
}

TEST_F(Cli, CapacityErrorNamesDimension) {
    auto j = small((dir / "out").string());
    j["model"]["N"] = 40;  // 11440 states
    j["initial"]["sites"] = {1, 2, 3};
    const auto o = cli("run " + write_config(j));
    EXPECT_EQ(o.status, 3);
    EXPECT_NE(o.out.find("11440"), std::string::npos) << o.out;
}

TEST_F(Cli, GobbsSubcommand) {
    auto j = small((dir / "out").string());
    j["model"]["N"] = 30;
    const auto o = cli("gobbs " + write_config(j));
    ASSERT_EQ(o.status, 0) << o.out;
    const auto r = json::parse(o.out);
    EXPECT_NEAR(r["C_max_per_site"].get<double>(), 0.3251, 5e-4);
    EXPECT_TRUE(r["boundary"].get<bool>());
    EXPECT_TRUE(r["beta_E"].is_null());
}

TEST_F(Cli, RunWritesEveryArtifactDeterministically) {
    const auto a = dir / "a", b = dir / "b";
    const auto cfg = write_config(small(a.string()));
    const auto first = cli("run -q " + cfg);
    ASSERT_EQ(first.status, 0) << first.out;
    for (const char* name : {"populations.csv", "entropy.csv", "correlation.csv", "energies.csv", "steady.json",
                             "gobbs.json", "wavefront.json", "run.json", "populations.svg", "entropy.svg",
                             "correlation.svg", "site1.svg"})
        EXPECT_TRUE(fs::exists(a / name)) << name;

    // Same config, output redirected through the environment.
    const auto second = cli("run -q " + cfg, "MAGRELAX_OUTPUT_DIR=" + b.string());
    ASSERT_EQ(second.status, 0) << second.out;
    for (const char* name : {"populations.csv", "entropy.csv", "correlation.csv", "energies.csv", "steady.json",
                             "gobbs.json", "wavefront.json"}) {
        auto x = slurp(a / name), y = slurp(b / name);
        if (std::string(name).ends_with(".json")) {
            // Only the embedded output directory differs.
            auto jx = json::parse(x), jy = json::parse(y);
            jx["config"]["output"].erase("directory");
            jy["config"]["output"].erase("directory");
            EXPECT_EQ(jx.dump(), jy.dump()) << name;
        } else {
            EXPECT_EQ(x, y) << name;
        }
    }

    const auto steady = json::parse(slurp(a / "steady.json"));
    EXPECT_EQ(steady["version"], "1.0.0");
    EXPECT_EQ(steady["config"]["model"]["N"], 10);
    EXPECT_EQ(steady["p_infinity"].size(), 10u);
    const auto wave = json::parse(slurp(a / "wavefront.json"));
    EXPECT_GT(wave["v_g"].get<double>(), 0.0);
    EXPECT_EQ(wave["arrivals"].size(), 10u);
    EXPECT_TRUE(slurp(a / "populations.svg").starts_with("<svg"));

    std::ifstream csv(a / "populations.csv");
    std::string header, row;
    std::getline(csv, header);
    std::getline(csv, row);
    EXPECT_EQ(header.rfind("t,Jt,P_1_m1,P_1_0,P_1_p1", 0), 0u);
    EXPECT_EQ(row.rfind("0,0,0,1,0", 0), 0u);
}

TEST_F(Cli, OutputFlagBeatsEnvironment) {
    auto j = small((dir / "x").string());
    j["analyses"] = {{"evolve", false}, {"wavefront", false}, {"steady", false}};
    const auto path = write_config(j, "light.json");
    const auto o = cli("run -q -o " + (dir / "flag").string() + " " + path, "MAGRELAX_OUTPUT_DIR=" + (dir / "env").string());
    ASSERT_EQ(o.status, 0) << o.out;
    EXPECT_TRUE(fs::exists(dir / "flag" / "gobbs.json"));
    EXPECT_FALSE(fs::exists(dir / "env"));
}

TEST_F(Cli, ReferenceQuenchConfigEndToEnd) {
    const auto out = dir / "quench30";
    const auto o = cli("run -q -o " + out.string() + " " + MAGRELAX_SOURCE_DIR + "/configs/quench30.json");
    ASSERT_EQ(o.status, 0) << o.out;
    for (const char* name : {"populations.csv", "entropy.csv", "correlation.csv", "energies.csv", "steady.json",
                             "gobbs.json", "wavefront.json", "populations.svg", "entropy.svg", "correlation.svg",
                             "site1.svg"})
        EXPECT_TRUE(fs::exists(out / name)) << name;
    const auto g = json::parse(slurp(out / "gobbs.json"));
    EXPECT_NEAR(g["C_max_per_site"].get<double>(), 0.3251, 5e-4);
    const auto s = json::parse(slurp(out / "steady.json"));
    EXPECT_NEAR(s["C_T_infinity_per_site"].get<double>(), 0.3342, 5e-3);
}
