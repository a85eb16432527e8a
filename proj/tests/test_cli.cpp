#include "cohesim/cli.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <sys/wait.h>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out, err;
};

Outcome cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "cohesim");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cohesim::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override
    {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / "cohesim_cli_test" / info->name();
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }

    fs::path write(const std::string& name, const json& doc) const
    {
        const fs::path p = dir_ / name;
        std::ofstream(p) << doc.dump(2);
        return p;
    }

    fs::path dir_;
};

json rest_doc()
{
    return json::parse(R"({
      "mesh": {"type": "rectangle", "length": 1.0, "half_height": 1.0, "n_x": 4, "n_y": 2},
      "materials": {"rho": 1.0, "mu": 1.0, "eta": 1.0},
      "law": {"kind": "prototype", "g_c": 1.0, "xi_c": 0.2},
      "time": {"T": 1.0, "n": 100},
      "output": {"snapshot_stride": 25}
    })");
}

json ramp_doc()
{
    json d = rest_doc();
    d["mesh"]["n_x"] = 8;
    d["mesh"]["n_y"] = 4;
    d["loads"] = {{"bulk", "60*t*y*(1 + 0.5*sin(pi*x))"}};
    return d;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p)
{
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

int column(const std::vector<std::string>& header, const std::string& name)
{
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    ADD_FAILURE() << "no column " << name;
    return 0;
}

}  // namespace

TEST_F(CliTest, RestScenarioHasNoMotion)
{
    const auto r = cli({"run", write("rest.json", rest_doc()).string(), "--out", (dir_ / "out").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("ok steps=100/100", 0), 0u) << r.out;
    const auto rows = read_csv(dir_ / "out" / "energies.csv");
    ASSERT_EQ(rows.size(), 102u);
    // the floored history leaves the constant offset psi(0, eps_bar) in the
    // interface energy; every other column is exactly zero
    const std::string offset = rows[1][column(rows[0], "interface")];
    for (std::size_t k = 1; k < rows.size(); ++k) {
        for (const char* c : {"elastic", "kinetic", "stored", "viscous_cum", "external_cum",
                              "interface_dissipation_cum", "residual", "split_residual"})
            EXPECT_EQ(rows[k][column(rows[0], c)], "0") << c << " row " << k;
        EXPECT_EQ(rows[k][column(rows[0], "interface")], offset);
    }
    for (int k : {0, 25, 50, 75, 100}) {
        char name[32];
        std::snprintf(name, sizeof name, "fields_%04d.vtk", k);
        EXPECT_TRUE(fs::exists(dir_ / "out" / name)) << name;
    }
}

TEST_F(CliTest, InvalidLawExitsWithConfigCode)
{
    json d = rest_doc();
    d["law"] = {{"kind", "tabulated"},
                {"w", {0.0, 0.1, 0.2}},
                {"psi", {0.5, 1.0, 1.2}},
                {"dpsi", {10.0, 4.0, 0.0}},
                {"d2psi", {-60.0, -60.0, -60.0}}};
    const auto r = cli({"run", write("bad.json", d).string(), "--out", (dir_ / "out").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("(H1) violated"), std::string::npos) << r.err;

    json u = rest_doc();
    u["time"]["dt"] = 0.1;
    const auto r2 = cli({"run", write("unknown.json", u).string(), "--out", (dir_ / "out").string()});
    EXPECT_EQ(r2.code, 2);
    EXPECT_NE(r2.err.find("time.dt: unknown key"), std::string::npos) << r2.err;

    std::ofstream(dir_ / "syntax.json") << "{\n\"time\": {\"T\": 1,}\n}";
    const auto r3 = cli({"run", (dir_ / "syntax.json").string(), "--out", (dir_ / "out").string()});
    EXPECT_EQ(r3.code, 2);
    EXPECT_NE(r3.err.find("line 2"), std::string::npos) << r3.err;
}

TEST_F(CliTest, RampRowCountsAndSummary)
{
    const auto r = cli({"run", write("ramp.json", ramp_doc()).string(), "--out", (dir_ / "out").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("max_energy_residual="), std::string::npos);
    EXPECT_NE(r.out.find("max_kkt_violation="), std::string::npos);
    EXPECT_EQ(read_csv(dir_ / "out" / "energies.csv").size(), 102u);
    EXPECT_EQ(read_csv(dir_ / "out" / "kkt.csv").size(), 102u);
    // snapshots 25, 50, 75, 100 times 9 interface pairs
    EXPECT_EQ(read_csv(dir_ / "out" / "tractions.csv").size(), 1u + 4u * 9u);
}

TEST_F(CliTest, OutputIsBitIdenticalAcrossRuns)
{
    const auto cfg = write("ramp.json", ramp_doc()).string();
    ASSERT_EQ(cli({"run", cfg, "--out", (dir_ / "a").string()}).code, 0);
    ASSERT_EQ(cli({"run", cfg, "--out", (dir_ / "b").string(), "--jobs", "1"}).code, 0);
    for (const char* f : {"energies.csv", "kkt.csv", "tractions.csv", "fields_0050.vtk"}) {
        const std::string a = slurp(dir_ / "a" / f);
        EXPECT_FALSE(a.empty()) << f;
        EXPECT_TRUE(a == slurp(dir_ / "b" / f)) << f;
    }
}

TEST_F(CliTest, CsvHeadersMatchGoldenFile)
{
    std::ifstream golden(fs::path(COHESIM_SOURCE_DIR) / "tests" / "golden" / "csv_headers.txt");
    ASSERT_TRUE(golden.good());
    std::map<std::string, std::string> expected;
    std::string line;
    while (std::getline(golden, line)) {
        const auto colon = line.find(": ");
        expected[line.substr(0, colon)] = line.substr(colon + 2);
    }
    ASSERT_EQ(expected.size(), 4u);

    const auto cfg = write("ramp.json", ramp_doc());
    ASSERT_EQ(cli({"run", cfg.string(), "--out", (dir_ / "run").string()}).code, 0);
    const auto study = write("study.json", json{{"kind", "single"}, {"base", "ramp.json"}});
    ASSERT_EQ(cli({"study", study.string(), "--out", (dir_ / "study").string()}).code, 0);
    for (const auto& [file, header] : expected) {
        const fs::path p = file == "study.csv" ? dir_ / "study" / file : dir_ / "run" / file;
        std::ifstream in(p);
        std::string first;
        std::getline(in, first);
        EXPECT_EQ(first, header) << file;
    }
}

TEST_F(CliTest, TauStudyOnRestHasZeroDistances)
{
    write("rest.json", rest_doc());
    const auto study = write("study.json", json{{"kind", "tau_refinement"}, {"levels", 3}, {"base", "rest.json"}});
    const auto r = cli({"study", study.string(), "--out", (dir_ / "out").string(), "--jobs", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = read_csv(dir_ / "out" / "study.csv");
    ASSERT_EQ(rows.size(), 4u);
    const int d = column(rows[0], "distance_to_next");
    EXPECT_EQ(rows[1][d], "0");
    EXPECT_EQ(rows[2][d], "0");
    EXPECT_EQ(rows[3][d], "nan");
    for (int i = 0; i < 3; ++i) EXPECT_TRUE(fs::exists(dir_ / "out" / ("level_" + std::to_string(i)) / "energies.csv"));
}

TEST_F(CliTest, InertContinuationHasZeroDistances)
{
    json d = ramp_doc();
    d["initial"] = {{"xi0", 0.2}};  // above every floor in the list
    write("base.json", d);
    const auto study =
        write("study.json", json{{"kind", "eps_continuation"}, {"eps_list", {1e-1, 1e-2, 1e-3, 1e-4}}, {"base", "base.json"}});
    const auto r = cli({"study", study.string(), "--out", (dir_ / "out").string(), "--jobs", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = read_csv(dir_ / "out" / "study.csv");
    ASSERT_EQ(rows.size(), 5u);
    const int c = column(rows[0], "distance_to_next");
    for (int i = 1; i <= 3; ++i) EXPECT_EQ(rows[i][c], "0") << i;
}

TEST_F(CliTest, TauStudyOnRampReportsFiniteOrders)
{
    write("ramp.json", ramp_doc());
    const auto study = write("study.json", json{{"kind", "tau_refinement"}, {"levels", 3}, {"base", "ramp.json"}});
    const auto r = cli({"study", study.string(), "--out", (dir_ / "out").string(), "--jobs", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = read_csv(dir_ / "out" / "study.csv");
    ASSERT_EQ(rows.size(), 4u);
    const int d = column(rows[0], "distance_to_next"), o = column(rows[0], "distance_order"),
              ro = column(rows[0], "residual_order");
    EXPECT_GT(std::stod(rows[1][d]), 0.0);
    EXPECT_TRUE(std::isfinite(std::stod(rows[2][o])));
    EXPECT_TRUE(std::isfinite(std::stod(rows[2][ro])));
    EXPECT_TRUE(std::isfinite(std::stod(rows[3][ro])));
}

TEST_F(CliTest, HRefinementStudy)
{
    json d = ramp_doc();
    d["mesh"]["n_x"] = 4;
    d["mesh"]["n_y"] = 2;
    d["time"]["n"] = 200;
    write("base.json", d);
    const auto study = write("study.json", json{{"kind", "h_refinement"}, {"levels", 3}, {"base", "base.json"}});
    const auto r = cli({"study", study.string(), "--out", (dir_ / "out").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = read_csv(dir_ / "out" / "study.csv");
    const int d_col = column(rows[0], "distance_to_next");
    EXPECT_GT(std::stod(rows[1][d_col]), std::stod(rows[2][d_col]));
}

TEST_F(CliTest, SolverFailureExitsWithStep)
{
    json d = ramp_doc();
    d["solver"] = {{"max_iterations", 1}};
    const auto r = cli({"run", write("fail.json", d).string(), "--out", (dir_ / "out").string()});
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("solver failure at step "), std::string::npos) << r.err;
    EXPECT_NE(r.out.find("aborted"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir_ / "out" / "energies.csv"));

    json g = rest_doc();
    g["time"] = {{"T", 1000.0}, {"n", 1}};  // step far beyond the convexity guard
    const auto r2 = cli({"run", write("guard.json", g).string(), "--out", (dir_ / "out2").string()});
    EXPECT_EQ(r2.code, 3);
    EXPECT_NE(r2.err.find("at step 1"), std::string::npos) << r2.err;
}

TEST_F(CliTest, IoFailures)
{
    EXPECT_EQ(cli({"run", (dir_ / "missing.json").string(), "--out", (dir_ / "out").string()}).code, 4);
    std::ofstream(dir_ / "blocker") << "x";
    const auto cfg = write("rest.json", rest_doc());
    EXPECT_EQ(cli({"run", cfg.string(), "--out", (dir_ / "blocker" / "sub").string()}).code, 4);
}

TEST_F(CliTest, UsageErrors)
{
    EXPECT_EQ(cli({}).code, 2);
    EXPECT_EQ(cli({"frobnicate"}).code, 2);
    EXPECT_EQ(cli({"run"}).code, 2);
    EXPECT_EQ(cli({"--help"}).code, 0);
    const auto cfg = write("rest.json", rest_doc());
    EXPECT_EQ(cli({"run", cfg.string()}).code, 2);  // no --out and no output.dir
}

TEST_F(CliTest, CheckLawReportsConstants)
{
    const auto r = cli({"check-law", write("ramp.json", ramp_doc()).string()});
    ASSERT_EQ(r.code, 0) << r.err;
    auto value = [&](const std::string& key) {
        const auto at = r.out.find(key + ": ");
        EXPECT_NE(at, std::string::npos) << key;
        return std::stod(r.out.substr(at + key.size() + 2));
    };
    EXPECT_NEAR(value("beta"), 50.0, 1e-12);
    EXPECT_NEAR(value("psi_hat'(0)"), 10.0, 1e-12);
    EXPECT_NEAR(value("c_h"), 0.5, 1e-12);
    EXPECT_NEAR(value("H4 margin"), -49.5, 1e-12);
    EXPECT_NE(r.out.find("H3: ok"), std::string::npos);
    EXPECT_NE(r.out.find("H4: violated"), std::string::npos);
}

TEST_F(CliTest, ExecutableRuns)
{
    const auto cfg = write("rest.json", rest_doc());
    const std::string cmd = std::string("\"") + COHESIM_CLI_PATH + "\" run \"" + cfg.string() + "\" --out \"" +
                            (dir_ / "out").string() + "\" > \"" + (dir_ / "log.txt").string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    ASSERT_TRUE(WIFEXITED(status));
    EXPECT_EQ(WEXITSTATUS(status), 0) << slurp(dir_ / "log.txt");
    const int bad = std::system((std::string("\"") + COHESIM_CLI_PATH + "\" run /nonexistent.json --out /tmp/x > /dev/null 2>&1").c_str());
    ASSERT_TRUE(WIFEXITED(bad));
    EXPECT_EQ(WEXITSTATUS(bad), 4);
}

TEST_F(CliTest, VtkFrameStructure)
{
    const auto cfg = write("ramp.json", ramp_doc());
    ASSERT_EQ(cli({"run", cfg.string(), "--out", (dir_ / "out").string()}).code, 0);
    std::ifstream in(dir_ / "out" / "fields_0100.vtk");
    std::string line;
    std::vector<std::string> sections;
    std::size_t points = 0, cells = 0;
    while (std::getline(in, line)) {
        if (line.rfind("POINTS ", 0) == 0) points = std::stoul(line.substr(7));
        if (line.rfind("CELLS ", 0) == 0) cells = std::stoul(line.substr(6));
        for (const char* key : {"DATASET", "POINTS", "CELLS", "CELL_TYPES", "CELL_DATA", "POINT_DATA", "SCALARS"})
            if (line.rfind(key, 0) == 0) sections.push_back(line.substr(0, line.find(' ')));
    }
    // 8 x 4 cells per side, crossed: (9*5 + 8*4) nodes and 4*32 triangles per side
    EXPECT_EQ(points, 2u * (45u + 32u));
    EXPECT_EQ(cells, 2u * 128u);
    EXPECT_EQ(sections, (std::vector<std::string>{"DATASET", "POINTS", "CELLS", "CELL_TYPES", "CELL_DATA", "SCALARS",
                                                  "POINT_DATA", "SCALARS", "SCALARS"}));
}
