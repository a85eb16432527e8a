#include "cohesim/errors.hpp"
#include "cohesim/scenario_config.hpp"
#include "cohesim/study.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace cohesim;
using nlohmann::json;

namespace {

json base_doc()
{
    return json::parse(R"({
      "mesh": {"type": "rectangle", "length": 1.0, "half_height": 1.0, "n_x": 4, "n_y": 2},
      "materials": {"rho": 1.0, "mu": 2.0, "eta": 0.5},
      "law": {"kind": "prototype", "g_c": 1.0, "xi_c": 0.2},
      "loads": {"bulk": "t*y"},
      "time": {"T": 2.0, "n": 50}
    })");
}

std::string config_error(const json& doc)
{
    try {
        scenario_from_json(doc);
    } catch (const ConfigError& e) {
        return e.what();
    } catch (const Error& e) {
        return std::string("other: ") + e.what();
    }
    return "";
}

}  // namespace

TEST(Config, MinimalDocument)
{
    const ScenarioConfig cfg = scenario_from_json(base_doc());
    const Scenario& s = *cfg.scenario;
    EXPECT_TRUE(cfg.rectangle);
    EXPECT_EQ(cfg.rectangle_spec.n_x, 4);
    EXPECT_EQ(s.steps, 50);
    EXPECT_DOUBLE_EQ(s.final_time, 2.0);
    EXPECT_DOUBLE_EQ(s.loads.final_time, 2.0);
    EXPECT_DOUBLE_EQ(s.materials.mu_plus, 2.0);
    EXPECT_DOUBLE_EQ(s.materials.eta_minus, 0.5);
    EXPECT_DOUBLE_EQ(s.eps_bar, 1e-3);
    EXPECT_DOUBLE_EQ(s.loads.bulk(0.3, 0.5, 1.5), 0.75);
    EXPECT_FALSE(s.loads.has_surface());
    EXPECT_EQ(cfg.output.snapshot_stride, 1);
    EXPECT_TRUE(cfg.output.vtk);
    EXPECT_DOUBLE_EQ(s.law.constants.psi_prime_0, 10.0);
}

TEST(Config, SidedMaterialsAndInitialFields)
{
    json d = base_doc();
    d["materials"] = {{"rho", 1.0}, {"mu_plus", 3.0}, {"mu_minus", 1.0}, {"eta", 1.0}};
    d["initial"] = {{"v0", "(1 - y^2)*x"}, {"xi0", 0.05}};
    d["regularization"] = {{"eps_bar", 1e-2}};
    d["solver"] = {{"tol", 1e-9}, {"max_iterations", 50}};
    d["output"] = {{"snapshot_stride", 5}, {"vtk", false}, {"dir", "out"}};
    const ScenarioConfig cfg = scenario_from_json(d);
    const Scenario& s = *cfg.scenario;
    EXPECT_DOUBLE_EQ(s.materials.mu_plus, 3.0);
    EXPECT_DOUBLE_EQ(s.materials.mu_minus, 1.0);
    ASSERT_EQ(s.v0.size(), s.mesh.node_count());
    for (Index i = 0; i < s.mesh.node_count(); ++i) {
        const Point& p = s.mesh.nodes()[i];
        EXPECT_DOUBLE_EQ(s.v0[i], (1 - p.y * p.y) * p.x);
    }
    EXPECT_EQ(s.xi0.size(), s.mesh.pair_count());
    EXPECT_DOUBLE_EQ(s.eps_bar, 1e-2);
    EXPECT_DOUBLE_EQ(s.solver.tol, 1e-9);
    EXPECT_EQ(s.solver.max_iterations, 50);
    EXPECT_EQ(s.snapshot_stride, 5);
    EXPECT_FALSE(cfg.output.vtk);
    EXPECT_EQ(cfg.output.dir, "out");
}

TEST(Config, FieldDiagnostics)
{
    auto with = [](const std::string& section, const std::string& key, const json& value) {
        json d = base_doc();
        d[section][key] = value;
        return d;
    };
    EXPECT_EQ(config_error(with("mesh", "n_z", 3)), "mesh.n_z: unknown key");
    EXPECT_EQ(config_error(with("time", "n", 0)), "time.n: must be at least 1");
    EXPECT_EQ(config_error(with("time", "n", 2.5)), "time.n: expected an integer");
    EXPECT_EQ(config_error(with("materials", "mu", -1.0)), "materials.mu: must be positive");
    EXPECT_NE(config_error(with("loads", "bulk", "t*")).find("loads.bulk: expression"), std::string::npos);
    EXPECT_EQ(config_error(with("law", "kind", "linear")), "law.kind: expected \"prototype\" or \"tabulated\"");

    json d = base_doc();
    d["extra"] = 1;
    EXPECT_EQ(config_error(d), "config.extra: unknown key");
    d = base_doc();
    d.erase("time");
    EXPECT_EQ(config_error(d), "config.time: missing");
}

TEST(Config, TabulatedLawViolationsNamed)
{
    json d = base_doc();
    d["law"] = {{"kind", "tabulated"},
                {"w", {0.0, 0.1, 0.2}},
                {"psi", {0.5, 1.0, 1.2}},
                {"dpsi", {10.0, 4.0, 0.0}},
                {"d2psi", {-60.0, -60.0, -60.0}}};
    try {
        scenario_from_json(d);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("(H1) violated"), std::string::npos) << e.what();
    }
}

TEST(Config, MalformedFileReportsLine)
{
    const auto dir = std::filesystem::temp_directory_path() / "cohesim_config_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "bad.json";
    std::ofstream(path) << "{\n  \"mesh\": {\n    \"n_x\": 4,,\n  }\n}\n";
    try {
        load_scenario_config(path);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
    EXPECT_THROW(load_scenario_config(dir / "missing.json"), IoError);
}

TEST(Config, StudySpecs)
{
    json tau = {{"kind", "tau_refinement"}, {"levels", 3}, {"base", base_doc()}};
    const StudySpec spec = study_from_json(tau);
    EXPECT_EQ(spec.kind, StudyKind::TauRefinement);
    EXPECT_EQ(spec.levels, 3);
    EXPECT_EQ(level_document(spec, 2)["time"]["n"], 200);
    EXPECT_EQ(level_document(spec, 2)["output"]["snapshot_stride"], 4);

    json h = {{"kind", "h_refinement"}, {"levels", 2}, {"base", base_doc()}};
    const StudySpec hs = study_from_json(h);
    EXPECT_EQ(level_document(hs, 1)["mesh"]["n_x"], 8);
    EXPECT_EQ(level_document(hs, 1)["mesh"]["n_y"], 4);

    json eps = {{"kind", "eps_continuation"}, {"eps_list", {1e-1, 1e-2}}, {"base", base_doc()}};
    EXPECT_DOUBLE_EQ(level_document(study_from_json(eps), 1)["regularization"]["eps_bar"].get<double>(), 1e-2);

    auto error_of = [](const json& d) {
        try {
            study_from_json(d);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_EQ(error_of({{"kind", "tau_refinement"}, {"levels", 1}, {"base", base_doc()}}),
              "study.levels: must be at least 2");
    EXPECT_EQ(error_of({{"kind", "eps_continuation"}, {"eps_list", {1e-2, 1e-1}}, {"base", base_doc()}}),
              "study.eps_list: values must be strictly decreasing");
    EXPECT_EQ(error_of({{"kind", "sweep"}, {"base", base_doc()}}),
              "study.kind: expected single, tau_refinement, eps_continuation or h_refinement");
}
