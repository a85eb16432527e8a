#pragma once

#include "cohesim/evolution.hpp"
#include "cohesim/expression.hpp"

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace cohesim {

struct OutputConfig {
    std::string dir;  // empty: use the command-line --out
    int snapshot_stride = 1;
    bool vtk = true;
};

/// A parsed scenario configuration.
///
/// Sections: "mesh", "materials", "law", "loads", "time", "initial",
/// "regularization", "solver", "output". Unknown keys are rejected; every
/// error is a ConfigError naming the offending field.
struct ScenarioConfig {
    std::shared_ptr<Scenario> scenario;
    OutputConfig output;
    nlohmann::json document;  // as read, for provenance
    bool rectangle = false;   // mesh came from the rectangle generator
    RectangleSpec rectangle_spec;
    std::filesystem::path base_dir;  // for relative paths
};

/// Parses a JSON file; IoError if unreadable, ConfigError with line and
/// column if malformed.
nlohmann::json read_json_file(const std::filesystem::path& path);

ScenarioConfig scenario_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = ".");
ScenarioConfig load_scenario_config(const std::filesystem::path& path);

/// Envelope from a "law" section.
CohesiveLaw law_from_json(const nlohmann::json& law);

enum class StudyKind { Single, TauRefinement, EpsContinuation, HRefinement };

struct StudySpec {
    StudyKind kind = StudyKind::Single;
    int levels = 1;
    std::vector<double> eps_list;
    nlohmann::json base;  // scenario document
    std::filesystem::path base_dir;
};

StudySpec study_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = ".");
StudySpec load_study_spec(const std::filesystem::path& path);
const char* study_kind_name(StudyKind kind);

}  // namespace cohesim
