#pragma once

#include "cohesim/scenario_config.hpp"

#include <cmath>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace cohesim {

struct StudyLevel {
    int level = 0;
    double parameter = 0.0;  // n for tau refinement, n_x for h refinement, eps_bar for continuation
    int steps = 0;
    double tau = 0.0;
    double h_max = 0.0;
    double eps_bar = 0.0;
    bool ok = false;
    std::string error;
    double max_energy_residual = NAN;
    double max_kkt_violation = NAN;
    double velocity_h1 = NAN;
    double acceleration_l2 = NAN;
    double distance_to_next = NAN;  // to level + 1 (NaN for the last level or on failure)
    double distance_order = NAN;    // log2(d_{i-1} / d_i)
    double residual_order = NAN;    // log2(R_{i-1} / R_i)
};

struct StudyResult {
    StudyKind kind = StudyKind::Single;
    std::vector<StudyLevel> levels;
    bool all_ok() const;
};

/// Scenario document of one level: time.n doubled per tau level, n_x and
/// n_y doubled per h level, eps_bar taken from the list for continuation.
nlohmann::json level_document(const StudySpec& spec, int level);

/// Runs every level (up to `jobs` at a time) into out_dir/level_<i>, then
/// compares consecutive levels: coarse step k against fine step 2k for tau
/// refinement, coarse nodes against coincident fine nodes for h refinement.
/// Writes out_dir/study.csv. Level failures are recorded, not thrown.
StudyResult run_study(const StudySpec& spec, const std::filesystem::path& out_dir, unsigned jobs,
                      std::ostream* log = nullptr);

void write_study_csv(const std::filesystem::path& path, const StudyResult& result);

}  // namespace cohesim
