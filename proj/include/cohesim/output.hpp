#pragma once

#include "cohesim/audit.hpp"
#include "cohesim/evolution.hpp"
#include "cohesim/scenario_config.hpp"

#include <filesystem>
#include <string>

namespace cohesim {

/// CSV headers, one row per step (energies, kkt) or per snapshot and pair (tractions).
extern const char* const kEnergiesHeader;
extern const char* const kKktHeader;
extern const char* const kTractionsHeader;
extern const char* const kStudyHeader;

/// Shortest form that reads back to the same double.
std::string format_double(double v);

struct RunSummary {
    int steps_completed = 0;
    int steps = 0;
    double max_energy_residual = 0.0;
    double max_split_gap = 0.0;
    double max_kkt_violation = 0.0;
    double max_el_residual = 0.0;
    double max_traction = 0.0;             // non-corner pairs, k >= 1 snapshots
    double max_transmission_defect = 0.0;  // non-corner pairs
    double max_cohesive_defect = 0.0;
    bool complete = false;
};

RunSummary summarize(const TrajectoryRecord& tr, const DiscreteOperators& ops, const CohesiveLaw& law);
std::string format_summary(const RunSummary& s);

void write_energies_csv(const std::filesystem::path& path, const EnergyLedger& ledger);
void write_kkt_csv(const std::filesystem::path& path, const TrajectoryRecord& tr, const KktReport& kkt);
void write_tractions_csv(const std::filesystem::path& path, const TrajectoryRecord& tr, const InterfaceMesh& mesh,
                         const DiscreteOperators& ops, const CohesiveLaw& law);
/// Legacy ASCII VTK unstructured grid with nodal u, v and the subdomain tag.
void write_vtk(const std::filesystem::path& path, const Snapshot& snap, const InterfaceMesh& mesh,
               const DiscreteOperators& ops);

/// Writes energies.csv, kkt.csv, tractions.csv and (optionally) fields_XXXX.vtk into dir.
RunSummary write_run_outputs(const std::filesystem::path& dir, const TrajectoryRecord& tr, const Scenario& s,
                             const DiscreteOperators& ops, bool vtk);

}  // namespace cohesim
