#pragma once

#include "cohesim/assembly.hpp"
#include "cohesim/cohesive_law.hpp"
#include "cohesim/mesh.hpp"
#include "cohesim/step_solver.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cohesim {

/// Full problem description for one time-discrete evolution.
///
/// Nodal fields (u0, v0, w0) live on all mesh nodes and must vanish on the
/// Dirichlet set; an empty vector means zero. xi0 has one entry per
/// interface pair (empty means zero).
struct Scenario {
    Scenario(InterfaceMesh mesh_, CohesiveLaw law_) : mesh(std::move(mesh_)), law(std::move(law_)) {}

    InterfaceMesh mesh;
    CohesiveLaw law;
    Materials materials;
    AssemblyOptions assembly;
    LoadModel loads;
    double final_time = 1.0;
    int steps = 100;
    Vector u0, v0, xi0;
    double eps_bar = 1e-3;  // floor of the initial history variable
    bool regularity_mode = false;
    std::optional<Vector> w0;  // initial acceleration, required in regularity mode
    int snapshot_stride = 1;
    SolverOptions solver;

    double tau() const { return final_time / steps; }
};

/// Checks the scenario invariants; throws ConfigError with the reason.
void validate_scenario(const Scenario& s);

struct InitialData {
    Vector u0;   // reduced (free DOFs)
    Vector v0;   // reduced
    Vector xi0;  // per pair
    /// Stationarity residual of the recomputed initial state (regularity mode), else 0.
    double stationarity = 0.0;
};

/// Floors the history at eps_bar; in regularity mode also recomputes u0 as
/// the minimizer of E(u) + Psi(u, xi_hat) - f(0).u + (Aeta v0).u + (M w0).u
/// and raises the history to cover the new opening.
InitialData regularize_initial_data(const Scenario& s, const DiscreteOperators& ops);

/// Full-field state kept every snapshot_stride steps (always at 0 and n).
struct Snapshot {
    int k = 0;
    double t = 0.0;
    Vector u, v, v_prev;  // reduced; v_prev = v_{k-1} (v0 - tau w0 or v0 at k = 0)
    Vector xi;
    Vector load_plus, load_minus;  // reduced side loads at t_k
};

/// Per-step scalars (index k = 0..n).
struct StepRecord {
    int k = 0;
    double t = 0.0;
    double elastic = 0.0;   // E = 1/2 u'A_mu u
    double kinetic = 0.0;   // K = 1/2 v'M v
    double interface = 0.0; // Psi = sum_j w_j psi([u]_j, xi_j)
    double stored = 0.0;    // Psi_s
    double dissipated = 0.0;  // Psi_d
    double viscous_increment = 0.0;   // tau v_k'Aeta v_k
    double external_increment = 0.0; // tau (f_{k-1} + f_k)/2 . v_k
    int newton_iterations = 0;
    double grad_norm = 0.0;
    double el_residual = 0.0;
    double velocity_h1 = 0.0;      // ||v_k||_H1
    double acceleration_l2 = 0.0;  // ||(v_k - v_{k-1})/tau||_L2
};

struct TrajectoryRecord {
    double tau = 0.0;
    int steps = 0;
    int snapshot_stride = 1;
    double solver_tol = 0.0;
    std::vector<StepRecord> records;   // n + 1 entries
    std::vector<Vector> jumps;         // [u_k], n + 1 entries
    std::vector<Vector> history;       // xi_k, n + 1 entries
    std::vector<Snapshot> snapshots;
    Vector u0_input;                   // reduced u0 as given (before recomputation)
    InitialData initial;
    bool complete = false;

    const Snapshot* snapshot_at(int k) const;
};

/// Step failure with the partial trajectory attached.
class RunAborted : public SolverError {
public:
    RunAborted(const SolverError& cause, std::shared_ptr<TrajectoryRecord> partial)
        : SolverError(cause.what(), cause.residual(), cause.step()), partial_(std::move(partial)) {}
    const TrajectoryRecord& partial() const { return *partial_; }

private:
    std::shared_ptr<TrajectoryRecord> partial_;
};

struct StepState {
    int k = 0;
    double t = 0.0;
    const Vector& u;
    const Vector& v;
    const Vector& xi;
};

struct RunCallbacks {
    std::function<void(const StepState&, const StepRecord&)> on_step;
};

/// A scenario with its assembled operators.
struct PreparedScenario {
    explicit PreparedScenario(const Scenario& s);
    const Scenario* scenario;
    DiscreteOperators ops;
};

TrajectoryRecord run(const Scenario& s, const RunCallbacks& callbacks = {});
TrajectoryRecord run(const PreparedScenario& prepared, const RunCallbacks& callbacks = {});

struct ContinuationEntry {
    double eps_bar = 0.0;
    std::optional<TrajectoryRecord> trajectory;
    std::string error;  // empty on success
};

struct ContinuationResult {
    std::vector<ContinuationEntry> entries;
    /// d(eps_i, eps_{i+1}) = max over snapshots of the L2 distance of u;
    /// NaN when either run failed.
    std::vector<double> distances;
};

/// Runs the scenario once per floor value (decreasing, positive), up to
/// `jobs` runs at a time.
ContinuationResult eps_continuation(const Scenario& s, const std::vector<double>& eps_list, unsigned jobs = 1);

/// max_k ||a_k - b_k||_L2 over common snapshot steps (unit mass).
double trajectory_distance(const TrajectoryRecord& a, const TrajectoryRecord& b, const DiscreteOperators& ops);

}  // namespace cohesim
