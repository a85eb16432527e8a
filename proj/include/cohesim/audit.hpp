#pragma once

#include "cohesim/assembly.hpp"
#include "cohesim/cohesive_law.hpp"
#include "cohesim/evolution.hpp"

#include <vector>

namespace cohesim {

struct LedgerRow {
    int k = 0;
    double t = 0.0;
    double elastic = 0.0, kinetic = 0.0, interface = 0.0, stored = 0.0, dissipated = 0.0;
    double viscous_cum = 0.0;    // sum_m tau v_m'Aeta v_m
    double external_cum = 0.0;   // sum_m tau (f_{m-1} + f_m)/2 . v_m
    double interface_dissipation_cum = 0.0;  // sum_m sum_j w_j [psi_d(xi_m) - psi_d(xi_{m-1})]
    double residual = 0.0;       // [E + Psi + K]_k - [E + Psi + K]_0 - P + D
    double split_residual = 0.0; // same with Psi_s and the interface dissipation
};

/// Discrete energy balance. Energies are recorded at every step, so the
/// ledger is complete regardless of the snapshot stride.
struct EnergyLedger {
    std::vector<LedgerRow> rows;
    double max_abs_residual() const;
    /// max_k |residual - split_residual|; zero up to roundoff.
    double max_split_gap() const;
};

EnergyLedger energy_ledger(const TrajectoryRecord& trajectory, const Envelope& env, const Vector& weights);

struct KktRow {
    int k = 0;
    double admissibility = 0.0;    // max_j (|[u_k]| - xi_k)^+
    double complementarity = 0.0;  // max_j |(xi_k - xi_{k-1})(|[u_k]| - xi_k)|
    double increment_bound = 0.0;  // max_j (|xi_k - xi_{k-1}| - |[u_k] - [u_{k-1}]|)^+
    double max_violation() const { return std::max({admissibility, complementarity, increment_bound}); }
};

struct KktReport {
    std::vector<KktRow> rows;  // k = 1..n
    double max_violation() const;
    bool history_monotone = true;
};

KktReport kkt_report(const TrajectoryRecord& trajectory);

/// Euler-Lagrange residual vector at a snapshot, acceleration taken as (v - v_prev)/tau.
Vector weak_residual_vector(const Snapshot& s, double tau, const DiscreteOperators& ops, const CohesiveLaw& law);
/// Its infinity norm.
double weak_residual(const Snapshot& s, double tau, const DiscreteOperators& ops, const CohesiveLaw& law);

struct TractionField {
    Vector sigma_plus;   // sigma+ nu at each pair, from the Omega+ residual
    Vector sigma_minus;  // sigma- nu, from the Omega- residual
    Vector cohesive;     // dpsi_dw([u], xi)
    std::vector<bool> corner;

    /// Maxima over non-corner pairs.
    double max_transmission_defect() const;
    double max_cohesive_defect() const;
    double max_abs_traction() const;
};

/// Discrete Neumann extraction on both sides of K, with nu = nu- = -nu+.
TractionField traction_extraction(const Snapshot& s, double tau, const DiscreteOperators& ops, const CohesiveLaw& law);

struct RegularityNorms {
    double velocity_h1 = 0.0;      // sup_k ||v_k||_H1
    double acceleration_l2 = 0.0;  // sup_k ||(v_k - v_{k-1})/tau||_L2
};

RegularityNorms regularity_norms(const TrajectoryRecord& trajectory);

}  // namespace cohesim
