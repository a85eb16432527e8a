#include "cohesim/audit.hpp"

#include <algorithm>
#include <cmath>

namespace cohesim {

double EnergyLedger::max_abs_residual() const
{
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, std::abs(r.residual));
    return m;
}

double EnergyLedger::max_split_gap() const
{
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, std::abs(r.residual - r.split_residual));
    return m;
}

EnergyLedger energy_ledger(const TrajectoryRecord& tr, const Envelope& env, const Vector& weights)
{
    EnergyLedger ledger;
    if (tr.records.empty()) return ledger;
    const StepRecord& r0 = tr.records.front();
    const double total0 = r0.elastic + r0.interface + r0.kinetic;
    const double stored0 = r0.elastic + r0.stored + r0.kinetic;
    double viscous = 0.0, external = 0.0, interface = 0.0;
    for (std::size_t k = 0; k < tr.records.size(); ++k) {
        const StepRecord& r = tr.records[k];
        viscous += r.viscous_increment;
        external += r.external_increment;
        if (k > 0) {
            const Vector& a = tr.history[k - 1];
            const Vector& b = tr.history[k];
            for (Index j = 0; j < b.size(); ++j)
                interface += weights[j] * (split(0.0, b[j], env).dissipated - split(0.0, a[j], env).dissipated);
        }
        LedgerRow row;
        row.k = r.k;
        row.t = r.t;
        row.elastic = r.elastic;
        row.kinetic = r.kinetic;
        row.interface = r.interface;
        row.stored = r.stored;
        row.dissipated = r.dissipated;
        row.viscous_cum = viscous;
        row.external_cum = external;
        row.interface_dissipation_cum = interface;
        row.residual = (r.elastic + r.interface + r.kinetic) - total0 - external + viscous;
        row.split_residual = (r.elastic + r.stored + r.kinetic) - stored0 + interface - external + viscous;
        ledger.rows.push_back(row);
    }
    return ledger;
}

double KktReport::max_violation() const
{
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, r.max_violation());
    return m;
}

KktReport kkt_report(const TrajectoryRecord& tr)
{
    KktReport rep;
    for (std::size_t k = 1; k < tr.history.size(); ++k) {
        const Vector& xi = tr.history[k];
        const Vector& xi_prev = tr.history[k - 1];
        const Vector& j = tr.jumps[k];
        const Vector& j_prev = tr.jumps[k - 1];
        KktRow row;
        row.k = static_cast<int>(k);
        for (Index p = 0; p < xi.size(); ++p) {
            const double a = std::abs(j[p]);
            const double dxi = xi[p] - xi_prev[p];
            if (dxi < 0.0) rep.history_monotone = false;
            row.admissibility = std::max(row.admissibility, a - xi[p]);
            row.complementarity = std::max(row.complementarity, std::abs(dxi * (a - xi[p])));
            row.increment_bound = std::max(row.increment_bound, std::abs(dxi) - std::abs(j[p] - j_prev[p]));
        }
        rep.rows.push_back(row);
    }
    return rep;
}

namespace {

Vector cohesive_traction(const Vector& u, const Vector& xi, const DiscreteOperators& ops, const Envelope& env)
{
    const Vector j = ops.jump_of(u);
    Vector t(j.size());
    for (Index p = 0; p < j.size(); ++p) t[p] = dpsi_dw(j[p], xi[p], env);
    return t;
}

}  // namespace

Vector weak_residual_vector(const Snapshot& s, double tau, const DiscreteOperators& ops, const CohesiveLaw& law)
{
    const Vector a = (s.v - s.v_prev) / tau;
    const Vector t = cohesive_traction(s.u, s.xi, ops, law.envelope);
    return ops.mass * a + ops.stiffness_eta * s.v + ops.stiffness_mu * s.u - (s.load_plus + s.load_minus) +
           ops.jump.transpose() * ops.weights.cwiseProduct(t);
}

double weak_residual(const Snapshot& s, double tau, const DiscreteOperators& ops, const CohesiveLaw& law)
{
    return weak_residual_vector(s, tau, ops, law).lpNorm<Eigen::Infinity>();
}

TractionField traction_extraction(const Snapshot& s, double tau, const DiscreteOperators& ops, const CohesiveLaw& law)
{
    const Vector a = (s.v - s.v_prev) / tau;
    const SideOperators& p = ops.sides[0];
    const SideOperators& m = ops.sides[1];
    const Vector rp = p.mass * a + p.stiffness_eta * s.v + p.stiffness_mu * s.u - s.load_plus;
    const Vector rm = m.mass * a + m.stiffness_eta * s.v + m.stiffness_mu * s.u - s.load_minus;
    const Index np = ops.pair_count();
    TractionField f;
    f.sigma_plus.resize(np);
    f.sigma_minus.resize(np);
    f.cohesive = cohesive_traction(s.u, s.xi, ops, law.envelope);
    f.corner = ops.pair_corner;
    for (Index j = 0; j < np; ++j) {
        f.sigma_plus[j] = -rp[ops.pair_plus_free[j]] / ops.weights[j];
        f.sigma_minus[j] = rm[ops.pair_minus_free[j]] / ops.weights[j];
    }
    return f;
}

double TractionField::max_transmission_defect() const
{
    double m = 0.0;
    for (Index j = 0; j < sigma_plus.size(); ++j)
        if (!corner[j]) m = std::max(m, std::abs(sigma_plus[j] - sigma_minus[j]));
    return m;
}

double TractionField::max_cohesive_defect() const
{
    double m = 0.0;
    for (Index j = 0; j < sigma_plus.size(); ++j)
        if (!corner[j]) m = std::max(m, std::abs(sigma_plus[j] - cohesive[j]));
    return m;
}

double TractionField::max_abs_traction() const
{
    double m = 0.0;
    for (Index j = 0; j < sigma_plus.size(); ++j)
        if (!corner[j]) m = std::max({m, std::abs(sigma_plus[j]), std::abs(sigma_minus[j])});
    return m;
}

RegularityNorms regularity_norms(const TrajectoryRecord& tr)
{
    RegularityNorms n;
    for (const auto& r : tr.records) {
        n.velocity_h1 = std::max(n.velocity_h1, r.velocity_h1);
        n.acceleration_l2 = std::max(n.acceleration_l2, r.acceleration_l2);
    }
    return n;
}

}  // namespace cohesim
