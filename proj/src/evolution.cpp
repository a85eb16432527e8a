#include "cohesim/evolution.hpp"

#include "cohesim/cohesive_minimizer.hpp"
#include "cohesim/errors.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace cohesim {

namespace {

Vector nodal_or_zero(const Vector& v, Index n) { return v.size() == 0 ? Vector::Zero(n) : v; }

void check_nodal(const Vector& v, const InterfaceMesh& mesh, const char* name)
{
    if (v.size() == 0) return;
    if (v.size() != mesh.node_count())
        throw ConfigError(std::string("initial.") + name + ": expected " + std::to_string(mesh.node_count()) +
                          " nodal values, got " + std::to_string(v.size()));
    for (Index i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i])) throw ConfigError(std::string("initial.") + name + ": non-finite value");
    for (Index d : mesh.dirichlet_nodes())
        if (v[d] != 0.0)
            throw ConfigError(std::string("initial.") + name + " must vanish on the Dirichlet boundary (node " +
                              std::to_string(d) + ")");
}

bool discrete_h4(const DiscreteOperators& ops, double beta)
{
    SparseMatrix bwb = ops.jump.transpose() * ops.weights.asDiagonal() * ops.jump;
    SparseMatrix m = ops.stiffness_mu - beta * bwb;
    Eigen::SimplicialLLT<SparseMatrix> llt(m);
    return llt.info() == Eigen::Success;
}

double l2_norm(const DiscreteOperators& ops, const Vector& v) { return std::sqrt(std::max(0.0, v.dot(ops.unit_mass * v))); }

double h1_norm(const DiscreteOperators& ops, const Vector& v)
{
    return std::sqrt(std::max(0.0, v.dot(ops.unit_mass * v) + v.dot(ops.unit_stiffness * v)));
}

}  // namespace

const Snapshot* TrajectoryRecord::snapshot_at(int k) const
{
    auto it = std::lower_bound(snapshots.begin(), snapshots.end(), k,
                               [](const Snapshot& s, int key) { return s.k < key; });
    return it != snapshots.end() && it->k == k ? &*it : nullptr;
}

void validate_scenario(const Scenario& s)
{
    s.materials.validate();
    if (!(s.final_time > 0.0) || !std::isfinite(s.final_time)) throw ConfigError("time.T must be positive");
    if (s.steps < 1) throw ConfigError("time.n must be at least 1");
    if (!(s.eps_bar > 0.0)) throw ConfigError("regularization.eps_bar must be positive");
    if (s.snapshot_stride < 1) throw ConfigError("output.snapshot_stride must be at least 1");
    if (!(s.solver.tol > 0.0)) throw ConfigError("solver.tol must be positive");
    if (std::abs(s.loads.final_time - s.final_time) > 1e-12 * s.final_time)
        throw ConfigError("load model final time differs from time.T");

    const InterfaceMesh& mesh = s.mesh;
    check_nodal(s.u0, mesh, "u0");
    check_nodal(s.v0, mesh, "v0");
    const Index np = mesh.pair_count();
    if (s.xi0.size() != 0 && s.xi0.size() != np)
        throw ConfigError("initial.xi0: expected " + std::to_string(np) + " interface values");
    const Vector u0 = nodal_or_zero(s.u0, mesh.node_count());
    const Vector xi0 = s.xi0.size() == 0 ? Vector::Zero(np) : s.xi0;
    const Vector j0 = jump(mesh, u0);
    for (Index j = 0; j < np; ++j) {
        if (!(xi0[j] >= 0.0)) throw ConfigError("initial.xi0 must be nonnegative");
        if (std::abs(j0[j]) > xi0[j]) throw ConfigError("initial data not admissible: |[u0]| > xi0 at pair " + std::to_string(j));
    }

    if (s.regularity_mode) {
        if (!s.w0) throw ConfigError("regularity mode requires initial.w0");
        if (s.w0->size() != mesh.node_count()) throw ConfigError("initial.w0: wrong number of nodal values");
        check_nodal(*s.w0, mesh, "w0");
        const Vector jv = jump(mesh, nodal_or_zero(s.v0, mesh.node_count()));
        if (jv.lpNorm<Eigen::Infinity>() != 0.0) throw ConfigError("regularity mode requires [v0] = 0 on the interface");
        if (s.loads.has_surface()) throw ConfigError("regularity mode requires zero surface loads");
        if (!s.law.constants.h3_holds) throw ConfigError("regularity mode requires (H3): psi_hat' concave");
    }
}

InitialData regularize_initial_data(const Scenario& s, const DiscreteOperators& ops)
{
    const Index n = s.mesh.node_count();
    const Index np = ops.pair_count();
    InitialData d;
    d.u0 = ops.to_free(nodal_or_zero(s.u0, n));
    d.v0 = ops.to_free(nodal_or_zero(s.v0, n));
    d.xi0 = s.xi0.size() == 0 ? Vector::Zero(np) : s.xi0;
    for (Index j = 0; j < np; ++j) d.xi0[j] = std::max(s.eps_bar, d.xi0[j]);
    if (!s.regularity_mode) return d;

    if (!s.w0) throw ConfigError("regularity mode requires initial.w0");
    if (!discrete_h4(ops, s.law.constants.beta))
        throw ConfigError("regularity mode requires (H4): A_mu - beta B'WB is not positive definite on this mesh");
    const Vector w0 = ops.to_free(*s.w0);
    const Vector f0 = load_vector(s.loads, 0.0, s.mesh, ops);
    const Vector b = f0 - ops.stiffness_eta * d.v0 - ops.mass * w0;
    const CohesiveMinimizer minimizer(ops.stiffness_mu, ops.jump, ops.weights);
    MinimizerOptions mo;
    mo.tol = s.solver.tol;
    mo.max_iterations = s.solver.max_iterations;
    const double scale = 1.0 + f0.lpNorm<Eigen::Infinity>();
    d.u0 = minimizer.minimize(b, d.xi0, s.law.envelope, d.u0, scale, mo).u;

    const Vector j0 = ops.jump_of(d.u0);
    for (Index j = 0; j < np; ++j) d.xi0[j] = std::max(d.xi0[j], std::abs(j0[j]));
    Vector t(np);
    for (Index j = 0; j < np; ++j) t[j] = ops.weights[j] * dpsi_dw(j0[j], d.xi0[j], s.law.envelope);
    const Vector r = ops.mass * w0 + ops.stiffness_eta * d.v0 + ops.stiffness_mu * d.u0 - f0 + ops.jump.transpose() * t;
    d.stationarity = r.lpNorm<Eigen::Infinity>();
    if (d.stationarity > 10.0 * s.solver.tol * scale)
        throw SolverError("recomputed initial data is not stationary", d.stationarity, 0);
    return d;
}

PreparedScenario::PreparedScenario(const Scenario& s) : scenario(&s)
{
    validate_scenario(s);
    ops = assemble(s.mesh, s.materials, s.assembly);
}

TrajectoryRecord run(const Scenario& s, const RunCallbacks& callbacks)
{
    const PreparedScenario prepared(s);
    return run(prepared, callbacks);
}

TrajectoryRecord run(const PreparedScenario& prepared, const RunCallbacks& callbacks)
{
    const Scenario& s = *prepared.scenario;
    const DiscreteOperators& ops = prepared.ops;
    const Envelope& env = s.law.envelope;
    const double tau = s.tau();
    const int n = s.steps;

    auto rec = std::make_shared<TrajectoryRecord>();
    rec->tau = tau;
    rec->steps = n;
    rec->snapshot_stride = s.snapshot_stride;
    rec->solver_tol = s.solver.tol;
    rec->u0_input = ops.to_free(nodal_or_zero(s.u0, s.mesh.node_count()));
    rec->initial = regularize_initial_data(s, ops);
    rec->records.reserve(static_cast<std::size_t>(n) + 1);

    Vector u = rec->initial.u0, v = rec->initial.v0, xi = rec->initial.xi0;
    Vector v_prev = v;
    if (s.regularity_mode) v_prev = v - tau * ops.to_free(*s.w0);
    Vector u_prev2 = u - tau * v;
    SideLoads f = load_vector_by_side(s.loads, 0.0, s.mesh, ops);

    {
        StepProblem guard;
        guard.tau = tau;
        guard.u_prev = u;
        guard.u_prev2 = u_prev2;
        guard.xi_prev = xi;
        guard.load = f.total();
        guard.ops = &ops;
        guard.law = &s.law;
        if (!convexity_guard(guard, s.solver.guard_margin))
            throw SolverError("convexity guard failed at step 1: reduce the time step", 0.0, 1);
    }
    const IncrementalSolver solver(ops, s.law, tau);

    auto fill_energies = [&](StepRecord& r, const Vector& uk, const Vector& vk, const Vector& xik, const Vector& jk) {
        r.elastic = 0.5 * uk.dot(ops.stiffness_mu * uk);
        r.kinetic = 0.5 * vk.dot(ops.mass * vk);
        for (Index j = 0; j < jk.size(); ++j) {
            const EnergySplit sp = split(jk[j], xik[j], env);
            r.stored += ops.weights[j] * sp.stored;
            r.dissipated += ops.weights[j] * sp.dissipated;
            r.interface += ops.weights[j] * psi_value(jk[j], xik[j], env);
        }
        r.velocity_h1 = h1_norm(ops, vk);
    };
    auto take_snapshot = [&](int k, double t, const SideLoads& fk) {
        rec->snapshots.push_back({k, t, u, v, v_prev, xi, fk.plus, fk.minus});
    };

    {
        StepRecord r0;
        const Vector j0 = ops.jump_of(u);
        fill_energies(r0, u, v, xi, j0);
        r0.acceleration_l2 = l2_norm(ops, (v - v_prev) / tau);
        rec->records.push_back(r0);
        rec->jumps.push_back(j0);
        rec->history.push_back(xi);
        take_snapshot(0, 0.0, f);
        if (callbacks.on_step) callbacks.on_step(StepState{0, 0.0, u, v, xi}, r0);
    }

    for (int k = 1; k <= n; ++k) {
        const double t = k == n ? s.final_time : s.final_time * static_cast<double>(k) / n;
        const SideLoads fk = load_vector_by_side(s.loads, t, s.mesh, ops);
        const Vector load = fk.total();
        StepResult step;
        try {
            step = solver.solve(u, u_prev2, xi, load, s.solver);
        } catch (const SolverError& e) {
            SolverError tagged(std::string(e.what()) + " at step " + std::to_string(k), e.residual(), k);
            throw RunAborted(tagged, rec);
        }
        const Vector v_new = (step.u - u) / tau;

        StepRecord r;
        r.k = k;
        r.t = t;
        fill_energies(r, step.u, v_new, step.xi, step.jump);
        r.viscous_increment = tau * v_new.dot(ops.stiffness_eta * v_new);
        r.external_increment = tau * 0.5 * (f.total() + load).dot(v_new);
        r.newton_iterations = step.newton_iterations;
        r.grad_norm = step.grad_norm;
        r.el_residual = step.el_residual;
        r.acceleration_l2 = l2_norm(ops, (v_new - v) / tau);

        u_prev2 = u;
        u = std::move(step.u);
        v_prev = v;
        v = v_new;
        xi = std::move(step.xi);
        f = fk;
        rec->records.push_back(r);
        rec->jumps.push_back(std::move(step.jump));
        rec->history.push_back(xi);
        if (k % s.snapshot_stride == 0 || k == n) take_snapshot(k, t, fk);
        if (callbacks.on_step) callbacks.on_step(StepState{k, t, u, v, xi}, r);
    }
    rec->complete = true;
    return std::move(*rec);
}

double trajectory_distance(const TrajectoryRecord& a, const TrajectoryRecord& b, const DiscreteOperators& ops)
{
    double d = 0.0;
    bool any = false;
    for (const Snapshot& sa : a.snapshots) {
        const Snapshot* sb = b.snapshot_at(sa.k);
        if (!sb) continue;
        any = true;
        d = std::max(d, l2_norm(ops, sa.u - sb->u));
    }
    if (!any) throw DomainError("trajectory_distance: no common snapshot steps");
    return d;
}

ContinuationResult eps_continuation(const Scenario& s, const std::vector<double>& eps_list, unsigned jobs)
{
    if (eps_list.empty()) throw ConfigError("eps_list is empty");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0)) throw ConfigError("eps_list entries must be positive");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1])) throw ConfigError("eps_list must be strictly decreasing");
    }
    ContinuationResult out;
    out.entries.resize(eps_list.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < eps_list.size(); i = next++) {
            ContinuationEntry& e = out.entries[i];
            e.eps_bar = eps_list[i];
            try {
                Scenario local = s;
                local.eps_bar = eps_list[i];
                e.trajectory = run(local);
            } catch (const std::exception& ex) {
                e.error = ex.what();
            }
        }
    };
    jobs = std::clamp<unsigned>(jobs, 1u, static_cast<unsigned>(eps_list.size()));
    {
        std::vector<std::jthread> pool;
        for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
        worker();
    }

    const DiscreteOperators ops = assemble(s.mesh, s.materials, s.assembly);
    for (std::size_t i = 0; i + 1 < eps_list.size(); ++i) {
        const auto& a = out.entries[i].trajectory;
        const auto& b = out.entries[i + 1].trajectory;
        out.distances.push_back(a && b ? trajectory_distance(*a, *b, ops) : std::numeric_limits<double>::quiet_NaN());
    }
    return out;
}

}  // namespace cohesim
