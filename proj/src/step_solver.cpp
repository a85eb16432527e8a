#include "cohesim/step_solver.hpp"

#include "cohesim/errors.hpp"
#include "cohesim/trace_constant.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>

namespace cohesim {

namespace {

void check_problem(const StepProblem& p)
{
    if (!p.ops || !p.law) throw DomainError("step problem: operators and law are required");
    if (!(p.tau > 0.0)) throw DomainError("step problem: tau must be positive");
    const Index n = p.ops->free_count();
    if (p.u_prev.size() != n || p.u_prev2.size() != n || p.load.size() != n || p.xi_prev.size() != p.ops->pair_count())
        throw DomainError("step problem: dimension mismatch");
}

SparseMatrix leading_block(const DiscreteOperators& ops, double tau)
{
    SparseMatrix h = ops.mass / (tau * tau) + ops.stiffness_eta / tau + ops.stiffness_mu;
    h.makeCompressed();
    return h;
}

}  // namespace

double incremental_energy(const Vector& u, const StepProblem& p)
{
    check_problem(p);
    if (u.size() != p.ops->free_count()) throw DomainError("incremental_energy: dimension mismatch");
    const auto& ops = *p.ops;
    const Vector acc = u - 2.0 * p.u_prev + p.u_prev2;
    const Vector inc = u - p.u_prev;
    const Vector j = ops.jump_of(u);
    double psi = 0.0;
    for (Index k = 0; k < j.size(); ++k) psi += ops.weights[k] * psi_value(j[k], p.xi_prev[k], p.law->envelope);
    return 0.5 * acc.dot(ops.mass * acc) / (p.tau * p.tau) + 0.5 * inc.dot(ops.stiffness_eta * inc) / p.tau +
           0.5 * u.dot(ops.stiffness_mu * u) - p.load.dot(u) + psi;
}

Vector euler_lagrange_residual(const DiscreteOperators& ops, const CohesiveLaw& law, double tau, const Vector& u,
                               const Vector& u_prev, const Vector& u_prev2, const Vector& xi, const Vector& load)
{
    const Vector j = ops.jump_of(u);
    Vector t(j.size());
    for (Index k = 0; k < j.size(); ++k) t[k] = ops.weights[k] * dpsi_dw(j[k], xi[k], law.envelope);
    return ops.mass * (u - 2.0 * u_prev + u_prev2) / (tau * tau) + ops.stiffness_eta * (u - u_prev) / tau +
           ops.stiffness_mu * u - load + ops.jump.transpose() * t;
}

bool convexity_guard(const StepProblem& p, double margin, std::optional<double> trace_constant_mu_value)
{
    check_problem(p);
    const auto& ops = *p.ops;
    const double beta = p.law->constants.beta;
    try {
        const double c = trace_constant_mu_value ? *trace_constant_mu_value : trace_constant_mu(ops);
        if (c - beta >= margin) return true;
    } catch (const Error&) {
        // fall through to the direct test
    }
    SparseMatrix bwb = ops.jump.transpose() * ops.weights.asDiagonal() * ops.jump;
    SparseMatrix m = ops.stiffness_eta / p.tau + ops.stiffness_mu - beta * bwb;
    Eigen::SimplicialLLT<SparseMatrix> llt(m);
    return llt.info() == Eigen::Success;
}

IncrementalSolver::IncrementalSolver(const DiscreteOperators& ops, const CohesiveLaw& law, double tau)
    : ops_(&ops), law_(&law), tau_(tau), minimizer_(leading_block(ops, tau), ops.jump, ops.weights)
{
    if (!(tau > 0.0)) throw DomainError("incremental solver: tau must be positive");
}

StepResult IncrementalSolver::solve(const Vector& u_prev, const Vector& u_prev2, const Vector& xi_prev,
                                    const Vector& load, const SolverOptions& options) const
{
    const auto& ops = *ops_;
    const double t2 = tau_ * tau_;
    const Vector b = load + ops.mass * (2.0 * u_prev - u_prev2) / t2 + ops.stiffness_eta * u_prev / tau_;
    MinimizerOptions mo;
    mo.tol = options.tol;
    mo.max_iterations = options.max_iterations;
    const double scale = 1.0 + load.lpNorm<Eigen::Infinity>();
    MinimizerResult m = minimizer_.minimize(b, xi_prev, law_->envelope, 2.0 * u_prev - u_prev2, scale, mo);

    StepResult r;
    r.jump = ops.jump_of(m.u);
    r.xi = xi_prev;
    for (Index k = 0; k < r.xi.size(); ++k) r.xi[k] = std::max(xi_prev[k], std::abs(r.jump[k]));
    r.newton_iterations = m.iterations;
    r.grad_norm = m.grad_norm;
    r.u = std::move(m.u);
    r.el_residual = euler_lagrange_residual(ops, *law_, tau_, r.u, u_prev, u_prev2, r.xi, load).lpNorm<Eigen::Infinity>();
    return r;
}

StepResult solve_step(const StepProblem& p, const SolverOptions& options)
{
    check_problem(p);
    if (!(options.tol > 0.0)) throw DomainError("solve_step: tolerance must be positive");
    if (!convexity_guard(p, options.guard_margin))
        throw SolverError("convexity guard failed: the step problem may not be strictly convex, reduce tau");
    IncrementalSolver solver(*p.ops, *p.law, p.tau);
    return solver.solve(p.u_prev, p.u_prev2, p.xi_prev, p.load, options);
}

StepResult solve_step(const StepProblem& p, double tol)
{
    SolverOptions o;
    o.tol = tol;
    return solve_step(p, o);
}

}  // namespace cohesim
