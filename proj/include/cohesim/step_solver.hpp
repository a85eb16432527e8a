#pragma once

#include "cohesim/assembly.hpp"
#include "cohesim/cohesive_law.hpp"
#include "cohesim/cohesive_minimizer.hpp"

#include <optional>

namespace cohesim {

/// One incremental minimization: given u_{k-1}, u_{k-2}, xi_{k-1} and the
/// load f_k, find the minimizer u_k of J_k and set xi_k = max(xi_{k-1}, |[u_k]|).
/// All vectors are on the free DOFs / interface pairs.
struct StepProblem {
    double tau = 0.0;
    Vector u_prev;
    Vector u_prev2;
    Vector xi_prev;
    Vector load;
    const DiscreteOperators* ops = nullptr;
    const CohesiveLaw* law = nullptr;
};

struct StepResult {
    Vector u;
    Vector xi;
    Vector jump;
    int newton_iterations = 0;
    double grad_norm = 0.0;    // ||grad J_k(u)||_inf, history xi_{k-1}
    double el_residual = 0.0;  // ||Euler-Lagrange residual||_inf, history xi_k
};

struct SolverOptions {
    double tol = 1e-10;
    int max_iterations = 200;
    double guard_margin = 0.0;  // required c_mu - beta for the (H4) route of the guard
};

/// J_k(u) = 1/2 tau^-2 |u - 2u1 + u2|_M^2 + 1/2 tau^-1 |u - u1|_Aeta^2
///        + 1/2 u'A_mu u - f.u + sum_j w_j psi([u]_j, xi_{k-1,j}).
double incremental_energy(const Vector& u, const StepProblem& problem);

/// Euler-Lagrange residual of the step with an arbitrary history xi:
/// M(u - 2u1 + u2)/tau^2 + Aeta(u - u1)/tau + A_mu u - f + B'W dpsi_dw([u], xi).
Vector euler_lagrange_residual(const DiscreteOperators& ops, const CohesiveLaw& law, double tau, const Vector& u,
                               const Vector& u_prev, const Vector& u_prev2, const Vector& xi, const Vector& load);

/// Uniqueness guard for the step problem: true if c_mu - beta >= margin, or
/// if tau^-1 Aeta + A_mu - beta B'WB admits a Cholesky factorization.
/// Pass a precomputed trace constant (mu-weighted) to skip its evaluation.
bool convexity_guard(const StepProblem& problem, double margin = 0.0,
                     std::optional<double> trace_constant_mu = std::nullopt);

/// Step solver for a fixed (operators, law, tau): the leading block
/// M/tau^2 + Aeta/tau + A_mu is factorized once and reused for every step.
class IncrementalSolver {
public:
    IncrementalSolver(const DiscreteOperators& ops, const CohesiveLaw& law, double tau);

    /// Solves one step starting Newton from the predictor 2u1 - u2.
    StepResult solve(const Vector& u_prev, const Vector& u_prev2, const Vector& xi_prev, const Vector& load,
                     const SolverOptions& options = {}) const;

    double tau() const noexcept { return tau_; }
    const CohesiveMinimizer& minimizer() const noexcept { return minimizer_; }

private:
    const DiscreteOperators* ops_;
    const CohesiveLaw* law_;
    double tau_;
    CohesiveMinimizer minimizer_;
};

/// One-off solve; builds an IncrementalSolver internally.
StepResult solve_step(const StepProblem& problem, const SolverOptions& options = {});
StepResult solve_step(const StepProblem& problem, double tol);

}  // namespace cohesim
