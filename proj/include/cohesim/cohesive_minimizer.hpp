#pragma once

#include "cohesim/cohesive_law.hpp"
#include "cohesim/errors.hpp"
#include "cohesim/types.hpp"

#include <Eigen/SparseCholesky>

#include <memory>
#include <vector>

namespace cohesim {

struct MinimizerOptions {
    double tol = 1e-10;  // stop when ||grad||_inf <= tol * scale
    int max_iterations = 200;
    double armijo = 1e-4;
    double min_step = 1e-14;
    bool record_energies = false;
};

struct MinimizerResult {
    Vector u;
    int iterations = 0;
    double grad_norm = 0.0;
    std::vector<double> energies;  // value after each accepted step, if requested
};

/// Line search could not find an acceptable step. Carries the last iterate.
class NewtonStagnation : public SolverError {
public:
    NewtonStagnation(const std::string& what, double residual, Vector iterate)
        : SolverError(what, residual), iterate_(std::move(iterate)) {}
    const Vector& iterate() const noexcept { return iterate_; }

private:
    Vector iterate_;
};

/// Minimizes  Phi(u) = 1/2 u'Hu - b'u + sum_j w_j psi((Bu)_j, xi_j)
/// for SPD H and xi > 0, where Phi is C1 and (under the convexity guard)
/// strictly convex.
///
/// Damped Newton with the generalized second derivative of psi (see
/// generalized_stiffness) and Armijo backtracking. H is factorized once
/// at construction; the interface correction B'DB is low rank, so each
/// Newton system is solved through the Woodbury identity with the cached
/// H^-1 B' and B H^-1 B'.
class CohesiveMinimizer {
public:
    CohesiveMinimizer(SparseMatrix quadratic, SparseMatrix jump, Vector weights);

    double energy(const Vector& u, const Vector& b, const Vector& xi, const Envelope& env) const;
    Vector gradient(const Vector& u, const Vector& b, const Vector& xi, const Envelope& env) const;

    MinimizerResult minimize(const Vector& b, const Vector& xi, const Envelope& env, Vector start, double scale,
                             const MinimizerOptions& options = {}) const;

    const SparseMatrix& quadratic() const noexcept { return h_; }
    const SparseMatrix& jump() const noexcept { return jump_; }
    const Vector& weights() const noexcept { return w_; }

private:
    Vector newton_direction(const Vector& g, const Vector& jumps, const Vector& xi, const Envelope& env) const;

    SparseMatrix h_;
    SparseMatrix jump_;
    Vector w_;
    std::shared_ptr<const Eigen::SimplicialLLT<SparseMatrix>> llt_;
    DenseMatrix hinv_bt_;  // H^-1 B'
    DenseMatrix schur_;    // B H^-1 B'
};

}  // namespace cohesim
