#include "cohesim/cohesive_minimizer.hpp"

#include <Eigen/LU>

#include <cmath>
#include <limits>

namespace cohesim {

CohesiveMinimizer::CohesiveMinimizer(SparseMatrix quadratic, SparseMatrix jump, Vector weights)
    : h_(std::move(quadratic)), jump_(std::move(jump)), w_(std::move(weights))
{
    if (h_.rows() != h_.cols() || jump_.cols() != h_.rows() || jump_.rows() != w_.size())
        throw DomainError("cohesive minimizer: inconsistent dimensions");
    auto llt = std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>(h_);
    if (llt->info() != Eigen::Success) throw SolverError("cohesive minimizer: leading block is not positive definite");
    llt_ = std::move(llt);
    hinv_bt_ = llt_->solve(DenseMatrix(jump_.transpose()));
    schur_ = jump_ * hinv_bt_;
}

double CohesiveMinimizer::energy(const Vector& u, const Vector& b, const Vector& xi, const Envelope& env) const
{
    const Vector j = jump_ * u;
    double psi = 0.0;
    for (Index k = 0; k < j.size(); ++k) psi += w_[k] * psi_value(j[k], xi[k], env);
    return 0.5 * u.dot(h_ * u) - b.dot(u) + psi;
}

Vector CohesiveMinimizer::gradient(const Vector& u, const Vector& b, const Vector& xi, const Envelope& env) const
{
    const Vector j = jump_ * u;
    Vector t(j.size());
    for (Index k = 0; k < j.size(); ++k) t[k] = w_[k] * dpsi_dw(j[k], xi[k], env);
    return h_ * u - b + jump_.transpose() * t;
}

Vector CohesiveMinimizer::newton_direction(const Vector& g, const Vector& jumps, const Vector& xi,
                                           const Envelope& env) const
{
    const Index np = jumps.size();
    Vector d(np);
    for (Index k = 0; k < np; ++k) d[k] = w_[k] * generalized_stiffness(jumps[k], xi[k], env);
    const Vector y = llt_->solve(g);
    if (np == 0) return -y;
    const Vector s = jump_ * y;
    DenseMatrix system = d.asDiagonal() * schur_;
    system.diagonal().array() += 1.0;
    const Vector z = system.partialPivLu().solve(d.cwiseProduct(s));
    return -(y - hinv_bt_ * z);
}

MinimizerResult CohesiveMinimizer::minimize(const Vector& b, const Vector& xi, const Envelope& env, Vector start,
                                            double scale, const MinimizerOptions& options) const
{
    if (b.size() != h_.rows() || start.size() != h_.rows() || xi.size() != w_.size())
        throw DomainError("cohesive minimizer: dimension mismatch");
    for (Index k = 0; k < xi.size(); ++k)
        if (!(xi[k] > 0.0)) throw DomainError("cohesive minimizer: history variable must be positive");

    const double target = options.tol * scale;
    MinimizerResult result;
    Vector u = std::move(start);
    Vector jumps = jump_ * u;
    Vector g = gradient(u, b, xi, env);
    double gnorm = g.lpNorm<Eigen::Infinity>();

    auto interface_energy = [&](const Vector& j) {
        double s = 0.0;
        for (Index k = 0; k < j.size(); ++k) s += w_[k] * psi_value(j[k], xi[k], env);
        return s;
    };
    double psi_now = interface_energy(jumps);

    while (gnorm > target) {
        if (result.iterations >= options.max_iterations)
            throw NewtonStagnation("Newton iteration limit reached", gnorm, u);
        const Vector d = newton_direction(g, jumps, xi, env);
        const double slope = g.dot(d);
        const Vector hd = h_ * d;
        const Vector jd = jump_ * d;
        const Vector gq = h_ * u - b;
        const double quad_lin = gq.dot(d), quad_curv = d.dot(hd);
        const double magnitude = std::abs(u.dot(h_ * u)) + std::abs(b.dot(u)) + std::abs(psi_now) + 1.0;

        double alpha = 1.0;
        bool accepted = false;
        while (alpha >= options.min_step) {
            const Vector jt = jumps + alpha * jd;
            const double psi_trial = interface_energy(jt);
            const double change = alpha * quad_lin + 0.5 * alpha * alpha * quad_curv + (psi_trial - psi_now);
            if (slope < 0.0 && change <= options.armijo * alpha * slope) {
                accepted = true;
            } else if (std::abs(change) <= 64.0 * std::numeric_limits<double>::epsilon() * magnitude) {
                // Energy differences are at roundoff; fall back on the gradient.
                const Vector gt = gradient(u + alpha * d, b, xi, env);
                accepted = gt.lpNorm<Eigen::Infinity>() < gnorm;
            }
            if (accepted) {
                u += alpha * d;
                jumps = jt;
                psi_now = psi_trial;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) throw NewtonStagnation("line search stagnated", gnorm, u);
        ++result.iterations;
        g = gradient(u, b, xi, env);
        gnorm = g.lpNorm<Eigen::Infinity>();
        if (options.record_energies) result.energies.push_back(energy(u, b, xi, env));
    }

    // A few full steps past the tolerance while they keep reducing the
    // gradient; on a converged Newton iterate this reaches roundoff.
    for (int polish = 0; polish < 3 && gnorm > 0.0; ++polish) {
        const Vector trial = u + newton_direction(g, jumps, xi, env);
        const Vector gt = gradient(trial, b, xi, env);
        const double gtn = gt.lpNorm<Eigen::Infinity>();
        if (!(gtn < 0.5 * gnorm)) break;
        u = trial;
        g = gt;
        gnorm = gtn;
        jumps = jump_ * u;
    }

    result.u = std::move(u);
    result.grad_norm = gnorm;
    return result;
}

}  // namespace cohesim
