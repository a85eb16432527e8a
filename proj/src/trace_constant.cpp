#include "cohesim/trace_constant.hpp"

#include "cohesim/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

namespace cohesim {

double trace_constant(const DiscreteOperators& ops, const SparseMatrix& stiffness)
{
    const Index np = ops.pair_count();
    if (np == 0) throw DomainError("trace constant: mesh has no interface pairs");

    Eigen::SimplicialLLT<SparseMatrix> llt(stiffness);
    if (llt.info() != Eigen::Success) throw SolverError("trace constant: stiffness is not positive definite");

    const Vector sqrt_w = ops.weights.cwiseSqrt();
    DenseMatrix rhs = DenseMatrix(ops.jump.transpose()) * sqrt_w.asDiagonal();
    DenseMatrix z = llt.solve(rhs);
    DenseMatrix s = sqrt_w.asDiagonal() * (ops.jump * z);
    s = 0.5 * (s + s.transpose());

    Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(s, Eigen::EigenvaluesOnly);
    const double top = eig.eigenvalues().maxCoeff();
    if (!(top > 0.0)) throw SolverError("trace constant: jump operator vanishes on the discrete space");
    return 1.0 / top;
}

double trace_constant(const DiscreteOperators& ops)
{
    return trace_constant(ops, ops.unit_stiffness);
}

double trace_constant_mu(const DiscreteOperators& ops)
{
    return trace_constant(ops, ops.stiffness_mu);
}

double h4_margin(const DiscreteOperators& ops, const CohesiveLaw& law)
{
    return trace_constant_mu(ops) - law.constants.beta;
}

}  // namespace cohesim
