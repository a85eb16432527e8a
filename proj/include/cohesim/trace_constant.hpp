#pragma once

#include "cohesim/assembly.hpp"
#include "cohesim/cohesive_law.hpp"

namespace cohesim {

/// Discrete trace constant
///
///   c_h = min { u'Au / sum_j w_j [u]_j^2 : u free, [u] != 0 }
///
/// for a symmetric positive definite stiffness A on the free DOFs. Computed
/// through the interface Schur complement: c_h = 1 / lambda_max(S) with
/// S = W^1/2 B A^-1 B' W^1/2, a dense pairs x pairs matrix.
double trace_constant(const DiscreteOperators& ops, const SparseMatrix& stiffness);

/// Unit-coefficient version, ||grad u||^2 / ||[u]||^2.
double trace_constant(const DiscreteOperators& ops);

/// Same with the mu-weighted stiffness, mu-weighted ||grad u||^2 over ||[u]||^2.
/// Equals mu * c_h for constant mu.
double trace_constant_mu(const DiscreteOperators& ops);

/// Margin of the uniform convexity condition (H4): c_mu - beta. Positive
/// means E + Psi(., xi) is uniformly convex on the discrete space.
double h4_margin(const DiscreteOperators& ops, const CohesiveLaw& law);

}  // namespace cohesim
