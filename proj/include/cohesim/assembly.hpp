#pragma once

#include "cohesim/mesh.hpp"
#include "cohesim/types.hpp"

#include <array>
#include <functional>
#include <vector>

namespace cohesim {

/// Piecewise-constant material coefficients on Omega+ and Omega-.
struct Materials {
    double rho_plus = 1.0, rho_minus = 1.0;
    double mu_plus = 1.0, mu_minus = 1.0;
    double eta_plus = 1.0, eta_minus = 1.0;

    static Materials uniform(double rho, double mu, double eta) { return {rho, rho, mu, mu, eta, eta}; }

    double rho(Side s) const { return s == Side::Plus ? rho_plus : rho_minus; }
    double mu(Side s) const { return s == Side::Plus ? mu_plus : mu_minus; }
    double eta(Side s) const { return s == Side::Plus ? eta_plus : eta_minus; }
    /// Throws ConfigError unless all six coefficients are positive and finite.
    void validate() const;
};

struct AssemblyOptions {
    bool lumped_mass = false;
};

/// Operators on all nodes, before Dirichlet elimination.
struct FullOperators {
    SparseMatrix mass;
    SparseMatrix stiffness_mu;
    SparseMatrix stiffness_eta;
};

/// Mass and stiffness contributions of one subdomain (reduced to free DOFs).
struct SideOperators {
    SparseMatrix mass;
    SparseMatrix stiffness_mu;
    SparseMatrix stiffness_eta;
};

/// Sparse P1 operators on the free (non-Dirichlet) DOFs.
///
/// All vectors handed to the solver and the audit live in this reduced
/// space; `to_free` / `to_full` translate nodal fields.
struct DiscreteOperators {
    Index node_count = 0;
    std::vector<Index> free_dofs;     // free index -> node
    std::vector<Index> node_to_free;  // node -> free index, -1 if Dirichlet

    SparseMatrix mass;           // rho-weighted
    SparseMatrix stiffness_mu;   // mu-weighted
    SparseMatrix stiffness_eta;  // eta-weighted
    SparseMatrix unit_mass;      // unit coefficient, for L2 norms
    SparseMatrix unit_stiffness; // unit coefficient, for H1 seminorms and the trace constant
    std::array<SideOperators, 2> sides;

    SparseMatrix jump;        // pairs x free DOFs
    Vector weights;           // trapezoidal interface weights w_j
    std::vector<Index> pair_plus_free;   // free index of the plus node of pair j
    std::vector<Index> pair_minus_free;  // free index of the minus node of pair j
    std::vector<bool> pair_corner;

    Index free_count() const { return static_cast<Index>(free_dofs.size()); }
    Index pair_count() const { return weights.size(); }

    Vector to_free(const Vector& nodal) const;
    Vector to_full(const Vector& reduced) const;
    /// Jump of a reduced vector, one entry per interface pair.
    Vector jump_of(const Vector& u) const;
    /// sum_j w_j a_j b_j
    double interface_dot(const Vector& a, const Vector& b) const;
};

/// Operators for a problem given directly by matrices (no mesh). Unit
/// matrices default to the weighted ones; per-side blocks are left empty.
DiscreteOperators make_operators(SparseMatrix mass, SparseMatrix stiffness_mu, SparseMatrix stiffness_eta,
                                 SparseMatrix jump, Vector weights);

FullOperators assemble_full(const InterfaceMesh& mesh, const Materials& materials, const AssemblyOptions& options = {});
DiscreteOperators assemble(const InterfaceMesh& mesh, const Materials& materials, const AssemblyOptions& options = {});

/// Scalar field of (x, y, t).
using SpaceTimeFunction = std::function<double(double x, double y, double t)>;

/// External forces: bulk density f_b on Omega and surface density f_s on
/// the Neumann boundary. When sample_times is non-empty the nodal load is
/// reconstructed piecewise-affinely between the two bracketing samples.
struct LoadModel {
    SpaceTimeFunction bulk;     // empty means zero
    SpaceTimeFunction surface;  // empty means zero
    double final_time = 1.0;
    std::vector<double> sample_times;

    bool has_surface() const { return static_cast<bool>(surface); }
};

struct SideLoads {
    Vector plus;   // contributions integrated over Omega+ and its Neumann edges
    Vector minus;
    Vector total() const { return plus + minus; }
};

/// Consistent P1 load at time t (3-point rule per triangle, 2-point Gauss
/// per Neumann edge). Throws DomainError for t outside [0, final_time].
Vector load_vector(const LoadModel& loads, double t, const InterfaceMesh& mesh, const DiscreteOperators& ops);
SideLoads load_vector_by_side(const LoadModel& loads, double t, const InterfaceMesh& mesh, const DiscreteOperators& ops);
/// Same load on all nodes, Dirichlet nodes included.
SideLoads nodal_load_by_side(const LoadModel& loads, double t, const InterfaceMesh& mesh);

}  // namespace cohesim
