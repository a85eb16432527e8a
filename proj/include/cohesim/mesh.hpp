#pragma once

#include "cohesim/types.hpp"

#include <array>
#include <filesystem>
#include <span>
#include <vector>

namespace cohesim {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct Triangle {
    std::array<Index, 3> nodes{};
    Side side = Side::Plus;
};

/// Coincident node pair across the interface K with its trapezoidal weight.
struct InterfacePair {
    Index plus = 0;
    Index minus = 0;
    double weight = 0.0;
};

struct Edge {
    Index a = 0;
    Index b = 0;
};

/// Raw mesh description, as read from file or produced by a generator.
struct MeshData {
    std::vector<Point> nodes;
    std::vector<Triangle> triangles;
    std::vector<Edge> interface_pairs;  // (plus, minus) node indices
    std::vector<Index> dirichlet;
    std::vector<Edge> neumann_edges;
};

/// Two-body triangulation Omega = Omega+ u Omega- glued along K through
/// duplicated, geometrically coincident nodes.
///
/// Validated at construction: every boundary edge is tagged exactly once
/// (interface, Dirichlet, Neumann), each subdomain owns a Dirichlet node,
/// and interface pairs coincide and sit on the right sides (degenerate
/// triangles are reported by assembly). Interface weights are the nodal trapezoidal weights of the
/// K edges, so they sum to the arclength of K.
class InterfaceMesh {
public:
    explicit InterfaceMesh(MeshData data);

    const std::vector<Point>& nodes() const noexcept { return data_.nodes; }
    const std::vector<Triangle>& triangles() const noexcept { return data_.triangles; }
    const std::vector<InterfacePair>& interface_pairs() const noexcept { return pairs_; }
    const std::vector<Index>& dirichlet_nodes() const noexcept { return data_.dirichlet; }
    const std::vector<Edge>& neumann_edges() const noexcept { return data_.neumann_edges; }
    const std::vector<Edge>& interface_edges() const noexcept { return interface_edges_; }
    const MeshData& data() const noexcept { return data_; }

    Index node_count() const noexcept { return static_cast<Index>(data_.nodes.size()); }
    Index pair_count() const noexcept { return static_cast<Index>(pairs_.size()); }
    double h_max() const noexcept { return h_max_; }
    double diameter() const noexcept { return diameter_; }
    double interface_length() const noexcept { return interface_length_; }

    bool is_dirichlet(Index node) const { return dirichlet_flag_[static_cast<std::size_t>(node)]; }
    /// Subdomain of a node (every node belongs to triangles of one side only).
    Side node_side(Index node) const { return node_side_[static_cast<std::size_t>(node)]; }
    /// Interface pair touching the outer boundary (endpoint of K).
    bool pair_is_corner(Index pair) const { return corner_[static_cast<std::size_t>(pair)]; }

private:
    MeshData data_;
    std::vector<InterfacePair> pairs_;
    std::vector<Edge> interface_edges_;
    std::vector<bool> dirichlet_flag_;
    std::vector<Side> node_side_;
    std::vector<bool> corner_;
    double h_max_ = 0.0;
    double diameter_ = 0.0;
    double interface_length_ = 0.0;
};

struct RectangleSpec {
    double length = 1.0;
    double half_height = 1.0;
    Index n_x = 1;  // cells along x
    Index n_y = 1;  // cells along y in each subdomain
};

/// Structured crossed-triangle mesh of (0,L) x (-H,H) split at y = 0:
/// Omega+ = (0,L) x (0,H), Omega- = (0,L) x (-H,0), four triangles per
/// cell around a centre node, Dirichlet on y = +-H, Neumann on x = 0, L.
InterfaceMesh build_rectangle_mesh(const RectangleSpec& spec);
InterfaceMesh build_rectangle_mesh(double length, Index n_x, Index n_y);

/// JSON mesh file: "nodes", "triangles" ([i,j,k,side] with side +1/-1),
/// "interface_pairs", "dirichlet", "neumann_edges". Indices are 0-based.
InterfaceMesh load_mesh(const std::filesystem::path& path);
void save_mesh(const InterfaceMesh& mesh, const std::filesystem::path& path);

/// Jump operator [u]_j = u(plus_j) - u(minus_j) on full nodal vectors.
SparseMatrix jump_matrix(const InterfaceMesh& mesh);
Vector jump(const InterfaceMesh& mesh, const Vector& u);

}  // namespace cohesim
