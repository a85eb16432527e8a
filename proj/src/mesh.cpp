#include "cohesim/mesh.hpp"

#include "cohesim/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace cohesim {

namespace {

using EdgeKey = std::pair<Index, Index>;

EdgeKey key(Index a, Index b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

double distance(const Point& p, const Point& q) { return std::hypot(p.x - q.x, p.y - q.y); }

std::string edge_name(Index a, Index b)
{
    std::ostringstream s;
    s << "(" << a << ", " << b << ")";
    return s.str();
}

}  // namespace

InterfaceMesh::InterfaceMesh(MeshData data) : data_(std::move(data))
{
    const Index n = node_count();
    if (n == 0) throw MeshError("mesh has no nodes");
    if (data_.triangles.empty()) throw MeshError("mesh has no triangles");

    auto check_index = [n](Index i, const char* what) {
        if (i < 0 || i >= n) {
            std::ostringstream s;
            s << what << " references node " << i << " outside [0, " << n << ")";
            throw MeshError(s.str());
        }
    };

    double xmin = data_.nodes[0].x, xmax = xmin, ymin = data_.nodes[0].y, ymax = ymin;
    for (const auto& p : data_.nodes) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw MeshError("mesh has non-finite node coordinates");
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    diameter_ = std::hypot(xmax - xmin, ymax - ymin);

    // Node sides and edge incidence.
    std::vector<int> side_of(static_cast<std::size_t>(n), -1);
    std::map<EdgeKey, int> edge_count;
    std::map<EdgeKey, Side> edge_side;
    for (std::size_t t = 0; t < data_.triangles.size(); ++t) {
        const auto& tri = data_.triangles[t];
        for (Index v : tri.nodes) check_index(v, "triangle");
        if (tri.nodes[0] == tri.nodes[1] || tri.nodes[1] == tri.nodes[2] || tri.nodes[0] == tri.nodes[2])
            throw MeshError("triangle " + std::to_string(t) + " repeats a node");
        const int s = side_index(tri.side);
        for (Index v : tri.nodes) {
            auto& cur = side_of[static_cast<std::size_t>(v)];
            if (cur >= 0 && cur != s)
                throw MeshError("node " + std::to_string(v) + " is shared by triangles of both subdomains");
            cur = s;
        }
        for (int e = 0; e < 3; ++e) {
            const Index a = tri.nodes[e], b = tri.nodes[(e + 1) % 3];
            ++edge_count[key(a, b)];
            edge_side[key(a, b)] = tri.side;
            h_max_ = std::max(h_max_, distance(data_.nodes[a], data_.nodes[b]));
        }
    }
    node_side_.resize(static_cast<std::size_t>(n));
    for (Index v = 0; v < n; ++v) {
        if (side_of[v] < 0) throw MeshError("node " + std::to_string(v) + " is not used by any triangle");
        node_side_[v] = static_cast<Side>(side_of[v]);
    }
    for (const auto& [e, c] : edge_count)
        if (c > 2) throw MeshError("edge " + edge_name(e.first, e.second) + " is shared by more than two triangles");

    // Interface pairs.
    if (data_.interface_pairs.empty()) throw MeshError("mesh has no interface pairs");
    std::vector<Index> pair_of(static_cast<std::size_t>(n), -1);
    const double coincidence_tol = 1e-12 * std::max(diameter_, 1e-300);
    for (std::size_t j = 0; j < data_.interface_pairs.size(); ++j) {
        const auto [p, m] = data_.interface_pairs[j];
        check_index(p, "interface pair");
        check_index(m, "interface pair");
        if (p == m) throw MeshError("interface pair " + std::to_string(j) + " uses the same node twice");
        if (node_side_[p] != Side::Plus || node_side_[m] != Side::Minus)
            throw MeshError("interface pair " + std::to_string(j) + " must list (plus node, minus node)");
        if (distance(data_.nodes[p], data_.nodes[m]) > coincidence_tol)
            throw MeshError("interface pair not coincident: pair " + std::to_string(j) + " " + edge_name(p, m));
        if (pair_of[p] >= 0 || pair_of[m] >= 0)
            throw MeshError("node listed in more than one interface pair (pair " + std::to_string(j) + ")");
        pair_of[p] = static_cast<Index>(j);
        pair_of[m] = static_cast<Index>(j);
    }

    // Dirichlet set.
    if (data_.dirichlet.empty()) throw MeshError("empty Dirichlet set");
    dirichlet_flag_.assign(static_cast<std::size_t>(n), false);
    bool has_plus = false, has_minus = false;
    for (Index v : data_.dirichlet) {
        check_index(v, "Dirichlet set");
        if (pair_of[v] >= 0) throw MeshError("interface node " + std::to_string(v) + " cannot be a Dirichlet node");
        dirichlet_flag_[v] = true;
        (node_side_[v] == Side::Plus ? has_plus : has_minus) = true;
    }
    if (!has_plus) throw MeshError("empty Dirichlet set on the plus subdomain");
    if (!has_minus) throw MeshError("empty Dirichlet set on the minus subdomain");

    // Boundary partition.
    std::map<EdgeKey, bool> neumann;
    for (const auto& e : data_.neumann_edges) {
        check_index(e.a, "Neumann edge");
        check_index(e.b, "Neumann edge");
        const auto it = edge_count.find(key(e.a, e.b));
        if (it == edge_count.end() || it->second != 1)
            throw MeshError("Neumann edge " + edge_name(e.a, e.b) + " is not a boundary edge");
        neumann[key(e.a, e.b)] = true;
    }
    std::vector<bool> touches_outer(static_cast<std::size_t>(n), false);
    std::vector<double> weight(data_.interface_pairs.size(), 0.0);
    std::map<EdgeKey, bool> minus_interface;
    for (const auto& [e, c] : edge_count) {
        if (c != 1) continue;
        const auto [a, b] = e;
        if (neumann.count(e)) {
            touches_outer[a] = touches_outer[b] = true;
            continue;
        }
        if (pair_of[a] >= 0 && pair_of[b] >= 0) {
            const double len = distance(data_.nodes[a], data_.nodes[b]);
            if (edge_side[e] == Side::Plus) {
                interface_edges_.push_back({a, b});
                weight[pair_of[a]] += 0.5 * len;
                weight[pair_of[b]] += 0.5 * len;
                interface_length_ += len;
            } else {
                minus_interface[key(pair_of[a], pair_of[b])] = true;
            }
            continue;
        }
        if (dirichlet_flag_[a] && dirichlet_flag_[b]) {
            touches_outer[a] = touches_outer[b] = true;
            continue;
        }
        throw MeshError("untagged boundary edge " + edge_name(a, b));
    }
    for (const auto& e : interface_edges_) {
        if (!minus_interface.count(key(pair_of[e.a], pair_of[e.b])))
            throw MeshError("interface edge " + edge_name(e.a, e.b) + " has no matching edge on the minus side");
    }
    if (minus_interface.size() != interface_edges_.size())
        throw MeshError("minus-side interface edges do not match the plus side");

    pairs_.reserve(data_.interface_pairs.size());
    corner_.reserve(data_.interface_pairs.size());
    for (std::size_t j = 0; j < data_.interface_pairs.size(); ++j) {
        const auto [p, m] = data_.interface_pairs[j];
        if (!(weight[j] > 0.0))
            throw MeshError("interface pair " + std::to_string(j) + " is not adjacent to any interface edge");
        pairs_.push_back({p, m, weight[j]});
        corner_.push_back(touches_outer[p] || touches_outer[m]);
    }
}

InterfaceMesh build_rectangle_mesh(double length, Index n_x, Index n_y)
{
    return build_rectangle_mesh(RectangleSpec{length, 1.0, n_x, n_y});
}

InterfaceMesh build_rectangle_mesh(const RectangleSpec& spec)
{
    if (!(spec.length > 0.0) || !(spec.half_height > 0.0))
        throw MeshError("rectangle dimensions must be positive");
    if (spec.n_x < 1 || spec.n_y < 1) throw MeshError("rectangle cell counts must be at least 1");

    const Index nx = spec.n_x, ny = spec.n_y;
    const double hx = spec.length / static_cast<double>(nx);
    const double hy = spec.half_height / static_cast<double>(ny);
    const Index grid = (nx + 1) * (ny + 1);
    const Index per_side = grid + nx * ny;

    MeshData d;
    d.nodes.resize(static_cast<std::size_t>(2 * per_side));
    auto grid_node = [&](int s, Index i, Index j) { return s * per_side + j * (nx + 1) + i; };
    auto centre_node = [&](int s, Index i, Index j) { return s * per_side + grid + j * nx + i; };

    for (int s = 0; s < 2; ++s) {
        const double dir = s == 0 ? 1.0 : -1.0;
        for (Index j = 0; j <= ny; ++j)
            for (Index i = 0; i <= nx; ++i) {
                // Exact endpoints keep the Dirichlet/Neumann geometry clean.
                const double x = i == nx ? spec.length : static_cast<double>(i) * hx;
                const double y = j == ny ? spec.half_height : static_cast<double>(j) * hy;
                d.nodes[grid_node(s, i, j)] = {x, dir * y};
            }
        for (Index j = 0; j < ny; ++j)
            for (Index i = 0; i < nx; ++i)
                d.nodes[centre_node(s, i, j)] = {(static_cast<double>(i) + 0.5) * hx, dir * (static_cast<double>(j) + 0.5) * hy};

        const Side side = s == 0 ? Side::Plus : Side::Minus;
        for (Index j = 0; j < ny; ++j)
            for (Index i = 0; i < nx; ++i) {
                const Index c00 = grid_node(s, i, j), c10 = grid_node(s, i + 1, j);
                const Index c11 = grid_node(s, i + 1, j + 1), c01 = grid_node(s, i, j + 1);
                const Index m = centre_node(s, i, j);
                const std::array<std::array<Index, 3>, 4> tris{{{c00, c10, m}, {c10, c11, m}, {c11, c01, m}, {c01, c00, m}}};
                for (auto t : tris) {
                    if (s == 1) std::swap(t[0], t[1]);  // mirrored: keep counter-clockwise
                    d.triangles.push_back({t, side});
                }
            }

        for (Index i = 0; i <= nx; ++i) d.dirichlet.push_back(grid_node(s, i, ny));
        for (Index j = 0; j < ny; ++j) {
            d.neumann_edges.push_back({grid_node(s, 0, j), grid_node(s, 0, j + 1)});
            d.neumann_edges.push_back({grid_node(s, nx, j), grid_node(s, nx, j + 1)});
        }
    }
    for (Index i = 0; i <= nx; ++i) d.interface_pairs.push_back({grid_node(0, i, 0), grid_node(1, i, 0)});
    return InterfaceMesh(std::move(d));
}

InterfaceMesh load_mesh(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mesh file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw MeshError("mesh file " + path.string() + ": " + e.what());
    }
    MeshData d;
    try {
        for (const auto& p : j.at("nodes")) d.nodes.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        for (const auto& t : j.at("triangles")) {
            if (t.size() != 4) throw MeshError("triangle entries must be [i, j, k, side]");
            const int side = t.at(3).get<int>();
            if (side != 1 && side != -1) throw MeshError("triangle side tag must be +1 or -1");
            d.triangles.push_back(
                {{t.at(0).get<Index>(), t.at(1).get<Index>(), t.at(2).get<Index>()}, side == 1 ? Side::Plus : Side::Minus});
        }
        for (const auto& p : j.at("interface_pairs")) d.interface_pairs.push_back({p.at(0).get<Index>(), p.at(1).get<Index>()});
        d.dirichlet = j.at("dirichlet").get<std::vector<Index>>();
        for (const auto& e : j.at("neumann_edges")) d.neumann_edges.push_back({e.at(0).get<Index>(), e.at(1).get<Index>()});
    } catch (const nlohmann::json::exception& e) {
        throw MeshError("mesh file " + path.string() + ": " + e.what());
    }
    return InterfaceMesh(std::move(d));
}

void save_mesh(const InterfaceMesh& mesh, const std::filesystem::path& path)
{
    nlohmann::json j;
    const auto& d = mesh.data();
    j["nodes"] = nlohmann::json::array();
    for (const auto& p : d.nodes) j["nodes"].push_back({p.x, p.y});
    j["triangles"] = nlohmann::json::array();
    for (const auto& t : d.triangles)
        j["triangles"].push_back({t.nodes[0], t.nodes[1], t.nodes[2], t.side == Side::Plus ? 1 : -1});
    j["interface_pairs"] = nlohmann::json::array();
    for (const auto& p : d.interface_pairs) j["interface_pairs"].push_back({p.a, p.b});
    j["dirichlet"] = d.dirichlet;
    j["neumann_edges"] = nlohmann::json::array();
    for (const auto& e : d.neumann_edges) j["neumann_edges"].push_back({e.a, e.b});

    std::ofstream out(path);
    if (!out) throw IoError("cannot write mesh file " + path.string());
    // Doubles are written in shortest round-trip form, so a reload is bit-exact.
    out << j.dump(1) << '\n';
    if (!out) throw IoError("failed writing mesh file " + path.string());
}

SparseMatrix jump_matrix(const InterfaceMesh& mesh)
{
    std::vector<Triplet> t;
    const auto& pairs = mesh.interface_pairs();
    t.reserve(2 * pairs.size());
    for (std::size_t j = 0; j < pairs.size(); ++j) {
        t.emplace_back(static_cast<int>(j), static_cast<int>(pairs[j].plus), 1.0);
        t.emplace_back(static_cast<int>(j), static_cast<int>(pairs[j].minus), -1.0);
    }
    SparseMatrix b(static_cast<Eigen::Index>(pairs.size()), mesh.node_count());
    b.setFromTriplets(t.begin(), t.end());
    return b;
}

Vector jump(const InterfaceMesh& mesh, const Vector& u)
{
    if (u.size() != mesh.node_count()) throw DomainError("jump: nodal vector has wrong size");
    const auto& pairs = mesh.interface_pairs();
    Vector out(static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t j = 0; j < pairs.size(); ++j) out[j] = u[pairs[j].plus] - u[pairs[j].minus];
    return out;
}

}  // namespace cohesim
