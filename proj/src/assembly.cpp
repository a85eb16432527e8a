#include "cohesim/assembly.hpp"

#include "cohesim/errors.hpp"
#include "cohesim/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cohesim {

void Materials::validate() const
{
    const double all[] = {rho_plus, rho_minus, mu_plus, mu_minus, eta_plus, eta_minus};
    for (double v : all)
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("materials: rho, mu and eta must be positive on both sides");
}

Vector DiscreteOperators::to_free(const Vector& nodal) const
{
    if (nodal.size() != node_count) throw DomainError("to_free: nodal vector has wrong size");
    Vector r(free_count());
    for (Index i = 0; i < free_count(); ++i) r[i] = nodal[free_dofs[i]];
    return r;
}

Vector DiscreteOperators::to_full(const Vector& reduced) const
{
    if (reduced.size() != free_count()) throw DomainError("to_full: reduced vector has wrong size");
    Vector r = Vector::Zero(node_count);
    for (Index i = 0; i < free_count(); ++i) r[free_dofs[i]] = reduced[i];
    return r;
}

Vector DiscreteOperators::jump_of(const Vector& u) const
{
    if (u.size() != free_count()) throw DomainError("jump_of: reduced vector has wrong size");
    return jump * u;
}

double DiscreteOperators::interface_dot(const Vector& a, const Vector& b) const
{
    return (weights.array() * a.array() * b.array()).sum();
}

DiscreteOperators make_operators(SparseMatrix mass, SparseMatrix stiffness_mu, SparseMatrix stiffness_eta, SparseMatrix jump,
                                 Vector weights)
{
    const Index n = mass.rows();
    if (mass.cols() != n || stiffness_mu.rows() != n || stiffness_mu.cols() != n || stiffness_eta.rows() != n ||
        stiffness_eta.cols() != n || jump.cols() != n || jump.rows() != weights.size())
        throw DomainError("make_operators: inconsistent matrix dimensions");
    DiscreteOperators ops;
    ops.node_count = n;
    ops.free_dofs.resize(static_cast<std::size_t>(n));
    ops.node_to_free.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) ops.free_dofs[i] = ops.node_to_free[i] = i;
    ops.unit_mass = mass;
    ops.unit_stiffness = stiffness_mu;
    ops.mass = std::move(mass);
    ops.stiffness_mu = std::move(stiffness_mu);
    ops.stiffness_eta = std::move(stiffness_eta);
    ops.weights = std::move(weights);
    ops.pair_corner.assign(static_cast<std::size_t>(ops.weights.size()), false);
    // Pair endpoints are read off the jump rows when they have the +1/-1 form.
    SparseMatrix jt = jump.transpose();
    ops.pair_plus_free.assign(static_cast<std::size_t>(ops.weights.size()), -1);
    ops.pair_minus_free.assign(static_cast<std::size_t>(ops.weights.size()), -1);
    for (int j = 0; j < jt.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(jt, j); it; ++it) {
            if (it.value() > 0) ops.pair_plus_free[j] = it.row();
            if (it.value() < 0) ops.pair_minus_free[j] = it.row();
        }
    ops.jump = std::move(jump);
    return ops;
}

namespace {

enum Kind { kMassPlus, kMassMinus, kMuPlus, kMuMinus, kEtaPlus, kEtaMinus, kUnitMass, kUnitStiffness, kKindCount };

struct ElementGeometry {
    double area;
    std::array<double, 3> bx, by;  // shape function gradients
};

ElementGeometry geometry(const InterfaceMesh& mesh, std::size_t t)
{
    const auto& tri = mesh.triangles()[t];
    const auto& nodes = mesh.nodes();
    const Point& p0 = nodes[tri.nodes[0]];
    const Point& p1 = nodes[tri.nodes[1]];
    const Point& p2 = nodes[tri.nodes[2]];
    const double twice = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
    const double scale = mesh.diameter() * mesh.diameter();
    if (!(std::abs(twice) > 1e-14 * scale))
        throw MeshError("degenerate triangle " + std::to_string(t) + " (zero area)");
    ElementGeometry g;
    g.area = 0.5 * std::abs(twice);
    const std::array<const Point*, 3> p{&p0, &p1, &p2};
    for (int i = 0; i < 3; ++i) {
        const Point& pj = *p[(i + 1) % 3];
        const Point& pk = *p[(i + 2) % 3];
        g.bx[i] = (pj.y - pk.y) / twice;
        g.by[i] = (pk.x - pj.x) / twice;
    }
    return g;
}

SparseMatrix build(Index n, const std::vector<std::vector<Triplet>>& chunks)
{
    std::size_t total = 0;
    for (const auto& c : chunks) total += c.size();
    std::vector<Triplet> all;
    all.reserve(total);
    for (const auto& c : chunks) all.insert(all.end(), c.begin(), c.end());
    SparseMatrix m(n, n);
    m.setFromTriplets(all.begin(), all.end());
    return m;
}

SparseMatrix reduce(const SparseMatrix& full, const SparseMatrix& select)
{
    SparseMatrix r = select * full * select.transpose();
    r.makeCompressed();
    return r;
}

using TripletSets = std::vector<std::vector<std::vector<Triplet>>>;  // [kind][chunk]

TripletSets collect_triplets(const InterfaceMesh& mesh, const Materials& materials, const AssemblyOptions& options)
{
    materials.validate();
    const auto& tris = mesh.triangles();
    const unsigned workers = thread_count();
    TripletSets triplets(kKindCount, std::vector<std::vector<Triplet>>(workers));

    parallel_chunks(tris.size(), workers, [&](unsigned chunk, std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            const ElementGeometry g = geometry(mesh, t);
            const auto& tri = tris[t];
            const bool plus = tri.side == Side::Plus;
            const double rho = materials.rho(tri.side), mu = materials.mu(tri.side), eta = materials.eta(tri.side);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    const int a = static_cast<int>(tri.nodes[i]), b = static_cast<int>(tri.nodes[j]);
                    const double k = g.area * (g.bx[i] * g.bx[j] + g.by[i] * g.by[j]);
                    double m;
                    if (options.lumped_mass)
                        m = i == j ? g.area / 3.0 : 0.0;
                    else
                        m = g.area * (i == j ? 2.0 : 1.0) / 12.0;
                    if (m != 0.0) {
                        triplets[plus ? kMassPlus : kMassMinus][chunk].emplace_back(a, b, rho * m);
                        triplets[kUnitMass][chunk].emplace_back(a, b, m);
                    }
                    triplets[plus ? kMuPlus : kMuMinus][chunk].emplace_back(a, b, mu * k);
                    triplets[plus ? kEtaPlus : kEtaMinus][chunk].emplace_back(a, b, eta * k);
                    triplets[kUnitStiffness][chunk].emplace_back(a, b, k);
                }
        }
    });

    return triplets;
}

}  // namespace

FullOperators assemble_full(const InterfaceMesh& mesh, const Materials& materials, const AssemblyOptions& options)
{
    const TripletSets triplets = collect_triplets(mesh, materials, options);
    const Index n = mesh.node_count();
    FullOperators f;
    f.mass = build(n, triplets[kMassPlus]) + build(n, triplets[kMassMinus]);
    f.stiffness_mu = build(n, triplets[kMuPlus]) + build(n, triplets[kMuMinus]);
    f.stiffness_eta = build(n, triplets[kEtaPlus]) + build(n, triplets[kEtaMinus]);
    return f;
}

DiscreteOperators assemble(const InterfaceMesh& mesh, const Materials& materials, const AssemblyOptions& options)
{
    const TripletSets triplets = collect_triplets(mesh, materials, options);
    const Index n = mesh.node_count();
    DiscreteOperators ops;
    ops.node_count = n;
    ops.node_to_free.assign(static_cast<std::size_t>(n), -1);
    for (Index v = 0; v < n; ++v)
        if (!mesh.is_dirichlet(v)) {
            ops.node_to_free[v] = static_cast<Index>(ops.free_dofs.size());
            ops.free_dofs.push_back(v);
        }
    const Index nf = ops.free_count();
    SparseMatrix select(nf, n);
    {
        std::vector<Triplet> t;
        t.reserve(static_cast<std::size_t>(nf));
        for (Index i = 0; i < nf; ++i) t.emplace_back(static_cast<int>(i), static_cast<int>(ops.free_dofs[i]), 1.0);
        select.setFromTriplets(t.begin(), t.end());
    }

    for (int s = 0; s < 2; ++s) {
        ops.sides[s].mass = reduce(build(n, triplets[s == 0 ? kMassPlus : kMassMinus]), select);
        ops.sides[s].stiffness_mu = reduce(build(n, triplets[s == 0 ? kMuPlus : kMuMinus]), select);
        ops.sides[s].stiffness_eta = reduce(build(n, triplets[s == 0 ? kEtaPlus : kEtaMinus]), select);
    }
    ops.mass = ops.sides[0].mass + ops.sides[1].mass;
    ops.stiffness_mu = ops.sides[0].stiffness_mu + ops.sides[1].stiffness_mu;
    ops.stiffness_eta = ops.sides[0].stiffness_eta + ops.sides[1].stiffness_eta;
    ops.unit_mass = reduce(build(n, triplets[kUnitMass]), select);
    ops.unit_stiffness = reduce(build(n, triplets[kUnitStiffness]), select);

    const auto& pairs = mesh.interface_pairs();
    const Index np = mesh.pair_count();
    ops.weights.resize(np);
    std::vector<Triplet> jt;
    for (Index j = 0; j < np; ++j) {
        const Index p = ops.node_to_free[pairs[j].plus];
        const Index m = ops.node_to_free[pairs[j].minus];
        ops.weights[j] = pairs[j].weight;
        ops.pair_plus_free.push_back(p);
        ops.pair_minus_free.push_back(m);
        ops.pair_corner.push_back(mesh.pair_is_corner(j));
        jt.emplace_back(static_cast<int>(j), static_cast<int>(p), 1.0);
        jt.emplace_back(static_cast<int>(j), static_cast<int>(m), -1.0);
    }
    ops.jump.resize(np, nf);
    ops.jump.setFromTriplets(jt.begin(), jt.end());
    return ops;
}

namespace {

SideLoads load_at(const LoadModel& loads, double t, const InterfaceMesh& mesh)
{
    const Index n = mesh.node_count();
    SideLoads out{Vector::Zero(n), Vector::Zero(n)};
    const auto& nodes = mesh.nodes();

    if (loads.bulk) {
        // Degree-2 rule: interior points (2/3, 1/6, 1/6) and permutations.
        constexpr double kA = 2.0 / 3.0, kB = 1.0 / 6.0;
        const double bary[3][3] = {{kA, kB, kB}, {kB, kA, kB}, {kB, kB, kA}};
        for (const auto& tri : mesh.triangles()) {
            const Point& p0 = nodes[tri.nodes[0]];
            const Point& p1 = nodes[tri.nodes[1]];
            const Point& p2 = nodes[tri.nodes[2]];
            const double area = 0.5 * std::abs((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
            Vector& target = tri.side == Side::Plus ? out.plus : out.minus;
            for (const auto& l : bary) {
                const double x = l[0] * p0.x + l[1] * p1.x + l[2] * p2.x;
                const double y = l[0] * p0.y + l[1] * p1.y + l[2] * p2.y;
                const double f = loads.bulk(x, y, t) * area / 3.0;
                for (int i = 0; i < 3; ++i) target[tri.nodes[i]] += f * l[i];
            }
        }
    }
    if (loads.surface) {
        const double g = 0.5 / std::sqrt(3.0);
        const double s[2] = {0.5 - g, 0.5 + g};
        for (const auto& e : mesh.neumann_edges()) {
            const Point& a = nodes[e.a];
            const Point& b = nodes[e.b];
            const double len = std::hypot(b.x - a.x, b.y - a.y);
            Vector& target = mesh.node_side(e.a) == Side::Plus ? out.plus : out.minus;
            for (double si : s) {
                const double f = loads.surface(a.x + si * (b.x - a.x), a.y + si * (b.y - a.y), t) * 0.5 * len;
                target[e.a] += f * (1.0 - si);
                target[e.b] += f * si;
            }
        }
    }
    return out;
}

}  // namespace

SideLoads nodal_load_by_side(const LoadModel& loads, double t, const InterfaceMesh& mesh)
{
    const double slack = 1e-12 * std::max(1.0, loads.final_time);
    if (!(t >= -slack && t <= loads.final_time + slack))
        throw DomainError("load_vector: time " + std::to_string(t) + " outside [0, T]");
    t = std::clamp(t, 0.0, loads.final_time);
    const auto& ts = loads.sample_times;
    auto it = std::lower_bound(ts.begin(), ts.end(), t);
    if (it == ts.begin() || it == ts.end() || *it == t) return load_at(loads, t, mesh);
    const double t1 = *it, t0 = *(it - 1);
    const double theta = (t - t0) / (t1 - t0);
    SideLoads a = load_at(loads, t0, mesh);
    SideLoads b = load_at(loads, t1, mesh);
    return {(1.0 - theta) * a.plus + theta * b.plus, (1.0 - theta) * a.minus + theta * b.minus};
}

SideLoads load_vector_by_side(const LoadModel& loads, double t, const InterfaceMesh& mesh, const DiscreteOperators& ops)
{
    SideLoads nodal = nodal_load_by_side(loads, t, mesh);
    return {ops.to_free(nodal.plus), ops.to_free(nodal.minus)};
}

Vector load_vector(const LoadModel& loads, double t, const InterfaceMesh& mesh, const DiscreteOperators& ops)
{
    return load_vector_by_side(loads, t, mesh, ops).total();
}

}  // namespace cohesim
