#include "cohesim/output.hpp"

#include "cohesim/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace cohesim {

const char* const kEnergiesHeader =
    "k,t,elastic,kinetic,interface,stored,dissipated,viscous_cum,external_cum,interface_dissipation_cum,residual,"
    "split_residual";
const char* const kKktHeader =
    "k,t,admissibility,complementarity,increment_bound,newton_iterations,grad_norm,el_residual,velocity_h1,"
    "acceleration_l2";
const char* const kTractionsHeader = "k,t,pair,x,y,jump,xi,sigma_plus,sigma_minus,cohesive,corner";
const char* const kStudyHeader =
    "level,kind,parameter,steps,tau,h_max,eps_bar,status,max_energy_residual,max_kkt_violation,velocity_h1,"
    "acceleration_l2,distance_to_next,distance_order,residual_order";

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path)
{
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

RunSummary summarize(const TrajectoryRecord& tr, const DiscreteOperators& ops, const CohesiveLaw& law)
{
    RunSummary s;
    s.steps = tr.steps;
    s.steps_completed = tr.records.empty() ? 0 : tr.records.back().k;
    s.complete = tr.complete;
    const EnergyLedger ledger = energy_ledger(tr, law.envelope, ops.weights);
    s.max_energy_residual = ledger.max_abs_residual();
    s.max_split_gap = ledger.max_split_gap();
    s.max_kkt_violation = kkt_report(tr).max_violation();
    for (const auto& r : tr.records) s.max_el_residual = std::max(s.max_el_residual, r.el_residual);
    for (const Snapshot& snap : tr.snapshots) {
        if (snap.k == 0) continue;
        const TractionField f = traction_extraction(snap, tr.tau, ops, law);
        s.max_traction = std::max(s.max_traction, f.max_abs_traction());
        s.max_transmission_defect = std::max(s.max_transmission_defect, f.max_transmission_defect());
        s.max_cohesive_defect = std::max(s.max_cohesive_defect, f.max_cohesive_defect());
    }
    return s;
}

std::string format_summary(const RunSummary& s)
{
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "%s steps=%d/%d max_energy_residual=%.3e max_kkt_violation=%.3e max_el_residual=%.3e "
                  "max_traction=%.6g max_transmission_defect=%.3e",
                  s.complete ? "ok" : "aborted", s.steps_completed, s.steps, s.max_energy_residual,
                  s.max_kkt_violation, s.max_el_residual, s.max_traction, s.max_transmission_defect);
    return buf;
}

void write_energies_csv(const std::filesystem::path& path, const EnergyLedger& ledger)
{
    auto out = open_output(path);
    out << kEnergiesHeader << '\n';
    for (const auto& r : ledger.rows) {
        out << r.k;
        for (double v : {r.t, r.elastic, r.kinetic, r.interface, r.stored, r.dissipated, r.viscous_cum, r.external_cum,
                         r.interface_dissipation_cum, r.residual, r.split_residual})
            out << ',' << format_double(v);
        out << '\n';
    }
    finish(out, path);
}

void write_kkt_csv(const std::filesystem::path& path, const TrajectoryRecord& tr, const KktReport& kkt)
{
    auto out = open_output(path);
    out << kKktHeader << '\n';
    for (std::size_t i = 0; i < tr.records.size(); ++i) {
        const StepRecord& r = tr.records[i];
        KktRow row;
        if (i > 0 && i - 1 < kkt.rows.size()) row = kkt.rows[i - 1];
        out << r.k << ',' << format_double(r.t) << ',' << format_double(row.admissibility) << ','
            << format_double(row.complementarity) << ',' << format_double(row.increment_bound) << ','
            << r.newton_iterations << ',' << format_double(r.grad_norm) << ',' << format_double(r.el_residual) << ','
            << format_double(r.velocity_h1) << ',' << format_double(r.acceleration_l2) << '\n';
    }
    finish(out, path);
}

void write_tractions_csv(const std::filesystem::path& path, const TrajectoryRecord& tr, const InterfaceMesh& mesh,
                         const DiscreteOperators& ops, const CohesiveLaw& law)
{
    auto out = open_output(path);
    out << kTractionsHeader << '\n';
    for (const Snapshot& snap : tr.snapshots) {
        if (snap.k == 0) continue;  // the acceleration is only defined from step 1
        const TractionField f = traction_extraction(snap, tr.tau, ops, law);
        const Vector jumps = ops.jump_of(snap.u);
        for (Index j = 0; j < ops.pair_count(); ++j) {
            const Point& p = mesh.nodes()[mesh.interface_pairs()[j].plus];
            out << snap.k << ',' << format_double(snap.t) << ',' << j << ',' << format_double(p.x) << ','
                << format_double(p.y) << ',' << format_double(jumps[j]) << ',' << format_double(snap.xi[j]) << ','
                << format_double(f.sigma_plus[j]) << ',' << format_double(f.sigma_minus[j]) << ','
                << format_double(f.cohesive[j]) << ',' << (f.corner[j] ? 1 : 0) << '\n';
        }
    }
    finish(out, path);
}

void write_vtk(const std::filesystem::path& path, const Snapshot& snap, const InterfaceMesh& mesh,
               const DiscreteOperators& ops)
{
    auto out = open_output(path);
    const auto& nodes = mesh.nodes();
    const auto& tris = mesh.triangles();
    out << "# vtk DataFile Version 3.0\n"
        << "cohesim step " << snap.k << " t=" << format_double(snap.t) << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << nodes.size() << " double\n";
    for (const Point& p : nodes) out << format_double(p.x) << ' ' << format_double(p.y) << " 0\n";
    out << "CELLS " << tris.size() << ' ' << 4 * tris.size() << '\n';
    for (const auto& t : tris) out << "3 " << t.nodes[0] << ' ' << t.nodes[1] << ' ' << t.nodes[2] << '\n';
    out << "CELL_TYPES " << tris.size() << '\n';
    for (std::size_t i = 0; i < tris.size(); ++i) out << "5\n";
    out << "CELL_DATA " << tris.size() << "\nSCALARS side int 1\nLOOKUP_TABLE default\n";
    for (const auto& t : tris) out << (t.side == Side::Plus ? 1 : -1) << '\n';
    out << "POINT_DATA " << nodes.size() << '\n';
    const Vector u = ops.to_full(snap.u), v = ops.to_full(snap.v);
    for (const auto& [name, field] : {std::pair<const char*, const Vector*>{"u", &u}, {"v", &v}}) {
        out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (Index i = 0; i < field->size(); ++i) out << format_double((*field)[i]) << '\n';
    }
    finish(out, path);
}

RunSummary write_run_outputs(const std::filesystem::path& dir, const TrajectoryRecord& tr, const Scenario& s,
                             const DiscreteOperators& ops, bool vtk)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    write_energies_csv(dir / "energies.csv", energy_ledger(tr, s.law.envelope, ops.weights));
    write_kkt_csv(dir / "kkt.csv", tr, kkt_report(tr));
    write_tractions_csv(dir / "tractions.csv", tr, s.mesh, ops, s.law);
    if (vtk)
        for (const Snapshot& snap : tr.snapshots) {
            char name[32];
            std::snprintf(name, sizeof name, "fields_%04d.vtk", snap.k);
            write_vtk(dir / name, snap, s.mesh, ops);
        }
    return summarize(tr, ops, s.law);
}

}  // namespace cohesim
