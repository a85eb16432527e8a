#include "cohesim/study.hpp"

#include "cohesim/audit.hpp"
#include "cohesim/errors.hpp"
#include "cohesim/output.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>

namespace cohesim {

bool StudyResult::all_ok() const
{
    for (const auto& l : levels)
        if (!l.ok) return false;
    return !levels.empty();
}

nlohmann::json level_document(const StudySpec& spec, int level)
{
    nlohmann::json doc = spec.base;
    const int factor = 1 << level;
    switch (spec.kind) {
    case StudyKind::Single: break;
    case StudyKind::TauRefinement: {
        doc["time"]["n"] = doc["time"]["n"].get<long>() * factor;
        // keep snapshots at the same physical times on every level
        const long stride = doc.contains("output") && doc["output"].contains("snapshot_stride")
                                ? doc["output"]["snapshot_stride"].get<long>()
                                : 1;
        doc["output"]["snapshot_stride"] = stride * factor;
        break;
    }
    case StudyKind::HRefinement:
        doc["mesh"]["n_x"] = doc["mesh"]["n_x"].get<long>() * factor;
        doc["mesh"]["n_y"] = doc["mesh"]["n_y"].get<long>() * factor;
        break;
    case StudyKind::EpsContinuation: doc["regularization"]["eps_bar"] = spec.eps_list.at(level); break;
    }
    return doc;
}

namespace {

int level_count(const StudySpec& spec)
{
    switch (spec.kind) {
    case StudyKind::Single: return 1;
    case StudyKind::EpsContinuation: return static_cast<int>(spec.eps_list.size());
    default: return spec.levels;
    }
}

struct LevelRun {
    std::optional<ScenarioConfig> config;
    std::optional<DiscreteOperators> ops;
    std::optional<TrajectoryRecord> trajectory;
};

/// max over coarse snapshots k of ||u_coarse(t_k) - u_fine(t_k)||_L2, with
/// the fine field restricted to the coarse nodes.
double level_distance(StudyKind kind, const LevelRun& coarse, const LevelRun& fine)
{
    const TrajectoryRecord& a = *coarse.trajectory;
    const TrajectoryRecord& b = *fine.trajectory;
    const DiscreteOperators& ops = *coarse.ops;
    if (kind == StudyKind::EpsContinuation || kind == StudyKind::Single) return trajectory_distance(a, b, ops);

    std::vector<Index> restriction;  // coarse free index -> fine free index
    if (kind == StudyKind::HRefinement) {
        const InterfaceMesh& cm = coarse.config->scenario->mesh;
        const InterfaceMesh& fm = fine.config->scenario->mesh;
        std::map<std::tuple<long long, long long, int>, Index> lookup;
        const double scale = 1.0 / (1e-9 * std::max(fm.diameter(), 1e-300));
        auto key = [&](const Point& p, Side s) {
            return std::make_tuple(std::llround(p.x * scale), std::llround(p.y * scale), s == Side::Plus ? 1 : -1);
        };
        for (Index i = 0; i < static_cast<Index>(fm.nodes().size()); ++i)
            lookup[key(fm.nodes()[i], fm.node_side(i))] = i;
        restriction.resize(ops.free_dofs.size());
        for (std::size_t f = 0; f < ops.free_dofs.size(); ++f) {
            const Index node = ops.free_dofs[f];
            const auto it = lookup.find(key(cm.nodes()[node], cm.node_side(node)));
            if (it == lookup.end()) throw DomainError("h refinement: coarse node " + std::to_string(node) +
                                                      " has no coincident fine node");
            const Index ff = fine.ops->node_to_free[it->second];
            if (ff < 0) throw DomainError("h refinement: free coarse node maps to a Dirichlet fine node");
            restriction[f] = ff;
        }
    }

    const int ratio = kind == StudyKind::TauRefinement ? 2 : 1;
    double d = 0.0;
    bool any = false;
    for (const Snapshot& s : a.snapshots) {
        const Snapshot* t = b.snapshot_at(ratio * s.k);
        if (!t) continue;
        Vector e = s.u;
        if (restriction.empty()) {
            e -= t->u;
        } else {
            for (std::size_t f = 0; f < restriction.size(); ++f) e[f] -= t->u[restriction[f]];
        }
        d = std::max(d, std::sqrt(std::max(0.0, e.dot(ops.unit_mass * e))));
        any = true;
    }
    if (!any) throw DomainError("no common snapshot times between study levels");
    return d;
}

double log2_ratio(double a, double b)
{
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) return NAN;
    return std::log2(a / b);
}

}  // namespace

StudyResult run_study(const StudySpec& spec, const std::filesystem::path& out_dir, unsigned jobs, std::ostream* log)
{
    const int n = level_count(spec);
    StudyResult result;
    result.kind = spec.kind;
    result.levels.resize(n);
    std::vector<LevelRun> runs(n);
    std::mutex log_mutex;

    auto run_level = [&](int i) {
        StudyLevel& row = result.levels[i];
        LevelRun& lr = runs[i];
        row.level = i;
        try {
            lr.config = scenario_from_json(level_document(spec, i), spec.base_dir);
            const Scenario& s = *lr.config->scenario;
            row.steps = s.steps;
            row.tau = s.tau();
            row.h_max = s.mesh.h_max();
            row.eps_bar = s.eps_bar;
            row.parameter = spec.kind == StudyKind::TauRefinement   ? s.steps
                            : spec.kind == StudyKind::HRefinement   ? static_cast<double>(lr.config->rectangle_spec.n_x)
                            : spec.kind == StudyKind::EpsContinuation ? s.eps_bar
                                                                      : s.steps;
            const PreparedScenario prepared(s);
            lr.ops = prepared.ops;
            TrajectoryRecord tr;
            try {
                tr = run(prepared);
            } catch (const RunAborted& e) {
                write_run_outputs(out_dir / ("level_" + std::to_string(i)), e.partial(), s, *lr.ops,
                                  lr.config->output.vtk);
                throw;
            }
            const RunSummary summary =
                write_run_outputs(out_dir / ("level_" + std::to_string(i)), tr, s, *lr.ops, lr.config->output.vtk);
            const RegularityNorms norms = regularity_norms(tr);
            row.max_energy_residual = summary.max_energy_residual;
            row.max_kkt_violation = summary.max_kkt_violation;
            row.velocity_h1 = norms.velocity_h1;
            row.acceleration_l2 = norms.acceleration_l2;
            lr.trajectory = std::move(tr);
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
        if (log) {
            std::lock_guard lock(log_mutex);
            *log << "level " << i << ": " << (row.ok ? "ok" : "failed: " + row.error) << '\n';
        }
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
    std::atomic<int> next{0};
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int i = next++; i < n; i = next++) run_level(i);
            });
    }

    for (int i = 0; i + 1 < n; ++i) {
        if (!runs[i].trajectory || !runs[i + 1].trajectory) continue;
        try {
            result.levels[i].distance_to_next = level_distance(spec.kind, runs[i], runs[i + 1]);
        } catch (const std::exception& e) {
            result.levels[i].ok = false;
            result.levels[i].error = e.what();
        }
    }
    for (int i = 1; i < n; ++i) {
        result.levels[i].distance_order =
            log2_ratio(result.levels[i - 1].distance_to_next, result.levels[i].distance_to_next);
        result.levels[i].residual_order =
            log2_ratio(result.levels[i - 1].max_energy_residual, result.levels[i].max_energy_residual);
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());
    write_study_csv(out_dir / "study.csv", result);
    return result;
}

void write_study_csv(const std::filesystem::path& path, const StudyResult& result)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << kStudyHeader << '\n';
    for (const StudyLevel& l : result.levels) {
        out << l.level << ',' << study_kind_name(result.kind) << ',' << format_double(l.parameter) << ',' << l.steps
            << ',' << format_double(l.tau) << ',' << format_double(l.h_max) << ',' << format_double(l.eps_bar) << ','
            << (l.ok ? "ok" : "failed");
        for (double v : {l.max_energy_residual, l.max_kkt_violation, l.velocity_h1, l.acceleration_l2,
                         l.distance_to_next, l.distance_order, l.residual_order})
            out << ',' << format_double(v);
        out << '\n';
    }
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace cohesim
