#include "cohesim/scenario_config.hpp"

#include "cohesim/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace cohesim {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed)
{
    if (!obj.is_object()) throw ConfigError(path + ": expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!ok.count(it.key())) throw ConfigError(path + "." + it.key() + ": unknown key");
}

const json& require(const json& obj, const std::string& path, const char* key)
{
    if (!obj.contains(key)) throw ConfigError(path + "." + key + ": missing");
    return obj.at(key);
}

double number(const json& v, const std::string& field)
{
    if (!v.is_number()) throw ConfigError(field + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(field + ": must be finite");
    return d;
}

double positive(const json& v, const std::string& field)
{
    const double d = number(v, field);
    if (!(d > 0.0)) throw ConfigError(field + ": must be positive");
    return d;
}

int count(const json& v, const std::string& field, int min)
{
    if (!v.is_number_integer()) throw ConfigError(field + ": expected an integer");
    const auto i = v.get<long long>();
    if (i < min) throw ConfigError(field + ": must be at least " + std::to_string(min));
    return static_cast<int>(i);
}

bool boolean(const json& v, const std::string& field)
{
    if (!v.is_boolean()) throw ConfigError(field + ": expected true or false");
    return v.get<bool>();
}

std::vector<double> numbers(const json& v, const std::string& field)
{
    if (!v.is_array()) throw ConfigError(field + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

Expression expression(const json& v, const std::string& field)
{
    if (v.is_number()) return Expression::constant(number(v, field));
    if (!v.is_string()) throw ConfigError(field + ": expected a number or an expression string");
    try {
        return Expression::parse(v.get<std::string>());
    } catch (const ConfigError& e) {
        throw ConfigError(field + ": " + e.what());
    }
}

// Nodal field given as a number, an expression in (x, y) or an explicit array.
Vector nodal_field(const json& v, const InterfaceMesh& mesh, const std::string& field)
{
    const Index n = mesh.node_count();
    Vector out(n);
    if (v.is_array()) {
        const auto vals = numbers(v, field);
        if (static_cast<Index>(vals.size()) != n)
            throw ConfigError(field + ": expected " + std::to_string(n) + " nodal values");
        for (Index i = 0; i < n; ++i) out[i] = vals[static_cast<std::size_t>(i)];
        return out;
    }
    const Expression e = expression(v, field);
    for (Index i = 0; i < n; ++i) out[i] = e(mesh.nodes()[i].x, mesh.nodes()[i].y, 0.0);
    return out;
}

Vector pair_field(const json& v, const InterfaceMesh& mesh, const std::string& field)
{
    const Index np = mesh.pair_count();
    Vector out(np);
    if (v.is_array()) {
        const auto vals = numbers(v, field);
        if (static_cast<Index>(vals.size()) != np)
            throw ConfigError(field + ": expected " + std::to_string(np) + " interface values");
        for (Index j = 0; j < np; ++j) out[j] = vals[static_cast<std::size_t>(j)];
        return out;
    }
    const Expression e = expression(v, field);
    for (Index j = 0; j < np; ++j) {
        const Point& p = mesh.nodes()[mesh.interface_pairs()[j].plus];
        out[j] = e(p.x, p.y, 0.0);
    }
    return out;
}

SpaceTimeFunction as_function(const Expression& e)
{
    return [e](double x, double y, double t) { return e(x, y, t); };
}

}  // namespace

json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        // nlohmann reports "line L, column C" in the message
        throw ConfigError(path.string() + ": " + e.what());
    }
}

CohesiveLaw law_from_json(const json& law)
{
    const std::string p = "law";
    if (!law.is_object()) throw ConfigError("law: expected an object");
    const json& kind = require(law, p, "kind");
    if (!kind.is_string()) throw ConfigError("law.kind: expected a string");
    const std::string k = kind.get<std::string>();
    if (k == "prototype") {
        check_keys(law, p, {"kind", "g_c", "xi_c"});
        return CohesiveLaw(Envelope::prototype(positive(require(law, p, "g_c"), "law.g_c"),
                                               positive(require(law, p, "xi_c"), "law.xi_c")));
    }
    if (k == "tabulated") {
        check_keys(law, p, {"kind", "w", "psi", "dpsi", "d2psi"});
        EnvelopeSamples s;
        s.w = numbers(require(law, p, "w"), "law.w");
        s.psi = numbers(require(law, p, "psi"), "law.psi");
        s.dpsi = numbers(require(law, p, "dpsi"), "law.dpsi");
        s.d2psi = numbers(require(law, p, "d2psi"), "law.d2psi");
        return CohesiveLaw(Envelope::tabulated(std::move(s)));
    }
    throw ConfigError("law.kind: expected \"prototype\" or \"tabulated\"");
}

ScenarioConfig scenario_from_json(const json& doc, const std::filesystem::path& base_dir)
{
    check_keys(doc, "config",
               {"mesh", "materials", "law", "loads", "time", "initial", "regularization", "solver", "output"});
    ScenarioConfig cfg;
    cfg.document = doc;
    cfg.base_dir = base_dir;

    // mesh
    const json& m = require(doc, "config", "mesh");
    check_keys(m, "mesh", {"type", "length", "half_height", "n_x", "n_y", "file", "lumped_mass"});
    AssemblyOptions assembly;
    if (m.contains("lumped_mass")) assembly.lumped_mass = boolean(m["lumped_mass"], "mesh.lumped_mass");
    std::optional<InterfaceMesh> mesh;
    if (m.contains("file")) {
        if (m.contains("type") || m.contains("n_x") || m.contains("n_y") || m.contains("length") || m.contains("half_height"))
            throw ConfigError("mesh: give either a file or generator parameters, not both");
        if (!m["file"].is_string()) throw ConfigError("mesh.file: expected a path");
        std::filesystem::path file = m["file"].get<std::string>();
        if (file.is_relative()) file = base_dir / file;
        try {
            mesh.emplace(load_mesh(file));
        } catch (const MeshError& e) {
            throw ConfigError(std::string("mesh.file: ") + e.what());
        }
    } else {
        if (m.contains("type") && m["type"] != "rectangle") throw ConfigError("mesh.type: only \"rectangle\" is supported");
        RectangleSpec r;
        r.length = m.contains("length") ? positive(m["length"], "mesh.length") : 1.0;
        r.half_height = m.contains("half_height") ? positive(m["half_height"], "mesh.half_height") : 1.0;
        r.n_x = count(require(m, "mesh", "n_x"), "mesh.n_x", 1);
        r.n_y = count(require(m, "mesh", "n_y"), "mesh.n_y", 1);
        mesh.emplace(build_rectangle_mesh(r));
        cfg.rectangle = true;
        cfg.rectangle_spec = r;
    }

    auto scenario = std::make_shared<Scenario>(std::move(*mesh), law_from_json(require(doc, "config", "law")));
    Scenario& s = *scenario;
    s.assembly = assembly;

    // materials
    const json& mat = require(doc, "config", "materials");
    check_keys(mat, "materials", {"rho", "mu", "eta", "rho_plus", "rho_minus", "mu_plus", "mu_minus", "eta_plus", "eta_minus"});
    auto side_value = [&](const char* base, const std::string& side) {
        const std::string key = std::string(base) + "_" + side;
        if (mat.contains(key)) return positive(mat[key], "materials." + key);
        if (mat.contains(base)) return positive(mat[base], std::string("materials.") + base);
        throw ConfigError(std::string("materials.") + base + ": missing");
    };
    s.materials = {side_value("rho", "plus"), side_value("rho", "minus"), side_value("mu", "plus"),
                   side_value("mu", "minus"), side_value("eta", "plus"), side_value("eta", "minus")};

    // time
    const json& time = require(doc, "config", "time");
    check_keys(time, "time", {"T", "n"});
    s.final_time = positive(require(time, "time", "T"), "time.T");
    s.steps = count(require(time, "time", "n"), "time.n", 1);

    // loads
    s.loads.final_time = s.final_time;
    if (doc.contains("loads")) {
        const json& l = doc["loads"];
        check_keys(l, "loads", {"bulk", "surface", "sample_times"});
        if (l.contains("bulk")) s.loads.bulk = as_function(expression(l["bulk"], "loads.bulk"));
        if (l.contains("surface")) s.loads.surface = as_function(expression(l["surface"], "loads.surface"));
        if (l.contains("sample_times")) {
            s.loads.sample_times = numbers(l["sample_times"], "loads.sample_times");
            const auto& ts = s.loads.sample_times;
            for (std::size_t i = 0; i < ts.size(); ++i) {
                if (ts[i] < 0.0 || ts[i] > s.final_time) throw ConfigError("loads.sample_times: entries must lie in [0, T]");
                if (i > 0 && !(ts[i] > ts[i - 1])) throw ConfigError("loads.sample_times: must be increasing");
            }
        }
    }

    // regularization
    if (doc.contains("regularization")) {
        const json& r = doc["regularization"];
        check_keys(r, "regularization", {"eps_bar", "regularity_mode"});
        if (r.contains("eps_bar")) s.eps_bar = positive(r["eps_bar"], "regularization.eps_bar");
        if (r.contains("regularity_mode")) s.regularity_mode = boolean(r["regularity_mode"], "regularization.regularity_mode");
    }

    // initial
    if (doc.contains("initial")) {
        const json& i = doc["initial"];
        check_keys(i, "initial", {"u0", "v0", "xi0", "w0"});
        if (i.contains("u0")) s.u0 = nodal_field(i["u0"], s.mesh, "initial.u0");
        if (i.contains("v0")) s.v0 = nodal_field(i["v0"], s.mesh, "initial.v0");
        if (i.contains("w0")) s.w0 = nodal_field(i["w0"], s.mesh, "initial.w0");
        if (i.contains("xi0")) s.xi0 = pair_field(i["xi0"], s.mesh, "initial.xi0");
    }

    // solver
    if (doc.contains("solver")) {
        const json& sv = doc["solver"];
        check_keys(sv, "solver", {"tol", "max_iterations", "guard_margin"});
        if (sv.contains("tol")) s.solver.tol = positive(sv["tol"], "solver.tol");
        if (sv.contains("max_iterations")) s.solver.max_iterations = count(sv["max_iterations"], "solver.max_iterations", 1);
        if (sv.contains("guard_margin")) s.solver.guard_margin = number(sv["guard_margin"], "solver.guard_margin");
    }

    // output
    if (doc.contains("output")) {
        const json& o = doc["output"];
        check_keys(o, "output", {"dir", "snapshot_stride", "vtk"});
        if (o.contains("dir")) {
            if (!o["dir"].is_string()) throw ConfigError("output.dir: expected a path");
            cfg.output.dir = o["dir"].get<std::string>();
        }
        if (o.contains("snapshot_stride")) cfg.output.snapshot_stride = count(o["snapshot_stride"], "output.snapshot_stride", 1);
        if (o.contains("vtk")) cfg.output.vtk = boolean(o["vtk"], "output.vtk");
    }
    s.snapshot_stride = cfg.output.snapshot_stride;

    validate_scenario(s);
    cfg.scenario = std::move(scenario);
    return cfg;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path)
{
    return scenario_from_json(read_json_file(path), path.parent_path().empty() ? "." : path.parent_path());
}

const char* study_kind_name(StudyKind kind)
{
    switch (kind) {
    case StudyKind::Single: return "single";
    case StudyKind::TauRefinement: return "tau_refinement";
    case StudyKind::EpsContinuation: return "eps_continuation";
    case StudyKind::HRefinement: return "h_refinement";
    }
    return "?";
}

StudySpec study_from_json(const json& doc, const std::filesystem::path& base_dir)
{
    check_keys(doc, "study", {"kind", "levels", "eps_list", "base"});
    StudySpec spec;
    spec.base_dir = base_dir;
    const json& kind = require(doc, "study", "kind");
    const std::string k = kind.is_string() ? kind.get<std::string>() : "";
    if (k == "single")
        spec.kind = StudyKind::Single;
    else if (k == "tau_refinement")
        spec.kind = StudyKind::TauRefinement;
    else if (k == "eps_continuation")
        spec.kind = StudyKind::EpsContinuation;
    else if (k == "h_refinement")
        spec.kind = StudyKind::HRefinement;
    else
        throw ConfigError("study.kind: expected single, tau_refinement, eps_continuation or h_refinement");

    if (spec.kind == StudyKind::TauRefinement || spec.kind == StudyKind::HRefinement)
        spec.levels = count(require(doc, "study", "levels"), "study.levels", 2);
    else if (doc.contains("levels"))
        throw ConfigError("study.levels: only used by refinement studies");
    if (spec.kind == StudyKind::EpsContinuation) {
        spec.eps_list = numbers(require(doc, "study", "eps_list"), "study.eps_list");
        if (spec.eps_list.size() < 2) throw ConfigError("study.eps_list: needs at least two values");
        for (std::size_t i = 0; i < spec.eps_list.size(); ++i) {
            if (!(spec.eps_list[i] > 0.0)) throw ConfigError("study.eps_list: values must be positive");
            if (i > 0 && !(spec.eps_list[i] < spec.eps_list[i - 1]))
                throw ConfigError("study.eps_list: values must be strictly decreasing");
        }
    } else if (doc.contains("eps_list")) {
        throw ConfigError("study.eps_list: only used by eps_continuation");
    }

    const json& base = require(doc, "study", "base");
    if (base.is_string()) {
        std::filesystem::path p = base.get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        spec.base = read_json_file(p);
        spec.base_dir = p.parent_path().empty() ? "." : p.parent_path();
    } else if (base.is_object()) {
        spec.base = base;
    } else {
        throw ConfigError("study.base: expected a scenario object or a path");
    }
    if (spec.kind == StudyKind::HRefinement && spec.base.contains("mesh") && spec.base["mesh"].contains("file"))
        throw ConfigError("study.kind: h_refinement needs a generated rectangle mesh");
    // Fail early on a malformed base scenario.
    scenario_from_json(spec.base, spec.base_dir);
    return spec;
}

StudySpec load_study_spec(const std::filesystem::path& path)
{
    return study_from_json(read_json_file(path), path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace cohesim
