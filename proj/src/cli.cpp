#include "cohesim/cli.hpp"

#include "cohesim/errors.hpp"
#include "cohesim/output.hpp"
#include "cohesim/parallel.hpp"
#include "cohesim/scenario_config.hpp"
#include "cohesim/study.hpp"
#include "cohesim/trace_constant.hpp"

#include <CLI11.hpp>

#include <ostream>

namespace cohesim {

namespace {

std::filesystem::path output_dir(const std::string& out, const ScenarioConfig& cfg)
{
    if (!out.empty()) return out;
    if (!cfg.output.dir.empty()) return cfg.base_dir / cfg.output.dir;
    throw ConfigError("no output directory: pass --out or set output.dir");
}

int cmd_run(const std::string& config_path, const std::string& out, unsigned jobs, std::ostream& os,
            std::ostream& es)
{
    if (jobs > 0) set_thread_limit(jobs);
    const ScenarioConfig cfg = load_scenario_config(config_path);
    const std::filesystem::path dir = output_dir(out, cfg);
    const Scenario& s = *cfg.scenario;
    const PreparedScenario prepared(s);
    try {
        const TrajectoryRecord tr = run(prepared);
        os << format_summary(write_run_outputs(dir, tr, s, prepared.ops, cfg.output.vtk)) << '\n';
        return kExitOk;
    } catch (const RunAborted& e) {
        es << "solver failure at step " << e.step() << ": " << e.what() << '\n';
        os << format_summary(write_run_outputs(dir, e.partial(), s, prepared.ops, cfg.output.vtk)) << '\n';
        return kExitSolver;
    }
}

int cmd_study(const std::string& study_path, const std::string& out, unsigned jobs, std::ostream& os,
              std::ostream& es)
{
    const StudySpec spec = load_study_spec(study_path);
    if (out.empty()) throw ConfigError("study: --out is required");
    const StudyResult result = run_study(spec, out, std::max(1u, jobs), &es);
    int failed = 0;
    for (const auto& l : result.levels) failed += l.ok ? 0 : 1;
    os << study_kind_name(spec.kind) << ": " << result.levels.size() - failed << '/' << result.levels.size()
       << " levels ok, table in " << (std::filesystem::path(out) / "study.csv").string() << '\n';
    return result.all_ok() ? kExitOk : kExitSolver;
}

int cmd_check_law(const std::string& config_path, std::ostream& os)
{
    const ScenarioConfig cfg = load_scenario_config(config_path);
    const Scenario& s = *cfg.scenario;
    const LawConstants& c = s.law.constants;
    const DiscreteOperators ops = assemble(s.mesh, s.materials, s.assembly);
    const double c_h = trace_constant(ops);
    const double c_mu = trace_constant_mu(ops);
    const double margin = c_mu - c.beta;
    os << "H1-H2: ok\n"
       << "beta: " << format_double(c.beta) << '\n'
       << "psi_hat'(0): " << format_double(c.psi_prime_0) << '\n'
       << "H3: " << (c.h3_holds ? "ok" : "violated") << '\n'
       << "c_h: " << format_double(c_h) << '\n'
       << "c_h_mu: " << format_double(c_mu) << '\n'
       << "H4 margin: " << format_double(margin) << '\n'
       << "H4: " << (margin > 0.0 ? "ok" : "violated") << '\n';
    return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Dynamic anti-plane cohesive interface simulator", "cohesim"};
    app.require_subcommand(1);

    std::string path, out_dir;
    unsigned jobs = 0;
    auto* run_cmd = app.add_subcommand("run", "Run one scenario and write CSV ledgers and VTK frames");
    run_cmd->add_option("config", path, "Scenario JSON")->required();
    run_cmd->add_option("--out", out_dir, "Output directory");
    run_cmd->add_option("--jobs", jobs, "Thread limit");

    auto* study_cmd = app.add_subcommand("study", "Run a refinement or continuation study");
    study_cmd->add_option("study", path, "Study JSON")->required();
    study_cmd->add_option("--out", out_dir, "Output directory")->required();
    study_cmd->add_option("--jobs", jobs, "Levels run concurrently");

    auto* law_cmd = app.add_subcommand("check-law", "Check the cohesive law and print its constants");
    law_cmd->add_option("config", path, "Scenario JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run_cmd->parsed()) return cmd_run(path, out_dir, jobs, out, err);
        if (study_cmd->parsed()) return cmd_study(path, out_dir, jobs, out, err);
        return cmd_check_law(path, out);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const SolverError& e) {
        err << "solver failure";
        if (e.step() > 0) err << " at step " << e.step();
        err << ": " << e.what() << '\n';
        return kExitSolver;
    } catch (const Error& e) {
        // ConfigError, ValidationError, MeshError, DomainError
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace cohesim
