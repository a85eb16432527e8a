// Acceptance checks, one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include "cohesim/audit.hpp"
#include "cohesim/cli.hpp"
#include "cohesim/errors.hpp"
#include "cohesim/evolution.hpp"
#include "cohesim/trace_constant.hpp"

#include "toy_problem.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

using namespace cohesim;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

EnvelopeSamples quadratic_slope_samples(double p0, double xc, int n)
{
    // psi_hat' = p0 (1 - (w/xc)^2)
    EnvelopeSamples s;
    for (int i = 0; i <= n; ++i) {
        const double w = xc * i / n;
        s.w.push_back(w);
        s.psi.push_back(p0 * (w - w * w * w / (3.0 * xc * xc)));
        s.dpsi.push_back(p0 * (1.0 - w * w / (xc * xc)));
        s.d2psi.push_back(-2.0 * p0 * w / (xc * xc));
    }
    return s;
}

std::vector<Envelope> test_envelopes()
{
    return {Envelope::prototype(1.0, 0.2), Envelope::tabulated(quadratic_slope_samples(3.0, 0.5, 16))};
}

SpaceTimeFunction ramp_load(double amplitude)
{
    return [amplitude](double x, double y, double t) { return amplitude * t * y * (1.0 + 0.5 * std::sin(M_PI * x)); };
}

// Rectangle L = 1 (Omega = (0,1) x (-1,1)), 16 x 8 cells per side, prototype
// law G_c = 1, xi_c = 0.2, unit materials, T = 1, eps_bar = 1e-3.
Scenario standard_scenario(int n)
{
    Scenario s(build_rectangle_mesh(1.0, 16, 8), CohesiveLaw(Envelope::prototype(1.0, 0.2)));
    s.materials = Materials::uniform(1.0, 1.0, 1.0);
    s.final_time = s.loads.final_time = 1.0;
    s.steps = n;
    s.eps_bar = 1e-3;
    s.loads.bulk = ramp_load(60.0);
    return s;
}

Outcome derivative_suite()
{
    const auto t0 = std::chrono::steady_clock::now();
    const double h = 1e-6;
    int samples = 0;
    double worst = 0.0, bound_excess = 0.0;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (const Envelope& env : test_envelopes()) {
        const double xc = env.critical_opening(), p0 = env.slope(0.0);
        // relative error; derivatives that vanish (beyond xi_c) are compared on the traction scale p0
        auto error = [&](double fd, double exact) {
            return std::abs(fd - exact) / std::max(std::abs(exact), 1e-3 * p0);
        };
        for (int taken = 0; taken < 6000;) {
            const double xi = xc * (0.02 + 1.98 * uni(rng));
            const double w = xc * (-2.0 + 4.0 * uni(rng));
            const double a = std::abs(w), gap = 1e-4 * xc;
            if (a < gap || std::abs(a - xi) < gap || std::abs(a - xc) < gap || std::abs(xi - xc) < gap) continue;
            ++taken;
            const double fw = (psi_value(w + h, xi, env) - psi_value(w - h, xi, env)) / (2.0 * h);
            const double fx = (psi_value(w, xi + h, env) - psi_value(w, xi - h, env)) / (2.0 * h);
            const double dw = dpsi_dw(w, xi, env);
            worst = std::max({worst, error(fw, dw), error(fx, dpsi_dxi(w, xi, env))});
            bound_excess = std::max(bound_excess, std::abs(dw) / p0 - 1.0);
        }
        samples += 6000;
    }
    const double runtime = seconds_since(t0);
    return {worst <= 1e-6 && bound_excess <= 1e-12 && runtime < 5.0,
            fmt("%d samples, max rel err %.2e, max |dpsi_dw|/psi_hat'(0) - 1 = %.2e, %.2f s", samples, worst,
                bound_excess, runtime)};
}

Outcome lambda_convexity()
{
    double worst = -INFINITY;
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (const Envelope& env : test_envelopes()) {
        const double xc = env.critical_opening(), beta = law_constants(env).beta;
        for (double xi : {0.0, 0.1 * xc, xc, 2.0 * xc}) {
            auto g = [&](double w) { return psi_value(w, xi, env) + 0.5 * beta * w * w; };
            for (int i = 0; i < 10000; ++i) {
                const double a = xc * (-3.0 + 6.0 * uni(rng)), b = xc * (-3.0 + 6.0 * uni(rng));
                worst = std::max(worst, g(0.5 * (a + b)) - 0.5 * (g(a) + g(b)));
            }
        }
    }
    return {worst <= 1e-10, fmt("2 laws x 4 history levels x 1e4 triples, max midpoint excess %.2e", worst)};
}

Outcome step_oracle()
{
    const auto t0 = std::chrono::steady_clock::now();
    const CohesiveLaw law(Envelope::prototype(1.0, 1.0));
    const toy::PrototypeSlope ref{1.0, 1.0};
    std::mt19937_64 rng(7);
    double worst = 0.0;
    int draws = 0;
    for (; draws < 100; ++draws) {
        const toy::Draw d = toy::random_draw(rng);
        const auto ops = toy::operators(d.m[0], d.m[1], d.e[0], d.e[1], d.a[0], d.a[1], d.w);
        StepProblem p;
        p.tau = d.tau;
        p.u_prev = Vector{{d.u1[0], d.u1[1]}};
        p.u_prev2 = Vector{{d.u2[0], d.u2[1]}};
        p.xi_prev = Vector::Constant(1, d.xi);
        p.load = Vector{{d.f[0], d.f[1]}};
        p.ops = &ops;
        p.law = &law;
        const StepResult s = solve_step(p);
        const double t2 = d.tau * d.tau;
        double hh[2], b[2];
        for (int i = 0; i < 2; ++i) {
            hh[i] = d.m[i] / t2 + d.e[i] / d.tau + d.a[i];
            b[i] = d.f[i] + d.m[i] * (2 * d.u1[i] - d.u2[i]) / t2 + d.e[i] * d.u1[i] / d.tau;
        }
        const Vector oracle = toy::reference_minimizer(hh[0], hh[1], b[0], b[1], d.w, d.xi, ref);
        worst = std::max(worst, (s.u - oracle).lpNorm<Eigen::Infinity>());
    }
    const double runtime = seconds_since(t0);
    return {worst <= 1e-8 && runtime < 10.0,
            fmt("%d draws, max coordinate difference %.2e, %.2f s", draws, worst, runtime)};
}

Outcome kkt_exactness()
{
    const auto t0 = std::chrono::steady_clock::now();
    const TrajectoryRecord tr = run(standard_scenario(200));
    const KktReport r = kkt_report(tr);
    double admissible_excess = 0.0;
    for (std::size_t k = 0; k < tr.jumps.size(); ++k)
        admissible_excess = std::max(admissible_excess, (tr.jumps[k].cwiseAbs() - tr.history[k]).maxCoeff());
    const double grown = (tr.history.back() - tr.history.front()).maxCoeff();
    const double runtime = seconds_since(t0);
    return {r.max_violation() <= 1e-12 && r.history_monotone && admissible_excess <= 0.0 && grown > 0.0 &&
                runtime < 60.0,
            fmt("max KKT violation %.2e, monotone %s, max(|[u]| - xi) %.2e, max xi growth %.3g, %.2f s",
                r.max_violation(), r.history_monotone ? "yes" : "no", admissible_excess, grown, runtime)};
}

Outcome energy_identity()
{
    std::vector<double> residuals;
    double gap = 0.0;
    for (int n : {200, 400, 800, 1600}) {
        Scenario s = standard_scenario(n);
        s.snapshot_stride = n;
        const PreparedScenario prep(s);
        const EnergyLedger ledger = energy_ledger(run(prep), s.law.envelope, prep.ops.weights);
        residuals.push_back(ledger.max_abs_residual());
        gap = std::max(gap, ledger.max_split_gap());
    }
    bool ok = gap <= 1e-12;
    std::string orders;
    for (std::size_t i = 1; i < residuals.size(); ++i) {
        const double order = std::log2(residuals[i - 1] / residuals[i]);
        ok = ok && residuals[i] < residuals[i - 1] && order >= 0.5;
        orders += fmt(" %.3f", order);
    }
    return {ok, fmt("max|R| %.3e %.3e %.3e %.3e, orders%s, split gap %.2e", residuals[0], residuals[1], residuals[2],
                    residuals[3], orders.c_str(), gap)};
}

// Load ramps up over [0, P], down to zero over [P, 2P], then back up to 0.6 of
// the peak over [2P, 3P].
Outcome elastic_unloading()
{
    const double period = 10.0;
    const int n = 600, peak = 200, trough = 400;
    Scenario s(build_rectangle_mesh(1.0, 16, 8), CohesiveLaw(Envelope::prototype(0.1, 1.0)));
    s.final_time = s.loads.final_time = 3.0 * period;
    s.steps = n;
    s.loads.bulk = [period](double x, double y, double t) {
        const double r = t / period;
        const double p = r <= 1.0 ? r : r <= 2.0 ? 2.0 - r : 0.6 * (r - 2.0);
        return 2.0 * p * y * (1.0 + 0.5 * std::sin(M_PI * x));
    };
    const PreparedScenario prep(s);
    const DiscreteOperators& ops = prep.ops;
    const TrajectoryRecord tr = run(prep);
    const double tol = s.solver.tol;

    // pairs whose opening pushed the history beyond its initial value
    std::vector<Index> active;
    for (Index j = 0; j < ops.pair_count(); ++j)
        if (!ops.pair_corner[j] && tr.history[peak][j] > tr.history[0][j]) active.push_back(j);
    if (active.empty()) return {false, "no pair opened beyond its initial history"};

    // unloading starts once every active pair is strictly inside its cone
    int onset = -1;
    for (int k = peak; k <= n && onset < 0; ++k) {
        bool inside = true;
        for (Index j : active) inside = inside && std::abs(tr.jumps[k][j]) < tr.history[k][j];
        if (inside) onset = k;
    }
    if (onset < 0 || onset >= trough) return {false, fmt("elastic unloading never starts before step %d", trough)};

    double xi_drift = 0.0, unload_defect = 0.0, hysteresis = 0.0;
    std::vector<double> slope(static_cast<std::size_t>(ops.pair_count()), NAN);
    std::vector<double> slope_jump(static_cast<std::size_t>(ops.pair_count()), 0.0);
    for (int k = onset; k <= n; ++k) {
        for (Index j : active) xi_drift = std::max(xi_drift, std::abs(tr.history[k][j] - tr.history[onset][j]));
        const TractionField f = traction_extraction(*tr.snapshot_at(k), tr.tau, ops, s.law);
        const Vector jumps = ops.jump_of(tr.snapshot_at(k)->u);
        for (Index j : active) {
            const double xi = tr.history[k][j];
            // unloading stiffness of G (w/xc)(2 - w/xc): psi_hat'(xi)/xi = (2G/xc)(1 - xi/xc)/xi
            const double c = 2.0 * 0.1 / 1.0 * (1.0 - xi / 1.0) / xi;
            if (k <= trough) {
                unload_defect = std::max(unload_defect, std::abs(f.sigma_plus[j] - c * jumps[j]));
                // line measured on the unloading branch, at the largest opening seen there
                if (std::abs(jumps[j]) > slope_jump[j]) {
                    slope_jump[j] = std::abs(jumps[j]);
                    slope[j] = f.sigma_plus[j] / jumps[j];
                }
            } else {
                hysteresis = std::max(hysteresis, std::abs(f.sigma_plus[j] - slope[j] * jumps[j]));
            }
        }
    }
    const bool ok = xi_drift == 0.0 && unload_defect <= 10.0 * tol && hysteresis <= 10.0 * tol;
    return {ok, fmt("%zu active pairs, unloading from step %d (peak %d), xi drift %.1e, traction defect %.2e, "
                    "reload hysteresis %.2e",
                    active.size(), onset, peak, xi_drift, unload_defect, hysteresis)};
}

Outcome traction_bounds()
{
    const Scenario s = standard_scenario(200);
    const PreparedScenario prep(s);
    const TrajectoryRecord tr = run(prep);
    double peak = 0.0, transmission = 0.0;
    for (const Snapshot& snap : tr.snapshots) {
        if (snap.k == 0) continue;
        const TractionField f = traction_extraction(snap, tr.tau, prep.ops, s.law);
        peak = std::max(peak, f.max_abs_traction());
        transmission = std::max(transmission, f.max_transmission_defect());
    }
    const double cap = s.law.constants.psi_prime_0;
    return {peak <= cap * (1.0 + 1e-8) && transmission <= 10.0 * s.solver.tol,
            fmt("max |sigma nu| %.6f (psi_hat'(0) = %g), max transmission defect %.2e", peak, cap, transmission)};
}

Outcome eps_continuation_monotone()
{
    const Scenario s = standard_scenario(200);
    const ContinuationResult r = eps_continuation(s, {1e-1, 1e-2, 1e-3, 1e-4}, 4);
    for (const auto& e : r.entries)
        if (!e.error.empty()) return {false, "run failed: " + e.error};
    bool ok = true;
    for (std::size_t i = 1; i < r.distances.size(); ++i) ok = ok && r.distances[i] < r.distances[i - 1];
    return {ok, fmt("d = %.4e %.4e %.4e", r.distances[0], r.distances[1], r.distances[2])};
}

Outcome regularity_bounds()
{
    auto norms = [](int n, double eps) {
        Scenario s(build_rectangle_mesh(1.0, 16, 8), CohesiveLaw(Envelope::prototype(0.1, 1.0)));
        s.steps = n;
        s.eps_bar = eps;
        s.regularity_mode = true;
        s.w0 = Vector::Zero(s.mesh.node_count());
        s.loads.bulk = ramp_load(4.0);
        return regularity_norms(run(s));
    };
    const RegularityNorms base = norms(200, 1e-3), tau_half = norms(400, 1e-3), eps_half = norms(200, 5e-4);
    auto variation = [](double a, double b) { return std::abs(a - b) / std::max(a, b); };
    const double worst = std::max({variation(base.velocity_h1, tau_half.velocity_h1),
                                   variation(base.acceleration_l2, tau_half.acceleration_l2),
                                   variation(base.velocity_h1, eps_half.velocity_h1),
                                   variation(base.acceleration_l2, eps_half.acceleration_l2)});
    return {worst <= 0.2 && std::isfinite(base.acceleration_l2),
            fmt("sup||v||_H1 %.4f/%.4f/%.4f, sup||a||_L2 %.4f/%.4f/%.4f (base/tau/2/eps/2), max variation %.2f%%",
                base.velocity_h1, tau_half.velocity_h1, eps_half.velocity_h1, base.acceleration_l2,
                tau_half.acceleration_l2, eps_half.acceleration_l2, 100.0 * worst)};
}

double reported_margin(double length)
{
    const nlohmann::json doc = {
        {"mesh", {{"type", "rectangle"}, {"length", length}, {"half_height", length}, {"n_x", 16}, {"n_y", 8}}},
        {"materials", {{"rho", 1.0}, {"mu", 1.0}, {"eta", 1.0}}},
        {"law", {{"kind", "prototype"}, {"g_c", 1.0}, {"xi_c", 1.0}}},
        {"time", {{"T", 1.0}, {"n", 100}}}};
    const auto path = std::filesystem::temp_directory_path() / fmt("cohesim_margin_%g.json", length);
    std::ofstream(path) << doc.dump();
    const std::string p = path.string();
    const char* argv[] = {"cohesim", "check-law", p.c_str()};
    std::ostringstream out, err;
    if (cli_main(3, argv, out, err) != 0) throw std::runtime_error("check-law failed: " + err.str());
    const std::string text = out.str();
    const auto at = text.find("H4 margin: ");
    if (at == std::string::npos) throw std::runtime_error("check-law printed no margin");
    return std::stod(text.substr(at + 11));
}

Outcome trace_scaling()
{
    auto c_of = [](double l) { return trace_constant(assemble(build_rectangle_mesh(RectangleSpec{l, l, 16, 8}), {})); };
    const double c1 = c_of(1.0);
    double worst = 0.0;
    for (double l : {0.5, 2.0}) worst = std::max(worst, std::abs(c_of(l) * l / c1 - 1.0));
    const double small = reported_margin(0.1), large = reported_margin(1.0);
    return {worst <= 0.05 && small > 0.0 && large < 0.0,
            fmt("c_h(1) = %.6f, max |l c_h(l)/c_h(1) - 1| = %.2e, check-law margin %.4f (l = 0.1) and %.4f (l = 1)",
                c1, worst, small, large)};
}

}  // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"cohesive-law derivatives", derivative_suite},
        {"lambda-convexity", lambda_convexity},
        {"step solver vs oracle", step_oracle},
        {"discrete KKT exactness", kkt_exactness},
        {"energy identity", energy_identity},
        {"elastic unloading", elastic_unloading},
        {"traction bound and transmission", traction_bounds},
        {"eps-continuation", eps_continuation_monotone},
        {"higher-regularity bounds", regularity_bounds},
        {"trace-constant scaling", trace_scaling},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::cout << "criterion " << i + 1 << " (" << criteria[i].first << "): " << (o.pass ? "PASS" : "FAIL") << " - "
                  << o.detail << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : fmt("%d criteria failed", failed)) << std::endl;
    return failed;
}
