#include "cohesim/cohesive_law.hpp"

#include "cohesim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cohesim {

namespace {

// Relative tolerances for validating tabulated data.
constexpr double kShapeTol = 1e-12;
constexpr double kIntegralTol = 1e-6;

double sign(double w) { return w > 0.0 ? 1.0 : (w < 0.0 ? -1.0 : 0.0); }

// Cubic Hermite basis and its derivative / antiderivative on [0, 1].
struct Hermite {
    double h00, h10, h01, h11;
};

Hermite basis(double t)
{
    const double t2 = t * t, t3 = t2 * t;
    return {2 * t3 - 3 * t2 + 1, t3 - 2 * t2 + t, -2 * t3 + 3 * t2, t3 - t2};
}

Hermite basis_derivative(double t)
{
    const double t2 = t * t;
    return {6 * t2 - 6 * t, 3 * t2 - 4 * t + 1, -6 * t2 + 6 * t, 3 * t2 - 2 * t};
}

Hermite basis_integral(double t)
{
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
    return {0.5 * t4 - t3 + t, 0.25 * t4 - 2.0 * t3 / 3.0 + 0.5 * t2, -0.5 * t4 + t3, 0.25 * t4 - t3 / 3.0};
}

[[noreturn]] void fail(const std::string& hypothesis, const std::string& detail)
{
    throw ValidationError(hypothesis + " violated: " + detail);
}

// Golden-section minimization of f on [a, b].
template <class F>
double golden_min(F&& f, double a, double b, double tol)
{
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return std::min({f(a), f(b), fc, fd});
}

}  // namespace

Envelope Envelope::prototype(double g_c, double xi_c)
{
    if (!(g_c > 0.0) || !std::isfinite(g_c)) fail("(H1)", "prototype requires G_c > 0");
    if (!(xi_c > 0.0) || !std::isfinite(xi_c)) fail("(H1)", "prototype requires xi_c > 0");
    Envelope env;
    env.kind_ = Kind::Prototype;
    env.g_c_ = g_c;
    env.xi_c_ = xi_c;
    env.cap_ = g_c;
    env.grid_ = {0.0, xi_c};
    env.samples_ = {{0.0, xi_c}, {0.0, g_c}, {2.0 * g_c / xi_c, 0.0}, {-2.0 * g_c / (xi_c * xi_c), -2.0 * g_c / (xi_c * xi_c)}};
    return env;
}

Envelope Envelope::tabulated(EnvelopeSamples s)
{
    const std::size_t n = s.w.size();
    if (n < 2) fail("(H2)", "tabulated envelope needs at least two samples");
    if (s.psi.size() != n || s.dpsi.size() != n || s.d2psi.size() != n)
        fail("(H2)", "tabulated arrays w, psi, dpsi, d2psi must have equal length");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(s.w[i]) || !std::isfinite(s.psi[i]) || !std::isfinite(s.dpsi[i]) || !std::isfinite(s.d2psi[i]))
            fail("(H2)", "tabulated envelope contains non-finite samples");
    }
    if (s.w.front() != 0.0) fail("(H1)", "tabulated grid must start at w = 0");
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!(s.w[i + 1] > s.w[i])) fail("(H2)", "tabulated grid must be strictly increasing");

    const double p0 = s.dpsi.front();
    if (!(p0 > 0.0)) fail("(H1)", "psi_hat'(0) must be positive");
    const double scale_val = std::max(std::abs(s.psi.back()), p0 * s.w.back());
    if (std::abs(s.psi.front()) > kShapeTol * scale_val) fail("(H1)", "psi_hat(0) != 0");
    for (std::size_t i = 0; i < n; ++i) {
        if (s.dpsi[i] < -kShapeTol * p0) fail("(H1)", "psi_hat must be nondecreasing (negative slope sample)");
        if (s.d2psi[i] > kShapeTol * p0 / s.w.back()) fail("(H1)", "psi_hat is not concave (positive curvature sample)");
        if (i + 1 < n && s.dpsi[i + 1] > s.dpsi[i] + kShapeTol * p0)
            fail("(H1)", "psi_hat is not concave (slope increases)");
    }
    if (std::abs(s.dpsi.back()) > 1e-9 * p0)
        fail("(H2)", "psi_hat'(xi_c) != 0, so psi_hat is not C1 where it becomes constant");

    Envelope env;
    env.kind_ = Kind::Tabulated;
    env.xi_c_ = s.w.back();
    env.grid_ = s.w;
    env.slope_ = s.dpsi;
    env.slope_.back() = 0.0;
    env.curvature_ = s.d2psi;
    for (double& d : env.curvature_) d = std::min(d, 0.0);

    // Fritsch-Carlson limiting keeps the slope interpolant nonincreasing.
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = env.grid_[i + 1] - env.grid_[i];
        const double secant = (env.slope_[i + 1] - env.slope_[i]) / h;
        if (secant == 0.0) {
            env.curvature_[i] = 0.0;
            env.curvature_[i + 1] = 0.0;
            continue;
        }
        const double a = env.curvature_[i] / secant;
        const double b = env.curvature_[i + 1] / secant;
        const double r2 = a * a + b * b;
        if (r2 > 9.0) {
            const double tau = 3.0 / std::sqrt(r2);
            env.curvature_[i] = tau * a * secant;
            env.curvature_[i + 1] = tau * b * secant;
        }
    }

    env.value_.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = env.grid_[i + 1] - env.grid_[i];
        env.value_[i + 1] = env.value_[i] + h * (0.5 * env.slope_[i] + h * env.curvature_[i] / 12.0 + 0.5 * env.slope_[i + 1] -
                                                 h * env.curvature_[i + 1] / 12.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(env.value_[i] - s.psi[i]) > kIntegralTol * scale_val) {
            std::ostringstream msg;
            msg << "tabulated psi_hat disagrees with the integral of psi_hat' at w = " << s.w[i] << " (" << s.psi[i]
                << " vs " << env.value_[i] << ")";
            fail("(H2)", msg.str());
        }
    }
    env.cap_ = env.value_.back();
    env.samples_ = std::move(s);
    return env;
}

void Envelope::locate(double w, std::size_t& interval, double& t) const
{
    auto it = std::upper_bound(grid_.begin(), grid_.end(), w);
    std::size_t i = it == grid_.begin() ? 0 : static_cast<std::size_t>(it - grid_.begin()) - 1;
    i = std::min(i, grid_.size() - 2);
    interval = i;
    t = (w - grid_[i]) / (grid_[i + 1] - grid_[i]);
}

double Envelope::value(double w) const
{
    if (w >= xi_c_) return cap_;
    if (kind_ == Kind::Prototype) {
        const double r = w / xi_c_;
        return g_c_ * r * (2.0 - r);
    }
    std::size_t i;
    double t;
    locate(w, i, t);
    const double h = grid_[i + 1] - grid_[i];
    const Hermite b = basis_integral(t);
    return value_[i] + h * (b.h00 * slope_[i] + b.h10 * h * curvature_[i] + b.h01 * slope_[i + 1] + b.h11 * h * curvature_[i + 1]);
}

double Envelope::slope(double w) const
{
    if (w > xi_c_) return 0.0;
    if (kind_ == Kind::Prototype) return 2.0 * (g_c_ / xi_c_) * (1.0 - w / xi_c_);
    std::size_t i;
    double t;
    locate(w, i, t);
    const double h = grid_[i + 1] - grid_[i];
    const Hermite b = basis(t);
    return b.h00 * slope_[i] + b.h10 * h * curvature_[i] + b.h01 * slope_[i + 1] + b.h11 * h * curvature_[i + 1];
}

double Envelope::curvature(double w) const
{
    if (w > xi_c_) return 0.0;
    if (kind_ == Kind::Prototype) return -2.0 * g_c_ / (xi_c_ * xi_c_);
    std::size_t i;
    double t;
    locate(w, i, t);
    const double h = grid_[i + 1] - grid_[i];
    const Hermite b = basis_derivative(t);
    return (b.h00 * slope_[i] + b.h10 * h * curvature_[i] + b.h01 * slope_[i + 1] + b.h11 * h * curvature_[i + 1]) / h;
}

LawConstants law_constants(const Envelope& env)
{
    LawConstants c;
    c.psi_prime_0 = env.slope(0.0);
    const double xi_c = env.critical_opening();

    if (env.kind() == Envelope::Kind::Prototype) {
        c.beta = 2.0 * env.fracture_energy() / (xi_c * xi_c);
        c.h3_holds = true;
    } else {
        const auto& grid = env.grid();
        double min_curv = env.curvature(0.0);
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            // Evaluate on the interior so each interval uses its own polynomial.
            const double a = grid[i], b = grid[i + 1];
            const double eps = 1e-12 * (b - a);
            min_curv = std::min(min_curv, golden_min([&](double w) { return env.curvature(w); }, a + eps, b - eps, 1e-10));
            min_curv = std::min({min_curv, env.curvature(a + eps), env.curvature(b - eps)});
        }
        min_curv = std::min(min_curv, env.curvature(xi_c));
        c.beta = -min_curv;

        // (H3): psi_hat'' nonincreasing, checked on a fine sampling of the interpolant.
        const double tol = 1e-9 * std::max(c.beta, 1e-300);
        c.h3_holds = true;
        double prev = env.curvature(0.0);
        for (std::size_t i = 0; i + 1 < grid.size() && c.h3_holds; ++i) {
            constexpr int kSub = 64;
            for (int k = 1; k <= kSub; ++k) {
                const double w = grid[i] + (grid[i + 1] - grid[i]) * k / kSub;
                const double cur = env.curvature(std::min(w, xi_c));
                if (cur > prev + tol) {
                    c.h3_holds = false;
                    break;
                }
                prev = cur;
            }
        }
    }
    if (!(c.beta > 0.0))
        fail("(H2)", "beta = -min psi_hat'' must be positive (a linear envelope cannot be C1 at xi_c)");
    c.lambda_conv = -0.5 * c.beta;
    return c;
}

CohesiveLaw::CohesiveLaw(Envelope env) : envelope(std::move(env)), constants(law_constants(envelope)) {}

double psi_value(double w, double xi, const Envelope& env)
{
    if (xi < 0.0 || std::isnan(xi)) throw DomainError("psi_value: history variable xi must be nonnegative");
    const double a = std::abs(w);
    if (a >= xi) return env.value(a);
    return env.value(xi) - env.slope(xi) * ((xi * xi - w * w) / (2.0 * xi));
}

double unloading_stiffness(double xi, const Envelope& env)
{
    if (!(xi > 0.0)) throw DomainError("unloading_stiffness: requires xi > 0");
    return env.slope(xi) / xi;
}

double dpsi_dw(double w, double xi, const Envelope& env)
{
    if (xi < 0.0 || std::isnan(xi)) throw DomainError("dpsi_dw: history variable xi must be nonnegative");
    if (w == 0.0 && xi == 0.0)
        throw DomainError("dpsi_dw: psi is not differentiable at (0, 0); use dpsi_dw_directional");
    const double a = std::abs(w);
    if (a <= xi) return (env.slope(xi) / xi) * w;
    return env.slope(a) * sign(w);
}

double dpsi_dw_directional(double w, double xi, double phi, const Envelope& env)
{
    if (w == 0.0 && xi == 0.0) return env.slope(0.0) * std::abs(phi);
    return dpsi_dw(w, xi, env) * phi;
}

double dpsi_dxi(double w, double xi, const Envelope& env)
{
    if (xi < 0.0 || std::isnan(xi)) throw DomainError("dpsi_dxi: history variable xi must be nonnegative");
    if (w == 0.0 && xi == 0.0) return 0.5 * env.slope(0.0);
    const double a = std::abs(w);
    if (a >= xi || xi >= env.critical_opening()) return 0.0;
    return -0.5 * (env.curvature(xi) * xi - env.slope(xi)) * ((xi * xi - w * w) / (xi * xi));
}

EnergySplit split(double w, double xi, const Envelope& env)
{
    EnergySplit s;
    s.dissipated = psi_value(0.0, xi, env);
    if (std::abs(w) < xi)
        s.stored = env.slope(xi) * w * w / (2.0 * xi);
    else
        s.stored = env.value(std::abs(w)) - s.dissipated;
    return s;
}

double generalized_stiffness(double w, double xi, const Envelope& env)
{
    const double a = std::abs(w);
    if (xi > 0.0 && a <= xi) return env.slope(xi) / xi;
    return std::max(env.curvature(a), 0.0);
}

}  // namespace cohesim
