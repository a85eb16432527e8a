#pragma once

#include <string>
#include <vector>

namespace cohesim {

/// Samples of a C2 envelope on [0, xi_c]: opening, value, slope, curvature.
struct EnvelopeSamples {
    std::vector<double> w;
    std::vector<double> psi;
    std::vector<double> dpsi;
    std::vector<double> d2psi;
};

/// The opening envelope psi_hat : [0, inf) -> [0, inf).
///
/// Concave, zero at the origin, strictly increasing up to the critical
/// opening xi_c and constant afterwards. Two representations exist:
///
///  - Prototype: psi_hat(w) = G_c (w/xi_c)(2 - w/xi_c) on [0, xi_c], G_c beyond.
///  - Tabulated: psi_hat' is a monotone cubic Hermite interpolant of the
///    sampled (slope, curvature) pairs and psi_hat is its exact integral,
///    so the envelope stays C2 on [0, xi_c] and all hypothesis checks are
///    made against the interpolant that is actually evaluated.
///
/// Construction validates (H1)-(H2) and throws ValidationError naming the
/// violated hypothesis.
class Envelope {
public:
    enum class Kind { Prototype, Tabulated };

    static Envelope prototype(double g_c, double xi_c);
    static Envelope tabulated(EnvelopeSamples samples);

    Kind kind() const noexcept { return kind_; }
    double critical_opening() const noexcept { return xi_c_; }
    /// psi_hat(xi_c), the fracture energy.
    double cap() const noexcept { return cap_; }
    double fracture_energy() const noexcept { return cap_; }

    /// psi_hat(w) for w >= 0.
    double value(double w) const;
    /// psi_hat'(w) for w >= 0; zero beyond xi_c.
    double slope(double w) const;
    /// psi_hat''(w) for w >= 0; zero beyond xi_c.
    double curvature(double w) const;

    /// Interpolation grid (prototype: {0, xi_c}).
    const std::vector<double>& grid() const noexcept { return grid_; }
    const EnvelopeSamples& samples() const noexcept { return samples_; }

private:
    Envelope() = default;
    void locate(double w, std::size_t& interval, double& t) const;

    Kind kind_ = Kind::Prototype;
    double g_c_ = 0.0;
    double xi_c_ = 0.0;
    double cap_ = 0.0;
    // Tabulated representation.
    std::vector<double> grid_;
    std::vector<double> slope_;      // psi_hat' at nodes
    std::vector<double> curvature_;  // limited psi_hat'' at nodes (Hermite tangents)
    std::vector<double> value_;      // integrated psi_hat at nodes
    EnvelopeSamples samples_;
};

/// Derived constants of a validated envelope.
struct LawConstants {
    /// beta = -min psi_hat'' over [0, xi_c]; strictly positive.
    double beta = 0.0;
    /// psi_hat'(0), the activation threshold.
    double psi_prime_0 = 0.0;
    /// Convexity defect of w -> psi(w, xi): psi + (beta/2) w^2 is convex, so lambda = -beta/2.
    double lambda_conv = 0.0;
    /// (H3): psi_hat' concave on [0, xi_c].
    bool h3_holds = false;
};

LawConstants law_constants(const Envelope& env);

/// Envelope bundled with its cached constants. Immutable, shareable across threads.
struct CohesiveLaw {
    explicit CohesiveLaw(Envelope env);

    Envelope envelope;
    LawConstants constants;
};

/// Cohesive density psi(w, xi): psi_hat(|w|) outside the cone |w| < xi,
/// elastic unloading parabola inside it. Throws DomainError for xi < 0.
double psi_value(double w, double xi, const Envelope& env);

/// Partial derivative in w. Undefined at (0, 0): throws DomainError, use
/// dpsi_dw_directional there. On the cone boundary |w| = xi the elastic
/// branch is used (both branches agree).
double dpsi_dw(double w, double xi, const Envelope& env);

/// Directional derivative in w along phi. At the origin this is
/// psi_hat'(0)|phi|; elsewhere dpsi_dw * phi.
double dpsi_dw_directional(double w, double xi, double phi, const Envelope& env);

/// Right derivative in xi (the history variable only grows). Zero outside
/// the cone, on its boundary and for xi >= xi_c; psi_hat'(0)/2 at the origin.
double dpsi_dxi(double w, double xi, const Envelope& env);

/// c_xi = psi_hat'(xi) / xi, the unloading stiffness. Requires xi > 0.
double unloading_stiffness(double xi, const Envelope& env);

struct EnergySplit {
    double stored = 0.0;
    double dissipated = 0.0;
};

/// psi = psi_s + psi_d with psi_d(xi) = psi(0, xi).
EnergySplit split(double w, double xi, const Envelope& env);

/// Generalized second derivative used by the Newton solver: c_xi on the
/// elastic branch (|w| <= xi), max(psi_hat''(|w|), 0) on the softening branch.
double generalized_stiffness(double w, double xi, const Envelope& env);

}  // namespace cohesim
