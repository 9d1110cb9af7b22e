#pragma once

// Tumor-lymphocyte interaction model with periodic cytokine dosing.
//
// Dimensional form:
//   dX/dt = a X - b X Y
//   dY/dt = d X Y - f Y - K X + u + F cos^2(omega t)
//
// Rescaled form (t = t0 tau, X = Xp x, Y = Yp y):
//   dx/dtau = alpha x - x y
//   dy/dtau = x y - y/alpha - k x + sigma + V cos^2(beta tau)
//
// The forcing can be replaced by a harmonic oscillator (u, z), turning the
// system into an autonomous 4-D one with V u^2 in place of V cos^2(beta tau).

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace cytodyn {

/// Raw coefficients of the dimensional model.
struct DimensionalParams {
    double a;      ///< tumor growth rate [1/time]
    double b;      ///< lymphocyte attack coefficient [1/(cells*time)]
    double d;      ///< lymphocyte recognition/stimulation coefficient [1/(cells*time)]
    double f;      ///< lymphocyte natural death rate [1/time]
    double K;      ///< tumor-size suppression of lymphocytes [1/time]
    double u;      ///< constant lymphocyte influx [cells/time]
    double F;      ///< cytokine dose amplitude [cells/time]
    double omega;  ///< dosing angular frequency [1/time]

    void validate() const {
        auto bad = [](double v) { return !(v > 0.0) || !std::isfinite(v); };
        if (bad(a) || bad(b) || bad(d) || bad(f))
            throw std::invalid_argument("DimensionalParams: a, b, d, f must be positive and finite");
        auto neg = [](double v) { return v < 0.0 || !std::isfinite(v); };
        if (neg(K) || neg(u) || neg(F) || neg(omega))
            throw std::invalid_argument("DimensionalParams: K, u, F, omega must be non-negative and finite");
    }
};

/// Characteristic scales used by the nondimensionalization.
struct Scales {
    double t0;  ///< time scale, 1/sqrt(a f)
    double Xp;  ///< tumor-population scale, sqrt(a f)/d
    double Yp;  ///< lymphocyte-population scale, sqrt(a f)/b
};

/// Dimensionless parameters of the rescaled system.
struct ModelParams {
    double alpha;  ///< growth ratio sqrt(a/f)
    double k;      ///< tumor aggressiveness K b / (d sqrt(a f))
    double sigma;  ///< lymphocyte influx u b / (a f)
    double V;      ///< effective dose amplitude F b / (a f)
    double beta;   ///< dosing frequency omega / sqrt(a f)

    void validate() const {
        if (!(alpha > 0.0) || !std::isfinite(alpha))
            throw std::invalid_argument("ModelParams: alpha must be positive and finite");
        auto neg = [](double v) { return v < 0.0 || !std::isfinite(v); };
        if (neg(k) || neg(sigma) || neg(V) || neg(beta))
            throw std::invalid_argument("ModelParams: k, sigma, V, beta must be non-negative and finite");
    }
};

/// Rescaled planar state: malignant cells x, lymphocytes y.
struct State {
    double x;
    double y;
};

/// State of the autonomous 4-D reformulation. (u, z) start at (1, 0) so that
/// u(tau) = cos(beta tau) and u^2 + (z/beta)^2 = 1 is conserved for beta > 0.
struct ExtendedState {
    double x;
    double y;
    double u;  ///< oscillator displacement, stands in for cos(beta tau)
    double z;  ///< oscillator velocity
};

/// x-coordinate of the coexistence fixed point L1. Shared by the potential
/// extremum x2 and fixed_points so the two agree exactly.
inline double coexistence_x(const ModelParams& p) {
    return (1.0 - p.sigma) / (p.alpha - p.k);
}

/// Nondimensionalize. Throws std::invalid_argument on non-positive a, b, d, f.
inline std::pair<ModelParams, Scales> rescale(const DimensionalParams& p) {
    p.validate();
    const double root_af = std::sqrt(p.a * p.f);
    ModelParams m;
    m.alpha = std::sqrt(p.a / p.f);
    m.k = p.K * p.b / (p.d * root_af);
    m.sigma = p.u * p.b / (p.a * p.f);
    m.V = p.F * p.b / (p.a * p.f);
    m.beta = p.omega / root_af;
    const Scales s{1.0 / root_af, root_af / p.d, root_af / p.b};
    return {m, s};
}

/// Right-hand side of the forced planar system at time tau.
inline State rhs_forced(const State& s, const ModelParams& p, double tau) {
    const double c = std::cos(p.beta * tau);
    return {p.alpha * s.x - s.x * s.y,
            s.x * s.y - s.y / p.alpha - p.k * s.x + p.sigma + p.V * c * c};
}

/// Right-hand side of the autonomous 4-D system.
inline ExtendedState rhs_autonomous(const ExtendedState& s, const ModelParams& p) {
    return {p.alpha * s.x - s.x * s.y,
            s.x * s.y - s.y / p.alpha - p.k * s.x + p.sigma + p.V * s.u * s.u,
            s.z,
            -p.beta * p.beta * s.u};
}

/// Potential of the mechanical analogue: the unforced system reduces to a
/// particle with state-dependent damping in
///   U(x) = -(1/3)(k - alpha) x^3 - (1/2)(1 - sigma) x^2,  U(0) = 0.
inline double potential(double x, const ModelParams& p) {
    return -(p.k - p.alpha) * x * x * x / 3.0 - (1.0 - p.sigma) * x * x / 2.0;
}

enum class ExtremumKind { minimum, maximum, degenerate };

inline std::string to_string(ExtremumKind k) {
    switch (k) {
        case ExtremumKind::minimum: return "minimum";
        case ExtremumKind::maximum: return "maximum";
        default: return "degenerate";
    }
}

/// Extrema of U(x): x1 = 0 and x2 = (sigma - 1)/(k - alpha), which coincides
/// with the x-coordinate of L1.
struct PotentialShape {
    double x1;
    double x2;
    ExtremumKind kind1;
    ExtremumKind kind2;
};

/// Locate and classify the two extrema of the potential.
/// Throws std::domain_error when k == alpha (cubic term vanishes).
inline PotentialShape potential_extrema(const ModelParams& p) {
    if (p.k == p.alpha)
        throw std::domain_error("potential_extrema: degenerate cubic (k == alpha)");
    PotentialShape shape;
    shape.x1 = 0.0;
    shape.x2 = coexistence_x(p);
    // U''(0) = sigma - 1; the sign flips at the other extremum of a cubic.
    if (p.sigma < 1.0) {
        shape.kind1 = ExtremumKind::maximum;
        shape.kind2 = ExtremumKind::minimum;
    } else if (p.sigma > 1.0) {
        shape.kind1 = ExtremumKind::minimum;
        shape.kind2 = ExtremumKind::maximum;
    } else {
        shape.kind1 = ExtremumKind::degenerate;
        shape.kind2 = ExtremumKind::degenerate;
    }
    return shape;
}

}  // namespace cytodyn
