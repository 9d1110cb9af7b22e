#pragma once

// Shared test utilities: a portable deterministic RNG and independent oracles
// (finite-difference Jacobian, 2x2 eigenvalues) used to check closed forms.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <utility>

#include "cytodyn/model.hpp"

namespace testsup {

// splitmix64: identical sequences on every platform, unlike <random>
// distributions.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  private:
    std::uint64_t state_;
};

/// Central-difference Jacobian of the unforced vector field at a point.
/// Exact up to rounding for this quadratic right-hand side.
inline std::array<double, 4> numeric_jacobian(const cytodyn::ModelParams& p,
                                              const cytodyn::State& at) {
    cytodyn::ModelParams q = p;
    q.V = 0.0;
    auto f = [&q](double x, double y) { return cytodyn::rhs_forced({x, y}, q, 0.0); };
    const double hx = 1e-6 * std::max(1.0, std::abs(at.x));
    const double hy = 1e-6 * std::max(1.0, std::abs(at.y));
    const cytodyn::State fxp = f(at.x + hx, at.y), fxm = f(at.x - hx, at.y);
    const cytodyn::State fyp = f(at.x, at.y + hy), fym = f(at.x, at.y - hy);
    return {(fxp.x - fxm.x) / (2.0 * hx), (fyp.x - fym.x) / (2.0 * hy),
            (fxp.y - fxm.y) / (2.0 * hx), (fyp.y - fym.y) / (2.0 * hy)};
}

/// Eigenvalues of [[a, b], [c, d]] as a complex pair, larger real part first.
inline std::pair<std::complex<double>, std::complex<double>> eig2(
    const std::array<double, 4>& m) {
    const double tr = m[0] + m[3];
    const double det = m[0] * m[3] - m[1] * m[2];
    const double disc = tr * tr / 4.0 - det;
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        return {std::complex<double>(tr / 2.0 + s, 0.0), std::complex<double>(tr / 2.0 - s, 0.0)};
    }
    const double s = std::sqrt(-disc);
    return {std::complex<double>(tr / 2.0, s), std::complex<double>(tr / 2.0, -s)};
}

}  // namespace testsup
