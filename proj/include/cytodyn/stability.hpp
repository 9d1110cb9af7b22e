#pragma once

// Closed-form fixed points and linear stability of the unforced system
//   dx/dtau = alpha x - x y
//   dy/dtau = x y - y/alpha - k x + sigma
// plus the lifted fixed points of the autonomous 4-D reformulation.

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cytodyn/model.hpp"

namespace cytodyn {

enum class StabilityClass {
    saddle,
    stable_node,
    stable_focus,
    unstable_node,
    unstable_focus,
    center_candidate,
    non_physical,
    degenerate,
};

std::string to_string(StabilityClass klass);

/// A real-part magnitude below this is treated as zero when classifying,
/// so parameter sets on the sigma = k/alpha line report a center rather
/// than an arbitrary focus orientation.
inline constexpr double kMarginalTol = 1e-12;

struct FixedPointReport {
    std::string name;                               ///< "L0", "L1", "L0*", "L1*"
    std::vector<double> location;                   ///< (x, y) or (x, y, u, z); empty when undefined
    std::vector<std::complex<double>> eigenvalues;  ///< empty when undefined
    StabilityClass klass = StabilityClass::degenerate;
    bool physical = false;  ///< location lies in the closed first quadrant/orthant
};

struct FixedPoints {
    State L0;
    std::optional<State> L1;  ///< nullopt when k == alpha (L1 escapes to infinity)
};

/// L0 = (0, alpha sigma); L1 = ((1 - sigma)/(alpha - k), alpha) unless k == alpha.
FixedPoints fixed_points(const ModelParams& p);

/// Eigenvalues at L0, returned as (lambda+, lambda-) = (alpha(1 - sigma), -1/alpha)
/// ordered so lambda+ >= lambda-. Always real.
std::pair<double, double> eigenvalues_L0(const ModelParams& p);

/// Eigenvalues at L1: T +- sqrt(T^2 - (1 - sigma)) with
/// T = (k - alpha sigma) / (2 alpha (alpha - k)).
/// Throws std::domain_error when k == alpha.
std::pair<std::complex<double>, std::complex<double>> eigenvalues_L1(const ModelParams& p);

/// Influx values at which the L1 eigenvalues transition between real and
/// complex (the discriminant of the L1 pair vanishes). Exists only when
/// (alpha - k)^2 - k/alpha > -1; returned as (smaller, larger).
std::optional<std::pair<double, double>> sigma_critical(const ModelParams& p);

/// Reports for L0 and L1. Degeneracies (k == alpha, sigma == 1) are reported
/// in the klass field, never thrown. Non-physical locations keep their math
/// and are flagged via `physical`.
std::vector<FixedPointReport> classify(const ModelParams& p);

/// Fixed points of the autonomous 4-D system: the planar points lifted with
/// (u, z) = (0, 0) and eigenvalues augmented by the pair +-i beta. Classified
/// as center-manifold candidates; no asymptotic claim is made.
std::vector<FixedPointReport> extended_fixed_points(const ModelParams& p);

/// Regime map over a (sigma, k/alpha) rectangle: the L1 class at each node,
/// one row per node with columns sigma, k_over_alpha, class, physical.
struct RegimeMap {
    std::vector<double> sigma_values;
    std::vector<double> k_over_alpha_values;
    std::vector<StabilityClass> l1_class;  ///< row-major, sigma outer
    std::vector<bool> l1_physical;
};

RegimeMap regime_map(double alpha, double sigma_min, double sigma_max, std::size_t n_sigma,
                     double ratio_min, double ratio_max, std::size_t n_ratio);

}  // namespace cytodyn
