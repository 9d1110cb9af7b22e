#include "cytodyn/stability.hpp"

#include <algorithm>
#include <cmath>

namespace cytodyn {

std::string to_string(StabilityClass klass) {
    switch (klass) {
        case StabilityClass::saddle: return "saddle";
        case StabilityClass::stable_node: return "stable_node";
        case StabilityClass::stable_focus: return "stable_focus";
        case StabilityClass::unstable_node: return "unstable_node";
        case StabilityClass::unstable_focus: return "unstable_focus";
        case StabilityClass::center_candidate: return "center_candidate";
        case StabilityClass::non_physical: return "non_physical";
        default: return "degenerate";
    }
}

FixedPoints fixed_points(const ModelParams& p) {
    p.validate();
    FixedPoints fp;
    fp.L0 = State{0.0, p.alpha * p.sigma};
    if (p.k != p.alpha)
        fp.L1 = State{coexistence_x(p), p.alpha};
    return fp;
}

std::pair<double, double> eigenvalues_L0(const ModelParams& p) {
    p.validate();
    // Jacobian at L0 is triangular with diagonal {alpha(1 - sigma), -1/alpha}.
    const double lam_a = p.alpha * (1.0 - p.sigma);
    const double lam_b = -1.0 / p.alpha;
    return {std::max(lam_a, lam_b), std::min(lam_a, lam_b)};
}

std::pair<std::complex<double>, std::complex<double>> eigenvalues_L1(const ModelParams& p) {
    p.validate();
    if (p.k == p.alpha)
        throw std::domain_error("eigenvalues_L1: degenerate (k == alpha)");
    const double T = (p.k - p.alpha * p.sigma) / (2.0 * p.alpha * (p.alpha - p.k));
    const double disc = T * T - (1.0 - p.sigma);
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        return {std::complex<double>(T + s, 0.0), std::complex<double>(T - s, 0.0)};
    }
    const double s = std::sqrt(-disc);
    return {std::complex<double>(T, s), std::complex<double>(T, -s)};
}

std::optional<std::pair<double, double>> sigma_critical(const ModelParams& p) {
    p.validate();
    const double ratio = p.k / p.alpha;
    const double w = p.alpha - p.k;
    const double disc = w * w - ratio + 1.0;
    if (!(disc > 0.0))
        return std::nullopt;
    const double centre = ratio - 2.0 * w * w;
    const double spread = 2.0 * std::abs(w) * std::sqrt(disc);
    return std::make_pair(centre - spread, centre + spread);
}

namespace {

StabilityClass classify_pair(const std::complex<double>& lp, const std::complex<double>& lm) {
    if (lp.imag() != 0.0) {
        const double re = lp.real();
        if (std::abs(re) < kMarginalTol) return StabilityClass::center_candidate;
        return re < 0.0 ? StabilityClass::stable_focus : StabilityClass::unstable_focus;
    }
    double a = lp.real();
    double b = lm.real();
    if (std::abs(a) < kMarginalTol) a = 0.0;
    if (std::abs(b) < kMarginalTol) b = 0.0;
    if (a == 0.0 || b == 0.0) return StabilityClass::degenerate;
    if (a * b < 0.0) return StabilityClass::saddle;
    return a < 0.0 ? StabilityClass::stable_node : StabilityClass::unstable_node;
}

bool in_closed_first_orthant(const std::vector<double>& loc) {
    return std::all_of(loc.begin(), loc.end(), [](double v) { return v >= 0.0; });
}

}  // namespace

std::vector<FixedPointReport> classify(const ModelParams& p) {
    const FixedPoints fp = fixed_points(p);
    std::vector<FixedPointReport> reports;

    FixedPointReport r0;
    r0.name = "L0";
    r0.location = {fp.L0.x, fp.L0.y};
    const auto [l0p, l0m] = eigenvalues_L0(p);
    r0.eigenvalues = {{l0p, 0.0}, {l0m, 0.0}};
    r0.klass = classify_pair(r0.eigenvalues[0], r0.eigenvalues[1]);
    r0.physical = in_closed_first_orthant(r0.location);
    reports.push_back(std::move(r0));

    FixedPointReport r1;
    r1.name = "L1";
    if (fp.L1) {
        r1.location = {fp.L1->x, fp.L1->y};
        const auto [l1p, l1m] = eigenvalues_L1(p);
        r1.eigenvalues = {l1p, l1m};
        r1.klass = classify_pair(l1p, l1m);
        r1.physical = in_closed_first_orthant(r1.location);
    } else {
        r1.klass = StabilityClass::degenerate;  // k == alpha, no coexistence point
        r1.physical = false;
    }
    reports.push_back(std::move(r1));
    return reports;
}

std::vector<FixedPointReport> extended_fixed_points(const ModelParams& p) {
    std::vector<FixedPointReport> reports = classify(p);
    for (auto& r : reports) {
        r.name += "*";
        if (r.location.empty())
            continue;
        r.location.push_back(0.0);
        r.location.push_back(0.0);
        r.eigenvalues.emplace_back(0.0, p.beta);
        r.eigenvalues.emplace_back(0.0, -p.beta);
        // The +-i beta pair puts both points on a center manifold; the planar
        // classification no longer carries an asymptotic claim.
        r.klass = StabilityClass::center_candidate;
    }
    return reports;
}

RegimeMap regime_map(double alpha, double sigma_min, double sigma_max, std::size_t n_sigma,
                     double ratio_min, double ratio_max, std::size_t n_ratio) {
    if (!(alpha > 0.0) || n_sigma < 2 || n_ratio < 2 || !(sigma_max >= sigma_min) ||
        !(ratio_max >= ratio_min) || sigma_min < 0.0 || ratio_min < 0.0)
        throw std::invalid_argument("regime_map: invalid grid specification");

    RegimeMap map;
    map.sigma_values.resize(n_sigma);
    map.k_over_alpha_values.resize(n_ratio);
    for (std::size_t i = 0; i < n_sigma; ++i)
        map.sigma_values[i] = sigma_min + (sigma_max - sigma_min) * static_cast<double>(i) /
                                              static_cast<double>(n_sigma - 1);
    for (std::size_t j = 0; j < n_ratio; ++j)
        map.k_over_alpha_values[j] = ratio_min + (ratio_max - ratio_min) * static_cast<double>(j) /
                                                     static_cast<double>(n_ratio - 1);

    map.l1_class.reserve(n_sigma * n_ratio);
    map.l1_physical.reserve(n_sigma * n_ratio);
    for (double sigma : map.sigma_values) {
        for (double ratio : map.k_over_alpha_values) {
            ModelParams p{alpha, ratio * alpha, sigma, 0.0, 0.0};
            const auto reports = classify(p);
            map.l1_class.push_back(reports[1].klass);
            map.l1_physical.push_back(reports[1].physical);
        }
    }
    return map;
}

}  // namespace cytodyn
