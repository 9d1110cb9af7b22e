#include "cytodyn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace cytodyn {

namespace {

struct Peak {
    double tau;
    double value;
};

// Local maxima refined by the parabola through the three neighbouring samples.
std::vector<Peak> find_peaks(const std::vector<double>& tau, const std::vector<double>& x,
                             std::size_t begin) {
    std::vector<Peak> peaks;
    if (x.size() < 3) return peaks;
    for (std::size_t i = std::max<std::size_t>(begin, 1); i + 1 < x.size(); ++i) {
        if (!(x[i] > x[i - 1]) || !(x[i] > x[i + 1])) continue;
        const double t0 = tau[i - 1], t1 = tau[i], t2 = tau[i + 1];
        const double y0 = x[i - 1], y1 = x[i], y2 = x[i + 1];
        // Newton-form parabola through the three samples; copes with the
        // non-uniform terminal sample spacing.
        const double d01 = (y1 - y0) / (t1 - t0);
        const double d12 = (y2 - y1) / (t2 - t1);
        const double curv = (d12 - d01) / (t2 - t0);
        if (curv >= 0.0 || !std::isfinite(curv)) {
            peaks.push_back({t1, y1});
            continue;
        }
        const double tv = std::clamp(0.5 * (t0 + t1) - d01 / (2.0 * curv), t0, t2);
        const double pv = y0 + d01 * (tv - t0) + curv * (tv - t0) * (tv - t1);
        peaks.push_back({tv, pv});
    }
    return peaks;
}

std::size_t first_index_at(const std::vector<double>& tau, double t_from) {
    return static_cast<std::size_t>(
        std::lower_bound(tau.begin(), tau.end(), t_from) - tau.begin());
}

}  // namespace

std::string to_string(GrowthOutcome o) {
    switch (o) {
        case GrowthOutcome::controllable: return "controllable";
        case GrowthOutcome::uncontrollable: return "uncontrollable";
        default: return "immune_collapse";
    }
}

GrowthVerdict classify_growth(const Trajectory& traj, const GrowthConfig& cfg) {
    if (traj.size() < 3)
        throw std::invalid_argument("classify_growth: trajectory too short");
    if (traj.termination.kind == TerminationKind::failed)
        throw std::invalid_argument("classify_growth: integration failed, no verdict");

    const bool escaped = traj.termination.kind == TerminationKind::escaped;
    const double horizon = traj.tau.back();
    if (!escaped && horizon < cfg.min_horizon - 1e-9)
        throw std::invalid_argument("classify_growth: horizon shorter than min_horizon");

    GrowthVerdict v;
    v.horizon = horizon;
    v.bound_on_x = *std::max_element(traj.x.begin(), traj.x.end());
    v.y_min = *std::min_element(traj.y.begin(), traj.y.end());
    v.immune_collapse = v.y_min < 0.0;

    if (escaped) {
        v.outcome = GrowthOutcome::uncontrollable;
        v.escape_tau = traj.termination.tau;
        return v;
    }

    // Peak envelope over the last half of the horizon.
    const auto peaks = find_peaks(traj.tau, traj.x, first_index_at(traj.tau, 0.5 * horizon));
    bool growing = peaks.size() >= 2;
    for (std::size_t i = 0; growing && i + 1 < peaks.size(); ++i)
        growing = peaks[i + 1].value > peaks[i].value * (1.0 + cfg.peak_growth_tol);
    v.outcome = growing ? GrowthOutcome::uncontrollable : GrowthOutcome::controllable;
    return v;
}

CycleReport detect_cycle(const Trajectory& traj, const ModelParams& p) {
    CycleReport report;
    if (traj.size() < 4) return report;

    const std::size_t begin = first_index_at(traj.tau, traj.tau.back() * (2.0 / 3.0));
    if (begin + 3 >= traj.size()) return report;

    report.x_max = *std::max_element(traj.x.begin() + begin, traj.x.end());
    report.x_min = *std::min_element(traj.x.begin() + begin, traj.x.end());

    const double swing = report.x_max - report.x_min;
    if (!(swing > 1e-6 * std::max(1.0, std::abs(report.x_max))))
        return report;  // numerically flat signal

    const auto peaks = find_peaks(traj.tau, traj.x, begin);
    if (peaks.size() < 4) return report;  // need >= 3 intervals

    double iv_min = 1e300, iv_max = 0.0, iv_sum = 0.0;
    for (std::size_t i = 0; i + 1 < peaks.size(); ++i) {
        const double iv = peaks[i + 1].tau - peaks[i].tau;
        iv_min = std::min(iv_min, iv);
        iv_max = std::max(iv_max, iv);
        iv_sum += iv;
    }
    const double period = iv_sum / static_cast<double>(peaks.size() - 1);
    if (!(period > 0.0) || (iv_max - iv_min) / period >= 0.02)
        return report;  // intervals inconsistent

    // Stationarity: the peak envelope must be flat relative to the oscillation
    // swing, which rejects damped spirals whose intervals stay regular.
    double pv_min = 1e300, pv_max = -1e300;
    for (const auto& pk : peaks) {
        pv_min = std::min(pv_min, pk.value);
        pv_max = std::max(pv_max, pk.value);
    }
    if (pv_max - pv_min > 0.05 * swing)
        return report;

    report.found = true;
    report.period = period;
    report.lock_ratio = p.beta > 0.0 ? period * p.beta / M_PI : 0.0;
    return report;
}

RegrowthReport regrowth_experiment(const ModelParams& p, const State& s0, double off_at,
                                   const IntegrationConfig& cfg, const GrowthConfig& gcfg,
                                   double regrow_factor) {
    if (!(off_at > 0.0) || !(off_at <= cfg.t_end))
        throw std::invalid_argument("regrowth_experiment: off_at must lie in (0, t_end]");

    const Trajectory treated = integrate_forced(s0, p, cfg);
    const GrowthVerdict under_treatment = classify_growth(treated, gcfg);
    if (under_treatment.outcome != GrowthOutcome::controllable)
        throw std::domain_error("regrowth_experiment: treated run is not controllable");

    const Trajectory traj =
        off_at < cfg.t_end ? integrate_schedule(s0, p, cfg, off_at) : treated;

    RegrowthReport report;
    report.pre_min_x = 1e300;
    report.post_max_x = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (traj.tau[i] <= off_at)
            report.pre_min_x = std::min(report.pre_min_x, traj.x[i]);
        else
            report.post_max_x = std::max(report.post_max_x, traj.x[i]);
    }
    report.regrew = report.post_max_x > regrow_factor * report.pre_min_x;
    return report;
}

}  // namespace cytodyn
