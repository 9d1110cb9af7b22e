#pragma once

// Trajectory-level semantics: growth classification, limit-cycle detection,
// and the regrowth-after-interruption experiment.

#include <optional>
#include <string>

#include "cytodyn/integrator.hpp"

namespace cytodyn {

struct GrowthConfig {
    /// Minimum trajectory horizon (tau units) required for a verdict when the
    /// run completed without escaping.
    double min_horizon = 200.0;
    /// A peak counts as growing only if it exceeds its predecessor by this
    /// relative margin, so bounded oscillation is tolerated.
    double peak_growth_tol = 1e-6;
};

enum class GrowthOutcome { controllable, uncontrollable, immune_collapse };

std::string to_string(GrowthOutcome o);

struct GrowthVerdict {
    GrowthOutcome outcome;
    /// Lymphocytes driven below zero somewhere along the trajectory. Reported
    /// alongside the growth outcome rather than altering the dynamics.
    bool immune_collapse = false;
    double horizon = 0.0;
    std::optional<double> escape_tau;  ///< set when the escape guard fired
    double bound_on_x = 0.0;           ///< max x over the horizon
    double y_min = 0.0;                ///< min y over the horizon
};

/// Uncontrollable iff the escape guard fired or the envelope of x-peaks grows
/// monotonically over the last half of the horizon; controllable otherwise.
/// Throws std::invalid_argument when the trajectory is too short to judge.
GrowthVerdict classify_growth(const Trajectory& traj, const GrowthConfig& cfg = {});

struct CycleReport {
    bool found = false;
    double period = 0.0;
    double x_min = 0.0;
    double x_max = 0.0;
    /// period / (pi/beta): the forcing cos^2(beta tau) has fundamental period
    /// pi/beta. Zero when beta == 0.
    double lock_ratio = 0.0;
};

/// Estimate the period of a sustained oscillation of x from the last third of
/// the trajectory. Requires at least 3 consistent inter-peak intervals
/// (relative spread < 2%) with a stationary peak envelope.
CycleReport detect_cycle(const Trajectory& traj, const ModelParams& p);

struct RegrowthReport {
    double pre_min_x = 0.0;   ///< min x while the dose was on
    double post_max_x = 0.0;  ///< max x after interruption
    bool regrew = false;      ///< post_max_x > factor * pre_min_x
};

/// Interrupt treatment at off_at and look for regrowth. The treated run must
/// classify as controllable (std::domain_error otherwise). off_at == t_end is
/// allowed and yields regrew == false vacuously.
RegrowthReport regrowth_experiment(const ModelParams& p, const State& s0, double off_at,
                                   const IntegrationConfig& cfg, const GrowthConfig& gcfg = {},
                                   double regrow_factor = 10.0);

}  // namespace cytodyn
