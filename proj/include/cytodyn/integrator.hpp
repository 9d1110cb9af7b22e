#pragma once

// Adaptive embedded Runge-Kutta 5(4) integration (Dormand-Prince pair) of the
// forced planar system and the autonomous 4-D system. Dense output samples on
// a uniform tau grid via cubic Hermite interpolation of accepted steps.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "cytodyn/model.hpp"

namespace cytodyn {

struct IntegrationConfig {
    double rel_tol = 1e-9;    ///< relative local-error tolerance
    double abs_tol = 1e-12;   ///< absolute local-error tolerance
    double max_step = 0.5;    ///< largest accepted step
    double t_end = 200.0;     ///< final tau
    double sample_dt = 0.01;  ///< output sampling interval
    double escape_x = 1e3;    ///< blow-up guard: terminate once x crosses this

    void validate() const {
        auto pos = [](double v) { return v > 0.0 && std::isfinite(v); };
        if (!pos(rel_tol) || !pos(abs_tol))
            throw std::invalid_argument("IntegrationConfig: tolerances must be positive");
        if (!pos(max_step) || !pos(t_end) || !pos(sample_dt) || !pos(escape_x))
            throw std::invalid_argument(
                "IntegrationConfig: max_step, t_end, sample_dt, escape_x must be positive");
    }
};

enum class TerminationKind {
    completed,  ///< reached t_end
    escaped,    ///< x crossed escape_x at tau (blow-up is a classified outcome)
    event,      ///< stopped by a labelled event
    failed,     ///< step-size underflow; trajectory holds the last good state
};

struct Termination {
    TerminationKind kind = TerminationKind::completed;
    double tau = 0.0;
    std::string label;
};

/// Time-ordered samples at tau = n * sample_dt plus the terminal point.
/// u and z are populated only by autonomous runs.
struct Trajectory {
    std::vector<double> tau;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> u;
    std::vector<double> z;
    Termination termination;

    /// Max deviation of u^2 + (z/beta)^2 from 1 over accepted steps
    /// (autonomous runs with beta > 0 only).
    double oscillator_deviation = 0.0;

    bool autonomous() const { return !u.empty(); }
    std::size_t size() const { return tau.size(); }
};

/// Integrate the forced planar system from s0 (requires s0.x >= 0).
Trajectory integrate_forced(const State& s0, const ModelParams& p, const IntegrationConfig& cfg);

/// Integrate the autonomous 4-D system from s0.
Trajectory integrate_autonomous(const ExtendedState& s0, const ModelParams& p,
                                const IntegrationConfig& cfg);

/// Integrate with dose V until off_at, then continue the same trajectory with
/// V = 0. Requires 0 < off_at < cfg.t_end.
Trajectory integrate_schedule(const State& s0, const ModelParams& p, const IntegrationConfig& cfg,
                              double off_at);

/// CSV emitter: header `tau,x,y` (forced) or `tau,x,y,u,z` (autonomous), one
/// row per sample, 15 significant digits.
void write_csv(const Trajectory& traj, std::ostream& os);

}  // namespace cytodyn
