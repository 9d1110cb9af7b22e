#pragma once

// (V, beta) parameter-plane exploration: grid classification of tumor growth,
// threshold-boundary extraction, and least-squares fitting of the hyperbolic
// threshold curve V(beta) = A + B/(C + beta)^p.

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

#include "cytodyn/analysis.hpp"

namespace cytodyn {

struct AxisSpec {
    double min = 0.0;
    double max = 0.0;
    std::size_t n = 2;

    std::vector<double> values() const;
    void validate(const char* name) const;
};

struct SweepSpec {
    ModelParams base;  ///< V and beta are overridden per cell
    State s0;          ///< fixed initial condition, recorded with the sweep
    AxisSpec v_range;
    AxisSpec beta_range;
    IntegrationConfig integration;
    GrowthConfig growth;

    void validate() const;
};

enum class CellOutcome { controllable, uncontrollable, failed };

std::string to_string(CellOutcome o);

struct SweepGrid {
    std::vector<double> v_values;
    std::vector<double> beta_values;
    /// Row-major over (i_V, j_beta): index = i_V * beta_values.size() + j_beta.
    std::vector<CellOutcome> cells;
    std::vector<GrowthVerdict> verdicts;  ///< parallel to cells; meaningful unless failed

    std::size_t index(std::size_t i_v, std::size_t j_beta) const {
        return i_v * beta_values.size() + j_beta;
    }
    CellOutcome cell(std::size_t i_v, std::size_t j_beta) const {
        return cells[index(i_v, j_beta)];
    }
};

/// Classify every (V, beta) cell by integrating the forced system from s0.
/// Cells are independent; results are deterministic and identical for any
/// worker count. jobs == 0 uses the available hardware parallelism.
SweepGrid run_sweep(const SweepSpec& spec, unsigned jobs = 0);

struct BoundaryPoint {
    double beta;
    double v_threshold;
    /// False when the column re-enters uncontrollable growth above the first
    /// transition (the threshold then marks the first transition).
    bool monotone;
};

/// Per-beta dose thresholds: the midpoint of the first uncontrollable-to-
/// controllable transition walking up in V. Columns without such a transition
/// contribute nothing; a single-verdict grid yields an empty boundary.
std::vector<BoundaryPoint> extract_boundary(const SweepGrid& grid);

struct ThresholdFit {
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
    double p = 1.0;
    double rss = 0.0;
    bool converged = false;
};

struct FitOptions {
    std::size_t max_iter = 4000;  ///< Nelder-Mead iterations per start
    int polish_rounds = 3;        ///< simplex restarts around the best vertex
    /// When set, receives the best objective value after every accepted
    /// iteration of the winning start (never increasing).
    std::vector<double>* trace = nullptr;
};

/// Fit V(beta) = A + B/(C + beta)^p to (beta, V) points by multi-start
/// Nelder-Mead. Requires >= 6 points with distinct beta. A non-converged fit
/// carries the best parameters found.
ThresholdFit fit_threshold(const std::vector<std::pair<double, double>>& points,
                           const FitOptions& opts = {});

/// CSV with columns `V,beta,outcome`, V-major order.
void write_grid_csv(const SweepGrid& grid, std::ostream& os);

/// CSV with columns `beta,V_threshold,monotone`.
void write_boundary_csv(const std::vector<BoundaryPoint>& boundary, std::ostream& os);

}  // namespace cytodyn
