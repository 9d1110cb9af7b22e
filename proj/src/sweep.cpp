#include "cytodyn/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>
#include <thread>

namespace cytodyn {

std::vector<double> AxisSpec::values() const {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = min + (max - min) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

void AxisSpec::validate(const char* name) const {
    if (n < 2 || !(max >= min) || !std::isfinite(min) || !std::isfinite(max))
        throw std::invalid_argument(std::string("AxisSpec ") + name +
                                    ": need n >= 2 and finite max >= min");
}

void SweepSpec::validate() const {
    base.validate();
    integration.validate();
    v_range.validate("v_range");
    beta_range.validate("beta_range");
    if (v_range.min < 0.0 || beta_range.min < 0.0)
        throw std::invalid_argument("SweepSpec: V and beta ranges must be non-negative");
    if (!(s0.x >= 0.0))
        throw std::invalid_argument("SweepSpec: s0.x must be >= 0");
    if (integration.t_end < growth.min_horizon)
        throw std::invalid_argument("SweepSpec: t_end shorter than the growth horizon");
}

std::string to_string(CellOutcome o) {
    switch (o) {
        case CellOutcome::controllable: return "controllable";
        case CellOutcome::uncontrollable: return "uncontrollable";
        default: return "failed";
    }
}

SweepGrid run_sweep(const SweepSpec& spec, unsigned jobs) {
    spec.validate();

    SweepGrid grid;
    grid.v_values = spec.v_range.values();
    grid.beta_values = spec.beta_range.values();
    const std::size_t n_cells = grid.v_values.size() * grid.beta_values.size();
    grid.cells.assign(n_cells, CellOutcome::failed);
    grid.verdicts.assign(n_cells, GrowthVerdict{});

    const std::size_t n_beta = grid.beta_values.size();
    auto work_cell = [&](std::size_t idx) {
        ModelParams p = spec.base;
        p.V = grid.v_values[idx / n_beta];
        p.beta = grid.beta_values[idx % n_beta];
        try {
            const Trajectory traj = integrate_forced(spec.s0, p, spec.integration);
            if (traj.termination.kind == TerminationKind::failed) {
                grid.cells[idx] = CellOutcome::failed;
                return;
            }
            const GrowthVerdict v = classify_growth(traj, spec.growth);
            grid.verdicts[idx] = v;
            grid.cells[idx] = v.outcome == GrowthOutcome::uncontrollable
                                  ? CellOutcome::uncontrollable
                                  : CellOutcome::controllable;
        } catch (const std::exception&) {
            grid.cells[idx] = CellOutcome::failed;
        }
    };

    unsigned n_workers = jobs != 0 ? jobs : std::max(1u, std::thread::hardware_concurrency());
    n_workers = static_cast<unsigned>(std::min<std::size_t>(n_workers, n_cells));
    if (n_workers <= 1) {
        for (std::size_t idx = 0; idx < n_cells; ++idx) work_cell(idx);
        return grid;
    }

    // Cells are pure and write only their own slot, so any schedule yields the
    // same grid.
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t idx = next.fetch_add(1); idx < n_cells; idx = next.fetch_add(1))
                work_cell(idx);
        });
    }
    for (auto& th : pool) th.join();
    return grid;
}

std::vector<BoundaryPoint> extract_boundary(const SweepGrid& grid) {
    std::vector<BoundaryPoint> boundary;
    const std::size_t n_v = grid.v_values.size();
    for (std::size_t j = 0; j < grid.beta_values.size(); ++j) {
        // Failed cells count as uncontrollable: a cell that cannot be shown
        // controllable must not open a transition.
        auto controllable = [&](std::size_t i) {
            return grid.cell(i, j) == CellOutcome::controllable;
        };
        std::size_t first_transition = n_v;
        std::size_t n_uc = 0, n_cu = 0;
        for (std::size_t i = 0; i + 1 < n_v; ++i) {
            if (!controllable(i) && controllable(i + 1)) {
                if (first_transition == n_v) first_transition = i;
                ++n_uc;
            } else if (controllable(i) && !controllable(i + 1)) {
                ++n_cu;
            }
        }
        if (first_transition == n_v)
            continue;
        boundary.push_back(
            {grid.beta_values[j],
             0.5 * (grid.v_values[first_transition] + grid.v_values[first_transition + 1]),
             n_uc == 1 && n_cu == 0});
    }
    return boundary;
}

namespace {

constexpr int kFitDim = 4;  // (A, B, C, p)
using FitPoint = std::array<double, kFitDim>;

double fit_rss(const FitPoint& th, const std::vector<std::pair<double, double>>& pts,
               double beta_min) {
    const double A = th[0], B = th[1], C = th[2], p = th[3];
    if (!(C + beta_min > 1e-9) || std::abs(p) > 50.0)
        return std::numeric_limits<double>::max();
    double rss = 0.0;
    for (const auto& [beta, v] : pts) {
        const double r = v - A - B * std::pow(C + beta, -p);
        rss += r * r;
    }
    return std::isfinite(rss) ? rss : std::numeric_limits<double>::max();
}

struct Simplex {
    std::array<FitPoint, kFitDim + 1> x;
    std::array<double, kFitDim + 1> f;

    void sort() {
        std::array<int, kFitDim + 1> order{0, 1, 2, 3, 4};
        std::sort(order.begin(), order.end(), [&](int a, int b) { return f[a] < f[b]; });
        const auto xs = x;
        const auto fs = f;
        for (int i = 0; i <= kFitDim; ++i) {
            x[i] = xs[order[i]];
            f[i] = fs[order[i]];
        }
    }
};

// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
template <typename Obj>
std::pair<FitPoint, double> nelder_mead(Obj&& obj, const FitPoint& start, double scale,
                                        std::size_t max_iter, bool& converged,
                                        std::vector<double>* trace) {
    Simplex s;
    s.x[0] = start;
    s.f[0] = obj(start);
    for (int j = 0; j < kFitDim; ++j) {
        FitPoint p = start;
        p[j] += scale * std::max(0.05 * std::abs(p[j]), 1e-4);
        s.x[j + 1] = p;
        s.f[j + 1] = obj(p);
    }

    converged = false;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        s.sort();
        if (trace) trace->push_back(s.f[0]);
        if (s.f[kFitDim] - s.f[0] <= 1e-16 * (1.0 + std::abs(s.f[0]))) {
            converged = true;
            break;
        }

        FitPoint centroid{};
        for (int i = 0; i < kFitDim; ++i)
            for (int j = 0; j < kFitDim; ++j) centroid[j] += s.x[i][j] / kFitDim;

        auto blend = [&](double coef) {
            FitPoint p;
            for (int j = 0; j < kFitDim; ++j)
                p[j] = centroid[j] + coef * (s.x[kFitDim][j] - centroid[j]);
            return p;
        };

        const FitPoint xr = blend(-1.0);
        const double fr = obj(xr);
        if (fr < s.f[0]) {
            const FitPoint xe = blend(-2.0);
            const double fe = obj(xe);
            if (fe < fr) {
                s.x[kFitDim] = xe;
                s.f[kFitDim] = fe;
            } else {
                s.x[kFitDim] = xr;
                s.f[kFitDim] = fr;
            }
        } else if (fr < s.f[kFitDim - 1]) {
            s.x[kFitDim] = xr;
            s.f[kFitDim] = fr;
        } else {
            const FitPoint xc = blend(fr < s.f[kFitDim] ? -0.5 : 0.5);
            const double fc = obj(xc);
            if (fc < std::min(fr, s.f[kFitDim])) {
                s.x[kFitDim] = xc;
                s.f[kFitDim] = fc;
            } else {
                for (int i = 1; i <= kFitDim; ++i) {
                    for (int j = 0; j < kFitDim; ++j)
                        s.x[i][j] = s.x[0][j] + 0.5 * (s.x[i][j] - s.x[0][j]);
                    s.f[i] = obj(s.x[i]);
                }
            }
        }
    }
    s.sort();
    if (trace) trace->push_back(s.f[0]);
    return {s.x[0], s.f[0]};
}

}  // namespace

ThresholdFit fit_threshold(const std::vector<std::pair<double, double>>& points,
                           const FitOptions& opts) {
    if (points.size() < 6)
        throw std::invalid_argument("fit_threshold: need at least 6 points");
    std::set<double> betas;
    for (const auto& [beta, v] : points) betas.insert(beta);
    if (betas.size() != points.size())
        throw std::invalid_argument("fit_threshold: beta values must be distinct");

    double beta_min = points.front().first, v_at_beta_min = points.front().second;
    double v_min = points.front().second, v_max = points.front().second;
    for (const auto& [beta, v] : points) {
        if (beta < beta_min) {
            beta_min = beta;
            v_at_beta_min = v;
        }
        v_min = std::min(v_min, v);
        v_max = std::max(v_max, v);
    }

    auto obj = [&](const FitPoint& th) { return fit_rss(th, points, beta_min); };

    FitPoint best{};
    double best_rss = std::numeric_limits<double>::max();
    bool best_converged = false;
    std::vector<double> best_trace;

    for (double a0 : {v_min, v_max}) {
        for (double c0 : {0.01, 0.1, 1.0}) {
            for (double p0 : {1.0, 2.0, 3.0}) {
                FitPoint th{a0, (v_at_beta_min - a0) * std::pow(c0 + beta_min, p0), c0, p0};
                bool conv = false;
                std::vector<double> trace;
                double scale = 1.0;
                double rss = obj(th);
                // A few restarts around the incumbent sharpen the simplex once
                // it has collapsed.
                for (int round = 0; round < 1 + opts.polish_rounds; ++round) {
                    bool round_conv = false;
                    auto [cand, cand_rss] = nelder_mead(
                        obj, th, scale, opts.max_iter, round_conv,
                        opts.trace ? &trace : nullptr);
                    if (cand_rss <= rss) {
                        th = cand;
                        rss = cand_rss;
                    }
                    conv = round_conv;
                    scale *= 0.1;
                }
                if (rss < best_rss) {
                    best = th;
                    best_rss = rss;
                    best_converged = conv;
                    if (opts.trace) best_trace = std::move(trace);
                }
            }
        }
    }

    if (opts.trace) *opts.trace = std::move(best_trace);

    ThresholdFit fit;
    fit.A = best[0];
    fit.B = best[1];
    fit.C = best[2];
    fit.p = best[3];
    fit.rss = best_rss;
    fit.converged = best_converged && std::isfinite(best_rss);
    return fit;
}

void write_grid_csv(const SweepGrid& grid, std::ostream& os) {
    os << "V,beta,outcome\n";
    char buf[128];
    for (std::size_t i = 0; i < grid.v_values.size(); ++i) {
        for (std::size_t j = 0; j < grid.beta_values.size(); ++j) {
            const int n = std::snprintf(buf, sizeof buf, "%.15g,%.15g,", grid.v_values[i],
                                        grid.beta_values[j]);
            os.write(buf, n);
            os << to_string(grid.cell(i, j)) << '\n';
        }
    }
}

void write_boundary_csv(const std::vector<BoundaryPoint>& boundary, std::ostream& os) {
    os << "beta,V_threshold,monotone\n";
    char buf[128];
    for (const auto& bp : boundary) {
        const int n = std::snprintf(buf, sizeof buf, "%.15g,%.15g,%s\n", bp.beta, bp.v_threshold,
                                    bp.monotone ? "true" : "false");
        os.write(buf, n);
    }
}

}  // namespace cytodyn
