#include "cytodyn/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace cytodyn {

namespace {

template <std::size_t N>
using Vec = std::array<double, N>;

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
// b - bhat, for the embedded 4th-order error estimate.
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

// Step-size controller (classic Hairer dopri5 settings with Lund stabilization).
constexpr double kSafety = 0.9;
constexpr double kBetaStab = 0.04;
constexpr double kExpo1 = 0.2 - kBetaStab * 0.75;
constexpr double kFacc1 = 5.0;   // max shrink per step: h/5
constexpr double kFacc2 = 0.1;   // max growth per step: 10 h

template <std::size_t N, typename Rhs>
void dopri5_step(Rhs& rhs, double t, const Vec<N>& y, const Vec<N>& f, double h, Vec<N>& y_out,
                 Vec<N>& f_out, Vec<N>& err_out) {
    Vec<N> w, k2, k3, k4, k5, k6;
    for (std::size_t i = 0; i < N; ++i) w[i] = y[i] + h * a21 * f[i];
    k2 = rhs(t + c2 * h, w);
    for (std::size_t i = 0; i < N; ++i) w[i] = y[i] + h * (a31 * f[i] + a32 * k2[i]);
    k3 = rhs(t + c3 * h, w);
    for (std::size_t i = 0; i < N; ++i) w[i] = y[i] + h * (a41 * f[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = rhs(t + c4 * h, w);
    for (std::size_t i = 0; i < N; ++i)
        w[i] = y[i] + h * (a51 * f[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = rhs(t + c5 * h, w);
    for (std::size_t i = 0; i < N; ++i)
        w[i] = y[i] + h * (a61 * f[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    k6 = rhs(t + h, w);
    for (std::size_t i = 0; i < N; ++i)
        y_out[i] = y[i] + h * (b1 * f[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    f_out = rhs(t + h, y_out);  // FSAL: reused as k1 of the next step
    for (std::size_t i = 0; i < N; ++i)
        err_out[i] = h * (e1 * f[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                          e7 * f_out[i]);
}

template <std::size_t N>
double error_norm(const Vec<N>& err, const Vec<N>& y0, const Vec<N>& y1, double atol, double rtol) {
    double sum = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double q = err[i] / sc;
        sum += q * q;
    }
    return std::sqrt(sum / static_cast<double>(N));
}

template <std::size_t N>
Vec<N> hermite(double theta, double h, const Vec<N>& y0, const Vec<N>& f0, const Vec<N>& y1,
               const Vec<N>& f1) {
    const double t2 = theta * theta, t3 = t2 * theta;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + theta;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    Vec<N> out;
    for (std::size_t i = 0; i < N; ++i)
        out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
    return out;
}

template <std::size_t N, typename Rhs>
double initial_step(Rhs& rhs, double t0, const Vec<N>& y0, const Vec<N>& f0,
                    const IntegrationConfig& cfg, double span) {
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sk = cfg.abs_tol + cfg.rel_tol * std::abs(y0[i]);
        dnf += (f0[i] / sk) * (f0[i] / sk);
        dny += (y0[i] / sk) * (y0[i] / sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
    h = std::min({h, cfg.max_step, span});

    Vec<N> y1;
    for (std::size_t i = 0; i < N; ++i) y1[i] = y0[i] + h * f0[i];
    const Vec<N> f1 = rhs(t0 + h, y1);
    double der2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sk = cfg.abs_tol + cfg.rel_tol * std::abs(y0[i]);
        der2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(der2, std::sqrt(dnf));
    const double h1 =
        (der12 <= 1e-15) ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
    return std::max(std::min({100.0 * h, h1, cfg.max_step, span}), 1e-12);
}

/// Writes samples into the trajectory columns; shared across schedule phases.
template <std::size_t N>
struct Sampler {
    Trajectory& traj;
    double sample_dt;
    long long next_index = 0;

    void push(double t, const Vec<N>& v) {
        traj.tau.push_back(t);
        traj.x.push_back(v[0]);
        traj.y.push_back(v[1]);
        if constexpr (N == 4) {
            traj.u.push_back(v[2]);
            traj.z.push_back(v[3]);
        }
    }

    double pending() const { return static_cast<double>(next_index) * sample_dt; }

    /// Emit all grid samples in (t_prev, t_new] using the Hermite interpolant.
    void emit_through(double t_prev, double t_new, double h, const Vec<N>& y0, const Vec<N>& f0,
                      const Vec<N>& y1, const Vec<N>& f1, double stop_before) {
        const double tol = 1e-9 * sample_dt;
        while (true) {
            const double ts = pending();
            if (ts > t_new + tol || ts >= stop_before) break;
            const double theta = std::clamp((ts - t_prev) / h, 0.0, 1.0);
            push(std::min(ts, t_new), hermite<N>(theta, h, y0, f0, y1, f1));
            ++next_index;
        }
    }
};

template <std::size_t N, typename Rhs, typename OnAccept>
Termination integrate_phase(Rhs rhs, double t0, double t1, Vec<N>& y, const IntegrationConfig& cfg,
                            Sampler<N>& out, bool first_phase, OnAccept on_accept) {
    if (first_phase) {
        out.push(t0, y);
        out.next_index = 1;
        on_accept(y);
        if (y[0] > cfg.escape_x)
            return {TerminationKind::escaped, t0, "x exceeded escape_x at start"};
    }

    Vec<N> f = rhs(t0, y);
    double h = initial_step<N>(rhs, t0, y, f, cfg, t1 - t0);
    double facold = 1e-4;
    bool rejected = false;
    double t = t0;

    Vec<N> ynew, fnew, errv;
    while (t < t1) {
        if (h > cfg.max_step) h = cfg.max_step;
        bool at_end = false;
        if (t + h >= t1) {
            h = t1 - t;
            at_end = true;
        }
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
            // Step-size underflow: record the last good state and give up.
            out.push(t, y);
            return {TerminationKind::failed, t, "step size underflow"};
        }

        dopri5_step<N>(rhs, t, y, f, h, ynew, fnew, errv);
        const double err = error_norm<N>(errv, y, ynew, cfg.abs_tol, cfg.rel_tol);

        if (!(err <= 1.0)) {
            const double fac11 = std::pow(std::max(err, 1e-10), kExpo1);
            h /= std::min(kFacc1, fac11 / kSafety);
            rejected = true;
            continue;
        }

        const double tnew = at_end ? t1 : t + h;

        if (ynew[0] > cfg.escape_x) {
            // Bisect the Hermite interpolant for the crossing time, to
            // sample_dt/10 accuracy.
            double lo = 0.0, hi = 1.0;
            while ((hi - lo) * h > cfg.sample_dt / 10.0) {
                const double mid = 0.5 * (lo + hi);
                if (hermite<N>(mid, h, y, f, ynew, fnew)[0] > cfg.escape_x)
                    hi = mid;
                else
                    lo = mid;
            }
            const double t_cross = t + hi * h;
            out.emit_through(t, tnew, h, y, f, ynew, fnew, t_cross);
            out.push(t_cross, hermite<N>(hi, h, y, f, ynew, fnew));
            on_accept(ynew);
            return {TerminationKind::escaped, t_cross, "x exceeded escape_x"};
        }

        out.emit_through(t, tnew, h, y, f, ynew, fnew, std::numeric_limits<double>::infinity());
        on_accept(ynew);

        const double fac11 = std::pow(std::max(err, 1e-10), kExpo1);
        double fac = fac11 / std::pow(facold, kBetaStab);
        fac = std::max(kFacc2, std::min(kFacc1, fac / kSafety));
        double hnew = h / fac;
        facold = std::max(err, 1e-4);
        if (rejected) hnew = std::min(hnew, h);
        rejected = false;

        t = tnew;
        y = ynew;
        f = fnew;
        h = hnew;
    }
    return {TerminationKind::completed, t1, ""};
}

/// Append the terminal point unless the last emitted sample already sits there.
template <std::size_t N>
void append_terminal(Sampler<N>& out, double t_final, const Vec<N>& y) {
    if (out.traj.tau.empty() || out.traj.tau.back() < t_final - 1e-9 * std::max(1.0, t_final))
        out.push(t_final, y);
}

}  // namespace

Trajectory integrate_forced(const State& s0, const ModelParams& p, const IntegrationConfig& cfg) {
    p.validate();
    cfg.validate();
    if (!(s0.x >= 0.0))
        throw std::invalid_argument("integrate_forced: initial x must be >= 0");

    Trajectory traj;
    traj.tau.reserve(static_cast<std::size_t>(cfg.t_end / cfg.sample_dt) + 2);
    auto rhs = [&p](double t, const Vec<2>& v) {
        const State d = rhs_forced({v[0], v[1]}, p, t);
        return Vec<2>{d.x, d.y};
    };
    Vec<2> y{s0.x, s0.y};
    Sampler<2> out{traj, cfg.sample_dt};
    traj.termination = integrate_phase<2>(rhs, 0.0, cfg.t_end, y, cfg, out, true, [](const Vec<2>&) {});
    if (traj.termination.kind == TerminationKind::completed)
        append_terminal(out, cfg.t_end, y);
    return traj;
}

Trajectory integrate_autonomous(const ExtendedState& s0, const ModelParams& p,
                                const IntegrationConfig& cfg) {
    p.validate();
    cfg.validate();
    if (!(s0.x >= 0.0))
        throw std::invalid_argument("integrate_autonomous: initial x must be >= 0");

    Trajectory traj;
    traj.tau.reserve(static_cast<std::size_t>(cfg.t_end / cfg.sample_dt) + 2);
    auto rhs = [&p](double, const Vec<4>& v) {
        const ExtendedState d = rhs_autonomous({v[0], v[1], v[2], v[3]}, p);
        return Vec<4>{d.x, d.y, d.u, d.z};
    };
    Vec<4> y{s0.x, s0.y, s0.u, s0.z};
    Sampler<4> out{traj, cfg.sample_dt};
    double dev = 0.0;
    auto watch = [&dev, &p](const Vec<4>& v) {
        if (p.beta > 0.0) {
            const double w = v[3] / p.beta;
            dev = std::max(dev, std::abs(v[2] * v[2] + w * w - 1.0));
        }
    };
    traj.termination = integrate_phase<4>(rhs, 0.0, cfg.t_end, y, cfg, out, true, watch);
    if (traj.termination.kind == TerminationKind::completed)
        append_terminal(out, cfg.t_end, y);
    traj.oscillator_deviation = dev;
    return traj;
}

Trajectory integrate_schedule(const State& s0, const ModelParams& p, const IntegrationConfig& cfg,
                              double off_at) {
    p.validate();
    cfg.validate();
    if (!(off_at > 0.0) || !(off_at < cfg.t_end))
        throw std::invalid_argument("integrate_schedule: off_at must lie in (0, t_end)");
    if (!(s0.x >= 0.0))
        throw std::invalid_argument("integrate_schedule: initial x must be >= 0");

    Trajectory traj;
    traj.tau.reserve(static_cast<std::size_t>(cfg.t_end / cfg.sample_dt) + 2);
    auto rhs_on = [&p](double t, const Vec<2>& v) {
        const State d = rhs_forced({v[0], v[1]}, p, t);
        return Vec<2>{d.x, d.y};
    };
    ModelParams p_off = p;
    p_off.V = 0.0;
    auto rhs_off = [&p_off](double t, const Vec<2>& v) {
        const State d = rhs_forced({v[0], v[1]}, p_off, t);
        return Vec<2>{d.x, d.y};
    };

    Vec<2> y{s0.x, s0.y};
    Sampler<2> out{traj, cfg.sample_dt};
    auto noop = [](const Vec<2>&) {};
    traj.termination = integrate_phase<2>(rhs_on, 0.0, off_at, y, cfg, out, true, noop);
    if (traj.termination.kind != TerminationKind::completed)
        return traj;
    traj.termination = integrate_phase<2>(rhs_off, off_at, cfg.t_end, y, cfg, out, false, noop);
    if (traj.termination.kind == TerminationKind::completed)
        append_terminal(out, cfg.t_end, y);
    return traj;
}

void write_csv(const Trajectory& traj, std::ostream& os) {
    const bool ext = traj.autonomous();
    os << (ext ? "tau,x,y,u,z\n" : "tau,x,y\n");
    char buf[192];
    for (std::size_t i = 0; i < traj.size(); ++i) {
        int n;
        if (ext)
            n = std::snprintf(buf, sizeof buf, "%.15g,%.15g,%.15g,%.15g,%.15g\n", traj.tau[i],
                              traj.x[i], traj.y[i], traj.u[i], traj.z[i]);
        else
            n = std::snprintf(buf, sizeof buf, "%.15g,%.15g,%.15g\n", traj.tau[i], traj.x[i],
                              traj.y[i]);
        os.write(buf, n);
    }
}

}  // namespace cytodyn
