#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "cytodyn/integrator.hpp"
#include "support.hpp"

using namespace cytodyn;

namespace {

// C(x, y) = x - ln(x)/alpha + y - alpha ln(y), conserved when k = sigma = V = 0.
double lv_conserved(double x, double y, double alpha) {
    return x - std::log(x) / alpha + y - alpha * std::log(y);
}

double lv_drift(const Trajectory& traj, double alpha) {
    const double c0 = lv_conserved(traj.x[0], traj.y[0], alpha);
    double worst = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i)
        worst = std::max(worst, std::abs(lv_conserved(traj.x[i], traj.y[i], alpha) - c0));
    return worst;
}

}  // namespace

TEST_CASE("invariant axis: pure exponential decay") {
    const ModelParams p{2.0, 0.0, 0.0, 0.0, 0.0};
    IntegrationConfig cfg;
    cfg.t_end = 10.0;
    cfg.max_step = 0.05;
    const Trajectory traj = integrate_forced({0.0, 2.0}, p, cfg);
    REQUIRE(traj.termination.kind == TerminationKind::completed);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        CHECK(traj.x[i] == 0.0);  // x = 0 is invariant
        CHECK(std::abs(traj.y[i] - 2.0 * std::exp(-traj.tau[i] / p.alpha)) < 5e-8);
    }
    // terminal point carries pure integration error
    CHECK(std::abs(traj.y.back() - 2.0 * std::exp(-10.0 / p.alpha)) < 1e-9);
}

TEST_CASE("invariant axis with forcing: closed-form linear response") {
    // dy/dtau + y/alpha = sigma + V/2 + (V/2) cos(2 beta tau)
    const ModelParams p{1.5, 0.7, 0.3, 0.4, 0.8};
    IntegrationConfig cfg;
    cfg.t_end = 20.0;
    cfg.max_step = 0.05;
    const double y0 = 1.3;
    const Trajectory traj = integrate_forced({0.0, y0}, p, cfg);

    const double P = (p.V / 2.0) * p.alpha / (4.0 * p.alpha * p.alpha * p.beta * p.beta + 1.0);
    const double Q = 2.0 * p.alpha * p.beta * P;
    const double mean = p.alpha * (p.sigma + p.V / 2.0);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        CHECK(traj.x[i] == 0.0);  // the axis is exactly invariant
        const double t = traj.tau[i];
        const double exact = (y0 - mean - P) * std::exp(-t / p.alpha) + mean +
                             P * std::cos(2.0 * p.beta * t) + Q * std::sin(2.0 * p.beta * t);
        CHECK(std::abs(traj.y[i] - exact) < 1e-7);
    }
}

TEST_CASE("Lotka-Volterra reduction conserves C") {
    const ModelParams p{1.0, 0.0, 0.0, 0.0, 0.0};
    IntegrationConfig cfg;
    cfg.t_end = 100.0;
    const Trajectory traj = integrate_forced({1.5, 1.5}, p, cfg);
    REQUIRE(traj.termination.kind == TerminationKind::completed);
    CHECK(lv_drift(traj, p.alpha) < 1e-6);
}

TEST_CASE("tolerance monotonicity on the conserved quantity") {
    const ModelParams p{1.0, 0.0, 0.0, 0.0, 0.0};
    IntegrationConfig coarse;
    coarse.t_end = 50.0;
    coarse.rel_tol = 1e-7;
    IntegrationConfig fine = coarse;
    fine.rel_tol = 0.5e-7;
    const double d_coarse = lv_drift(integrate_forced({1.5, 1.5}, p, coarse), p.alpha);
    const double d_fine = lv_drift(integrate_forced({1.5, 1.5}, p, fine), p.alpha);
    CHECK(d_fine <= d_coarse * 1.01 + 1e-15);
}

TEST_CASE("damped oscillation settles toward the dormant state") {
    const ModelParams p{2.0, 0.2, 0.25, 0.0, 0.0};
    IntegrationConfig cfg;
    cfg.t_end = 200.0;
    const Trajectory traj = integrate_forced({5.3, 6.7}, p, cfg);
    REQUIRE(traj.termination.kind == TerminationKind::completed);
    CHECK(std::abs(traj.x.back() - 0.416667) < 1e-3);
    // late oscillation amplitude is a small fraction of the initial one
    double late_min = 1e300, late_max = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (traj.tau[i] < 150.0) continue;
        late_min = std::min(late_min, traj.x[i]);
        late_max = std::max(late_max, traj.x[i]);
    }
    CHECK(late_max - late_min < 0.05);
    CHECK(late_max < 5.3);
}

TEST_CASE("oscillator components reproduce the cosine solution") {
    const ModelParams p{2.0, 0.2, 0.25, 0.0, 1.3};
    IntegrationConfig cfg;
    cfg.t_end = 50.0;
    cfg.max_step = 0.05;
    const Trajectory traj = integrate_autonomous({1.0, 1.0, 1.0, 0.0}, p, cfg);
    REQUIRE(traj.autonomous());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double t = traj.tau[i];
        CHECK(std::abs(traj.u[i] - std::cos(p.beta * t)) < 1e-7);
        CHECK(std::abs(traj.z[i] + p.beta * std::sin(p.beta * t)) < 1e-7);
    }
}

TEST_CASE("oscillator invariant stays within ten times the tolerance") {
    const ModelParams p{2.0, 0.2, 0.25, 0.1, 0.5};
    IntegrationConfig cfg;
    cfg.t_end = 50.0;
    const Trajectory traj = integrate_autonomous({1.0, 1.0, 1.0, 0.0}, p, cfg);
    CHECK(traj.oscillator_deviation < 10.0 * cfg.rel_tol);
}

TEST_CASE("beta = 0 freezes the oscillator exactly") {
    const ModelParams p{2.0, 0.2, 0.25, 0.3, 0.0};
    IntegrationConfig cfg;
    cfg.t_end = 20.0;
    const Trajectory traj = integrate_autonomous({1.0, 1.0, 1.0, 0.0}, p, cfg);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        CHECK(traj.u[i] == 1.0);
        CHECK(traj.z[i] == 0.0);
    }
}

TEST_CASE("forced and autonomous formulations agree") {
    const ModelParams p{2.0, 0.2, 0.25, 0.3, 1.2};
    IntegrationConfig cfg;
    cfg.t_end = 50.0;
    const Trajectory f = integrate_forced({1.0, 1.5}, p, cfg);
    const Trajectory a = integrate_autonomous({1.0, 1.5, 1.0, 0.0}, p, cfg);
    REQUIRE(f.size() == a.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        worst = std::max(worst, std::abs(f.x[i] - a.x[i]));
    CHECK(worst < 10.0 * 1e-7);  // ten times a conservative integration tolerance
    CHECK(worst < 1e-6);
}

TEST_CASE("identical inputs give bit-identical trajectories") {
    const ModelParams p{2.0, 0.2, 0.05, 0.25, 0.5};
    IntegrationConfig cfg;
    cfg.t_end = 40.0;
    const Trajectory a = integrate_forced({5.3, 6.7}, p, cfg);
    const Trajectory b = integrate_forced({5.3, 6.7}, p, cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.tau[i] == b.tau[i]);
        CHECK(a.x[i] == b.x[i]);
        CHECK(a.y[i] == b.y[i]);
    }
}

TEST_CASE("trajectory sampling structure") {
    const ModelParams p{2.0, 0.2, 0.25, 0.0, 0.0};
    IntegrationConfig cfg;
    cfg.t_end = 5.005;  // not a multiple of sample_dt
    const Trajectory traj = integrate_forced({1.0, 1.0}, p, cfg);
    CHECK(traj.tau[0] == 0.0);
    CHECK(traj.x[0] == 1.0);
    CHECK(traj.y[0] == 1.0);
    for (std::size_t i = 1; i < traj.size(); ++i) CHECK(traj.tau[i] > traj.tau[i - 1]);
    for (std::size_t i = 1; i + 1 < traj.size(); ++i)
        CHECK(traj.tau[i] == doctest::Approx(0.01 * static_cast<double>(i)).epsilon(1e-12));
    CHECK(traj.tau.back() == 5.005);
    CHECK(traj.termination.kind == TerminationKind::completed);
    CHECK(traj.termination.tau == 5.005);
}

TEST_CASE("escape guard classifies blow-up") {
    const ModelParams p{2.0, 0.2, 0.05, 0.0, 0.0};  // recurrence regime
    IntegrationConfig cfg;
    cfg.t_end = 200.0;
    const Trajectory traj = integrate_forced({2.1, 2.7}, p, cfg);
    REQUIRE(traj.termination.kind == TerminationKind::escaped);
    CHECK(traj.termination.tau > 0.0);
    CHECK(traj.termination.tau < 200.0);
    CHECK(traj.tau.back() == traj.termination.tau);
    // crossing point sits at the guard, within the bisection slack
    CHECK(traj.x.back() >= cfg.escape_x * 0.999);
    CHECK(traj.x.back() <= cfg.escape_x * 1.25);
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) CHECK(traj.x[i] <= cfg.escape_x);
}

TEST_CASE("immediate escape when the start is already beyond the guard") {
    const ModelParams p{2.0, 0.2, 0.05, 0.0, 0.0};
    IntegrationConfig cfg;
    cfg.escape_x = 1.0;
    const Trajectory traj = integrate_forced({2.0, 1.0}, p, cfg);
    CHECK(traj.termination.kind == TerminationKind::escaped);
    CHECK(traj.termination.tau == 0.0);
}

TEST_CASE("schedule: V = 0 throughout matches the plain run") {
    const ModelParams p{2.0, 0.2, 0.25, 0.0, 0.0};
    IntegrationConfig cfg;
    cfg.t_end = 50.0;
    const Trajectory plain = integrate_forced({2.0, 1.0}, p, cfg);
    const Trajectory sched = integrate_schedule({2.0, 1.0}, p, cfg, 25.0);
    REQUIRE(plain.size() == sched.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < plain.size(); ++i)
        worst = std::max(worst, std::abs(plain.x[i] - sched.x[i]));
    CHECK(worst < 1e-7);
}

TEST_CASE("schedule: interruption at the very end is a no-op") {
    const ModelParams p{2.0, 0.2, 0.25, 0.3, 0.7};
    IntegrationConfig cfg;
    cfg.t_end = 30.0;
    const double eps = 1e-4;
    const Trajectory plain = integrate_forced({2.0, 1.0}, p, cfg);
    const Trajectory sched = integrate_schedule({2.0, 1.0}, p, cfg, cfg.t_end - eps);
    REQUIRE(plain.size() == sched.size());
    for (std::size_t i = 0; i < plain.size(); ++i) {
        if (plain.tau[i] > cfg.t_end - 1.0) break;  // ignore the eps window
        CHECK(std::abs(plain.x[i] - sched.x[i]) < 1e-7);
    }
}

TEST_CASE("schedule: dose actually switches off") {
    // On the invariant axis the mean level after switch-off drops to
    // alpha * sigma.
    const ModelParams p{1.0, 0.0, 0.2, 0.8, 0.0};
    IntegrationConfig cfg;
    cfg.t_end = 40.0;
    const Trajectory traj = integrate_schedule({0.0, 1.0}, p, cfg, 20.0);
    REQUIRE(traj.termination.kind == TerminationKind::completed);
    // before off_at the constant dose holds y near alpha (sigma + V) = 1.0
    double y_pre = 0.0, y_post = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (traj.tau[i] > 15.0 && traj.tau[i] <= 20.0) y_pre = traj.y[i];
        if (traj.tau[i] > 39.9) y_post = traj.y[i];
    }
    CHECK(std::abs(y_pre - p.alpha * (p.sigma + p.V)) < 1e-3);
    CHECK(std::abs(y_post - p.alpha * p.sigma) < 1e-3);
}

TEST_CASE("invalid configuration and initial state are rejected") {
    const ModelParams p{1.0, 0.0, 0.0, 0.0, 0.0};
    IntegrationConfig cfg;
    CHECK_THROWS_AS(integrate_forced({-0.5, 1.0}, p, cfg), std::invalid_argument);
    IntegrationConfig bad = cfg;
    bad.rel_tol = 0.0;
    CHECK_THROWS_AS(integrate_forced({1.0, 1.0}, p, bad), std::invalid_argument);
    CHECK_THROWS_AS(integrate_schedule({1.0, 1.0}, p, cfg, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(integrate_schedule({1.0, 1.0}, p, cfg, cfg.t_end), std::invalid_argument);
}

TEST_CASE("csv emitter format") {
    const ModelParams p{2.0, 0.2, 0.25, 0.0, 0.0};
    IntegrationConfig cfg;
    cfg.t_end = 1.0;
    const Trajectory traj = integrate_forced({5.3, 6.7}, p, cfg);
    std::ostringstream os;
    write_csv(traj, os);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "tau,x,y");
    std::size_t rows = 0;
    std::string line;
    double tau0 = -1, x0 = -1, y0 = -1;
    while (std::getline(is, line)) {
        if (rows == 0) std::sscanf(line.c_str(), "%lf,%lf,%lf", &tau0, &x0, &y0);
        ++rows;
    }
    CHECK(rows == traj.size());
    CHECK(tau0 == 0.0);
    CHECK(x0 == 5.3);
    CHECK(y0 == 6.7);

    const Trajectory ext = integrate_autonomous({5.3, 6.7, 1.0, 0.0}, p, cfg);
    std::ostringstream os2;
    write_csv(ext, os2);
    CHECK(os2.str().substr(0, 12) == "tau,x,y,u,z\n");
}
