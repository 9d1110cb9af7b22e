// cytodyn: simulate, analyze and sweep the tumor-lymphocyte model from the
// command line. Subcommands: simulate | stability | potential | sweep | fit |
// cycle. A JSON config (--config) seeds the defaults; flags override it.
//
// Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cytodyn/analysis.hpp"
#include "cytodyn/integrator.hpp"
#include "cytodyn/model.hpp"
#include "cytodyn/stability.hpp"
#include "cytodyn/sweep.hpp"

using nlohmann::json;

namespace {

struct RunConfig {
    cytodyn::ModelParams model{1.0, 0.0, 0.0, 0.0, 0.0};
    cytodyn::State initial{1.0, 1.0};
    cytodyn::IntegrationConfig integration{};
    cytodyn::AxisSpec v_range{0.0, 0.6, 60};
    cytodyn::AxisSpec beta_range{0.0, 3.0, 60};
    unsigned jobs = 0;
    std::map<std::string, std::string> output;
};

void reject_unknown_keys(const json& j, const char* section,
                         std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a) known = true;
        if (!known)
            throw std::invalid_argument(std::string("config: unknown key \"") + key + "\" in " +
                                        section);
    }
}

void load_config(const std::string& path, RunConfig& rc) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: parse error: ") + e.what());
    }
    try {
        reject_unknown_keys(j, "top level", {"model", "initial", "integration", "sweep", "output"});
        if (j.contains("model")) {
            const json& m = j["model"];
            reject_unknown_keys(m, "model", {"alpha", "k", "sigma", "V", "beta"});
            if (m.contains("alpha")) rc.model.alpha = m["alpha"].get<double>();
            if (m.contains("k")) rc.model.k = m["k"].get<double>();
            if (m.contains("sigma")) rc.model.sigma = m["sigma"].get<double>();
            if (m.contains("V")) rc.model.V = m["V"].get<double>();
            if (m.contains("beta")) rc.model.beta = m["beta"].get<double>();
        }
        if (j.contains("initial")) {
            const json& s = j["initial"];
            reject_unknown_keys(s, "initial", {"x0", "y0"});
            if (s.contains("x0")) rc.initial.x = s["x0"].get<double>();
            if (s.contains("y0")) rc.initial.y = s["y0"].get<double>();
        }
        if (j.contains("integration")) {
            const json& g = j["integration"];
            reject_unknown_keys(
                g, "integration",
                {"rel_tol", "abs_tol", "max_step", "t_end", "sample_dt", "escape_x"});
            if (g.contains("rel_tol")) rc.integration.rel_tol = g["rel_tol"].get<double>();
            if (g.contains("abs_tol")) rc.integration.abs_tol = g["abs_tol"].get<double>();
            if (g.contains("max_step")) rc.integration.max_step = g["max_step"].get<double>();
            if (g.contains("t_end")) rc.integration.t_end = g["t_end"].get<double>();
            if (g.contains("sample_dt")) rc.integration.sample_dt = g["sample_dt"].get<double>();
            if (g.contains("escape_x")) rc.integration.escape_x = g["escape_x"].get<double>();
        }
        if (j.contains("sweep")) {
            const json& s = j["sweep"];
            reject_unknown_keys(s, "sweep",
                                {"v_min", "v_max", "v_n", "beta_min", "beta_max", "beta_n", "jobs"});
            if (s.contains("v_min")) rc.v_range.min = s["v_min"].get<double>();
            if (s.contains("v_max")) rc.v_range.max = s["v_max"].get<double>();
            if (s.contains("v_n")) rc.v_range.n = s["v_n"].get<std::size_t>();
            if (s.contains("beta_min")) rc.beta_range.min = s["beta_min"].get<double>();
            if (s.contains("beta_max")) rc.beta_range.max = s["beta_max"].get<double>();
            if (s.contains("beta_n")) rc.beta_range.n = s["beta_n"].get<std::size_t>();
            if (s.contains("jobs")) rc.jobs = s["jobs"].get<unsigned>();
        }
        if (j.contains("output")) {
            const json& o = j["output"];
            reject_unknown_keys(o, "output",
                                {"trajectory", "verdict", "grid", "boundary", "fit", "cycle",
                                 "potential", "extrema"});
            for (const auto& [key, value] : o.items())
                rc.output[key] = value.get<std::string>();
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: bad value type: ") + e.what());
    }
}

std::string output_path(const RunConfig& rc, const std::string& flag_value,
                        const std::string& artifact, const std::string& fallback) {
    if (!flag_value.empty()) return flag_value;
    auto it = rc.output.find(artifact);
    if (it != rc.output.end()) return it->second;
    return fallback;
}

void write_text(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::invalid_argument("cannot open output file: " + path);
    out << text;
}

json eigenvalues_json(const std::vector<std::complex<double>>& eigs) {
    json arr = json::array();
    for (const auto& ev : eigs) arr.push_back({ev.real(), ev.imag()});
    return arr;
}

json report_json(const cytodyn::FixedPointReport& r) {
    return {{"name", r.name},
            {"location", r.location},
            {"eigenvalues", eigenvalues_json(r.eigenvalues)},
            {"class", cytodyn::to_string(r.klass)},
            {"physical", r.physical}};
}

json verdict_json(const cytodyn::GrowthVerdict& v) {
    json evidence = {{"bound_on_x", v.bound_on_x}, {"y_min", v.y_min}};
    evidence["escape_tau"] = v.escape_tau ? json(*v.escape_tau) : json(nullptr);
    return {{"outcome", cytodyn::to_string(v.outcome)},
            {"immune_collapse", v.immune_collapse},
            {"horizon", v.horizon},
            {"evidence", evidence}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

int run(int argc, char** argv) {
    // The config seeds defaults, so it must be known before the full parse.
    std::string config_path;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config" && i + 1 < argc)
            config_path = argv[i + 1];
        else if (a.rfind("--config=", 0) == 0)
            config_path = a.substr(9);
    }
    RunConfig rc;
    if (!config_path.empty())
        load_config(config_path, rc);

    CLI::App app{"tumor-lymphocyte dynamics under periodic cytokine dosing"};
    app.require_subcommand(1);

    std::string out_flag, second_out_flag, config_flag;
    bool autonomous = false, extended = false, map_mode = false;
    double off_at = 0.0;
    double x_min = 0.0, x_max = -1.0;
    std::size_t x_n = 501;
    double map_sigma_min = 0.0, map_sigma_max = 3.0, map_ratio_min = 0.0, map_ratio_max = 3.0;
    std::size_t map_sigma_n = 61, map_ratio_n = 61;
    std::string points_path;

    auto add_model_flags = [&](CLI::App* sub) {
        sub->add_option("--config", config_flag, "JSON config file (flags override it)");
        sub->add_option("--alpha", rc.model.alpha, "growth ratio");
        sub->add_option("--k", rc.model.k, "tumor aggressiveness");
        sub->add_option("--sigma", rc.model.sigma, "lymphocyte influx");
        sub->add_option("--V", rc.model.V, "effective dose amplitude");
        sub->add_option("--beta", rc.model.beta, "dosing frequency");
    };
    auto add_run_flags = [&](CLI::App* sub) {
        sub->add_option("--x0", rc.initial.x, "initial malignant population");
        sub->add_option("--y0", rc.initial.y, "initial lymphocyte population");
        sub->add_option("--t-end", rc.integration.t_end, "final tau");
        sub->add_option("--rel-tol", rc.integration.rel_tol, "relative tolerance");
        sub->add_option("--abs-tol", rc.integration.abs_tol, "absolute tolerance");
        sub->add_option("--max-step", rc.integration.max_step, "maximum step");
        sub->add_option("--sample-dt", rc.integration.sample_dt, "output sampling interval");
        sub->add_option("--escape-x", rc.integration.escape_x, "blow-up guard on x");
    };

    int exit_code = 0;

    auto* sim = app.add_subcommand("simulate", "integrate and classify a trajectory");
    add_model_flags(sim);
    add_run_flags(sim);
    sim->add_flag("--autonomous", autonomous, "integrate the 4-D autonomous form");
    sim->add_option("--off-at", off_at, "interrupt the dose at this tau (schedule run)");
    sim->add_option("--out", out_flag, "trajectory CSV path");
    sim->add_option("--verdict-out", second_out_flag, "verdict JSON path ('-' = stdout)");
    sim->callback([&] {
        if (off_at > 0.0 && autonomous)
            throw std::invalid_argument("simulate: --off-at and --autonomous are exclusive");
        cytodyn::Trajectory traj;
        if (off_at > 0.0)
            traj = cytodyn::integrate_schedule(rc.initial, rc.model, rc.integration, off_at);
        else if (autonomous)
            traj = cytodyn::integrate_autonomous({rc.initial.x, rc.initial.y, 1.0, 0.0}, rc.model,
                                                 rc.integration);
        else
            traj = cytodyn::integrate_forced(rc.initial, rc.model, rc.integration);

        std::ostringstream csv;
        cytodyn::write_csv(traj, csv);
        write_text(output_path(rc, out_flag, "trajectory", "trajectory.csv"), csv.str());

        const std::string verdict_path = output_path(rc, second_out_flag, "verdict", "-");
        if (traj.termination.kind == cytodyn::TerminationKind::failed) {
            // the CSV above still carries the last good state
            const json err = {{"error", "integration failed: " + traj.termination.label},
                              {"tau", traj.termination.tau}};
            write_text(verdict_path, dump(err));
            std::cerr << "integration failed: " << traj.termination.label << " at tau "
                      << traj.termination.tau << "\n";
            exit_code = 3;
            return;
        }
        cytodyn::GrowthConfig gcfg;
        gcfg.min_horizon = std::min(gcfg.min_horizon, rc.integration.t_end);
        const auto verdict = cytodyn::classify_growth(traj, gcfg);
        write_text(verdict_path, dump(verdict_json(verdict)));
    });

    auto* stab = app.add_subcommand("stability", "fixed points, eigenvalues, classification");
    add_model_flags(stab);
    stab->add_flag("--extended", extended, "include the lifted 4-D fixed points");
    stab->add_flag("--map", map_mode, "emit a (sigma, k/alpha) regime-map CSV instead");
    stab->add_option("--sigma-min", map_sigma_min);
    stab->add_option("--sigma-max", map_sigma_max);
    stab->add_option("--sigma-n", map_sigma_n);
    stab->add_option("--ratio-min", map_ratio_min);
    stab->add_option("--ratio-max", map_ratio_max);
    stab->add_option("--ratio-n", map_ratio_n);
    stab->add_option("--out", out_flag, "report path ('-' = stdout)");
    stab->callback([&] {
        if (map_mode) {
            const auto map = cytodyn::regime_map(rc.model.alpha, map_sigma_min, map_sigma_max,
                                                 map_sigma_n, map_ratio_min, map_ratio_max,
                                                 map_ratio_n);
            std::ostringstream csv;
            csv << "sigma,k_over_alpha,class,physical\n";
            char buf[96];
            for (std::size_t i = 0; i < map.sigma_values.size(); ++i)
                for (std::size_t j = 0; j < map.k_over_alpha_values.size(); ++j) {
                    const std::size_t idx = i * map.k_over_alpha_values.size() + j;
                    std::snprintf(buf, sizeof buf, "%.15g,%.15g,", map.sigma_values[i],
                                  map.k_over_alpha_values[j]);
                    csv << buf << cytodyn::to_string(map.l1_class[idx]) << ','
                        << (map.l1_physical[idx] ? "true" : "false") << '\n';
                }
            write_text(output_path(rc, out_flag, "grid", "regime_map.csv"), csv.str());
            return;
        }
        json out;
        json fps = json::array();
        for (const auto& r : cytodyn::classify(rc.model)) fps.push_back(report_json(r));
        out["fixed_points"] = fps;
        const auto sc = cytodyn::sigma_critical(rc.model);
        out["sigma_critical"] = sc ? json({sc->first, sc->second}) : json(nullptr);
        if (extended) {
            json ext = json::array();
            for (const auto& r : cytodyn::extended_fixed_points(rc.model))
                ext.push_back(report_json(r));
            out["extended_fixed_points"] = ext;
        }
        write_text(output_path(rc, out_flag, "verdict", "-"), dump(out));
    });

    auto* pot = app.add_subcommand("potential", "potential of the mechanical analogue");
    add_model_flags(pot);
    pot->add_option("--x-min", x_min, "lower end of the sampled x range");
    pot->add_option("--x-max", x_max, "upper end (default: past the second extremum)");
    pot->add_option("--n", x_n, "number of samples");
    pot->add_option("--out", out_flag, "CSV path for (x, U)");
    pot->add_option("--extrema-out", second_out_flag, "extrema JSON path ('-' = stdout)");
    pot->callback([&] {
        rc.model.validate();
        if (x_n < 2)
            throw std::invalid_argument("potential: need --n >= 2");
        json extrema;
        double x_hi = x_max;
        try {
            const auto shape = cytodyn::potential_extrema(rc.model);
            extrema = {{"x1", shape.x1},
                       {"kind1", cytodyn::to_string(shape.kind1)},
                       {"x2", shape.x2},
                       {"kind2", cytodyn::to_string(shape.kind2)}};
            if (x_hi <= x_min)
                x_hi = std::max(1.0, 1.5 * std::abs(shape.x2));
        } catch (const std::domain_error&) {
            extrema = {{"degenerate", true}, {"x1", 0.0}};
            if (x_hi <= x_min)
                x_hi = std::max(1.0, x_min + 1.0);
        }
        std::ostringstream csv;
        csv << "x,U\n";
        char buf[80];
        for (std::size_t i = 0; i < x_n; ++i) {
            const double x = x_min + (x_hi - x_min) * static_cast<double>(i) /
                                         static_cast<double>(x_n - 1);
            std::snprintf(buf, sizeof buf, "%.15g,%.15g\n", x, cytodyn::potential(x, rc.model));
            csv << buf;
        }
        write_text(output_path(rc, out_flag, "potential", "potential.csv"), csv.str());
        write_text(output_path(rc, second_out_flag, "extrema", "-"), dump(extrema));
    });

    std::string grid_out, boundary_out;
    auto* swp = app.add_subcommand("sweep", "classify growth over a (V, beta) grid");
    add_model_flags(swp);
    add_run_flags(swp);
    swp->add_option("--v-min", rc.v_range.min);
    swp->add_option("--v-max", rc.v_range.max);
    swp->add_option("--v-n", rc.v_range.n);
    swp->add_option("--beta-min", rc.beta_range.min);
    swp->add_option("--beta-max", rc.beta_range.max);
    swp->add_option("--beta-n", rc.beta_range.n);
    swp->add_option("--jobs", rc.jobs, "worker threads (0 = all cores)");
    swp->add_option("--grid-out", grid_out, "grid CSV path");
    swp->add_option("--boundary-out", boundary_out, "boundary CSV path");
    swp->callback([&] {
        cytodyn::SweepSpec spec{rc.model, rc.initial, rc.v_range, rc.beta_range, rc.integration,
                                {}};
        const auto grid = cytodyn::run_sweep(spec, rc.jobs);
        std::ostringstream gcsv;
        cytodyn::write_grid_csv(grid, gcsv);
        write_text(output_path(rc, grid_out, "grid", "grid.csv"), gcsv.str());
        std::ostringstream bcsv;
        cytodyn::write_boundary_csv(cytodyn::extract_boundary(grid), bcsv);
        write_text(output_path(rc, boundary_out, "boundary", "boundary.csv"), bcsv.str());
    });

    auto* fit = app.add_subcommand("fit", "fit the hyperbolic threshold curve to points");
    fit->add_option("--config", config_flag, "JSON config file");
    fit->add_option("--points", points_path, "CSV of (beta, V) points, header skipped")
        ->required();
    fit->add_option("--out", out_flag, "fit JSON path ('-' = stdout)");
    fit->callback([&] {
        std::ifstream in(points_path);
        if (!in)
            throw std::invalid_argument("fit: cannot open " + points_path);
        std::vector<std::pair<double, double>> points;
        std::string line;
        while (std::getline(in, line)) {
            double beta, v;
            if (std::sscanf(line.c_str(), "%lf,%lf", &beta, &v) == 2)
                points.emplace_back(beta, v);
        }
        const auto result = cytodyn::fit_threshold(points);
        const json out = {{"A", result.A},     {"B", result.B},
                          {"C", result.C},     {"p", result.p},
                          {"rss", result.rss}, {"converged", result.converged}};
        write_text(output_path(rc, out_flag, "fit", "-"), dump(out));
        if (!result.converged) {
            std::cerr << "fit did not converge; best-so-far written\n";
            exit_code = 3;
        }
    });

    auto* cyc = app.add_subcommand("cycle", "detect a limit cycle in a forced run");
    add_model_flags(cyc);
    add_run_flags(cyc);
    cyc->add_option("--out", out_flag, "cycle JSON path ('-' = stdout)");
    cyc->add_option("--traj-out", second_out_flag, "also write the trajectory CSV here");
    cyc->callback([&] {
        const auto traj = cytodyn::integrate_forced(rc.initial, rc.model, rc.integration);
        if (traj.termination.kind == cytodyn::TerminationKind::failed)
            throw std::runtime_error("integration failed: " + traj.termination.label);
        if (!second_out_flag.empty()) {
            std::ostringstream csv;
            cytodyn::write_csv(traj, csv);
            write_text(second_out_flag, csv.str());
        }
        const auto report = cytodyn::detect_cycle(traj, rc.model);
        const json out = {{"found", report.found},
                          {"period", report.period},
                          {"x_min", report.x_min},
                          {"x_max", report.x_max},
                          {"lock_ratio", report.lock_ratio}};
        write_text(output_path(rc, out_flag, "cycle", "-"), dump(out));
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
