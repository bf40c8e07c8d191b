#pragma once

// Subcommands of the `qlm` tool. Each returns the process exit code:
// 0 success, 2 configuration or input error, 3 numerical failure.
// Diagnostics go to `err`.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "qlm/analytic.hpp"
#include "qlm/dynamics.hpp"
#include "qlm/errors.hpp"
#include "qlm/geometry.hpp"
#include "qlm/io/csv.hpp"
#include "qlm/io/expr.hpp"
#include "qlm/io/scenario.hpp"
#include "qlm/io/svg.hpp"
#include "qlm/measurement.hpp"
#include "qlm/potentials.hpp"
#include "qlm/state.hpp"
#include "qlm/sterngerlach.hpp"

namespace qlm::cli {

enum ExitCode : int { exit_ok = 0, exit_input = 2, exit_numeric = 3 };

using json = nlohmann::ordered_json;

/// Runs `body` and maps exceptions onto exit codes.
inline int guarded(const std::function<int()>& body, std::ostream& err)
{
    try {
        return body();
    } catch (const dynamics::IntegrationError& e) {
        err << "error: integration failed: " << e.what() << '\n';
        return exit_numeric;
    } catch (const StepFailure& e) {
        err << "error: integration failed: " << e.what() << '\n';
        return exit_numeric;
    } catch (const OverflowError& e) {
        err << "error: overflow: " << e.what() << '\n';
        return exit_numeric;
    } catch (const DegenerateBranchError& e) {
        err << "error: " << e.what() << '\n';
        return exit_numeric;
    } catch (const io::ConfigError& e) {
        err << "error: config: " << e.what() << '\n';
        return exit_input;
    } catch (const io::CsvError& e) {
        err << "error: csv: " << e.what() << '\n';
        return exit_input;
    } catch (const io::ExprError& e) {
        err << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_numeric;
    }
}

namespace detail {

inline std::filesystem::path prepare_out(const std::string& out_dir)
{
    if (out_dir.empty()) throw io::ConfigError("--out is required");
    std::filesystem::create_directories(out_dir);
    return out_dir;
}

inline std::string label(Branch b) { return b == Branch::plus ? "1" : "-1"; }

inline json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

inline json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

/// Driving branch and eigenvalue label for a scenario; sample draws with `seed`.
struct BranchChoice {
    Branch lambda;
    Branch outcome;
    bool sampled;
};

inline BranchChoice choose_branch(const io::Scenario& sc, std::uint64_t seed)
{
    const ObservableSpec& spec = sc.observable;
    if (sc.lambda == io::LambdaSetting::sample) {
        const Branch outcome = measurement::sample_outcome(BlochVector(sc.n0), spec, seed);
        return {measurement::branch_for_outcome(outcome, spec, sc.geometry), outcome, true};
    }
    const Branch lam = sc.lambda == io::LambdaSetting::plus ? Branch::plus : Branch::minus;
    const Branch outcome = measurement::region_sign(spec, sc.geometry) > 0.0 ? lam : opposite(lam);
    return {lam, outcome, false};
}

/// Largest rise of |dn/dt| above its running minimum once the rate has first
/// dropped below 1e-2 omega: the transient left after precession has ceased.
inline double post_settle_rebound(const dynamics::Trajectory& traj, double omega_rate)
{
    const auto t0 = dynamics::first_time_below(traj, 1e-2 * omega_rate);
    if (!t0) return 0.0;
    double low = std::numeric_limits<double>::infinity();
    double rise = 0.0;
    for (const auto& s : traj.samples) {
        if (s.t < *t0) continue;
        low = std::fmin(low, s.rate);
        rise = std::fmax(rise, s.rate - low);
    }
    return rise;
}

inline json casimir_json(const io::Scenario& sc, Branch lambda)
{
    json j;
    const double w = sc.observable.omega_rate;
    const double Theta = geometry::effective_Theta(sc.observable, sc.geometry);
    j["Theta_effective"] = Theta;
    j["region"] = geometry::to_string(geometry::outcome_region(Theta));
    if (const auto* im = std::get_if<potentials::InvertedMorse>(&sc.potential)) {
        const auto peak = geometry::casimirs(w, im->g0_rate, Theta);
        j["at_peak"] = {{"c1", peak.c1}, {"c2", sign(lambda) * peak.c2}};
        if (im->g0_rate >= w) {
            const auto [tm, tp] = potentials::morse_crossing_times(im->g0_rate, im->kappa, w);
            j["c1_zero_times_s"] = {tm, tp};
            j["c2_at_crossing"] = sign(lambda) * geometry::casimirs(w, w, Theta).c2;
        } else {
            j["c1_zero_times_s"] = nullptr;
        }
    }
    return j;
}

inline std::vector<std::string> scenario_comments(const io::Scenario& sc)
{
    std::vector<std::string> c{"scenario: " + sc.name};
    if (!sc.description.empty()) c.push_back("description: " + sc.description);
    return c;
}

template <class Job>
void run_parallel(std::size_t jobs, Job&& job)
{
    const unsigned workers = measurement::worker_count(jobs);
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < jobs; i += workers) job(i);
        });
    for (std::size_t i = 0; i < jobs; i += workers) job(i);
    for (auto& t : pool) t.join();
}

}  // namespace detail

// --- simulate ----------------------------------------------------------------

inline int cmd_simulate(const std::string& config, const std::string& out_dir, std::optional<std::uint64_t> seed,
                        std::ostream& err)
{
    return guarded(
        [&] {
            const io::Scenario sc = io::load_scenario(config);
            const auto out = detail::prepare_out(out_dir);
            const std::uint64_t s = seed.value_or(sc.seed);
            const auto choice = detail::choose_branch(sc, s);
            const Vec3 reference = sign(choice.outcome) * sc.observable.unit();

            auto comments = detail::scenario_comments(sc);
            comments.push_back("lambda: " + detail::label(choice.lambda) +
                               ", outcome: " + detail::label(choice.outcome));
            comments.push_back("units: t_s in s; rates in rad/s; n dimensionless");

            const auto t0 = std::chrono::steady_clock::now();
            dynamics::Trajectory traj;
            try {
                traj = dynamics::integrate_bloch(BlochVector(sc.n0), sc.observable, sc.device(), choice.lambda,
                                                 sc.integrator);
            } catch (const dynamics::IntegrationError& e) {
                std::ostringstream csv;
                comments.push_back("partial: integration failed");
                io::write_trajectory(csv, e.partial(), io::Axis::time, comments, reference);
                io::write_file((out / "trajectory.csv").string(), csv.str());
                throw;
            }
            const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

            std::ostringstream csv;
            io::write_trajectory(csv, traj, io::Axis::time, comments, reference);
            io::write_file((out / "trajectory.csv").string(), csv.str());

            const BlochVector fin = measurement::final_state(traj);
            const double w = sc.observable.omega_rate;
            double min_norm = 1.0, max_norm = 0.0;
            for (const auto& x : traj.samples) {
                min_norm = std::fmin(min_norm, x.norm);
                max_norm = std::fmax(max_norm, x.norm);
            }

            json r;
            r["scenario"] = sc.name;
            r["config"] = io::serialize_scenario(sc);
            r["seed"] = s;
            r["lambda"] = static_cast<int>(sign(choice.lambda));
            r["outcome"] = static_cast<int>(sign(choice.outcome));
            r["lambda_sampled"] = choice.sampled;
            r["born_probability"] = born_probability(BlochVector(sc.n0), sc.observable, choice.outcome);
            r["g_direction"] = detail::vec_json(geometry::resolve_direction(sc.observable, sc.geometry));
            r["final_time_s"] = traj.back().t;
            r["final_state"] = detail::vec_json(fin.vec());
            r["final_norm"] = norm(traj.back().n);
            r["reference"] = detail::vec_json(reference);
            r["deviation"] = norm(fin.vec() - reference);
            r["w_dot_n_final"] = dot(sc.observable.unit(), fin.vec());
            r["min_norm"] = min_norm;
            r["max_norm"] = max_norm;
            r["settle_time_s"] = detail::opt_json(dynamics::settle_time(traj, 1e-2 * w));
            r["post_settle_rebound_rate"] = detail::post_settle_rebound(traj, w);
            r["casimirs"] = detail::casimir_json(sc, choice.lambda);
            r["accepted_steps"] = traj.diagnostics.accepted_steps;
            r["rejected_steps"] = traj.diagnostics.rejected_steps;
            r["wall_clock_s"] = wall;
            io::write_file((out / "report.json").string(), detail::dump(r));
            return int{exit_ok};
        },
        err);
}

// --- sweep -------------------------------------------------------------------

namespace detail {

struct SweepPoint {
    std::string label;
    io::Scenario scenario;
};

inline io::Scenario with_value(const io::Scenario& base, const std::string& var, double v)
{
    io::Scenario sc = base;
    if (var == "Theta") {
        sc.geometry.Theta = v;
        sc.geometry.phi.reset();
    } else if (var == "theta") {
        sc.geometry.theta = v;
        if (sc.geometry.phi) sc.geometry.Theta = geometry::effective_Theta(sc.observable, sc.geometry);
    } else if (var == "g0" || var == "kappa") {
        auto* im = std::get_if<potentials::InvertedMorse>(&sc.potential);
        if (!im) throw io::ConfigError("sweep variable '" + var + "' needs an inverted_morse potential");
        (var == "g0" ? im->g0_rate : im->kappa) = v;
        potentials::validate(sc.potential);
    } else if (var == "lambda") {
        if (v != 1.0 && v != -1.0) throw io::ConfigError("lambda sweep values must be 1 or -1");
        sc.lambda = v > 0 ? io::LambdaSetting::plus : io::LambdaSetting::minus;
    }
    (void)geometry::resolve_direction(sc.observable, sc.geometry);
    return sc;
}

inline std::vector<SweepPoint> expand_sweep(const io::Scenario& base)
{
    if (!base.sweep) throw io::ConfigError("scenario has no sweep section");
    const auto& sw = *base.sweep;
    std::vector<SweepPoint> pts;
    if (sw.variable == "n0") {
        if (sw.states.empty()) throw io::ConfigError("sweep grid is empty");
        for (const auto& st : sw.states) {
            if (!(norm(st) <= 1.0 + bloch_norm_tol)) throw io::ConfigError("sweep state outside the Bloch ball");
            io::Scenario sc = base;
            sc.n0 = st;
            pts.push_back({io::format_double(st.x) + " " + io::format_double(st.y) + " " + io::format_double(st.z), sc});
        }
    } else {
        if (sw.values.empty()) throw io::ConfigError("sweep grid is empty");
        for (double v : sw.values) pts.push_back({io::format_double(v), with_value(base, sw.variable, v)});
    }
    return pts;
}

}  // namespace detail

inline int cmd_sweep(const std::string& config, const std::string& out_dir, std::ostream& err)
{
    return guarded(
        [&] {
            const io::Scenario base = io::load_scenario(config);
            const auto out = detail::prepare_out(out_dir);
            const auto points = detail::expand_sweep(base);
            const auto& var = base.sweep->variable;

            struct Job {
                std::size_t point;
                Branch lambda;
            };
            std::vector<Job> jobs;
            for (std::size_t i = 0; i < points.size(); ++i) {
                const auto& sc = points[i].scenario;
                if (sc.lambda == io::LambdaSetting::sample) {
                    jobs.push_back({i, Branch::plus});
                    jobs.push_back({i, Branch::minus});
                } else {
                    jobs.push_back({i, sc.lambda == io::LambdaSetting::plus ? Branch::plus : Branch::minus});
                }
            }

            struct Result {
                dynamics::Trajectory traj;
                std::string error;
            };
            std::vector<Result> results(jobs.size());
            detail::run_parallel(jobs.size(), [&](std::size_t k) {
                const auto& sc = points[jobs[k].point].scenario;
                try {
                    results[k].traj = dynamics::integrate_bloch(BlochVector(sc.n0), sc.observable, sc.device(),
                                                                jobs[k].lambda, sc.integrator);
                } catch (const dynamics::IntegrationError& e) {
                    results[k].traj = e.partial();
                    results[k].error = e.what();
                }
            });

            io::Table table({var, "lambda", "outcome", "born_probability", "n1", "n2", "n3", "norm", "w_dot_n",
                             "deviation", "deviation_lambda", "settle_time_s", "late_min_rate_per_s", "status"});
            for (const auto& c : detail::scenario_comments(base)) table.comment(c);
            table.comment("sweep: " + var);
            std::string grid = "grid:";
            for (const auto& p : points) grid += " [" + p.label + "]";
            table.comment(grid);
            table.comment("units: times in s; rates in rad/s; deviation is |n_final - outcome w_hat|");
            table.comment("late_min_rate_per_s: min |dn/dt| after the last g = omega crossing (else after ln2/kappa)");

            int code = exit_ok;
            for (std::size_t k = 0; k < jobs.size(); ++k) {
                const auto& sc = points[jobs[k].point].scenario;
                const auto& traj = results[k].traj;
                const Branch lam = jobs[k].lambda;
                const Branch outcome =
                    measurement::region_sign(sc.observable, sc.geometry) > 0.0 ? lam : opposite(lam);
                const Vec3 w = sc.observable.unit();
                const bool ok = results[k].error.empty() && !traj.empty();
                if (!ok) {
                    code = exit_numeric;
                    err << "error: sweep point " << points[jobs[k].point].label << ", lambda " << sign(lam) << ": "
                        << results[k].error << '\n';
                }
                const Vec3 n = traj.empty() ? Vec3{} : measurement::final_state(traj).vec();
                const double t_late = measurement::late_window_start(sc.observable, sc.potential);
                double late_min = std::numeric_limits<double>::infinity();
                for (const auto& s : traj.samples)
                    if (s.t > t_late) late_min = std::fmin(late_min, s.rate);
                const auto settle = dynamics::settle_time(traj, 1e-2 * sc.observable.omega_rate);
                table.add({points[jobs[k].point].label, detail::label(lam), detail::label(outcome),
                           io::fmt17(born_probability(BlochVector(sc.n0), sc.observable, outcome)), io::fmt17(n.x),
                           io::fmt17(n.y), io::fmt17(n.z), io::fmt17(norm(n)), io::fmt17(dot(w, n)),
                           io::fmt17(norm(n - sign(outcome) * w)), io::fmt17(norm(n - sign(lam) * w)),
                           settle ? io::fmt17(*settle) : "", io::fmt17(late_min), ok ? "ok" : "integration_failure"});
            }
            std::ostringstream os;
            table.write(os);
            io::write_file((out / "results.csv").string(), os.str());
            return code;
        },
        err);
}

// --- sample ------------------------------------------------------------------

inline int cmd_sample(const std::string& config, const std::string& out_dir, std::optional<std::size_t> runs,
                      std::optional<std::uint64_t> seed, std::ostream& err)
{
    return guarded(
        [&] {
            const io::Scenario sc = io::load_scenario(config);
            if (sc.lambda != io::LambdaSetting::sample)
                throw io::ConfigError("field 'lambda': the sample command needs lambda: sample");
            const std::size_t n = runs.value_or(sc.runs ? sc.runs : 100000);
            if (n == 0) throw io::ConfigError("--runs must be positive");
            const std::uint64_t s = seed.value_or(sc.seed);
            const auto out = detail::prepare_out(out_dir);

            const auto res = measurement::ensemble_run(BlochVector(sc.n0), sc.observable, sc.device(), n, s,
                                                       sc.integrator, true);
            auto dev = [](const std::optional<measurement::MeasurementRecord>& r) {
                return r ? io::fmt17(r->deviation) : std::string{};
            };
            io::Table stats({"n_runs", "count_plus", "count_minus", "empirical_p_plus", "born_p_plus", "z_score",
                             "deviation_plus", "deviation_minus"});
            for (const auto& c : detail::scenario_comments(sc)) stats.comment(c);
            stats.comment("seed: " + std::to_string(s));
            stats.comment("deviation_x: |n_final - x w_hat| of the branch reaching outcome x (empty if not drawn)");
            stats.add({std::to_string(res.stats.n_runs), std::to_string(res.stats.count_plus),
                       std::to_string(res.stats.count_minus), io::fmt17(res.stats.empirical_p_plus),
                       io::fmt17(res.stats.born_p_plus), io::fmt17(res.stats.z_score), dev(res.plus_record),
                       dev(res.minus_record)});
            std::ostringstream os;
            stats.write(os);
            io::write_file((out / "ensemble.csv").string(), os.str());

            std::string outcomes = "# seed: " + std::to_string(s) + "\nrun,outcome\n";
            outcomes.reserve(outcomes.size() + n * 10);
            for (std::size_t k = 0; k < n; ++k) {
                outcomes += std::to_string(k);
                outcomes += res.outcomes[k] == Branch::plus ? ",1\n" : ",-1\n";
            }
            io::write_file((out / "outcomes.csv").string(), outcomes);

            io::Table hist({"log10_deviation_from", "count"});
            hist.comment("runs per deviation decade; the last bin is open-ended");
            for (std::size_t b = 0; b < res.histogram.counts.size(); ++b)
                hist.add({io::fmt17(res.histogram.edges[b]), std::to_string(res.histogram.counts[b])});
            std::ostringstream hs;
            hist.write(hs);
            io::write_file((out / "deviation_histogram.csv").string(), hs.str());
            return int{exit_ok};
        },
        err);
}

// --- sg ----------------------------------------------------------------------

inline int cmd_sg(const std::string& config, const std::string& out_dir, std::optional<std::uint64_t> seed,
                  std::ostream& err)
{
    return guarded(
        [&] {
            const io::Scenario sc = io::load_scenario(config);
            if (!sc.stern_gerlach) throw io::ConfigError("field 'stern_gerlach': the sg command needs this section");
            const auto out = detail::prepare_out(out_dir);
            const std::uint64_t s = seed.value_or(sc.seed);
            const auto choice = detail::choose_branch(sc, s);
            sg::SGConfig cfg = *sc.stern_gerlach;
            cfg.lambda = choice.lambda;
            const BlochVector n0(sc.n0);
            const Vec3 reference = sign(choice.outcome) * sc.observable.unit();
            auto comments = detail::scenario_comments(sc);
            comments.push_back("lambda: " + detail::label(choice.lambda));
            comments.push_back("units: L_m in m; rate_per_m is |dn/dL| in 1/m; g_rate_per_s in rad/s");

            const auto t0 = std::chrono::steady_clock::now();
            const auto traj = sg::integrate_bloch_L(n0, cfg, sc.integrator);
            const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::ostringstream csv;
            io::write_trajectory(csv, traj, io::Axis::length, comments, reference);
            io::write_file((out / "trajectory_L.csv").string(), csv.str());

            std::vector<double> L;
            L.reserve(traj.size());
            for (const auto& x : traj.samples) L.push_back(x.t);
            const auto analytic = sg::bloch_sg_analytic_series(L, n0, cfg);
            std::vector<double> t_grid(L);
            for (double& x : t_grid) x /= cfg.V;
            const potentials::GammaTable gam(sg::time_profile(cfg), t_grid);

            io::Table an({"L_m", "n1", "n2", "n3", "norm", "gamma"});
            for (const auto& c : comments) an.comment(c);
            an.comment("closed-form solution on the same grid");
            double max_gap = 0.0, max_transverse = 0.0, min_norm = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < L.size(); ++i) {
                Vec3 a = analytic[i];
                const double r = norm(a);
                if (r > 1.0) a = a / r;
                an.add({io::fmt17(L[i]), io::fmt17(a.x), io::fmt17(a.y), io::fmt17(a.z), io::fmt17(norm(a)),
                        io::fmt17(gam[i])});
                const Vec3 n = traj.samples[i].n;
                if (gam[i] <= analytic::log_domain_seam) max_gap = std::fmax(max_gap, norm(n - a));
                max_transverse = std::fmax(max_transverse, std::hypot(n.x, n.y));
                min_norm = std::fmin(min_norm, traj.samples[i].norm);
            }
            std::ostringstream as;
            an.write(as);
            io::write_file((out / "analytic_L.csv").string(), as.str());

            json r;
            r["scenario"] = sc.name;
            r["config"] = io::serialize_scenario(sc);
            r["lambda"] = static_cast<int>(sign(choice.lambda));
            r["omega_rate"] = sc.observable.omega_rate;
            r["prefactor_rate_per_s3"] = sg::prefactor_rate(cfg);
            r["final_state"] = detail::vec_json(measurement::final_state(traj).vec());
            r["reference"] = detail::vec_json(reference);
            r["deviation"] = norm(measurement::final_state(traj).vec() - reference);
            r["transition_length_m"] = detail::opt_json(sg::transition_length(traj, 0.999));
            r["critical_length_m"] = detail::opt_json(sg::critical_length(cfg));
            r["max_gap_pre_saturation"] = max_gap;
            r["max_transverse"] = max_transverse;
            r["initial_norm"] = norm(sc.n0);
            r["min_norm"] = min_norm;
            r["gamma_final"] = gam.size() ? gam[gam.size() - 1] : 0.0;
            r["gyromagnetic_mismatch"] = cfg.constants.gyromagnetic_mismatch();
            r["wall_clock_s"] = wall;
            io::write_file((out / "report.json").string(), detail::dump(r));
            return int{exit_ok};
        },
        err);
}

// --- param-space ---------------------------------------------------------------

inline int cmd_param_space(double alpha, std::size_t resolution, const std::string& out_dir, bool svg,
                           std::ostream& err)
{
    return guarded(
        [&] {
            const auto out = detail::prepare_out(out_dir);
            const auto mesh = geometry::cross_section(alpha, resolution);
            io::Table t({"theta", "Theta", "admissible", "region"});
            t.comment("alpha: " + io::fmt17(alpha));
            t.comment("angles in rad; region is the side of Theta = pi/2");
            for (const auto& p : mesh)
                t.add({io::fmt17(p.theta), io::fmt17(p.Theta), p.admissible ? "1" : "0",
                       geometry::to_string(p.region)});
            std::ostringstream os;
            t.write(os);
            io::write_file((out / "cross_section.csv").string(), os.str());
            if (svg) {
                std::vector<io::Cell> cells;
                for (const auto& p : mesh) {
                    if (!p.admissible) continue;
                    const char* color = p.region == geometry::OutcomeRegion::below   ? "#1b9e77"
                                        : p.region == geometry::OutcomeRegion::above ? "#7570b3"
                                                                                     : "#1f4fd8";
                    cells.push_back({p.theta, p.Theta, color});
                }
                io::PlotSpec spec;
                spec.title = "cross-section at alpha = " + io::fmt17(alpha);
                spec.x_label = "theta";
                spec.y_label = "Theta";
                const double step = geometry::pi / static_cast<double>(resolution - 1);
                io::write_file((out / "cross_section.svg").string(),
                               io::render_cells(spec, cells, step, step,
                                                {{"outcome lambda", "#1b9e77"},
                                                 {"outcome -lambda", "#7570b3"},
                                                 {"Theta = pi/2", "#1f4fd8"}}));
            }
            return int{exit_ok};
        },
        err);
}

// --- plot ----------------------------------------------------------------------

inline int cmd_plot(const std::string& csv_path, const std::string& out_svg, bool log_axis, std::ostream& err)
{
    return guarded(
        [&] {
            if (out_svg.empty()) throw io::ConfigError("--out is required");
            const io::NumericCsv csv = io::read_numeric_csv_file(csv_path);
            if (csv.columns.empty() || csv.rows.empty()) throw io::CsvError("'" + csv_path + "' has no data rows");
            const std::string xcol = csv.columns[0];
            if (xcol != "t_s" && xcol != "L_m")
                throw io::CsvError("first column must be t_s or L_m, found '" + xcol + "'");
            const int i1 = csv.column("n1"), i2 = csv.column("n2"), i3 = csv.column("n3");
            if (i1 < 0 || i2 < 0 || i3 < 0) throw io::CsvError("columns n1, n2, n3 are required");
            const int inorm = csv.column("norm");

            std::vector<io::Series> series{{"n1", "#d62728", {}, {}, false},
                                           {"n2", "#2ca02c", {}, {}, false},
                                           {"n3", "#1f77b4", {}, {}, false}};
            if (inorm >= 0) series.push_back({"|n|", "#000000", {}, {}, true});
            const int cols[4] = {i1, i2, i3, inorm};
            for (const auto& row : csv.rows)
                for (std::size_t k = 0; k < series.size(); ++k) {
                    series[k].x.push_back(row[0]);
                    series[k].y.push_back(row[static_cast<std::size_t>(cols[k])]);
                }
            std::vector<io::ReferenceLine> refs;
            if (csv.reference)
                refs = {{csv.reference->x, "#d62728"}, {csv.reference->y, "#2ca02c"}, {csv.reference->z, "#1f77b4"}};
            io::PlotSpec spec;
            spec.title = std::filesystem::path(csv_path).filename().string();
            spec.x_label = xcol == "t_s" ? "t [s]" : "L [m]";
            spec.y_label = "n";
            spec.log_x = log_axis;
            const auto parent = std::filesystem::path(out_svg).parent_path();
            if (!parent.empty()) std::filesystem::create_directories(parent);
            io::write_file(out_svg, io::render_svg(spec, series, refs));
            return int{exit_ok};
        },
        err);
}

}  // namespace qlm::cli
