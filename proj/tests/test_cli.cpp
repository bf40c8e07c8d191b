#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qlm/cli/commands.hpp"

using namespace qlm;
using json = nlohmann::json;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
namespace fs = std::filesystem;

namespace {

const fs::path source_dir{QLM_SOURCE_DIR};

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / "qlm_cli_test" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string scenario(const std::string& name) { return (source_dir / "scenarios" / (name + ".yaml")).string(); }

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json report(const fs::path& dir) { return json::parse(slurp(dir / "report.json")); }

fs::path write_yaml(const fs::path& dir, const std::string& text)
{
    const fs::path p = dir / "config.yaml";
    std::ofstream(p) << text;
    return p;
}

// quick device: kappa = 1e6 so the drive is over by 2e-5 s
const std::string quick_doc = R"(name: quick
observable: {omega_rate: 1e8, alpha: pi/2, beta_az: -pi/6}
device:
  theta: 3*pi/4
  Theta: pi/3
  chart_branch: 1
  potential: {kind: inverted_morse, g0_rate: 1e8, kappa: 1e6}
lambda: sample
initial_state: [0, -1/2, -1/2]
integrator: {t_final: 2e-5, samples_per_decade: 40}
seed: 5
runs: 20000
)";

int run_binary(const std::string& args)
{
    const std::string cmd = std::string("\"") + QLM_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("simulate: depolarized start reaches lambda w")
{
    const auto out = scratch("sim");
    std::ostringstream err;
    REQUIRE(cli::cmd_simulate(scenario("fig3_depolarized_plus"), out.string(), std::nullopt, err) == 0);
    const json r = report(out);
    CHECK(r["deviation"].get<double>() < 1e-6);
    CHECK(r["lambda"] == 1);
    CHECK(r["outcome"] == 1);
    CHECK_FALSE(r["lambda_sampled"].get<bool>());
    CHECK_THAT(r["born_probability"].get<double>(), WithinAbs(0.5, 1e-15));
    CHECK(r["max_norm"].get<double>() <= 1.0 + 1e-8);

    const auto csv = io::read_numeric_csv_file((out / "trajectory.csv").string());
    CHECK(csv.columns.front() == "t_s");
    REQUIRE(csv.reference);
    CHECK(csv.rows.size() > 1000);
    CHECK(csv.rows.front()[0] == 0.0);
}

TEST_CASE("simulate: disturbance after settling depends on Theta")
{
    const auto a = scratch("theta0"), b = scratch("theta_pi3");
    std::ostringstream err;
    REQUIRE(cli::cmd_simulate(scenario("fig6_theta0"), a.string(), std::nullopt, err) == 0);
    REQUIRE(cli::cmd_simulate(scenario("fig6_theta_pi3"), b.string(), std::nullopt, err) == 0);
    const double aligned = report(a)["post_settle_rebound_rate"].get<double>();
    const double tilted = report(b)["post_settle_rebound_rate"].get<double>();
    CHECK(aligned < 1e-6 * 1e8);
    CHECK(tilted > 1e3 * aligned);
    CHECK(report(a)["deviation"].get<double>() < 1e-6);
}

TEST_CASE("simulate: failures map to exit codes")
{
    const auto dir = scratch("fail");
    std::ostringstream err;
    CHECK(cli::cmd_simulate((dir / "missing.yaml").string(), (dir / "o").string(), std::nullopt, err) == 2);

    const auto bad = write_yaml(dir, "name: x\nobservable: {omega_rate: oops, alpha: 1}\n");
    err.str("");
    CHECK(cli::cmd_simulate(bad.string(), (dir / "o").string(), std::nullopt, err) == 2);
    CHECK_THAT(err.str(), ContainsSubstring("observable.omega_rate"));

    std::string doc = quick_doc;
    doc.replace(doc.find("integrator: {"), 13, "integrator: {max_steps: 20, frame: lab, ");
    const auto slow = write_yaml(dir, doc);
    CHECK(cli::cmd_simulate(slow.string(), (dir / "o").string(), std::nullopt, err) == 3);
    // partial trajectory is kept
    CHECK(fs::exists(dir / "o" / "trajectory.csv"));
}

TEST_CASE("sample: reproducible bytes and Born frequencies")
{
    const auto dir = scratch("sample");
    const auto cfg = write_yaml(dir, quick_doc);
    std::ostringstream err;
    REQUIRE(cli::cmd_sample(cfg.string(), (dir / "a").string(), std::nullopt, std::nullopt, err) == 0);
    REQUIRE(cli::cmd_sample(cfg.string(), (dir / "b").string(), std::nullopt, std::nullopt, err) == 0);
    CHECK(slurp(dir / "a" / "outcomes.csv") == slurp(dir / "b" / "outcomes.csv"));
    CHECK(slurp(dir / "a" / "ensemble.csv") == slurp(dir / "b" / "ensemble.csv"));

    const auto ens = io::read_numeric_csv_file((dir / "a" / "ensemble.csv").string());
    REQUIRE(ens.rows.size() == 1);
    CHECK(ens.rows[0][ens.column("n_runs")] == 20000);
    CHECK(std::fabs(ens.rows[0][ens.column("z_score")]) < 3.0);
    CHECK(ens.rows[0][ens.column("deviation_plus")] < 1e-6);

    REQUIRE(cli::cmd_sample(cfg.string(), (dir / "c").string(), 1000, 99, err) == 0);
    CHECK(slurp(dir / "c" / "outcomes.csv") != slurp(dir / "a" / "outcomes.csv"));
}

TEST_CASE("sample: an eigenstate always gives +1")
{
    const auto dir = scratch("eigen");
    std::string doc = quick_doc;
    doc.replace(doc.find("[0, -1/2, -1/2]"), 15, "[sqrt(3)/2, -1/2, 0]");
    const auto cfg = write_yaml(dir, doc);
    std::ostringstream err;
    REQUIRE(cli::cmd_sample(cfg.string(), (dir / "o").string(), 5000, std::nullopt, err) == 0);
    const auto out = io::read_numeric_csv_file((dir / "o" / "outcomes.csv").string());
    REQUIRE(out.rows.size() == 5000);
    for (const auto& r : out.rows) CHECK(r[1] == 1.0);
}

TEST_CASE("sample: needs lambda sample and positive runs")
{
    const auto dir = scratch("sample_bad");
    std::ostringstream err;
    CHECK(cli::cmd_sample(scenario("fig3_depolarized_plus"), dir.string(), 10, std::nullopt, err) == 2);
    const auto cfg = write_yaml(dir, quick_doc);
    CHECK(cli::cmd_sample(cfg.string(), (dir / "o").string(), 0, std::nullopt, err) == 2);
}

TEST_CASE("sweep: grid rows and empty grids")
{
    const auto dir = scratch("sweep");
    const auto cfg = write_yaml(dir, quick_doc + "sweep: {variable: Theta, values: [pi/3, 2*pi/3]}\n");
    std::ostringstream err;
    REQUIRE(cli::cmd_sweep(cfg.string(), (dir / "o").string(), err) == 0);
    const std::string text = slurp(dir / "o" / "results.csv");
    CHECK_THAT(text, ContainsSubstring("Theta,lambda,outcome"));
    // lambda: sample runs both branches per grid point
    std::size_t rows = 0;
    std::istringstream is(text);
    for (std::string line; std::getline(is, line);)
        if (!line.empty() && line[0] != '#' && line.rfind("Theta", 0) != 0) ++rows;
    CHECK(rows == 4);

    const auto empty = write_yaml(dir, quick_doc + "sweep: {variable: Theta, values: []}\n");
    CHECK(cli::cmd_sweep(empty.string(), (dir / "e").string(), err) == 2);
    const auto none = write_yaml(dir, quick_doc);
    CHECK(cli::cmd_sweep(none.string(), (dir / "n").string(), err) == 2);
}

TEST_CASE("sg: report for a depolarized beam")
{
    const auto out = scratch("sg");
    std::ostringstream err;
    REQUIRE(cli::cmd_sg(scenario("fig12_sg_depolarized_plus"), out.string(), std::nullopt, err) == 0);
    const json r = report(out);
    CHECK(r["max_transverse"].get<double>() == 0.0);
    CHECK(r["max_gap_pre_saturation"].get<double>() < 1e-6);
    CHECK(r["deviation"].get<double>() < 1e-6);
    const double Lt = r["transition_length_m"].get<double>();
    const double Lc = r["critical_length_m"].get<double>();
    CHECK(Lt > 1e-4);
    CHECK(Lt < 1e-2);
    CHECK(Lc > 0.0);
    const auto traj = io::read_numeric_csv_file((out / "trajectory_L.csv").string());
    CHECK(traj.columns.front() == "L_m");
    CHECK(traj.column("rate_per_m") == 5);
    CHECK(fs::exists(out / "analytic_L.csv"));

    CHECK(cli::cmd_sg(scenario("fig3_depolarized_plus"), scratch("sg_bad").string(), std::nullopt, err) == 2);
}

TEST_CASE("param-space cross sections")
{
    const auto out = scratch("ps");
    std::ostringstream err;
    REQUIRE(cli::cmd_param_space(0.0, 11, out.string(), true, err) == 0);
    const std::string text = slurp(out / "cross_section.csv");
    std::istringstream is(text);
    std::size_t admissible = 0, total = 0;
    for (std::string line; std::getline(is, line);) {
        if (line.empty() || line[0] == '#' || line.rfind("theta", 0) == 0) continue;
        const auto cells = io::split_commas(line);
        REQUIRE(cells.size() == 4);
        ++total;
        if (cells[2] == "1") {
            ++admissible;
            CHECK(io::evaluate(cells[0]) == io::evaluate(cells[1]));
        }
    }
    CHECK(total == 121);
    CHECK(admissible == 11);
    CHECK_THAT(slurp(out / "cross_section.svg"), ContainsSubstring("<svg"));

    const auto small = scratch("ps2");
    REQUIRE(cli::cmd_param_space(std::numbers::pi / 2, 2, small.string(), false, err) == 0);
    CHECK_FALSE(fs::exists(small / "cross_section.svg"));
    CHECK(cli::cmd_param_space(4.0, 11, small.string(), false, err) == 2);
    CHECK(cli::cmd_param_space(1.0, 1, small.string(), false, err) == 2);
}

TEST_CASE("plot: trajectory CSV to SVG, malformed input rejected")
{
    const auto dir = scratch("plot");
    std::ostringstream err;
    REQUIRE(cli::cmd_simulate(write_yaml(dir, quick_doc).string(), (dir / "sim").string(), std::nullopt, err) == 0);
    const auto svg = dir / "traj.svg";
    REQUIRE(cli::cmd_plot((dir / "sim" / "trajectory.csv").string(), svg.string(), true, err) == 0);
    const std::string text = slurp(svg);
    CHECK(text.rfind("<svg", 0) == 0);
    CHECK_THAT(text, ContainsSubstring("stroke-dasharray"));

    std::ofstream(dir / "empty.csv") << "";
    CHECK(cli::cmd_plot((dir / "empty.csv").string(), (dir / "e.svg").string(), false, err) == 2);
    std::ofstream(dir / "wrong.csv") << "x,y\n1,2\n";
    CHECK(cli::cmd_plot((dir / "wrong.csv").string(), (dir / "w.svg").string(), false, err) == 2);
    CHECK(cli::cmd_plot((dir / "nope.csv").string(), (dir / "n.svg").string(), false, err) == 2);
}

TEST_CASE("binary: exit codes")
{
    const auto dir = scratch("bin");
    CHECK(run_binary("--help") == 0);
    CHECK(run_binary("") == 2);
    CHECK(run_binary("simulate") == 2);
    CHECK(run_binary("frobnicate") == 2);
    CHECK(run_binary("simulate --config " + (dir / "none.yaml").string() + " --out " + dir.string()) == 2);
    CHECK(run_binary("param-space --alpha pi/3 --resolution 5 --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "cross_section.csv"));
    CHECK(run_binary("param-space --alpha 'pi/' --out " + dir.string()) == 2);
    const auto cfg = write_yaml(dir, quick_doc);
    CHECK(run_binary("simulate --config " + cfg.string() + " --out " + (dir / "s").string() + " --seed 3") == 0);
    CHECK(report(dir / "s")["seed"] == 3);
}
