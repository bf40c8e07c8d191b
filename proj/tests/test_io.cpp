#include <catch_amalgamated.hpp>

#include <filesystem>
#include <sstream>

#include "qlm/io/csv.hpp"
#include "qlm/io/expr.hpp"
#include "qlm/io/scenario.hpp"
#include "qlm/io/svg.hpp"

using namespace qlm;
using namespace qlm::io;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const std::string base_doc = R"(name: t
observable: {omega_rate: 1e8, alpha: pi/2, beta_az: -pi/6}
device:
  theta: 3*pi/4
  Theta: pi/3
  chart_branch: 1
  potential: {kind: inverted_morse, g0_rate: 1e8, kappa: 1e5}
lambda: 1
initial_state: [0, -1/2, -1/2]
)";

std::string config_error(const std::string& doc)
{
    try {
        parse_scenario(doc);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::string replace(std::string s, const std::string& from, const std::string& to)
{
    const auto p = s.find(from);
    REQUIRE(p != std::string::npos);
    return s.replace(p, from.size(), to);
}

}  // namespace

TEST_CASE("expressions")
{
    CHECK(evaluate("1e8") == 1e8);
    CHECK(evaluate("3*pi/4") == 3 * std::numbers::pi / 4);
    CHECK_THAT(evaluate("pi/2 - 1e-3"), WithinAbs(std::numbers::pi / 2 - 1e-3, 1e-16));
    CHECK_THAT(evaluate("1/sqrt(2)"), WithinAbs(1 / std::sqrt(2.0), 1e-16));
    CHECK_THAT(evaluate("1e8/10^2.5"), WithinRel(1e8 / std::pow(10.0, 2.5), 1e-15));
    CHECK(evaluate("-2^2") == -4.0);
    CHECK(evaluate("2^-1") == 0.5);
    CHECK(evaluate(" ( 1 + 2 ) * 3 ") == 9.0);
    CHECK(evaluate("e") == std::numbers::e);
    CHECK(evaluate("--1") == 1.0);

    CHECK_THROWS_AS(evaluate(""), ExprError);
    CHECK_THROWS_AS(evaluate("1 +"), ExprError);
    CHECK_THROWS_AS(evaluate("(1"), ExprError);
    CHECK_THROWS_AS(evaluate("sqrt(-1)"), ExprError);
    CHECK_THROWS_AS(evaluate("1/0"), ExprError);
    CHECK_THROWS_AS(evaluate("pie"), ExprError);
    CHECK_THROWS_AS(evaluate("2 3"), ExprError);
}

TEST_CASE("scenario parsing")
{
    const Scenario sc = parse_scenario(base_doc);
    CHECK(sc.name == "t");
    CHECK(sc.observable.omega_rate == 1e8);
    CHECK(sc.geometry.chart_branch == 1);
    CHECK(sc.lambda == LambdaSetting::plus);
    CHECK(sc.n0.y == -0.5);
    CHECK(sc.integrator.rtol == 1e-9);
    CHECK(sc.integrator.frame == dynamics::Frame::rotating);
    CHECK_FALSE(sc.sweep);
    CHECK_FALSE(sc.is_stern_gerlach());

    const Scenario polar = parse_scenario(replace(base_doc, "  Theta: pi/3\n  chart_branch: 1\n", "  phi: 0\n"));
    REQUIRE(polar.geometry.phi);
    CHECK(polar.geometry.Theta > 0.0);

    const Scenario sample = parse_scenario(replace(base_doc, "lambda: 1", "lambda: sample"));
    CHECK(sample.lambda == LambdaSetting::sample);

    const Scenario lab = parse_scenario(base_doc + "integrator: {frame: lab, t_final: 2e-4}\nsweep: {variable: Theta, "
                                                   "values: [pi/3, pi/2]}\n");
    CHECK(lab.integrator.frame == dynamics::Frame::lab);
    REQUIRE(lab.sweep);
    CHECK(lab.sweep->values.size() == 2);
}

TEST_CASE("scenario errors name the line and field")
{
    CHECK_THAT(config_error(replace(base_doc, "omega_rate: 1e8", "omega_rate: 1e8*")),
               ContainsSubstring("line 2") && ContainsSubstring("observable.omega_rate"));
    CHECK_THAT(config_error(replace(base_doc, "  chart_branch: 1\n", "")),
               ContainsSubstring("device.chart_branch") && ContainsSubstring("missing"));
    CHECK_THAT(config_error(replace(base_doc, "  chart_branch: 1\n", "  chart_branch: 2\n")),
               ContainsSubstring("line 6"));
    CHECK_THAT(config_error(replace(base_doc, "lambda: 1", "lambda: 0")), ContainsSubstring("lambda"));
    CHECK_THAT(config_error(replace(base_doc, "[0, -1/2, -1/2]", "[1, 1, 0]")), ContainsSubstring("initial_state"));
    CHECK_THAT(config_error(replace(base_doc, "[0, -1/2, -1/2]", "[0, 0]")), ContainsSubstring("initial_state"));
    CHECK_THAT(config_error(base_doc + "colour: red\n"), ContainsSubstring("unknown field"));
    CHECK_THAT(config_error(replace(base_doc, "inverted_morse", "square")), ContainsSubstring("device.potential.kind"));
    CHECK_THAT(config_error(replace(base_doc, "Theta: pi/3", "Theta: 0.1")), ContainsSubstring("inadmissible"));
    CHECK_THAT(config_error(base_doc + "integrator: {t_start: 0}\n"), ContainsSubstring("integrator"));
    CHECK_THAT(config_error(base_doc + "sweep: {variable: Theta, values: []}\n"), ContainsSubstring("sweep.values"));
    CHECK_THAT(config_error(base_doc + "sweep: {variable: colour, values: [1]}\n"), ContainsSubstring("sweep.variable"));
    CHECK_THAT(config_error(base_doc + "seed: -1\n"), ContainsSubstring("seed"));
    CHECK_THAT(config_error("name: [unclosed\n"), ContainsSubstring("line"));
    CHECK_THAT(config_error(base_doc + "stern_gerlach: {V: 500}\n"), ContainsSubstring("observable"));
    CHECK_THROWS_AS(load_scenario("/nonexistent/path.yaml"), ConfigError);
}

TEST_CASE("every bundled scenario parses and round-trips")
{
    const std::filesystem::path dir = std::filesystem::path(QLM_SOURCE_DIR) / "scenarios";
    std::size_t n = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".yaml") continue;
        INFO(entry.path().string());
        const Scenario a = load_scenario(entry.path().string());
        CHECK(a.name == entry.path().stem().string());
        const std::string s1 = serialize_scenario(a);
        const Scenario b = parse_scenario(s1);
        CHECK(serialize_scenario(b) == s1);
        CHECK(b.observable.omega_rate == a.observable.omega_rate);
        CHECK(b.observable.alpha == a.observable.alpha);
        CHECK(b.geometry.theta == a.geometry.theta);
        CHECK(b.geometry.Theta == a.geometry.Theta);
        CHECK(b.n0 == a.n0);
        CHECK(b.integrator.t_final == a.integrator.t_final);
        ++n;
    }
    CHECK(n >= 20);
}

TEST_CASE("trajectory CSV round trip")
{
    dynamics::Trajectory traj;
    for (int i = 0; i < 5; ++i) {
        dynamics::TrajectorySample s;
        s.t = 1e-9 * std::pow(10.0, i);
        s.n = {0.1 * i, -1.0 / 3.0, std::sqrt(2.0) / 7};
        s.norm = norm(s.n);
        s.rate = 1e8 / (i + 1);
        s.g_rate = 3.14159e7;
        if (i % 2) s.epsilon = 0.25;
        traj.samples.push_back(s);
    }
    std::stringstream ss;
    write_trajectory(ss, traj, Axis::time, {"scenario: x"}, Vec3{0.5, -0.25, 1.0 / 3.0});
    const NumericCsv csv = read_numeric_csv(ss);
    REQUIRE(csv.columns.size() == 8);
    CHECK(csv.columns[0] == "t_s");
    CHECK(csv.column("rate_per_s") == 5);
    CHECK(csv.column("missing") == -1);
    REQUIRE(csv.rows.size() == 5);
    REQUIRE(csv.reference);
    CHECK(csv.reference->z == 1.0 / 3.0);
    for (int i = 0; i < 5; ++i) {
        const auto& s = traj.samples[static_cast<std::size_t>(i)];
        const auto& r = csv.rows[static_cast<std::size_t>(i)];
        CHECK(r[0] == s.t);
        CHECK(r[1] == s.n.x);
        CHECK(r[2] == s.n.y);
        CHECK(r[3] == s.n.z);
        CHECK(r[5] == s.rate);
        if (s.epsilon)
            CHECK(r[7] == *s.epsilon);
        else
            CHECK(std::isnan(r[7]));
    }
    CHECK(trajectory_header(Axis::length).rfind("L_m,", 0) == 0);
    CHECK_THAT(trajectory_header(Axis::length), ContainsSubstring("rate_per_m"));
}

TEST_CASE("CSV reader errors")
{
    std::stringstream ragged("a,b\n1,2\n3\n");
    CHECK_THROWS_AS(read_numeric_csv(ragged), CsvError);
    std::stringstream text("a,b\n1,ok\n");
    CHECK_THROWS_AS(read_numeric_csv(text), CsvError);
    std::stringstream empty("");
    CHECK(read_numeric_csv(empty).columns.empty());
    CHECK_THROWS_AS(read_numeric_csv_file("/nonexistent.csv"), CsvError);

    Table t({"x", "y"});
    CHECK_THROWS_AS(t.add({"1"}), CsvError);
    t.comment("note");
    t.add({"1", "2"});
    std::stringstream out;
    t.write(out);
    CHECK(out.str() == "# note\nx,y\n1,2\n");
}

TEST_CASE("plot ranges carry a 5% margin")
{
    PlotSpec spec;
    const std::vector<Series> s{{"a", "red", {0.0, 10.0}, {-1.0, 1.0}, false}};
    const auto r = plot_ranges(spec, s);
    CHECK_THAT(r.x.lo, WithinAbs(-0.5, 1e-12));
    CHECK_THAT(r.x.hi, WithinAbs(10.5, 1e-12));
    CHECK_THAT(r.y.lo, WithinAbs(-1.1, 1e-12));
    CHECK_THAT(r.y.hi, WithinAbs(1.1, 1e-12));

    spec.log_x = true;
    const std::vector<Series> l{{"a", "red", {0.0, 1e-9, 1e-3}, {0.0, 0.5, 1.0}, false}};
    const auto rl = plot_ranges(spec, l, {{2.0, "black"}});
    CHECK_THAT(rl.x.lo, WithinAbs(-9.3, 1e-12));
    CHECK_THAT(rl.x.hi, WithinAbs(-2.7, 1e-12));
    // the x = 0 point is dropped on a log axis, so y spans [0.5, 2]
    CHECK_THAT(rl.y.hi, WithinAbs(2.075, 1e-12));

    // flat data still gives a nonempty range
    const auto flat = padded_range(1.0, 1.0, 0.05);
    CHECK(flat.lo < 1.0);
    CHECK(flat.hi > 1.0);
}

TEST_CASE("SVG structure")
{
    PlotSpec spec;
    spec.title = "a < b & c";
    spec.log_x = true;
    const std::vector<Series> s{{"n1", "#1f77b4", {1e-9, 1e-6, 1e-3}, {0.0, 0.5, 1.0}, false},
                                {"norm", "black", {1e-9, 1e-6, 1e-3}, {1.0, 1.0, 1.0}, true}};
    const std::string svg = render_svg(spec, s, {{1.0, "#1f77b4"}});
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK_THAT(svg, ContainsSubstring("</svg>"));
    CHECK_THAT(svg, ContainsSubstring("<polyline"));
    CHECK_THAT(svg, ContainsSubstring("stroke-dasharray"));
    CHECK_THAT(svg, ContainsSubstring("a &lt; b &amp; c"));

    const std::vector<Cell> cells{{0.0, 0.0, "red"}, {1.0, 1.0, "blue"}};
    const std::string grid = render_cells(spec, cells, 1.0, 1.0, {{"admissible", "red"}});
    CHECK_THAT(grid, ContainsSubstring("class=\"cell\""));
    CHECK_NOTHROW(render_cells(spec, {}, 1.0, 1.0, {}));
}
