#pragma once

// Scenario files (YAML). Every numeric field accepts a plain number or an
// arithmetic expression understood by io::evaluate.
//
//   name: fig3_depolarized_plus
//   description: free text
//   observable: {omega_rate: 1e8, alpha: pi/2, beta_az: -pi/6}
//   device:
//     theta: 3*pi/4
//     Theta: pi/3              # Theta chart: chart_branch is then required
//     chart_branch: 1
//     # phi: 0                 # polar chart instead of Theta/chart_branch
//     potential: {kind: inverted_morse, g0_rate: 1e8, kappa: 1e5}
//     # potential: {kind: stern_gerlach_time, prefactor_rate_per_s3: 4.585e18, t_end: 1e-4, t_w: 5e-6}
//   lambda: 1                  # 1, -1 or sample
//   initial_state: [0, 0, 0]
//   integrator: {rtol: 1e-9, atol: 1e-12, t_start: 1e-9, t_final: 1e-3,
//                samples_per_decade: 200, max_steps: 50000000, frame: rotating}
//   seed: 1                    # integer below 2^53
//   runs: 100000               # ensemble size for `sample`
//   sweep: {variable: Theta, values: [pi/3, pi/2]}   # n0 sweeps use `states`
//   stern_gerlach: {b_field: 5.6859e-4, beta_grad: 1e3, V: 500, t_end: 1e-4, t_w: 5e-6}
//
// With a stern_gerlach section the observable and device sections are derived
// and must be omitted.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "qlm/dynamics.hpp"
#include "qlm/geometry.hpp"
#include "qlm/io/expr.hpp"
#include "qlm/linalg.hpp"
#include "qlm/potentials.hpp"
#include "qlm/state.hpp"
#include "qlm/sterngerlach.hpp"

namespace qlm::io {

/// Invalid or unreadable scenario; the message names the line and field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class LambdaSetting { plus, minus, sample };

inline const char* to_string(LambdaSetting l)
{
    switch (l) {
    case LambdaSetting::plus: return "1";
    case LambdaSetting::minus: return "-1";
    case LambdaSetting::sample: return "sample";
    }
    return "?";
}

struct SweepSpec {
    std::string variable;          // Theta, theta, g0, kappa, lambda, n0
    std::vector<double> values;    // scalar sweeps
    std::vector<Vec3> states;      // n0 sweeps
};

inline const std::vector<std::string>& sweep_variables()
{
    static const std::vector<std::string> v{"Theta", "theta", "g0", "kappa", "lambda", "n0"};
    return v;
}

struct Scenario {
    std::string name;
    std::string description;
    ObservableSpec observable;
    geometry::DeviceGeometry geometry;
    potentials::PotentialProfile potential = potentials::InvertedMorse{1e8, 1e5};
    LambdaSetting lambda = LambdaSetting::plus;
    Vec3 n0;
    dynamics::IntegratorConfig integrator;
    std::uint64_t seed = 0;
    std::size_t runs = 0;
    std::optional<SweepSpec> sweep;
    std::optional<sg::SGConfig> stern_gerlach;

    dynamics::DeviceConfig device() const { return {geometry, potential}; }
    bool is_stern_gerlach() const { return stern_gerlach.has_value(); }
};

namespace detail {

inline std::string where(const YAML::Node& n, const std::string& field)
{
    const YAML::Mark m = n.Mark();
    if (m.line >= 0) return "line " + std::to_string(m.line + 1) + ": field '" + field + "'";
    return "field '" + field + "'";
}

[[noreturn]] inline void fail(const YAML::Node& n, const std::string& field, const std::string& why)
{
    throw ConfigError(where(n, field) + ": " + why);
}

inline double number(const YAML::Node& n, const std::string& field)
{
    if (!n.IsScalar()) fail(n, field, "expected a number");
    try {
        return evaluate(n.Scalar());
    } catch (const ExprError& e) {
        fail(n, field, e.what());
    }
}

inline YAML::Node required(const YAML::Node& parent, const char* key, const std::string& path)
{
    const YAML::Node n = parent[key];
    if (!n) fail(parent, path.empty() ? key : path + "." + key, "missing required field");
    return n;
}

inline double req_number(const YAML::Node& parent, const char* key, const std::string& path)
{
    return number(required(parent, key, path), path + "." + key);
}

inline double opt_number(const YAML::Node& parent, const char* key, const std::string& path, double fallback)
{
    const YAML::Node n = parent[key];
    return n ? number(n, path + "." + key) : fallback;
}

inline void require_map(const YAML::Node& n, const std::string& field)
{
    if (!n.IsMap()) fail(n, field, "expected a mapping");
}

inline void reject_unknown(const YAML::Node& map, const std::string& path, std::initializer_list<const char*> known)
{
    for (const auto& kv : map) {
        const std::string key = kv.first.as<std::string>();
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) fail(kv.first, path.empty() ? key : path + "." + key, "unknown field");
    }
}

inline Vec3 vec3(const YAML::Node& n, const std::string& field)
{
    if (!n.IsSequence() || n.size() != 3) fail(n, field, "expected a list of three numbers");
    return {number(n[0], field + "[0]"), number(n[1], field + "[1]"), number(n[2], field + "[2]")};
}

inline std::size_t count(const YAML::Node& n, const std::string& field)
{
    const double v = number(n, field);
    if (!(v >= 0.0) || v != std::floor(v) || v > 9.007199254740992e15) fail(n, field, "expected a nonnegative integer");
    return static_cast<std::size_t>(v);
}

inline potentials::PotentialProfile parse_potential(const YAML::Node& n, const std::string& path)
{
    require_map(n, path);
    const YAML::Node kind = required(n, "kind", path);
    const std::string k = kind.as<std::string>();
    if (k == "inverted_morse") {
        reject_unknown(n, path, {"kind", "g0_rate", "kappa"});
        return potentials::InvertedMorse{req_number(n, "g0_rate", path), req_number(n, "kappa", path)};
    }
    if (k == "stern_gerlach_time") {
        reject_unknown(n, path, {"kind", "prefactor_rate_per_s3", "t_end", "t_w"});
        return potentials::SternGerlachTime{req_number(n, "prefactor_rate_per_s3", path),
                                            opt_number(n, "t_end", path, 1e-4), opt_number(n, "t_w", path, 5e-6)};
    }
    fail(kind, path + ".kind", "unknown potential kind '" + k + "' (inverted_morse, stern_gerlach_time)");
}

inline LambdaSetting parse_lambda(const YAML::Node& n)
{
    if (!n.IsScalar()) fail(n, "lambda", "expected 1, -1 or sample");
    const std::string s = n.Scalar();
    if (s == "sample") return LambdaSetting::sample;
    double v = 0.0;
    try {
        v = evaluate(s);
    } catch (const ExprError&) {
        fail(n, "lambda", "expected 1, -1 or sample");
    }
    if (v == 1.0) return LambdaSetting::plus;
    if (v == -1.0) return LambdaSetting::minus;
    fail(n, "lambda", "expected 1, -1 or sample");
}

inline dynamics::IntegratorConfig parse_integrator(const YAML::Node& n)
{
    require_map(n, "integrator");
    reject_unknown(n, "integrator",
                   {"rtol", "atol", "t_start", "t_final", "samples_per_decade", "max_steps", "frame"});
    dynamics::IntegratorConfig c;
    c.rtol = opt_number(n, "rtol", "integrator", c.rtol);
    c.atol = opt_number(n, "atol", "integrator", c.atol);
    c.t_start = opt_number(n, "t_start", "integrator", c.t_start);
    c.t_final = opt_number(n, "t_final", "integrator", c.t_final);
    if (n["samples_per_decade"])
        c.samples_per_decade = static_cast<int>(count(n["samples_per_decade"], "integrator.samples_per_decade"));
    if (n["max_steps"]) c.max_steps = count(n["max_steps"], "integrator.max_steps");
    if (const YAML::Node f = n["frame"]) {
        const std::string s = f.as<std::string>();
        if (s == "rotating")
            c.frame = dynamics::Frame::rotating;
        else if (s == "lab")
            c.frame = dynamics::Frame::lab;
        else
            fail(f, "integrator.frame", "expected rotating or lab");
    }
    try {
        c.validate();
    } catch (const DomainError& e) {
        fail(n, "integrator", e.what());
    }
    return c;
}

inline SweepSpec parse_sweep(const YAML::Node& n)
{
    require_map(n, "sweep");
    reject_unknown(n, "sweep", {"variable", "values", "states"});
    SweepSpec s;
    const YAML::Node var = required(n, "variable", "sweep");
    s.variable = var.as<std::string>();
    bool known = false;
    for (const auto& v : sweep_variables()) known = known || v == s.variable;
    if (!known) fail(var, "sweep.variable", "unknown sweep variable '" + s.variable + "'");
    if (s.variable == "n0") {
        const YAML::Node st = required(n, "states", "sweep");
        if (!st.IsSequence() || st.size() == 0) fail(st, "sweep.states", "expected a nonempty list of states");
        for (std::size_t i = 0; i < st.size(); ++i)
            s.states.push_back(vec3(st[i], "sweep.states[" + std::to_string(i) + "]"));
    } else {
        const YAML::Node vals = required(n, "values", "sweep");
        if (!vals.IsSequence() || vals.size() == 0) fail(vals, "sweep.values", "expected a nonempty list");
        for (std::size_t i = 0; i < vals.size(); ++i)
            s.values.push_back(number(vals[i], "sweep.values[" + std::to_string(i) + "]"));
    }
    return s;
}

inline sg::SGConfig parse_sg(const YAML::Node& n)
{
    require_map(n, "stern_gerlach");
    reject_unknown(n, "stern_gerlach", {"b_field", "beta_grad", "V", "t_end", "t_w"});
    sg::SGConfig c;
    c.b_field = opt_number(n, "b_field", "stern_gerlach", c.b_field);
    c.beta_grad = opt_number(n, "beta_grad", "stern_gerlach", c.beta_grad);
    c.V = opt_number(n, "V", "stern_gerlach", c.V);
    c.t_end = opt_number(n, "t_end", "stern_gerlach", c.t_end);
    c.t_w = opt_number(n, "t_w", "stern_gerlach", c.t_w);
    try {
        c.validate();
    } catch (const DomainError& e) {
        fail(n, "stern_gerlach", e.what());
    }
    return c;
}

}  // namespace detail

/// Parses and validates a scenario document.
inline Scenario parse_scenario(const std::string& text)
{
    using namespace detail;
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (!root.IsMap()) throw ConfigError("scenario must be a YAML mapping");
    reject_unknown(root, "",
                   {"name", "description", "observable", "device", "lambda", "initial_state", "integrator", "seed",
                    "runs", "sweep", "stern_gerlach"});

    Scenario sc;
    try {
        sc.name = required(root, "name", "").as<std::string>();
        if (root["description"]) sc.description = root["description"].as<std::string>();

        if (root["stern_gerlach"]) {
            if (root["observable"]) fail(root["observable"], "observable", "derived from stern_gerlach, omit it");
            if (root["device"]) fail(root["device"], "device", "derived from stern_gerlach, omit it");
            sc.stern_gerlach = parse_sg(root["stern_gerlach"]);
            sc.observable = sg::observable(*sc.stern_gerlach);
            const auto dev = sg::time_device(*sc.stern_gerlach);
            sc.geometry = dev.geometry;
            sc.potential = dev.profile;
        } else {
            const YAML::Node obs = required(root, "observable", "");
            require_map(obs, "observable");
            reject_unknown(obs, "observable", {"omega_rate", "alpha", "beta_az"});
            sc.observable.omega_rate = req_number(obs, "omega_rate", "observable");
            sc.observable.alpha = req_number(obs, "alpha", "observable");
            sc.observable.beta_az = opt_number(obs, "beta_az", "observable", 0.0);
            if (!(sc.observable.omega_rate > 0.0)) fail(obs, "observable.omega_rate", "must be positive");
            try {
                geometry::require_angle(sc.observable.alpha, "alpha");
            } catch (const DomainError& e) {
                fail(obs, "observable.alpha", e.what());
            }

            const YAML::Node dev = required(root, "device", "");
            require_map(dev, "device");
            reject_unknown(dev, "device", {"theta", "Theta", "chart_branch", "phi", "potential"});
            sc.geometry.theta = req_number(dev, "theta", "device");
            if (dev["phi"]) {
                if (dev["Theta"] || dev["chart_branch"])
                    fail(dev, "device", "give either phi or Theta with chart_branch, not both");
                sc.geometry.phi = number(dev["phi"], "device.phi");
                sc.geometry.Theta = geometry::effective_Theta(sc.observable, sc.geometry);
            } else {
                sc.geometry.Theta = req_number(dev, "Theta", "device");
                const YAML::Node cb = required(dev, "chart_branch", "device");
                const double b = number(cb, "device.chart_branch");
                if (b != 1.0 && b != -1.0) fail(cb, "device.chart_branch", "must be 1 or -1");
                sc.geometry.chart_branch = static_cast<int>(b);
            }
            try {
                (void)geometry::resolve_direction(sc.observable, sc.geometry);
            } catch (const DomainError& e) {
                fail(dev, "device", e.what());
            }
            sc.potential = parse_potential(required(dev, "potential", "device"), "device.potential");
            try {
                potentials::validate(sc.potential);
            } catch (const DomainError& e) {
                fail(dev["potential"], "device.potential", e.what());
            }
        }

        sc.lambda = parse_lambda(required(root, "lambda", ""));
        const YAML::Node n0 = required(root, "initial_state", "");
        sc.n0 = vec3(n0, "initial_state");
        if (!(norm(sc.n0) <= 1.0 + bloch_norm_tol)) fail(n0, "initial_state", "|n0| exceeds 1");
        if (root["integrator"]) sc.integrator = parse_integrator(root["integrator"]);
        if (root["seed"]) sc.seed = count(root["seed"], "seed");
        if (root["runs"]) sc.runs = count(root["runs"], "runs");
        if (root["sweep"]) sc.sweep = parse_sweep(root["sweep"]);
    } catch (const YAML::Exception& e) {
        throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    return sc;
}

inline Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read scenario file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

/// %.17g, enough to round-trip binary64.
inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Writes a scenario back with exact (17-digit) numbers.
inline std::string serialize_scenario(const Scenario& sc)
{
    YAML::Emitter out;
    auto num = [](double v) { return format_double(v); };
    auto vec = [&](const Vec3& v) {
        out << YAML::Flow << YAML::BeginSeq << num(v.x) << num(v.y) << num(v.z) << YAML::EndSeq;
    };
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << sc.name;
    if (!sc.description.empty()) out << YAML::Key << "description" << YAML::Value << sc.description;
    if (sc.stern_gerlach) {
        const auto& g = *sc.stern_gerlach;
        out << YAML::Key << "stern_gerlach" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "b_field" << YAML::Value << num(g.b_field);
        out << YAML::Key << "beta_grad" << YAML::Value << num(g.beta_grad);
        out << YAML::Key << "V" << YAML::Value << num(g.V);
        out << YAML::Key << "t_end" << YAML::Value << num(g.t_end);
        out << YAML::Key << "t_w" << YAML::Value << num(g.t_w);
        out << YAML::EndMap;
    } else {
        out << YAML::Key << "observable" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "omega_rate" << YAML::Value << num(sc.observable.omega_rate);
        out << YAML::Key << "alpha" << YAML::Value << num(sc.observable.alpha);
        out << YAML::Key << "beta_az" << YAML::Value << num(sc.observable.beta_az);
        out << YAML::EndMap;
        out << YAML::Key << "device" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "theta" << YAML::Value << num(sc.geometry.theta);
        if (sc.geometry.phi) {
            out << YAML::Key << "phi" << YAML::Value << num(*sc.geometry.phi);
        } else {
            out << YAML::Key << "Theta" << YAML::Value << num(sc.geometry.Theta);
            out << YAML::Key << "chart_branch" << YAML::Value << sc.geometry.chart_branch;
        }
        out << YAML::Key << "potential" << YAML::Value << YAML::BeginMap;
        if (const auto* im = std::get_if<potentials::InvertedMorse>(&sc.potential)) {
            out << YAML::Key << "kind" << YAML::Value << "inverted_morse";
            out << YAML::Key << "g0_rate" << YAML::Value << num(im->g0_rate);
            out << YAML::Key << "kappa" << YAML::Value << num(im->kappa);
        } else if (const auto* s = std::get_if<potentials::SternGerlachTime>(&sc.potential)) {
            out << YAML::Key << "kind" << YAML::Value << "stern_gerlach_time";
            out << YAML::Key << "prefactor_rate_per_s3" << YAML::Value << num(s->prefactor_rate_per_s2);
            out << YAML::Key << "t_end" << YAML::Value << num(s->t_end);
            out << YAML::Key << "t_w" << YAML::Value << num(s->t_w);
        } else {
            throw ConfigError("custom potentials cannot be serialized");
        }
        out << YAML::EndMap << YAML::EndMap;
    }
    out << YAML::Key << "lambda" << YAML::Value << to_string(sc.lambda);
    out << YAML::Key << "initial_state" << YAML::Value;
    vec(sc.n0);
    const auto& ic = sc.integrator;
    out << YAML::Key << "integrator" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "rtol" << YAML::Value << num(ic.rtol);
    out << YAML::Key << "atol" << YAML::Value << num(ic.atol);
    out << YAML::Key << "t_start" << YAML::Value << num(ic.t_start);
    out << YAML::Key << "t_final" << YAML::Value << num(ic.t_final);
    out << YAML::Key << "samples_per_decade" << YAML::Value << ic.samples_per_decade;
    out << YAML::Key << "max_steps" << YAML::Value << ic.max_steps;
    out << YAML::Key << "frame" << YAML::Value << (ic.frame == dynamics::Frame::lab ? "lab" : "rotating");
    out << YAML::EndMap;
    out << YAML::Key << "seed" << YAML::Value << sc.seed;
    if (sc.runs) out << YAML::Key << "runs" << YAML::Value << sc.runs;
    if (sc.sweep) {
        out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "variable" << YAML::Value << sc.sweep->variable;
        if (sc.sweep->variable == "n0") {
            out << YAML::Key << "states" << YAML::Value << YAML::BeginSeq;
            for (const auto& s : sc.sweep->states) vec(s);
            out << YAML::EndSeq;
        } else {
            out << YAML::Key << "values" << YAML::Value << YAML::Flow << YAML::BeginSeq;
            for (double v : sc.sweep->values) out << num(v);
            out << YAML::EndSeq;
        }
        out << YAML::EndMap;
    }
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace qlm::io
