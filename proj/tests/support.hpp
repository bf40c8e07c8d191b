#pragma once

// Shared fixtures: the reference configuration and random scenario draws.

#include <cmath>
#include <cstdint>
#include <numbers>

#include "qlm/dynamics.hpp"
#include "qlm/geometry.hpp"
#include "qlm/measurement.hpp"
#include "qlm/state.hpp"

namespace qlm::testing {

inline constexpr double pi = std::numbers::pi;

inline ObservableSpec fig3_observable() { return {1e8, pi / 2, -pi / 6}; }

inline dynamics::DeviceConfig fig3_device(double g0 = 1e8, double kappa = 1e5)
{
    dynamics::DeviceConfig d;
    d.geometry.theta = 3 * pi / 4;
    d.geometry.Theta = pi / 3;
    d.geometry.chart_branch = 1;
    d.profile = potentials::InvertedMorse{g0, kappa};
    return d;
}

inline const Vec3 mixed_half{0.0, -0.5, -0.5};

struct Uniform {
    measurement::Xoshiro256ss rng;
    explicit Uniform(std::uint64_t seed) : rng(seed) {}
    double operator()(double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }
    int sign() { return rng.uniform() < 0.5 ? -1 : 1; }

    /// Uniform direction scaled to radius r.
    Vec3 on_sphere(double r)
    {
        const double z = (*this)(-1.0, 1.0);
        const double ph = (*this)(0.0, 2 * pi);
        const double s = std::sqrt(std::fmax(0.0, 1.0 - z * z));
        return r * Vec3{s * std::cos(ph), s * std::sin(ph), z};
    }
};

struct RandomScenario {
    ObservableSpec spec;
    dynamics::DeviceConfig device;
    Vec3 n0;
    Branch lambda = Branch::plus;
    dynamics::IntegratorConfig cfg;
};

/// Admissible, well away from Theta = pi/2 and from the chart poles, with an
/// inverted Morse drive and a run long enough to saturate.
inline RandomScenario random_scenario(Uniform& u, double n0_radius_max = 0.95)
{
    RandomScenario s;
    s.spec = {u(0.5e8, 2e8), u(0.3, pi - 0.3), u(-pi, pi)};
    for (;;) {
        const double theta = u(0.1, pi - 0.1);
        const double Theta = u(0.0, pi);
        if (std::fabs(Theta - pi / 2) < 0.25) continue;
        if (!geometry::admissible_by_interval(s.spec.alpha, theta, Theta)) continue;
        s.device.geometry.theta = theta;
        s.device.geometry.Theta = Theta;
        s.device.geometry.chart_branch = u.sign();
        break;
    }
    const double kappa = u(1e5, 1e6);
    s.device.profile = potentials::InvertedMorse{u(0.5, 4.0) * s.spec.omega_rate, kappa};
    s.n0 = u.on_sphere(u(0.0, n0_radius_max));
    s.lambda = u.sign() > 0 ? Branch::plus : Branch::minus;
    s.cfg.t_final = 20.0 / kappa;
    s.cfg.samples_per_decade = 50;
    s.cfg.rtol = 1e-10;
    s.cfg.atol = 1e-13;
    return s;
}

}  // namespace qlm::testing
