#pragma once

// Spin-1/2 silver atom crossing a Stern-Gerlach magnet. The dipole field b is
// along z, the effective quadrupole contribution q(L) is along z too, and the
// distance L = V t along the beam replaces time:
//
//   dn/dL = (1/V) (w x n + l g(L/V) (z - n n_3)),  w = gamma_e b z,
//   g(t) = mu_B^2 beta^2 t^2 S(t) / (m_Ag hbar).

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "qlm/analytic.hpp"
#include "qlm/dynamics.hpp"
#include "qlm/errors.hpp"
#include "qlm/geometry.hpp"
#include "qlm/linalg.hpp"
#include "qlm/potentials.hpp"
#include "qlm/state.hpp"

namespace qlm::sg {

struct PhysicalConstants {
    double mu_B = 5.788e-5;        // eV/T
    double hbar = 6.582e-16;       // eV s
    double gamma_e = 1.758736e11;  // 1/(s T)
    double m_Ag = 1.11e-6;         // eV s^2/m^2

    /// gamma_e against 2 mu_B / hbar.
    double gyromagnetic_mismatch() const { return std::fabs(gamma_e - 2.0 * mu_B / hbar) / gamma_e; }
};

inline constexpr PhysicalConstants silver{};

struct SGConfig {
    double b_field = 1e8 / 1.758736e11;  // T; w = 1e8 rad/s
    double beta_grad = 1e3;              // T/m
    double V = 500.0;                    // m/s
    double t_end = 1e-4;                 // s
    double t_w = 5e-6;                   // s
    Branch lambda = Branch::plus;
    PhysicalConstants constants{};

    void validate() const
    {
        if (!(b_field > 0.0)) throw DegenerateObservableError();
        if (!(beta_grad > 0.0) || !(V > 0.0) || !(t_end > 0.0) || !(t_w > 0.0))
            throw DomainError("Stern-Gerlach config: beta_grad, V, t_end and t_w must be positive");
    }
};

/// z-aligned observable with omega_rate = gamma_e b.
inline ObservableSpec omega_from_b(double b_field, const PhysicalConstants& k = silver)
{
    if (b_field == 0.0) throw DegenerateObservableError();
    if (!(b_field > 0.0)) throw DomainError("omega_from_b: b must be positive");
    return {k.gamma_e * b_field, 0.0, 0.0};
}

/// mu_B^2 beta^2 / (m_Ag hbar), rad/s^3.
inline double prefactor_rate(const SGConfig& cfg)
{
    const auto& k = cfg.constants;
    return k.mu_B * k.mu_B * cfg.beta_grad * cfg.beta_grad / (k.m_Ag * k.hbar);
}

inline potentials::SternGerlachTime time_profile(const SGConfig& cfg)
{
    return {prefactor_rate(cfg), cfg.t_end, cfg.t_w};
}

/// Effective quadrupole field q(L) = mu_B beta^2 L^2 S(L/V) / (2 m_Ag V^2), in T.
inline double effective_field(double L, const SGConfig& cfg)
{
    if (L < 0.0) throw DomainError("effective_field: negative distance");
    const auto& k = cfg.constants;
    return k.mu_B * cfg.beta_grad * cfg.beta_grad * L * L * potentials::switch_off(L / cfg.V, cfg.t_end, cfg.t_w) /
           (2.0 * k.m_Ag * cfg.V * cfg.V);
}

/// Driving magnitude 2 mu_B q(L) / hbar, rad/s.
inline double q_of_L(double L, const SGConfig& cfg)
{
    if (L < 0.0) throw DomainError("q_of_L: negative distance");
    const double u = L / cfg.V;
    return prefactor_rate(cfg) * u * u * potentials::switch_off(u, cfg.t_end, cfg.t_w);
}

inline ObservableSpec observable(const SGConfig& cfg)
{
    return omega_from_b(cfg.b_field, cfg.constants);
}

/// Equivalent time-domain device: g along z (polar chart, the Theta chart is
/// singular at alpha = 0) with the Stern-Gerlach profile.
inline dynamics::DeviceConfig time_device(const SGConfig& cfg)
{
    dynamics::DeviceConfig d;
    d.geometry.theta = 0.0;
    d.geometry.Theta = 0.0;
    d.geometry.phi = 0.0;
    d.profile = time_profile(cfg);
    return d;
}

/// L grid: V times the time grid of the integrator config.
inline std::vector<double> length_grid(const SGConfig& cfg, const dynamics::IntegratorConfig& ic)
{
    std::vector<double> grid = dynamics::log_grid(ic);
    for (double& x : grid) x *= cfg.V;
    return grid;
}

/// Bloch equation in L. Sample field t holds L (m); rate is |dn/dL| (1/m).
inline dynamics::Trajectory integrate_bloch_L(const BlochVector& n0, const SGConfig& cfg,
                                              const dynamics::IntegratorConfig& ic)
{
    cfg.validate();
    ic.validate();
    const std::vector<double> grid = length_grid(cfg, ic);
    const ObservableSpec spec = observable(cfg);
    const Vec3 z{0.0, 0.0, 1.0};
    const double V = cfg.V;
    auto g_of_L = [&cfg](double L) { return q_of_L(L, cfg) / cfg.V; };
    dynamics::Trajectory traj =
        dynamics::integrate_bloch_core(n0.vec(), spec.vector() / V, z, g_of_L, sign(cfg.lambda), grid,
                                       ic.stepper(), ic.frame);
    // Report g in rad/s like the time-domain trajectories.
    for (auto& s : traj.samples) s.g_rate *= V;
    return traj;
}

/// Gamma_SG(L) = int_0^L g(l/V)/V dl = Gamma(L/V) of the time profile.
inline double gamma_sg(double L, const SGConfig& cfg, double tol = potentials::default_quadrature_tol)
{
    if (L < 0.0) throw DomainError("gamma_sg: negative distance");
    return potentials::gamma(time_profile(cfg), L / cfg.V, tol);
}

/// Closed form n(L): the parallel solution with t = L/V.
inline BlochVector bloch_sg_analytic(double L, const BlochVector& n0, const SGConfig& cfg)
{
    cfg.validate();
    const ObservableSpec spec = observable(cfg);
    const Vec3 n = analytic::parallel_state(n0.vec(), spec.unit(), sign(cfg.lambda), gamma_sg(L, cfg),
                                            spec.omega_rate * L / cfg.V);
    const double r = norm(n);
    return BlochVector(r > 1.0 ? n / r : n);
}

/// Closed form on a whole L grid, accumulating Gamma interval by interval.
inline std::vector<Vec3> bloch_sg_analytic_series(std::span<const double> L_grid, const BlochVector& n0,
                                                  const SGConfig& cfg)
{
    cfg.validate();
    std::vector<double> t_grid(L_grid.begin(), L_grid.end());
    for (double& x : t_grid) x /= cfg.V;
    const potentials::GammaTable table(time_profile(cfg), t_grid);
    const ObservableSpec spec = observable(cfg);
    std::vector<Vec3> out;
    out.reserve(L_grid.size());
    for (std::size_t i = 0; i < L_grid.size(); ++i)
        out.push_back(analytic::parallel_state(n0.vec(), spec.unit(), sign(cfg.lambda), table[i],
                                               spec.omega_rate * t_grid[i]));
    return out;
}

/// C1 = (w^2 - g(L)^2)/4 and C2 = l w g(L) cos(Theta)/2 with Theta = 0, in (rad/s)^2.
inline geometry::CasimirPair sg_casimirs(double L, const SGConfig& cfg)
{
    const double w = observable(cfg).omega_rate;
    const double g = q_of_L(L, cfg);
    return {0.25 * (w * w - g * g), 0.5 * sign(cfg.lambda) * w * g, 0.25 * std::fmax(w * w, g * g)};
}

/// With cos(Theta) = +-1 only C1 can vanish; critical means |C1| <= tol_rel * scale.
inline bool sg_is_critical(double L, const SGConfig& cfg, double tol_rel)
{
    if (!(tol_rel > 0.0)) throw DomainError("sg_is_critical: tol_rel must be positive");
    const auto c = sg_casimirs(L, cfg);
    return std::fabs(c.c1) <= tol_rel * c.scale_sq;
}

/// Smallest L with g(L) = w (C1 = 0), by bisection on the rising flank.
inline std::optional<double> critical_length(const SGConfig& cfg)
{
    const double w = observable(cfg).omega_rate;
    const double t_peak = cfg.t_end + 10.0 * cfg.t_w;
    // g rises monotonically until the switch-off bites; search up to its maximum.
    double hi = 0.0;
    double best = 0.0;
    for (int i = 1; i <= 4096; ++i) {
        const double L = cfg.V * t_peak * i / 4096.0;
        const double g = q_of_L(L, cfg);
        if (g >= w) {
            hi = L;
            break;
        }
        best = L;
    }
    if (hi == 0.0) return std::nullopt;
    double lo = best;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (q_of_L(mid, cfg) >= w ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

/// |dn/dL| per sample from the L-parametrized right-hand side.
inline std::vector<double> sg_rate_of_change(const dynamics::Trajectory& traj, const SGConfig& cfg)
{
    const Vec3 w_over_V = observable(cfg).vector() / cfg.V;
    const Vec3 z{0.0, 0.0, 1.0};
    std::vector<double> out;
    out.reserve(traj.size());
    for (const auto& s : traj.samples)
        out.push_back(norm(dynamics::bloch_rhs(s.n, w_over_V, q_of_L(s.t, cfg) / cfg.V, z, sign(cfg.lambda))));
    return out;
}

/// Smallest sampled L with |n_3| > threshold.
inline std::optional<double> transition_length(const dynamics::Trajectory& traj, double threshold = 0.999)
{
    for (const auto& s : traj.samples)
        if (std::fabs(s.n.z) > threshold) return s.t;
    return std::nullopt;
}

}  // namespace qlm::sg
