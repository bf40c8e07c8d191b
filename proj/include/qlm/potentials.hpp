#pragma once

// Time-dependent driving magnitudes g(t) (stored in rad/s) and their integrals
// Gamma(t) = int_0^t g.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qlm/errors.hpp"

namespace qlm::potentials {

struct InvertedMorse {
    double g0_rate = 0.0;  // rad/s
    double kappa = 0.0;    // 1/s
};

struct SternGerlachTime {
    double prefactor_rate_per_s2 = 0.0;  // coefficient of t^2, rad/s^3
    double t_end = 1e-4;                 // s
    double t_w = 5e-6;                   // s
};

struct Custom {
    std::function<double(double)> rate;  // t -> rad/s
    double support_bound = 0.0;          // s; g is negligible beyond this time
    std::string name = "custom";
};

using PotentialProfile = std::variant<InvertedMorse, SternGerlachTime, Custom>;

inline double g_inverted_morse(double t, double g0_rate, double kappa)
{
    if (t < 0.0) throw DomainError("inverted Morse potential: negative time");
    if (!(kappa > 0.0)) throw DomainError("inverted Morse potential: kappa must be positive");
    if (g0_rate < 0.0) throw DomainError("inverted Morse potential: negative g0");
    // 1 - (1 - 2e)^2 = 4e(1 - e)
    const double e = std::exp(-kappa * t);
    return g0_rate * 4.0 * e * (1.0 - e);
}

/// Times t- <= ln2/kappa <= t+ with g_IM(t) = omega_rate.
inline std::pair<double, double> morse_crossing_times(double g0_rate, double kappa, double omega_rate)
{
    if (!(omega_rate > 0.0) || !(kappa > 0.0)) throw DomainError("morse_crossing_times: need omega, kappa > 0");
    if (g0_rate < omega_rate) throw DomainError("morse_crossing_times: g0 < omega, the potential never reaches omega");
    const double ratio = g0_rate / omega_rate;
    const double root = std::sqrt(std::fmax(0.0, 1.0 - 1.0 / ratio));
    return {std::log(2.0 * ratio * (1.0 - root)) / kappa, std::log(2.0 * ratio * (1.0 + root)) / kappa};
}

/// Logistic fall-off 1 - 1/(1 + exp(-(t - t_end)/t_w)).
inline double switch_off(double t, double t_end, double t_w)
{
    if (!(t_w > 0.0)) throw DomainError("switch_off: t_w must be positive");
    return 1.0 / (1.0 + std::exp((t - t_end) / t_w));
}

inline double g_stern_gerlach(double t, const SternGerlachTime& p)
{
    if (t < 0.0) throw DomainError("Stern-Gerlach potential: negative time");
    return p.prefactor_rate_per_s2 * t * t * switch_off(t, p.t_end, p.t_w);
}

/// g(t) in rad/s.
inline double rate(const PotentialProfile& profile, double t)
{
    return std::visit(
        [t](const auto& p) -> double {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, InvertedMorse>)
                return g_inverted_morse(t, p.g0_rate, p.kappa);
            else if constexpr (std::is_same_v<P, SternGerlachTime>)
                return g_stern_gerlach(t, p);
            else
                return p.rate(t);
        },
        profile);
}

/// Time after which g is negligible.
inline double support_bound(const PotentialProfile& profile)
{
    return std::visit(
        [](const auto& p) -> double {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, InvertedMorse>)
                return 40.0 / p.kappa;
            else if constexpr (std::is_same_v<P, SternGerlachTime>)
                return p.t_end + 60.0 * p.t_w;
            else
                return p.support_bound;
        },
        profile);
}

inline const char* kind_name(const PotentialProfile& profile)
{
    switch (profile.index()) {
    case 0: return "inverted_morse";
    case 1: return "stern_gerlach";
    default: return "custom";
    }
}

/// Samples the profile and throws if g is negative anywhere or fails to decay.
inline void validate(const PotentialProfile& profile, std::size_t samples = 4096)
{
    if (const auto* im = std::get_if<InvertedMorse>(&profile)) {
        if (!(im->kappa > 0.0) || !(im->g0_rate >= 0.0))
            throw DomainError("inverted Morse profile needs g0 >= 0 and kappa > 0");
    }
    if (const auto* sg = std::get_if<SternGerlachTime>(&profile)) {
        if (!(sg->t_w > 0.0) || !(sg->t_end > 0.0) || !(sg->prefactor_rate_per_s2 >= 0.0))
            throw DomainError("Stern-Gerlach profile needs prefactor >= 0 and t_end, t_w > 0");
    }
    const double bound = support_bound(profile);
    if (!(bound > 0.0) || !std::isfinite(bound)) throw DomainError("potential profile has no finite support bound");
    double peak = 0.0;
    for (std::size_t i = 0; i <= samples; ++i) {
        const double t = bound * static_cast<double>(i) / static_cast<double>(samples);
        const double g = rate(profile, t);
        if (!(g >= 0.0) || !std::isfinite(g))
            throw DomainError("potential profile is negative or non-finite at t = " + std::to_string(t));
        peak = std::fmax(peak, g);
    }
    const double tail = rate(profile, 10.0 * bound);
    if (!(tail <= 1e-6 * std::fmax(peak, std::numeric_limits<double>::min())))
        throw DomainError("potential profile does not decay to zero");
}

// --- integrated potential ------------------------------------------------

inline constexpr double default_quadrature_tol = 1e-10;

/// (2 g0/kappa)(1 - exp(-kappa t))^2
inline double gamma_inverted_morse_closed(double t, double g0_rate, double kappa)
{
    const double one_minus = -std::expm1(-kappa * t);
    return 2.0 * g0_rate / kappa * one_minus * one_minus;
}

/// int_a^b g, adaptive Gauss-Kronrod.
inline double integrate_rate(const PotentialProfile& profile, double a, double b, double tol)
{
    if (b <= a) return 0.0;
    auto f = [&profile](double t) { return rate(profile, t); };
    // Split at the peak-scale knots so the 15-point rule sees each feature.
    std::vector<double> knots{a};
    const double scale = std::visit(
        [](const auto& p) -> double {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, InvertedMorse>)
                return 1.0 / p.kappa;
            else if constexpr (std::is_same_v<P, SternGerlachTime>)
                return p.t_w;
            else
                return p.support_bound / 64.0;
        },
        profile);
    if (scale > 0.0 && (b - a) > 64.0 * scale) {
        const double step = 16.0 * scale;
        for (double x = a + step; x < b; x += step) knots.push_back(x);
    }
    knots.push_back(b);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        // Mapped onto [0, 1]: the Kronrod error estimate is taken before the
        // interval scaling, so very short intervals would otherwise never converge.
        const double lo = knots[i];
        const double len = knots[i + 1] - knots[i];
        auto unit = [&f, lo, len](double u) { return len * f(lo + len * u); };
        double err = 0.0;
        total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(unit, 0.0, 1.0, 20, tol, &err);
    }
    return total;
}

/// Gamma(t) = int_0^t g(tau) dtau (dimensionless, since g is stored as a rate).
inline double gamma(const PotentialProfile& profile, double t, double quadrature_tol = default_quadrature_tol)
{
    if (t < 0.0) throw DomainError("gamma: negative time");
    return integrate_rate(profile, 0.0, t, quadrature_tol);
}

/// Gamma tabulated on an increasing grid by accumulating interval integrals.
class GammaTable {
public:
    GammaTable(const PotentialProfile& profile, std::span<const double> grid,
               double quadrature_tol = default_quadrature_tol)
        : grid_(grid.begin(), grid.end()), values_(grid.size())
    {
        double acc = 0.0;
        double prev = 0.0;
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            if (grid_[i] < prev) throw DomainError("GammaTable: grid must be nondecreasing and nonnegative");
            acc += integrate_rate(profile, prev, grid_[i], quadrature_tol);
            values_[i] = acc;
            prev = grid_[i];
        }
    }

    std::span<const double> grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }

private:
    std::vector<double> grid_;
    std::vector<double> values_;
};

}  // namespace qlm::potentials
