#pragma once

// Parameter-space geometry of the (observable, device) pair: polar charts,
// the Theta chart for the driving direction, the admissible tetrahedron,
// SL(2,C) Casimir invariants and criticality.

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qlm/errors.hpp"
#include "qlm/linalg.hpp"
#include "qlm/state.hpp"

namespace qlm::geometry {

inline constexpr double pi = std::numbers::pi;
inline constexpr double half_pi = std::numbers::pi / 2.0;

/// cos(a) computed as sin(pi/2 - a) so that the double nearest pi/2 gives an exact zero.
inline double cos_angle(double a) { return std::sin(half_pi - a); }

inline Vec3 unit_omega(double alpha, double beta_az) { return unit_direction(alpha, beta_az); }

inline Vec3 g_direction_polar(double theta, double phi) { return unit_direction(theta, phi); }

/// cos(Theta) between w(alpha, beta) and g(theta, phi).
inline double cos_between(double alpha, double beta_az, double theta, double phi)
{
    return std::sin(alpha) * std::sin(theta) * std::cos(beta_az - phi) + std::cos(alpha) * std::cos(theta);
}

inline void require_angle(double a, const char* name)
{
    constexpr double slack = 1e-12;
    if (!(a >= -slack && a <= pi + slack))
        throw DomainError(std::string("angle ") + name + " outside [0, pi]: " + std::to_string(a));
}

/// (cos(alpha - theta) - cos Theta)(cos Theta - cos(alpha + theta)); the square of
/// the transverse term in the Theta chart (up to sin^2 alpha).
inline double admissibility_radicand(double alpha, double theta, double Theta)
{
    const double c = cos_angle(Theta);
    return (std::cos(alpha - theta) - c) * (c - std::cos(alpha + theta));
}

inline bool admissible_by_interval(double alpha, double theta, double Theta, double tol = 1e-12)
{
    return std::fabs(alpha - theta) <= Theta + tol && Theta <= pi - std::fabs(pi - (alpha + theta)) + tol;
}

inline bool admissible_by_product(double alpha, double theta, double Theta, double tol = 1e-12)
{
    return admissibility_radicand(alpha, theta, Theta) >= -tol;
}

/// Membership in the closed tetrahedron |a - t| <= T <= pi - |pi - (a + t)|.
/// The product form is evaluated alongside and must agree away from the faces.
inline bool is_admissible(double alpha, double theta, double Theta)
{
    require_angle(alpha, "alpha");
    require_angle(theta, "theta");
    require_angle(Theta, "Theta");
    const bool by_interval = admissible_by_interval(alpha, theta, Theta);
    const bool by_product = admissible_by_product(alpha, theta, Theta);
    if (by_interval != by_product && std::fabs(admissibility_radicand(alpha, theta, Theta)) > 1e-10)
        throw std::logic_error("admissibility interval and product forms disagree");
    return by_interval;
}

/// Driving direction in the Theta chart: the unit vector with polar angle theta
/// making angle Theta with w(alpha, beta). chart_branch (+1 / -1) selects the
/// upper / lower sign in front of the square root.
inline Vec3 g_direction(double alpha, double beta_az, double theta, double Theta, int chart_branch)
{
    if (chart_branch != 1 && chart_branch != -1) throw DomainError("chart_branch must be +1 or -1");
    if (!is_admissible(alpha, theta, Theta))
        throw DomainError("inadmissible (alpha, theta, Theta) configuration");
    const double sa = std::sin(alpha);
    if (std::fabs(sa) < 1e-12) throw ChartSingularityError();

    const double cb = std::cos(beta_az);
    const double sb = std::sin(beta_az);
    const double ct = std::cos(theta);
    const double along = cos_angle(Theta) - std::cos(alpha) * ct;
    const double root = std::sqrt(std::fmax(0.0, admissibility_radicand(alpha, theta, Theta)));
    const double s = chart_branch;
    return {(cb * along + s * sb * root) / sa, (sb * along - s * cb * root) / sa, ct};
}

/// Device geometry. Either the Theta chart (theta, Theta, chart_branch) or, when
/// phi is set, the direct polar chart (theta, phi); the latter is required at the
/// chart singularity sin(alpha) = 0.
struct DeviceGeometry {
    double theta = 0.0;
    double Theta = 0.0;
    int chart_branch = 1;
    std::optional<double> phi;
};

inline Vec3 resolve_direction(const ObservableSpec& spec, const DeviceGeometry& dev)
{
    if (dev.phi) return g_direction_polar(dev.theta, *dev.phi);
    return g_direction(spec.alpha, spec.beta_az, dev.theta, dev.Theta, dev.chart_branch);
}

/// Angle between w and g implied by the device (recomputed in the polar chart).
inline double effective_Theta(const ObservableSpec& spec, const DeviceGeometry& dev)
{
    if (!dev.phi) return dev.Theta;
    const double c = cos_between(spec.alpha, spec.beta_az, dev.theta, *dev.phi);
    return std::acos(std::fmax(-1.0, std::fmin(1.0, c)));
}

// --- Casimir invariants --------------------------------------------------

/// C1 = (omega^2 - g^2)/4, C2 = omega.g/2, in (rad/s)^2. scale_sq = max(omega^2, g^2)/4
/// is kept as the reference magnitude for relative criticality tests.
struct CasimirPair {
    double c1 = 0.0;
    double c2 = 0.0;
    double scale_sq = 0.0;
};

inline CasimirPair casimirs(double omega_rate, double g_rate, double Theta)
{
    return {0.25 * (omega_rate * omega_rate - g_rate * g_rate), 0.5 * omega_rate * g_rate * cos_angle(Theta),
            0.25 * std::fmax(omega_rate * omega_rate, g_rate * g_rate)};
}

inline CasimirPair casimirs(const Vec3& omega, const Vec3& g)
{
    return {0.25 * (dot(omega, omega) - dot(g, g)), 0.5 * dot(omega, g),
            0.25 * std::fmax(dot(omega, omega), dot(g, g))};
}

/// zeta with zeta^2 = C1 + i C2 (principal root): eigenvalue of Omega + iG.
inline cplx generator_eigenvalue(const CasimirPair& c) { return std::sqrt(cplx{c.c1, c.c2}); }

/// |zeta|^2 <= tol_rel * max(omega^2, g^2)/4
inline bool is_critical(const CasimirPair& c, double tol_rel)
{
    if (!(tol_rel > 0.0)) throw DomainError("is_critical: tol_rel must be positive");
    return std::abs(cplx{c.c1, c.c2}) <= tol_rel * c.scale_sq;
}

// --- SL(2,C) form invariance --------------------------------------------

struct ConjugatedTriple {
    Vec3 omega;
    Vec3 g;
    DensityMatrix2 rho;
};

/// Omega' + iG' = A (Omega + iG) A^-1 and rho' = A rho A^dagger / Tr(...), with
/// Omega = omega.sigma/2 and G = g.sigma/2.
inline ConjugatedTriple sl2c_conjugate(const Complex2x2& A, const Vec3& omega, const Vec3& g,
                                      const DensityMatrix2& rho)
{
    if (std::abs(A.det() - 1.0) > 1e-10) throw DomainError("sl2c_conjugate: det A must equal 1");
    const Complex2x2 gen = 0.5 * pauli_dot(omega, g);
    const PauliComponents pc = pauli_components(A * gen * A.inverse());
    const Vec3 omega_p{2.0 * pc.c[0].real(), 2.0 * pc.c[1].real(), 2.0 * pc.c[2].real()};
    const Vec3 g_p{2.0 * pc.c[0].imag(), 2.0 * pc.c[1].imag(), 2.0 * pc.c[2].imag()};

    Complex2x2 r = A * rho.matrix() * A.adjoint();
    r *= 1.0 / r.trace().real();
    // Restore exact Hermiticity lost to rounding.
    r = 0.5 * (r + r.adjoint());
    return {omega_p, g_p, DensityMatrix2(r)};
}

// --- parameter-space mesh -----------------------------------------------

enum class OutcomeRegion { below, boundary, above };

inline const char* to_string(OutcomeRegion r)
{
    switch (r) {
    case OutcomeRegion::below: return "Theta<pi/2";
    case OutcomeRegion::boundary: return "Theta=pi/2";
    case OutcomeRegion::above: return "Theta>pi/2";
    }
    return "?";
}

inline OutcomeRegion outcome_region(double Theta)
{
    if (Theta < half_pi) return OutcomeRegion::below;
    if (Theta > half_pi) return OutcomeRegion::above;
    return OutcomeRegion::boundary;
}

struct MeshPoint {
    double alpha;
    double theta;
    double Theta;
    bool admissible;
    OutcomeRegion region;
};

inline MeshPoint classify(double alpha, double theta, double Theta)
{
    return {alpha, theta, Theta, is_admissible(alpha, theta, Theta), outcome_region(Theta)};
}

/// k-th of n equally spaced samples over [0, pi].
inline double grid_angle(std::size_t k, std::size_t n)
{
    return pi * (static_cast<double>(k) / static_cast<double>(n - 1));
}

/// Regular grid over [0, pi]^3, Theta fastest.
inline std::vector<MeshPoint> tetrahedron_mesh(std::size_t alpha_samples, std::size_t theta_samples,
                                               std::size_t Theta_samples)
{
    if (alpha_samples < 2 || theta_samples < 2 || Theta_samples < 2)
        throw DomainError("tetrahedron_mesh: at least two samples per axis");
    std::vector<MeshPoint> out;
    out.reserve(alpha_samples * theta_samples * Theta_samples);
    for (std::size_t i = 0; i < alpha_samples; ++i)
        for (std::size_t j = 0; j < theta_samples; ++j)
            for (std::size_t k = 0; k < Theta_samples; ++k)
                out.push_back(classify(grid_angle(i, alpha_samples), grid_angle(j, theta_samples),
                                       grid_angle(k, Theta_samples)));
    return out;
}

/// Cross-section of the mesh at fixed alpha.
inline std::vector<MeshPoint> cross_section(double alpha, std::size_t resolution)
{
    require_angle(alpha, "alpha");
    if (resolution < 2) throw DomainError("cross_section: resolution must be at least 2");
    std::vector<MeshPoint> out;
    out.reserve(resolution * resolution);
    for (std::size_t j = 0; j < resolution; ++j)
        for (std::size_t k = 0; k < resolution; ++k)
            out.push_back(classify(alpha, grid_angle(j, resolution), grid_angle(k, resolution)));
    return out;
}

}  // namespace qlm::geometry
