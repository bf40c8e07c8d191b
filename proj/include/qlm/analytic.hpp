#pragma once

// Closed-form evolution when the driving direction is parallel to w (gh = w_hat;
// the antiparallel case is the opposite branch). With x = l Gamma(t):
//
//   n(t) = [sech x (R(wt) n0)_perp + (tanh x + w.n0) w_hat] / (1 + tanh x (w.n0))
//   K(t) = (cosh(x/2) I + sinh(x/2) w.sigma) (cos(wt/2) I - i sin(wt/2) w.sigma)
//
// Large Gamma is handled with exponentials of non-positive arguments only.

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "qlm/errors.hpp"
#include "qlm/linalg.hpp"
#include "qlm/potentials.hpp"
#include "qlm/state.hpp"

namespace qlm::analytic {

/// Gamma below which the direct hyperbolic expressions are used.
inline constexpr double log_domain_seam = 30.0;
/// Gamma above which the unnormalized propagator overflows.
inline constexpr double raw_propagator_limit = 700.0;

struct ParallelScenario {
    ObservableSpec spec;
    potentials::PotentialProfile profile;
    Branch lambda = Branch::plus;
};

/// Gamma(t) by adaptive quadrature of the scenario profile.
inline std::function<double(double)> quadrature_gamma(const ParallelScenario& sc,
                                                      double tol = potentials::default_quadrature_tol)
{
    return [profile = sc.profile, tol](double t) { return potentials::gamma(profile, t, tol); };
}

/// Core closed form in terms of the integrated drive and the precession phase.
/// w_hat must be a unit vector, gamma_val >= 0.
inline Vec3 parallel_state(const Vec3& n0, const Vec3& w_hat, double lambda, double gamma_val, double phase)
{
    if (!(gamma_val >= 0.0)) throw DomainError("parallel_state: Gamma must be nonnegative");
    const double c = std::cos(phase);
    const double s = std::sin(phase);
    const double w = dot(w_hat, n0);
    const Vec3 wxn = cross(w_hat, n0);

    if (gamma_val <= log_domain_seam) {
        const double x = lambda * gamma_val;
        const double th = std::tanh(x);
        const double sh = 1.0 / std::cosh(x);
        const double den = 1.0 + th * w;
        if (!(den > 1e-300)) throw DegenerateBranchError("parallel_state: zero-probability branch");
        return (sh * c * n0 + (th + (1.0 - c * sh) * w) * w_hat + sh * s * wxn) / den;
    }

    // Numerator and denominator multiplied by (1 + e^{-2|x|}).
    const double sg = lambda >= 0.0 ? 1.0 : -1.0;
    const double e1 = std::exp(-gamma_val);
    const double e2 = e1 * e1;
    const double den = (1.0 + sg * w) + e2 * (1.0 - sg * w);
    if (!(den > 1e-300)) throw DegenerateBranchError("parallel_state: zero-probability branch");
    const Vec3 num = (2.0 * e1 * c) * n0 + (sg * (1.0 - e2) + ((1.0 + e2) - 2.0 * e1 * c) * w) * w_hat +
                     (2.0 * e1 * s) * wxn;
    return num / den;
}

/// Bloch vector of the parallel configuration at time t.
template <class GammaFn>
BlochVector bloch_parallel(double t, const BlochVector& n0, const ParallelScenario& sc, GammaFn&& gamma_fn)
{
    sc.spec.require_nondegenerate();
    const Vec3 n = parallel_state(n0.vec(), sc.spec.unit(), sign(sc.lambda), gamma_fn(t), sc.spec.omega_rate * t);
    // The closed form keeps |n| <= 1 algebraically; trim rounding above the sphere.
    const double r = norm(n);
    return BlochVector(r > 1.0 ? n / r : n);
}

inline BlochVector bloch_parallel(double t, const BlochVector& n0, const ParallelScenario& sc)
{
    return bloch_parallel(t, n0, sc, quadrature_gamma(sc));
}

/// cos(wt/2) I - i sin(wt/2) w.sigma
inline Complex2x2 precession_factor(const Vec3& w_hat, double phase)
{
    const double h = 0.5 * phase;
    return Complex2x2::identity() * cplx{std::cos(h), 0.0} + pauli_dot(w_hat) * cplx{0.0, -std::sin(h)};
}

/// Unnormalized propagator; throws OverflowError beyond Gamma = 700.
template <class GammaFn>
Complex2x2 k_parallel(double t, const ParallelScenario& sc, GammaFn&& gamma_fn)
{
    sc.spec.require_nondegenerate();
    const double G = gamma_fn(t);
    if (G > raw_propagator_limit)
        throw OverflowError("k_parallel: Gamma = " + std::to_string(G) +
                            " overflows the raw propagator, use k_parallel_normalized");
    const double x = 0.5 * sign(sc.lambda) * G;
    const Vec3 w = sc.spec.unit();
    const Complex2x2 hyper = Complex2x2::identity() * cplx{std::cosh(x), 0.0} + pauli_dot(w) * cplx{std::sinh(x), 0.0};
    return hyper * precession_factor(w, sc.spec.omega_rate * t);
}

inline Complex2x2 k_parallel(double t, const ParallelScenario& sc) { return k_parallel(t, sc, quadrature_gamma(sc)); }

/// (cosh(x/2), sinh(x/2)) / sqrt(2 cosh x) for x = lambda * gamma_val, via
/// a = |x|: ((1 + e^{-a}), sign(x)(1 - e^{-a})) / (2 sqrt(1 + e^{-2a})).
inline std::pair<double, double> normalized_coefficients(double lambda, double gamma_val)
{
    const double a = std::fabs(gamma_val);
    const double e = std::exp(-a);
    const double d = 2.0 * std::sqrt(1.0 + e * e);
    const double sx = (lambda * gamma_val) >= 0.0 ? 1.0 : -1.0;
    return {(1.0 + e) / d, sx * (1.0 - e) / d};
}

/// Propagator scaled to Tr(K K^+) = 1.
template <class GammaFn>
Complex2x2 k_parallel_normalized(double t, const ParallelScenario& sc, GammaFn&& gamma_fn)
{
    sc.spec.require_nondegenerate();
    const auto [ch, sh] = normalized_coefficients(sign(sc.lambda), gamma_fn(t));
    const Vec3 w = sc.spec.unit();
    const Complex2x2 hyper = Complex2x2::identity() * cplx{ch, 0.0} + pauli_dot(w) * cplx{sh, 0.0};
    return hyper * precession_factor(w, sc.spec.omega_rate * t);
}

inline Complex2x2 k_parallel_normalized(double t, const ParallelScenario& sc)
{
    return k_parallel_normalized(t, sc, quadrature_gamma(sc));
}

/// Pi_lambda(w). The normalized propagator tends to Pi_lambda e^{-i l w t/2}
/// and every state with nonzero Born weight to the image of Pi_lambda.
inline Projector2 projector_limit(const ParallelScenario& sc)
{
    return projector_for(spectral_projectors(sc.spec), sc.lambda);
}

/// max_ij |A_ij - e^{i phi} B_ij| with phi the least-squares phase aligning B to A.
inline double distance_up_to_phase(const Complex2x2& A, const Complex2x2& B)
{
    cplx overlap{0.0, 0.0};
    for (int i = 0; i < 4; ++i) overlap += std::conj(B.m[i]) * A.m[i];
    const cplx phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : cplx{1.0, 0.0};
    double d = 0.0;
    for (int i = 0; i < 4; ++i) d = std::fmax(d, std::abs(A.m[i] - phase * B.m[i]));
    return d;
}

}  // namespace qlm::analytic
