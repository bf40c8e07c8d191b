#pragma once

// Quasilinear evolution of a driven two-level system in three equivalent
// representations:
//
//   Bloch:       dn/dt = w x n + l g(t) (gh - n (gh . n))
//   density:     drho/dt = -i[Omega, rho] + {G, rho} - 2 rho Tr(G rho)
//   propagator:  dK/dt = -i (Omega + i G) K,   rho = K rho0 K^+ / Tr(K rho0 K^+)
//
// with Omega = w.sigma/2, G = l g(t) gh.sigma/2 and every rate in rad/s.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qlm/errors.hpp"
#include "qlm/geometry.hpp"
#include "qlm/integrator.hpp"
#include "qlm/linalg.hpp"
#include "qlm/potentials.hpp"
#include "qlm/state.hpp"

namespace qlm::dynamics {

/// Frame in which the ODE is stepped. `rotating` removes the precession about w
/// exactly (interaction picture) and steps only the driving term; `lab` steps
/// the equation as written. Samples are always reported in the lab frame.
enum class Frame { rotating, lab };

struct IntegratorConfig {
    double rtol = 1e-9;
    double atol = 1e-12;
    double t_start = 1e-9;  // first nonzero sample, s
    double t_final = 1e-3;  // s
    int samples_per_decade = 200;
    std::size_t max_steps = 50'000'000;
    Frame frame = Frame::rotating;

    void validate() const
    {
        if (!(rtol > 0.0) || !(atol > 0.0)) throw DomainError("integrator: rtol and atol must be positive");
        if (!(t_start > 0.0) || !(t_start < t_final)) throw DomainError("integrator: need 0 < t_start < t_final");
        if (samples_per_decade < 1) throw DomainError("integrator: samples_per_decade must be >= 1");
        if (max_steps == 0) throw DomainError("integrator: max_steps must be positive");
    }

    StepperOptions stepper() const
    {
        StepperOptions o;
        o.rtol = rtol;
        o.atol = atol;
        o.max_steps = max_steps;
        return o;
    }
};

/// 0 followed by a logarithmic grid from t_start to t_final (both included).
inline std::vector<double> log_grid(double t_start, double t_final, int samples_per_decade)
{
    const double decades = std::log10(t_final / t_start);
    const auto intervals = static_cast<std::size_t>(std::max(1.0, std::ceil(decades * samples_per_decade - 1e-9)));
    std::vector<double> grid;
    grid.reserve(intervals + 2);
    grid.push_back(0.0);
    for (std::size_t k = 0; k < intervals; ++k)
        grid.push_back(t_start * std::pow(t_final / t_start, static_cast<double>(k) / static_cast<double>(intervals)));
    grid.push_back(t_final);
    return grid;
}

inline std::vector<double> log_grid(const IntegratorConfig& cfg)
{
    return log_grid(cfg.t_start, cfg.t_final, cfg.samples_per_decade);
}

struct TrajectorySample {
    double t = 0.0;                  // s (or m for distance-parametrized runs)
    Vec3 n;                          // Bloch vector
    double norm = 0.0;               // |n|
    double rate = 0.0;               // |dn/dt|
    double g_rate = 0.0;             // g(t), rad/s
    std::optional<double> epsilon;   // mixing weight when a convex split is tracked
    double drive_integral = 0.0;     // int_0^t l g gh.n = 2 int Tr(G rho)
};

struct Diagnostics {
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
    std::size_t renormalizations = 0;        // |n| pulled back to the unit sphere
    bool zero_probability_branch = false;    // Born weight of the branch was 0
    double max_trace_drift = 0.0;            // density path only
    double max_hermiticity_residual = 0.0;   // density path only
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    Diagnostics diagnostics;

    bool empty() const { return samples.empty(); }
    const TrajectorySample& back() const { return samples.back(); }
    std::size_t size() const { return samples.size(); }
};

/// Integration failure; carries the samples emitted before the failure.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, Trajectory partial)
        : std::runtime_error(what), partial_(std::move(partial))
    {
    }
    const Trajectory& partial() const { return partial_; }

private:
    Trajectory partial_;
};

/// Driving device: direction geometry and magnitude profile.
struct DeviceConfig {
    geometry::DeviceGeometry geometry;
    potentials::PotentialProfile profile = potentials::InvertedMorse{1e8, 1e5};
};

/// Everything the right-hand sides need, resolved once.
struct Drive {
    Vec3 omega;      // w vector, rad/s
    Vec3 g_dir;      // unit driving direction
    potentials::PotentialProfile profile;
    double lambda;   // +1 / -1

    double g_rate(double t) const { return potentials::rate(profile, t); }
};

inline Drive make_drive(const ObservableSpec& spec, const DeviceConfig& device, Branch lambda)
{
    spec.require_nondegenerate();
    return {spec.vector(), geometry::resolve_direction(spec, device.geometry), device.profile, sign(lambda)};
}

/// Free precession about `axis` at `rate` rad per unit of the independent variable.
struct Precession {
    Vec3 axis;          // unit vector (ignored when rate = 0)
    double rate = 0.0;

    /// Rotation by rate * x about the axis (Rodrigues).
    Vec3 rotate(const Vec3& v, double x) const
    {
        if (rate == 0.0) return v;
        const double phi = rate * x;
        const double c = std::cos(phi);
        const double s = std::sin(phi);
        return c * v + s * cross(axis, v) + ((1.0 - c) * dot(axis, v)) * axis;
    }

    /// exp(-i rate x axis.sigma / 2), so that U (v.sigma) U^+ = (rotate(v, x)).sigma.
    Complex2x2 unitary(double x) const
    {
        if (rate == 0.0) return Complex2x2::identity();
        const double half = 0.5 * rate * x;
        return Complex2x2::identity() * cplx{std::cos(half), 0.0} + pauli_dot(axis) * cplx{0.0, -std::sin(half)};
    }
};

/// Lab-frame precession vector `omega` split into the part left in the stepped
/// equation and the part solved exactly.
inline std::pair<Vec3, Precession> split_frame(const Vec3& omega, Frame frame)
{
    const double w = norm(omega);
    if (frame == Frame::lab || w == 0.0) return {omega, Precession{{0.0, 0.0, 1.0}, 0.0}};
    return {Vec3{}, Precession{omega / w, w}};
}

// --- Bloch representation --------------------------------------------------

inline Vec3 bloch_rhs(const Vec3& n, const Vec3& omega, double g_rate, const Vec3& g_dir, double lambda)
{
    return cross(omega, n) + (lambda * g_rate) * (g_dir - dot(g_dir, n) * n);
}

inline Vec3 bloch_rhs(double t, const Vec3& n, const Vec3& omega, const potentials::PotentialProfile& profile,
                      const Vec3& g_dir, Branch lambda)
{
    return bloch_rhs(n, omega, potentials::rate(profile, t), g_dir, sign(lambda));
}

/// Core Bloch integrator over an arbitrary independent variable x with
/// dn/dx = omega x n + l g(x) (gh - n (gh.n)). Samples are emitted on `grid`.
/// In the rotating frame the stepped variable is m = R(-|omega| x) n, obeying
/// dm/dx = l g(x) (gh_I - m (gh_I.m)) with gh_I = R(-|omega| x) gh.
template <class RateFn>
Trajectory integrate_bloch_core(const Vec3& n0, const Vec3& omega, const Vec3& g_dir, RateFn&& g_of_x,
                                double lambda, std::span<const double> grid, const StepperOptions& opt,
                                Frame frame = Frame::rotating)
{
    using Stepper = Dopri5<4>;
    using S = Stepper::State;

    const auto [omega_stepped, prec] = split_frame(omega, frame);
    Trajectory traj;
    traj.samples.reserve(grid.size());

    auto rhs = [&](double x, const S& y, S& dy) {
        const Vec3 m{y[0], y[1], y[2]};
        const double g = g_of_x(x);
        const Vec3 gi = prec.rotate(g_dir, -x);
        const double gm = dot(gi, m);
        const Vec3 d = cross(omega_stepped, m) + (lambda * g) * (gi - gm * m);
        dy = {d.x, d.y, d.z, lambda * g * gm};
    };
    auto observe = [&](double x, const S& y) {
        const Vec3 n = prec.rotate(Vec3{y[0], y[1], y[2]}, x);
        const double g = g_of_x(x);
        TrajectorySample s;
        s.t = x;
        s.n = n;
        s.norm = norm(n);
        s.rate = norm(bloch_rhs(n, omega, g, g_dir, lambda));
        s.g_rate = g;
        s.drive_integral = y[3];
        traj.samples.push_back(s);
    };
    const double atol = opt.atol;
    auto post = [&](double, S& y) {
        const double r = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
        if (r > 1.0 + atol) {
            y[0] /= r;
            y[1] /= r;
            y[2] /= r;
            ++traj.diagnostics.renormalizations;
            return true;
        }
        return false;
    };

    const Stepper stepper(opt);
    try {
        const S y0{n0.x, n0.y, n0.z, 0.0};
        const StepperStats st = stepper.integrate(rhs, grid.front(), y0, grid, observe, post);
        traj.diagnostics.accepted_steps = st.accepted;
        traj.diagnostics.rejected_steps = st.rejected;
    } catch (const StepFailure& e) {
        traj.diagnostics.accepted_steps = e.stats().accepted;
        traj.diagnostics.rejected_steps = e.stats().rejected;
        throw IntegrationError(e.what(), std::move(traj));
    }
    return traj;
}

/// Numerical solution of the Bloch equation for branch lambda.
inline Trajectory integrate_bloch(const BlochVector& n0, const ObservableSpec& spec, const DeviceConfig& device,
                                  Branch lambda, const IntegratorConfig& cfg)
{
    cfg.validate();
    const Drive drive = make_drive(spec, device, lambda);
    const std::vector<double> grid = log_grid(cfg);
    Trajectory traj = integrate_bloch_core(
        n0.vec(), drive.omega, drive.g_dir, [&drive](double t) { return drive.g_rate(t); }, drive.lambda, grid,
        cfg.stepper(), cfg.frame);
    traj.diagnostics.zero_probability_branch = born_probability(n0, spec, lambda) == 0.0;
    return traj;
}

/// |dn/dt| at each sample, from the right-hand side (not finite differences).
inline std::vector<double> rate_of_change(const Trajectory& traj, const ObservableSpec& spec,
                                          const DeviceConfig& device, Branch lambda)
{
    if (traj.empty()) throw DomainError("rate_of_change: empty trajectory");
    const Drive drive = make_drive(spec, device, lambda);
    std::vector<double> out;
    out.reserve(traj.size());
    for (const auto& s : traj.samples)
        out.push_back(norm(bloch_rhs(s.n, drive.omega, drive.g_rate(s.t), drive.g_dir, drive.lambda)));
    return out;
}

/// First sample time at which the stored rate falls below `threshold` and stays
/// below it until the end; nullopt if it never settles.
inline std::optional<double> settle_time(const Trajectory& traj, double threshold)
{
    std::optional<double> t;
    for (const auto& s : traj.samples) {
        if (s.rate < threshold) {
            if (!t) t = s.t;
        } else {
            t.reset();
        }
    }
    return t;
}

/// First sample time at which the stored rate falls below `threshold`.
inline std::optional<double> first_time_below(const Trajectory& traj, double threshold, double after = 0.0)
{
    for (const auto& s : traj.samples)
        if (s.t > after && s.rate < threshold) return s.t;
    return std::nullopt;
}

// --- density-matrix representation -------------------------------------------

inline Complex2x2 density_rhs(const Complex2x2& rho, const Complex2x2& omega_m, const Complex2x2& g_m)
{
    const cplx minus_i{0.0, -1.0};
    const cplx tr_g_rho = (g_m * rho).trace();
    return minus_i * commutator(omega_m, rho) + anticommutator(g_m, rho) - (2.0 * tr_g_rho) * rho;
}

namespace detail {

inline Complex2x2 unpack(const std::array<double, 8>& y)
{
    return {cplx{y[0], y[1]}, cplx{y[2], y[3]}, cplx{y[4], y[5]}, cplx{y[6], y[7]}};
}

inline std::array<double, 8> pack(const Complex2x2& m)
{
    return {m.m[0].real(), m.m[0].imag(), m.m[1].real(), m.m[1].imag(),
            m.m[2].real(), m.m[2].imag(), m.m[3].real(), m.m[3].imag()};
}

}  // namespace detail

/// Numerical solution of the density-matrix equation, reported as Bloch vectors.
inline Trajectory integrate_density(const DensityMatrix2& rho0, const ObservableSpec& spec,
                                    const DeviceConfig& device, Branch lambda, const IntegratorConfig& cfg)
{
    cfg.validate();
    const Drive drive = make_drive(spec, device, lambda);
    const std::vector<double> grid = log_grid(cfg);
    const auto [omega_stepped, prec] = split_frame(drive.omega, cfg.frame);
    const Complex2x2 omega_m = 0.5 * pauli_dot(omega_stepped);

    using Stepper = Dopri5<8>;
    using S = Stepper::State;
    Trajectory traj;
    traj.samples.reserve(grid.size());

    auto rhs = [&](double t, const S& y, S& dy) {
        const Complex2x2 g_m = pauli_dot(prec.rotate(drive.g_dir, -t)) * cplx{0.5 * drive.lambda * drive.g_rate(t), 0.0};
        dy = detail::pack(density_rhs(detail::unpack(y), omega_m, g_m));
    };
    auto observe = [&](double t, const S& y) {
        const Complex2x2 u = prec.unitary(t);
        const Complex2x2 rho = u * detail::unpack(y) * u.adjoint();
        const Vec3 n = bloch_components(rho);
        const double g = drive.g_rate(t);
        TrajectorySample s;
        s.t = t;
        s.n = n;
        s.norm = norm(n);
        s.rate = norm(bloch_rhs(n, drive.omega, g, drive.g_dir, drive.lambda));
        s.g_rate = g;
        traj.samples.push_back(s);
        auto& d = traj.diagnostics;
        d.max_trace_drift = std::fmax(d.max_trace_drift, std::abs(rho.trace() - 1.0));
        d.max_hermiticity_residual = std::fmax(d.max_hermiticity_residual, hermiticity_residual(rho));
    };

    const Stepper stepper(cfg.stepper());
    try {
        const StepperStats st = stepper.integrate(rhs, 0.0, detail::pack(rho0.matrix()), grid, observe);
        traj.diagnostics.accepted_steps = st.accepted;
        traj.diagnostics.rejected_steps = st.rejected;
    } catch (const StepFailure& e) {
        throw IntegrationError(e.what(), std::move(traj));
    }
    traj.diagnostics.zero_probability_branch =
        born_probability(bloch_from_density(rho0), spec, lambda) == 0.0;
    return traj;
}

// --- propagator representation ---------------------------------------------

inline Complex2x2 propagator_rhs(const Complex2x2& K, const Complex2x2& omega_m, const Complex2x2& g_m)
{
    const cplx minus_i{0.0, -1.0};
    return (minus_i * omega_m + g_m) * K;
}

/// K = K_stored * exp(log_scale); K_stored has Frobenius norm of order one.
struct PropagatorState {
    Complex2x2 K = Complex2x2::identity();
    double log_scale = 0.0;
};

struct PropagatorHistory {
    std::vector<double> t;
    std::vector<PropagatorState> states;
    StepperStats stats;
};

/// Integrates the propagator from K(0) = I, rescaling K to unit Frobenius norm
/// after every accepted step and accumulating the discarded log scale.
inline PropagatorHistory integrate_propagator(const ObservableSpec& spec, const DeviceConfig& device, Branch lambda,
                                              const IntegratorConfig& cfg)
{
    cfg.validate();
    const Drive drive = make_drive(spec, device, lambda);
    const std::vector<double> grid = log_grid(cfg);
    const auto [omega_stepped, prec] = split_frame(drive.omega, cfg.frame);
    const Complex2x2 omega_m = 0.5 * pauli_dot(omega_stepped);

    using Stepper = Dopri5<8>;
    using S = Stepper::State;
    PropagatorHistory hist;
    hist.t.reserve(grid.size());
    hist.states.reserve(grid.size());
    double log_scale = 0.0;

    auto rhs = [&](double t, const S& y, S& dy) {
        const Complex2x2 g_m = pauli_dot(prec.rotate(drive.g_dir, -t)) * cplx{0.5 * drive.lambda * drive.g_rate(t), 0.0};
        dy = detail::pack(propagator_rhs(detail::unpack(y), omega_m, g_m));
    };
    auto observe = [&](double t, const S& y) {
        hist.t.push_back(t);
        hist.states.push_back({prec.unitary(t) * detail::unpack(y), log_scale});
    };
    auto post = [&](double, S& y) {
        double f = 0.0;
        for (double v : y) f += v * v;
        f = std::sqrt(f);
        for (double& v : y) v /= f;
        log_scale += std::log(f);
        return true;
    };

    const Stepper stepper(cfg.stepper());
    try {
        hist.stats = stepper.integrate(rhs, 0.0, detail::pack(Complex2x2::identity()), grid, observe, post);
    } catch (const StepFailure& e) {
        Trajectory partial;
        throw IntegrationError(e.what(), std::move(partial));
    }
    return hist;
}

/// K / sqrt(Tr(K K^+)).
inline Complex2x2 normalize_propagator(const Complex2x2& K)
{
    const double f = std::sqrt((K * K.adjoint()).trace().real());
    if (!(f > 0.0)) throw DegenerateBranchError("propagator vanished");
    Complex2x2 out = K;
    out *= 1.0 / f;
    return out;
}

/// K rho0 K^+ / Tr(K rho0 K^+); the scale of K cancels.
inline Complex2x2 reconstruct_density(const Complex2x2& K, const Complex2x2& rho0)
{
    Complex2x2 r = K * rho0 * K.adjoint();
    const double tr = r.trace().real();
    if (!(tr > 0.0)) throw DegenerateBranchError("propagator annihilates the initial state");
    r *= 1.0 / tr;
    return r;
}

inline std::vector<Vec3> reconstruct_bloch(const PropagatorHistory& hist, const DensityMatrix2& rho0)
{
    std::vector<Vec3> out;
    out.reserve(hist.states.size());
    for (const auto& s : hist.states) out.push_back(bloch_components(reconstruct_density(s.K, rho0.matrix())));
    return out;
}

// --- ensemble weight eps(t) ----------------------------------------------------

/// eps(t) = eps0 Tr(K rho_a0 K^+) / Tr(K rho0 K^+).
inline std::vector<double> epsilon_via_propagator(const PropagatorHistory& hist, const DensityMatrix2& rho_a0,
                                                  const DensityMatrix2& rho0, double eps0)
{
    if (!(eps0 >= 0.0 && eps0 <= 1.0)) throw DomainError("epsilon: eps0 must lie in [0, 1]");
    std::vector<double> out;
    out.reserve(hist.states.size());
    for (const auto& s : hist.states) {
        const double num = (s.K * rho_a0.matrix() * s.K.adjoint()).trace().real();
        const double den = (s.K * rho0.matrix() * s.K.adjoint()).trace().real();
        if (!(den > 0.0)) throw DegenerateBranchError("epsilon: Tr(K rho0 K^+) vanished");
        out.push_back(std::clamp(eps0 * num / den, 0.0, 1.0));
    }
    return out;
}

/// eps0 e^X / (1 - eps0 + eps0 e^X) evaluated as a logistic in the log domain.
inline double logistic_weight(double eps0, double x)
{
    if (eps0 <= 0.0) return 0.0;
    if (eps0 >= 1.0) return 1.0;
    const double z = std::log(eps0) - std::log1p(-eps0) + x;
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

/// eps(t) from X(t) = 2 int_0^t Tr(G (rho_a - rho_b)); the integral is the
/// drive_integral accumulated alongside each Bloch trajectory.
inline std::vector<double> epsilon_via_integral(const Trajectory& traj_a, const Trajectory& traj_b, double eps0)
{
    if (!(eps0 >= 0.0 && eps0 <= 1.0)) throw DomainError("epsilon: eps0 must lie in [0, 1]");
    if (traj_a.size() != traj_b.size()) throw DomainError("epsilon: trajectories are on different grids");
    std::vector<double> out;
    out.reserve(traj_a.size());
    for (std::size_t i = 0; i < traj_a.size(); ++i) {
        const auto& a = traj_a.samples[i];
        const auto& b = traj_b.samples[i];
        if (a.t != b.t) throw DomainError("epsilon: trajectories are on different grids");
        out.push_back(logistic_weight(eps0, a.drive_integral - b.drive_integral));
    }
    return out;
}

/// eps n_a + (1 - eps) n_b per sample.
inline std::vector<Vec3> recombine(const Trajectory& traj_a, const Trajectory& traj_b, std::span<const double> eps)
{
    if (traj_a.size() != traj_b.size() || eps.size() != traj_a.size())
        throw DomainError("recombine: size mismatch");
    std::vector<Vec3> out;
    out.reserve(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i)
        out.push_back(eps[i] * traj_a.samples[i].n + (1.0 - eps[i]) * traj_b.samples[i].n);
    return out;
}

/// Copies eps into the trajectory samples.
inline void attach_epsilon(Trajectory& traj, std::span<const double> eps)
{
    if (eps.size() != traj.size()) throw DomainError("attach_epsilon: size mismatch");
    for (std::size_t i = 0; i < eps.size(); ++i) traj.samples[i].epsilon = eps[i];
}

}  // namespace qlm::dynamics
