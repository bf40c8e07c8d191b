#pragma once

// Two-level states and observables: Bloch vectors, density matrices, the
// observable Omega = (omega/2) w.sigma with its rank-one spectral projectors,
// Born probabilities and the von Neumann projection.
//
// All generator magnitudes are stored divided by hbar, i.e. in rad/s.

#include <cmath>
#include <string>
#include <utility>

#include "qlm/errors.hpp"
#include "qlm/linalg.hpp"

namespace qlm {

inline constexpr double bloch_norm_tol = 1e-10;
inline constexpr double matrix_tol = 1e-12;

/// Outcome branch label, +1 or -1.
enum class Branch : int { plus = 1, minus = -1 };

constexpr double sign(Branch b) { return static_cast<int>(b); }
constexpr Branch opposite(Branch b) { return b == Branch::plus ? Branch::minus : Branch::plus; }

inline Branch branch_from_int(int v)
{
    if (v == 1) return Branch::plus;
    if (v == -1) return Branch::minus;
    throw DomainError("branch label must be +1 or -1, got " + std::to_string(v));
}

/// Unit vector [sin a cos b, sin a sin b, cos a].
inline Vec3 unit_direction(double polar, double azimuth)
{
    const double s = std::sin(polar);
    return {s * std::cos(azimuth), s * std::sin(azimuth), std::cos(polar)};
}

/// Real 3-vector inside the closed unit ball.
class BlochVector {
public:
    BlochVector() = default;
    explicit BlochVector(const Vec3& n) : n_(n)
    {
        if (!(norm(n) <= 1.0 + bloch_norm_tol))
            throw DomainError("Bloch vector outside the unit ball: |n| = " + std::to_string(norm(n)));
    }
    BlochVector(double x, double y, double z) : BlochVector(Vec3{x, y, z}) {}

    const Vec3& vec() const { return n_; }
    double operator[](int i) const { return n_[i]; }
    double length() const { return norm(n_); }

    friend bool operator==(const BlochVector&, const BlochVector&) = default;

private:
    Vec3 n_{};
};

/// Hermitian, unit-trace, positive semidefinite 2x2 matrix.
class DensityMatrix2 {
public:
    DensityMatrix2() : m_{0.5, 0.0, 0.0, 0.5} {}

    explicit DensityMatrix2(const Complex2x2& m) : m_(m)
    {
        if (hermiticity_residual(m) > matrix_tol) throw DomainError("density matrix is not Hermitian");
        if (std::abs(m.trace() - 1.0) > matrix_tol) throw DomainError("density matrix trace differs from 1");
        if (eigenvalues().first < -matrix_tol) throw DomainError("density matrix is not positive semidefinite");
    }

    const Complex2x2& matrix() const { return m_; }

    /// Eigenvalues (smaller, larger) of the Hermitian part.
    std::pair<double, double> eigenvalues() const
    {
        const double a = m_(0, 0).real();
        const double d = m_(1, 1).real();
        const double half_tr = 0.5 * (a + d);
        const double r = std::hypot(0.5 * (a - d), std::abs(m_(0, 1)));
        return {half_tr - r, half_tr + r};
    }

private:
    Complex2x2 m_;
};

/// Observable Omega = (omega_rate / 2) w.sigma with w = unit_direction(alpha, beta_az).
struct ObservableSpec {
    double omega_rate = 0.0;  // rad/s
    double alpha = 0.0;       // polar angle in [0, pi]
    double beta_az = 0.0;     // azimuth

    Vec3 unit() const { return unit_direction(alpha, beta_az); }
    Vec3 vector() const { return omega_rate * unit(); }

    void require_nondegenerate() const
    {
        if (!(omega_rate > 0.0)) throw DegenerateObservableError();
    }
};

/// Rank-one orthogonal projector.
class Projector2 {
public:
    explicit Projector2(const Complex2x2& m) : m_(m)
    {
        if (max_abs_diff(m * m, m) > matrix_tol) throw DomainError("projector is not idempotent");
        if (hermiticity_residual(m) > matrix_tol) throw DomainError("projector is not Hermitian");
        if (std::abs(m.trace() - 1.0) > matrix_tol) throw DomainError("projector is not rank one");
    }

    /// (I + s.sigma)/2 for a unit vector s.
    static Projector2 onto(const Vec3& s) { return Projector2(0.5 * (Complex2x2::identity() + pauli_dot(s))); }

    const Complex2x2& matrix() const { return m_; }

private:
    Complex2x2 m_;
};

// ---------------------------------------------------------------------------

inline DensityMatrix2 density_from_bloch(const BlochVector& n)
{
    return DensityMatrix2(0.5 * (Complex2x2::identity() + pauli_dot(n.vec())));
}

/// n_k = Tr(rho sigma_k), no validation.
inline Vec3 bloch_components(const Complex2x2& rho)
{
    const cplx i{0.0, 1.0};
    return {(rho(0, 1) + rho(1, 0)).real(), (i * (rho(0, 1) - rho(1, 0))).real(),
            (rho(0, 0) - rho(1, 1)).real()};
}

inline BlochVector bloch_from_density(const DensityMatrix2& rho) { return BlochVector(bloch_components(rho.matrix())); }

inline Complex2x2 observable_matrix(const ObservableSpec& spec) { return 0.5 * pauli_dot(spec.vector()); }

/// (Pi_plus, Pi_minus)
inline std::pair<Projector2, Projector2> spectral_projectors(const ObservableSpec& spec)
{
    spec.require_nondegenerate();
    const Vec3 w = spec.unit();
    return {Projector2::onto(w), Projector2::onto(-w)};
}

inline const Projector2& projector_for(const std::pair<Projector2, Projector2>& pp, Branch b)
{
    return b == Branch::plus ? pp.first : pp.second;
}

inline double born_probability(const BlochVector& n0, const ObservableSpec& spec, Branch lambda)
{
    spec.require_nondegenerate();
    const double p = 0.5 * (1.0 + sign(lambda) * dot(spec.unit(), n0.vec()));
    return std::fmin(1.0, std::fmax(0.0, p));
}

/// Pi rho Pi / Tr(Pi rho) at the matrix level.
inline DensityMatrix2 projection_map(const DensityMatrix2& rho, const Projector2& proj)
{
    const Complex2x2 num = proj.matrix() * rho.matrix() * proj.matrix();
    const double tr = num.trace().real();
    if (!(tr > 0.0)) throw DegenerateBranchError("projection onto a zero-probability outcome");
    return DensityMatrix2(num * cplx{1.0 / tr, 0.0});
}

/// State after the selective von Neumann measurement with outcome lambda: the
/// rank-one projector collapses every admissible n0 to lambda * w.
inline BlochVector von_neumann_projected_state(const BlochVector& n0, const ObservableSpec& spec, Branch lambda)
{
    if (!(born_probability(n0, spec, lambda) > 0.0))
        throw DegenerateBranchError("von Neumann projection onto a zero-probability outcome");
    return BlochVector(sign(lambda) * spec.unit());
}

}  // namespace qlm
