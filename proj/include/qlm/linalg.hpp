#pragma once

// Small fixed-size linear algebra used throughout the library: real 3-vectors
// and complex 2x2 matrices with the Pauli basis.

#include <array>
#include <cmath>
#include <complex>
#include <ostream>

namespace qlm {

using cplx = std::complex<double>;

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
constexpr Vec3 operator/(Vec3 a, double s) { return a *= (1.0 / s); }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b)
{
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline double max_abs_diff(const Vec3& a, const Vec3& b)
{
    return std::fmax(std::fabs(a.x - b.x), std::fmax(std::fabs(a.y - b.y), std::fabs(a.z - b.z)));
}

inline std::ostream& operator<<(std::ostream& os, const Vec3& v)
{
    return os << '[' << v.x << ", " << v.y << ", " << v.z << ']';
}

/// Complex 2x2 matrix, row-major: [[a, b], [c, d]].
struct Complex2x2 {
    std::array<cplx, 4> m{};

    constexpr Complex2x2() = default;
    constexpr Complex2x2(cplx a, cplx b, cplx c, cplx d) : m{a, b, c, d} {}

    static constexpr Complex2x2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr Complex2x2 zero() { return {}; }

    constexpr cplx operator()(int r, int c) const { return m[static_cast<std::size_t>(2 * r + c)]; }
    constexpr cplx& operator()(int r, int c) { return m[static_cast<std::size_t>(2 * r + c)]; }

    Complex2x2& operator+=(const Complex2x2& o)
    {
        for (std::size_t i = 0; i < 4; ++i) m[i] += o.m[i];
        return *this;
    }
    Complex2x2& operator-=(const Complex2x2& o)
    {
        for (std::size_t i = 0; i < 4; ++i) m[i] -= o.m[i];
        return *this;
    }
    Complex2x2& operator*=(cplx s)
    {
        for (auto& e : m) e *= s;
        return *this;
    }

    cplx trace() const { return m[0] + m[3]; }
    cplx det() const { return m[0] * m[3] - m[1] * m[2]; }

    Complex2x2 adjoint() const
    {
        return {std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])};
    }

    /// Inverse via the adjugate; caller guarantees det != 0.
    Complex2x2 inverse() const
    {
        const cplx d = det();
        return {m[3] / d, -m[1] / d, -m[2] / d, m[0] / d};
    }

    /// Frobenius norm squared, Tr(M M^dagger).
    double frobenius_sq() const
    {
        double s = 0.0;
        for (const auto& e : m) s += std::norm(e);
        return s;
    }

    double max_abs() const
    {
        double s = 0.0;
        for (const auto& e : m) s = std::fmax(s, std::abs(e));
        return s;
    }

    bool all_finite() const
    {
        for (const auto& e : m)
            if (!std::isfinite(e.real()) || !std::isfinite(e.imag())) return false;
        return true;
    }
};

inline Complex2x2 operator+(Complex2x2 a, const Complex2x2& b) { return a += b; }
inline Complex2x2 operator-(Complex2x2 a, const Complex2x2& b) { return a -= b; }
inline Complex2x2 operator*(cplx s, Complex2x2 a) { return a *= s; }
inline Complex2x2 operator*(Complex2x2 a, cplx s) { return a *= s; }

inline Complex2x2 operator*(const Complex2x2& a, const Complex2x2& b)
{
    return {a.m[0] * b.m[0] + a.m[1] * b.m[2], a.m[0] * b.m[1] + a.m[1] * b.m[3],
            a.m[2] * b.m[0] + a.m[3] * b.m[2], a.m[2] * b.m[1] + a.m[3] * b.m[3]};
}

inline Complex2x2 commutator(const Complex2x2& a, const Complex2x2& b) { return a * b - b * a; }
inline Complex2x2 anticommutator(const Complex2x2& a, const Complex2x2& b) { return a * b + b * a; }

/// max |a_ij - b_ij|
inline double max_abs_diff(const Complex2x2& a, const Complex2x2& b) { return (a - b).max_abs(); }

/// max |M - M^dagger|
inline double hermiticity_residual(const Complex2x2& a) { return max_abs_diff(a, a.adjoint()); }

namespace pauli {
inline constexpr Complex2x2 sx{0.0, 1.0, 1.0, 0.0};
inline constexpr Complex2x2 sy{0.0, cplx{0.0, -1.0}, cplx{0.0, 1.0}, 0.0};
inline constexpr Complex2x2 sz{1.0, 0.0, 0.0, -1.0};
}  // namespace pauli

/// v . sigma for a real vector v.
inline Complex2x2 pauli_dot(const Vec3& v)
{
    return {cplx{v.z, 0.0}, cplx{v.x, -v.y}, cplx{v.x, v.y}, cplx{-v.z, 0.0}};
}

/// v . sigma for a complex vector (re + i im).
inline Complex2x2 pauli_dot(const Vec3& re, const Vec3& im)
{
    const cplx vx{re.x, im.x};
    const cplx vy{re.y, im.y};
    const cplx vz{re.z, im.z};
    const cplx i{0.0, 1.0};
    return {vz, vx - i * vy, vx + i * vy, -vz};
}

/// Pauli components c_k = Tr(M sigma_k) / 2 and identity part c_0 = Tr(M) / 2, so
/// M = c_0 I + c . sigma (complex coefficients).
struct PauliComponents {
    cplx c0;
    std::array<cplx, 3> c;
};

inline PauliComponents pauli_components(const Complex2x2& a)
{
    const cplx i{0.0, 1.0};
    return {0.5 * (a.m[0] + a.m[3]),
            {0.5 * (a.m[1] + a.m[2]), 0.5 * i * (a.m[1] - a.m[2]), 0.5 * (a.m[0] - a.m[3])}};
}

}  // namespace qlm
