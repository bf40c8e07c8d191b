#include <catch_amalgamated.hpp>

#include "qlm/analytic.hpp"
#include "qlm/dynamics.hpp"
#include "support.hpp"

using namespace qlm;
using namespace qlm::analytic;
using Catch::Matchers::WithinAbs;
using testing::pi;

namespace {

dynamics::DeviceConfig parallel_device(const ObservableSpec& spec, double kappa)
{
    dynamics::DeviceConfig d;
    d.geometry.theta = spec.alpha;
    d.geometry.phi = spec.beta_az;
    d.profile = potentials::InvertedMorse{1e8, kappa};
    return d;
}

}  // namespace

TEST_CASE("closed form at Gamma = 0 is free precession")
{
    const Vec3 w{0, 0, 1};
    const Vec3 n0{0.6, 0.0, 0.3};
    const double ph = 0.7;
    const Vec3 n = parallel_state(n0, w, 1.0, 0.0, ph);
    CHECK(max_abs_diff(n, Vec3{0.6 * std::cos(ph), 0.6 * std::sin(ph), 0.3}) < 1e-15);
}

TEST_CASE("closed form is continuous across the log-domain seam")
{
    testing::Uniform u(4);
    for (int i = 0; i < 200; ++i) {
        const Vec3 n0 = u.on_sphere(u(0, 0.99));
        const Vec3 w = u.on_sphere(1.0);
        const double l = u.sign();
        const double ph = u(0, 100);
        const Vec3 below = parallel_state(n0, w, l, log_domain_seam, ph);
        const Vec3 above = parallel_state(n0, w, l, std::nextafter(log_domain_seam, 100.0), ph);
        CHECK(max_abs_diff(below, above) < 1e-14);
    }
}

TEST_CASE("closed form stays in the ball and saturates at lambda w")
{
    testing::Uniform u(9);
    for (int i = 0; i < 200; ++i) {
        const Vec3 n0 = u.on_sphere(u(0, 0.99));
        const Vec3 w = u.on_sphere(1.0);
        const double l = u.sign();
        for (double G : {0.1, 1.0, 10.0, 29.9, 31.0, 100.0, 1e4}) {
            const Vec3 n = parallel_state(n0, w, l, G, u(0, 50));
            CHECK(norm(n) <= 1.0 + 1e-14);
        }
        CHECK(norm(parallel_state(n0, w, l, 1e4, 3.0) - l * w) < 1e-15);
    }
}

TEST_CASE("opposite eigenvector is a zero-probability branch")
{
    const Vec3 w{1, 0, 0};
    CHECK_THROWS_AS(parallel_state(-w, w, 1.0, 1e4, 0.0), DegenerateBranchError);
}

TEST_CASE("numerical Bloch solution follows the closed form")
{
    const ObservableSpec spec = testing::fig3_observable();
    const auto dev = parallel_device(spec, 1e6);
    dynamics::IntegratorConfig cfg;
    cfg.t_final = 20.0 / 1e6;
    cfg.samples_per_decade = 40;
    cfg.rtol = 1e-11;
    cfg.atol = 1e-14;
    for (Branch lam : {Branch::plus, Branch::minus}) {
        const ParallelScenario sc{spec, dev.profile, lam};
        const BlochVector n0(Vec3{0.3, -0.4, 0.5});
        const auto traj = dynamics::integrate_bloch(n0, spec, dev, lam, cfg);
        double gap = 0.0;
        for (std::size_t i = 0; i < traj.size(); i += 5)
            gap = std::fmax(gap, norm(traj.samples[i].n - bloch_parallel(traj.samples[i].t, n0, sc).vec()));
        CHECK(gap < 1e-6);
    }
}

TEST_CASE("raw and normalized propagators")
{
    const ObservableSpec spec = testing::fig3_observable();
    const ParallelScenario sc{spec, potentials::InvertedMorse{1e8, 1e5}, Branch::plus};
    auto at = [](double G) { return [G](double) { return G; }; };

    // raw propagator normalizes to the normalized one
    const Complex2x2 raw = k_parallel(1e-6, sc, at(3.0));
    const Complex2x2 nrm = k_parallel_normalized(1e-6, sc, at(3.0));
    CHECK(distance_up_to_phase(dynamics::normalize_propagator(raw), nrm) < 1e-14);
    CHECK_THAT(nrm.frobenius_sq(), WithinAbs(1.0, 1e-14));

    CHECK_THROWS_AS(k_parallel(1e-6, sc, at(701.0)), OverflowError);
    const Complex2x2 big = k_parallel_normalized(1e-6, sc, at(1e5));
    CHECK(big.all_finite());
    CHECK(distance_up_to_phase(big, projector_limit(sc).matrix()) < 1e-15);

    // reconstructed density matches the closed-form Bloch vector
    const Vec3 n0{0.2, 0.1, -0.6};
    const Vec3 from_k = bloch_components(dynamics::reconstruct_density(nrm, density_from_bloch(BlochVector(n0)).matrix()));
    const Vec3 closed = parallel_state(n0, spec.unit(), 1.0, 3.0, spec.omega_rate * 1e-6);
    CHECK(max_abs_diff(from_k, closed) < 1e-13);
}

TEST_CASE("normalized coefficients")
{
    const auto [c, s] = normalized_coefficients(1.0, 0.0);
    CHECK_THAT(c, WithinAbs(std::sqrt(0.5), 1e-16));
    CHECK(s == 0.0);
    const auto [c2, s2] = normalized_coefficients(-1.0, 2.0);
    CHECK_THAT(c2 * c2 + s2 * s2, WithinAbs(0.5, 1e-15));
    CHECK(s2 < 0.0);
    CHECK_THAT(c2 / -s2, WithinAbs(1.0 / std::tanh(1.0), 1e-14));
}

TEST_CASE("distance up to phase ignores a global phase")
{
    const Complex2x2 a{cplx{0.3, 0.1}, 0.2, cplx{0, -0.4}, 0.5};
    const Complex2x2 b = a * std::polar(1.0, 1.234);
    CHECK(distance_up_to_phase(a, b) < 1e-15);
    CHECK(distance_up_to_phase(a, Complex2x2::identity()) > 0.1);
}
