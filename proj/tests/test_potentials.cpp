#include <catch_amalgamated.hpp>

#include "qlm/potentials.hpp"
#include "qlm/dynamics.hpp"

using namespace qlm;
using namespace qlm::potentials;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("inverted Morse profile")
{
    const double g0 = 1e8, kappa = 1e5;
    CHECK(g_inverted_morse(0.0, g0, kappa) == 0.0);
    // maximum g0 at ln2/kappa
    CHECK_THAT(g_inverted_morse(std::log(2.0) / kappa, g0, kappa), WithinRel(g0, 1e-14));
    CHECK(g_inverted_morse(50.0 / kappa, g0, kappa) < 1e-12 * g0);
    CHECK_THROWS_AS(g_inverted_morse(-1.0, g0, kappa), DomainError);
    CHECK_THROWS_AS(g_inverted_morse(1.0, g0, 0.0), DomainError);
}

TEST_CASE("crossing times bracket the maximum")
{
    const double w = 1e8, kappa = 1e5;
    for (double g0 : {1e8, 2e8, 1e9}) {
        const auto [tm, tp] = morse_crossing_times(g0, kappa, w);
        CHECK(tm <= std::log(2.0) / kappa + 1e-18);
        CHECK(tp >= std::log(2.0) / kappa - 1e-18);
        CHECK_THAT(g_inverted_morse(tm, g0, kappa), WithinRel(w, 1e-8));
        CHECK_THAT(g_inverted_morse(tp, g0, kappa), WithinRel(w, 1e-8));
    }
    CHECK_THROWS_AS(morse_crossing_times(0.5e8, kappa, w), DomainError);
}

TEST_CASE("Stern-Gerlach time profile")
{
    const SternGerlachTime p{4.5854e18, 1e-4, 5e-6};
    CHECK(g_stern_gerlach(0.0, p) == 0.0);
    CHECK_THAT(switch_off(p.t_end, p.t_end, p.t_w), WithinAbs(0.5, 1e-15));
    CHECK_THAT(g_stern_gerlach(1e-5, p), WithinRel(4.5854e18 * 1e-10, 1e-6));
    CHECK(g_stern_gerlach(p.t_end + 60 * p.t_w, p) < 1e-12 * g_stern_gerlach(p.t_end, p));
    CHECK_NOTHROW(validate(PotentialProfile{p}));
}

TEST_CASE("profile validation")
{
    CHECK_NOTHROW(validate(PotentialProfile{InvertedMorse{1e8, 1e5}}));
    CHECK_THROWS_AS(validate(PotentialProfile{InvertedMorse{-1.0, 1e5}}), DomainError);
    CHECK_THROWS_AS(validate(PotentialProfile{Custom{[](double) { return -1.0; }, 1.0, "neg"}}), DomainError);
    CHECK_THROWS_AS(validate(PotentialProfile{Custom{[](double) { return 1.0; }, 1.0, "flat"}}), DomainError);
    CHECK_NOTHROW(validate(PotentialProfile{Custom{[](double t) { return std::exp(-t); }, 40.0, "decay"}}));
    CHECK(std::string(kind_name(PotentialProfile{SternGerlachTime{}})) == "stern_gerlach");
}

TEST_CASE("quadrature matches the closed-form Gamma")
{
    for (double kappa : {1e5, 1e6, 1e7}) {
        const PotentialProfile p = InvertedMorse{1e8, kappa};
        for (double x : {0.01, 0.3, 1.0, 3.0, 10.0, 40.0}) {
            const double t = x / kappa;
            const double closed = gamma_inverted_morse_closed(t, 1e8, kappa);
            CHECK_THAT(gamma(p, t), WithinRel(closed, 1e-9));
        }
    }
    CHECK(gamma(PotentialProfile{InvertedMorse{1e8, 1e5}}, 0.0) == 0.0);
    CHECK_THROWS_AS(gamma(PotentialProfile{InvertedMorse{1e8, 1e5}}, -1.0), DomainError);
}

TEST_CASE("Gamma of the Stern-Gerlach profile below the switch-off")
{
    const SternGerlachTime p{4.5854e18, 1e-4, 5e-6};
    // P t^3/3 while S = 1 to within exp(-(t_end - t)/t_w)
    const double t = 2e-5;
    CHECK_THAT(gamma(PotentialProfile{p}, t), WithinRel(p.prefactor_rate_per_s2 * t * t * t / 3, 1e-6));
}

TEST_CASE("tabulated Gamma equals pointwise quadrature")
{
    const PotentialProfile p = InvertedMorse{2e8, 1e5};
    const auto grid = dynamics::log_grid(1e-9, 1e-3, 20);
    const GammaTable table(p, grid);
    REQUIRE(table.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); i += 7)
        CHECK_THAT(table[i], WithinAbs(gamma_inverted_morse_closed(grid[i], 2e8, 1e5),
                                       1e-9 * (1.0 + table[i])));
    const std::vector<double> bad{1.0, 0.5};
    CHECK_THROWS_AS(GammaTable(p, bad), DomainError);
}
