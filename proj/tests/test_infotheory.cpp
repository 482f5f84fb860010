#include <doctest.h>

#include <bit>
#include <cmath>
#include <numbers>

#include "gnair/errors.hpp"
#include "gnair/infotheory.hpp"
#include "oracles.hpp"

using namespace gnair;

namespace
{

double db(double x) { return std::pow(10.0, x / 10.0); }

} // namespace

TEST_CASE("square QAM construction")
{
    for (int m : {4, 16, 64, 256, 1024})
    {
        const auto c = build_constellation(m);
        CHECK(c.points.size() == m);
        CHECK(c.pmf.sum() == doctest::Approx(1.0));
        CHECK((c.pmf * c.points.abs2()).sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(entropy_bits(c.pmf) == doctest::Approx(std::log2(m)));
        // Gray labels: nearest horizontal and vertical neighbours differ in one bit.
        const int side = static_cast<int>(std::sqrt(m));
        for (int i = 0; i + 1 < side; ++i)
            for (int q = 0; q < side; ++q)
            {
                CHECK(std::popcount(static_cast<unsigned>(c.labels(i * side + q) ^ c.labels((i + 1) * side + q))) == 1);
                CHECK(std::popcount(static_cast<unsigned>(c.labels(q * side + i) ^ c.labels(q * side + i + 1))) == 1);
            }
    }
    CHECK_THROWS_AS(build_constellation(32), DomainError);
    CHECK_THROWS_AS(build_constellation(12), DomainError);
    CHECK_THROWS_AS(build_constellation(64, Shaping::MaxwellBoltzmann, -1.0), DomainError);
}

TEST_CASE("Maxwell-Boltzmann shaping lowers entropy and keeps unit energy")
{
    double previous = 8.0;
    for (double zeta : {0.0, 0.005, 0.02, 0.1, 1.0})
    {
        const auto c = build_constellation(256, Shaping::MaxwellBoltzmann, zeta);
        const double h = entropy_bits(c.pmf);
        CHECK(h <= previous + 1e-12);
        previous = h;
        CHECK((c.pmf * c.points.abs2()).sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
    const auto huge = build_constellation(1024, Shaping::MaxwellBoltzmann, 1e4);
    CHECK(entropy_bits(huge.pmf) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(zeta_upper_bound(64) > 0.0);
    CHECK(entropy_bits(build_constellation(64, Shaping::MaxwellBoltzmann, zeta_upper_bound(64)).pmf) < 2.01);
}

TEST_CASE("Gauss-Hermite rule integrates polynomials exactly")
{
    for (int n : {4, 16, 64})
    {
        const auto r = gauss_hermite_rule(n);
        CHECK(r.weights.sum() == doctest::Approx(std::sqrt(std::numbers::pi)));
        // int x^2 e^{-x^2} = sqrt(pi)/2, int x^4 e^{-x^2} = 3 sqrt(pi)/4
        CHECK((r.weights * r.nodes.square()).sum() == doctest::Approx(std::sqrt(std::numbers::pi) / 2));
        CHECK((r.weights * r.nodes.pow(4)).sum() == doctest::Approx(0.75 * std::sqrt(std::numbers::pi)));
        CHECK((r.weights * r.nodes.cube()).sum() == doctest::Approx(0.0).scale(1.0));
    }
}

TEST_CASE("separable and two-dimensional MI agree for square QAM")
{
    for (int m : {16, 64})
        for (double s : {0.0, 10.0, 20.0})
        {
            const auto c = build_constellation(m, Shaping::MaxwellBoltzmann, 0.03);
            const double a = mi_separable_fixed(c, db(s), 32);
            const double b = mi_gauss_hermite_fixed(c, db(s), 32);
            CHECK(a == doctest::Approx(b).epsilon(1e-9));
        }
}

TEST_CASE("MI limits and bounds")
{
    const auto c = build_constellation(64);
    CHECK(mi_separable(c, db(45.0)).mi_bits == doctest::Approx(6.0).epsilon(1e-6));
    const auto mb = build_constellation(64, Shaping::MaxwellBoltzmann, 0.05);
    CHECK(mi_separable(mb, db(45.0)).mi_bits == doctest::Approx(entropy_bits(mb.pmf)).epsilon(1e-6));
    double previous = 0.0;
    for (double s = -5.0; s <= 30.0; s += 2.5)
    {
        const double mi = mi_separable(c, db(s)).mi_bits;
        CHECK(mi > previous);
        CHECK(mi <= std::log2(1.0 + db(s)) + 1e-9);
        previous = mi;
    }
    CHECK_THROWS_AS(mi_separable(c, 0.0), DomainError);
    CHECK_THROWS_AS(mi_separable(c, db(10.0), 4), DomainError);
}

TEST_CASE("Gauss-Hermite MI agrees with a Monte-Carlo oracle")
{
    for (int m : {16, 64})
        for (double s : {5.0, 15.0})
            for (double zeta : {0.0, 0.04})
            {
                const auto c = build_constellation(m, zeta > 0 ? Shaping::MaxwellBoltzmann : Shaping::Uniform, zeta);
                const double mc = oracle::mi_monte_carlo(c.points, c.pmf, db(s), 100000, 17);
                CHECK(mi_separable(c, db(s)).mi_bits == doctest::Approx(mc).epsilon(0.02 / mc));
            }
}

TEST_CASE("generic constellations use the two-dimensional path")
{
    Eigen::ArrayXcd psk(8);
    for (int i = 0; i < 8; ++i)
        psk(i) = std::polar(1.0, 2.0 * std::numbers::pi * i / 8.0);
    const auto c = make_constellation(psk, Eigen::ArrayXd::Ones(8));
    CHECK_FALSE(c.separable());
    CHECK_THROWS_AS(mi_separable(c, 10.0), DomainError);
    CHECK(mi_gauss_hermite(c, db(35.0)).mi_bits == doctest::Approx(3.0).epsilon(1e-6));
    const double mc = oracle::mi_monte_carlo(c.points, c.pmf, db(8.0), 100000, 5);
    CHECK(mi_gauss_hermite(c, db(8.0)).mi_bits == doctest::Approx(mc).epsilon(0.02 / mc));
}

TEST_CASE("optimized shaping never loses and stays under the ultimate gain")
{
    for (int m : {64, 256})
        for (double s : {8.0, 14.0, 20.0})
        {
            const auto z = optimize_zeta(m, db(s));
            CHECK(z.mi >= z.mi_uniform);
            CHECK(z.zeta >= 0.0);
            const double gain = shaping_gain_db(m, db(s), z.mi);
            CHECK(gain >= -1e-6);
            CHECK(gain <= 1.53);
        }
}

TEST_CASE("rates and code rate")
{
    const auto r = air_and_code_rate(6.0, 32e9, 64, 32e9);
    CHECK(r.air == doctest::Approx(384e9));
    CHECK(r.se == doctest::Approx(12.0));
    CHECK(r.code_rate == doctest::Approx(1.0));
    CHECK(r.overhead_pct == doctest::Approx(0.0));
    const auto h = air_and_code_rate(4.5, 32e9, 64, 32e9);
    CHECK(h.code_rate == doctest::Approx(0.75));
    CHECK(h.overhead_pct == doctest::Approx(100.0 / 3.0));
    CHECK_THROWS_AS(air_and_code_rate(6.5, 32e9, 64, 32e9), DomainError);
    CHECK_THROWS_AS(air_and_code_rate(-0.1, 32e9, 64, 32e9), DomainError);
}
