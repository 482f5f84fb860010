#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "gnair/amplification.hpp"
#include "gnair/errors.hpp"
#include "oracles.hpp"

using namespace gnair;

namespace
{

FiberParams ssmf()
{
    FiberParams f;
    f.attenuation = units::attenuation_from_db_per_km(0.2);
    f.pump_attenuation = units::attenuation_from_db_per_km(0.25);
    f.span_length = 80e3;
    f.span_count = 25;
    f.gamma = 1.2e-3;
    f.gain_slope = 0.028 / (units::km * units::THz);
    return f;
}

AmplifierSpec raman(double g)
{
    AmplifierSpec a;
    a.scheme = AmplifierScheme::BackwardRaman;
    a.raman_gain = g / units::km;
    a.pump_power = 0.5;
    return a;
}

} // namespace

TEST_CASE("lumped ASE of an 80 km, 4.5 dB NF span")
{
    const double v = edfa_ase_variance(units::attenuation_from_db_per_km(0.2), 80e3, 4.5, 193.414e12, 32e9);
    CHECK(v == doctest::Approx(4.485e-7).epsilon(1e-3));
}

TEST_CASE("lumped ASE scales with G - 1 and bandwidth")
{
    const double nf = 5.0, f0 = 193.4e12;
    for (double gain_db : {5.0, 10.0, 16.0, 22.0})
    {
        const double g = db_to_linear(gain_db);
        const double expected = 2.0 * (g - 1.0) * db_to_linear(nf) / 2.0 * constants::planck * f0 * 32e9;
        CHECK(edfa_ase_variance_for_gain(g, nf, f0, 32e9) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(edfa_ase_variance_for_gain(g, nf, f0, 64e9) ==
              doctest::Approx(2.0 * edfa_ase_variance_for_gain(g, nf, f0, 32e9)).epsilon(1e-12));
    }
    CHECK(edfa_ase_variance_for_gain(1.0, nf, f0, 32e9) == 0.0);
    CHECK_THROWS_AS(edfa_ase_variance_for_gain(10.0, nf, -1.0, 32e9), DomainError);
}

TEST_CASE("EDFA profile is exponential attenuation")
{
    const FiberParams f = ssmf();
    const SpanPowerProfile p = edfa_power_profile(f, 400);
    CHECK(p.size() == 401);
    for (Eigen::Index i = 0; i < p.size(); ++i)
        CHECK(p.power(i) == doctest::Approx(std::exp(-f.attenuation * p.z(i))).epsilon(1e-14));
    CHECK(p.area() == doctest::Approx(f.effective_length()).epsilon(1e-5));
}

TEST_CASE("phonon occupancy at room temperature")
{
    CHECK(phonon_occupancy(300.0, 13.2e12) == doctest::Approx(0.1377).epsilon(1e-3));
    CHECK(phonon_occupancy(1.0, 13.2e12) < 1e-100);
}

TEST_CASE("Raman profile without gain is plain attenuation")
{
    RamanSolverOptions o;
    o.calibrate_transparency = false;
    const FiberParams f = ssmf();
    const SpanPowerProfile p = raman_power_profile(f, raman(0.0), o);
    for (Eigen::Index i = 0; i < p.size(); i += 100)
        CHECK(p.power(i) == doctest::Approx(std::exp(-f.attenuation * p.z(i))).epsilon(1e-9));
}

TEST_CASE("calibrated Raman span is transparent and matches relaxation")
{
    const FiberParams f = ssmf();
    const SpanPowerProfile p = raman_power_profile(f, raman(0.37));
    CHECK(p.net_gain() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(p.boundary_residual < 1e-9);
    // Backward pumping: the signal minimum sits inside the span, below both ends.
    CHECK(p.power.minCoeff() < 0.5);
    const double pump_end = p.pump(p.size() - 1);
    const Eigen::ArrayXd ref = oracle::raman_relaxation(f.attenuation, f.pump_attenuation, 0.37e-3, pump_end,
                                                        f.span_length, 8000);
    for (Eigen::Index i = 0; i < p.size(); i += 50)
        CHECK(p.power(i) == doctest::Approx(ref(i * 4)).epsilon(1e-5));
}

TEST_CASE("pump depletion matches relaxation")
{
    const FiberParams f = ssmf();
    AmplifierSpec a = raman(0.37);
    a.depleting_signal_power = 0.05;
    RamanSolverOptions o;
    o.calibrate_transparency = false;
    o.signal_frequency = 193.4e12;
    a.pump_power = 0.4;
    const SpanPowerProfile p = raman_power_profile(f, a, o);
    CHECK(p.pump(p.size() - 1) == doctest::Approx(0.4).epsilon(1e-9));
    const double ratio = (193.4e12 + a.pump_frequency_offset) / 193.4e12;
    const Eigen::ArrayXd ref = oracle::raman_relaxation(f.attenuation, f.pump_attenuation, 0.37e-3, 0.4,
                                                        f.span_length, 8000, 0.05, ratio);
    for (Eigen::Index i = 0; i < p.size(); i += 50)
        CHECK(p.power(i) == doctest::Approx(ref(i * 4)).epsilon(1e-5));
}

TEST_CASE("Raman ASE grows with temperature and uses the photon integral")
{
    const FiberParams f = ssmf();
    AmplifierSpec a = raman(0.37);
    const SpanPowerProfile p = raman_power_profile(f, a);
    const AseSpec cold = [&] {
        AmplifierSpec c = a;
        c.temperature = 1.0;
        return raman_ase_variance(p, c, 193.4e12, 32e9);
    }();
    const AseSpec warm = raman_ase_variance(p, a, 193.4e12, 32e9);
    CHECK(warm.variance_per_span > cold.variance_per_span);
    CHECK(warm.variance_per_span / cold.variance_per_span == doctest::Approx(1.0 + warm.phonon_occupancy));
    // N_phot = int g Pp(z) P(L)/P(z) dz, fine trapezoid on the returned samples.
    double n = 0.0;
    for (Eigen::Index i = 0; i + 1 < p.size(); ++i)
    {
        const double a0 = a.raman_gain * p.pump(i) * p.net_gain() / p.power(i);
        const double a1 = a.raman_gain * p.pump(i + 1) * p.net_gain() / p.power(i + 1);
        n += 0.5 * (a0 + a1) * (p.z(i + 1) - p.z(i));
    }
    CHECK(warm.photon_number == doctest::Approx(n).epsilon(1e-9));
    CHECK(warm.variance_per_span ==
          doctest::Approx(2.0 * (1.0 + warm.phonon_occupancy) * n * constants::planck * 193.4e12 * 32e9)
              .epsilon(1e-9));
    // Distributed gain is quieter than a lumped amplifier of the same span.
    CHECK(warm.variance_per_span < edfa_ase_variance(f.attenuation, f.span_length, 4.5, 193.4e12, 32e9));
}

TEST_CASE("SRS tilt: no gain slope leaves the baseline untouched")
{
    FiberParams f = ssmf();
    f.gain_slope = 0.0;
    WdmGrid g;
    g.channel_count = 81;
    const SpanPowerProfile base = edfa_power_profile(f, 500);
    const std::vector<double> powers(81, 1e-3);
    const auto tilted = srs_tilt_profiles(g, f, powers, base);
    REQUIRE(tilted.size() == 81);
    for (const auto& t : tilted)
        CHECK((t.power - base.power).abs().maxCoeff() < 1e-15);
}

TEST_CASE("SRS tilt transfers power to low frequencies and conserves the total")
{
    const FiberParams f = ssmf();
    WdmGrid g;
    g.channel_count = 81;
    const SpanPowerProfile base = edfa_power_profile(f, 500);
    const std::vector<double> powers(81, 1e-3);
    const auto tilted = srs_tilt_profiles(g, f, powers, base);
    const Eigen::Index end = base.size() - 1;
    CHECK(tilted.front().power(end) > base.power(end));
    CHECK(tilted.back().power(end) < base.power(end));
    for (std::size_t i = 1; i < tilted.size(); ++i)
        CHECK(tilted[i].power(end) < tilted[i - 1].power(end));
    for (Eigen::Index z = 0; z <= end; z += 50)
    {
        double total = 0.0;
        for (std::size_t i = 0; i < tilted.size(); ++i)
            total += powers[i] * tilted[i].power(z);
        CHECK(total == doctest::Approx(81e-3 * base.power(z)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(srs_tilt_profiles(g, f, std::vector<double>(3, 1e-3), base), DomainError);
}

TEST_CASE("profile CSV has a header and one row per sample")
{
    const SpanPowerProfile p = edfa_power_profile(ssmf(), 10);
    std::ostringstream out;
    write_profile_csv(out, p);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "z_km,power");
    int rows = 0;
    while (std::getline(in, line))
        ++rows;
    CHECK(rows == 11);
}
