#include "gnair/amplification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <utility>

#include "gnair/errors.hpp"

namespace gnair
{

double SpanPowerProfile::area() const
{
    double acc = 0.0;
    for (Eigen::Index i = 1; i < z.size(); ++i)
        acc += 0.5 * (z(i) - z(i - 1)) * (power(i) + power(i - 1));
    return acc;
}

SpanPowerProfile edfa_power_profile(const FiberParams& fiber, int steps)
{
    SpanPowerProfile p;
    p.scheme = AmplifierScheme::Edfa;
    p.attenuation = fiber.attenuation;
    p.z = Eigen::ArrayXd::LinSpaced(steps + 1, 0.0, fiber.span_length);
    p.power = (-fiber.attenuation * p.z).exp();
    return p;
}

double edfa_ase_variance_for_gain(double gain, double noise_figure_db, double carrier_frequency, double bandwidth)
{
    if (!(carrier_frequency > 0.0) || !(bandwidth > 0.0))
        throw DomainError("edfa_ase_variance: carrier frequency and bandwidth must be positive");
    const double nsp = db_to_linear(noise_figure_db) / 2.0;
    return 2.0 * (gain - 1.0) * nsp * constants::planck * carrier_frequency * bandwidth;
}

double edfa_ase_variance(double attenuation, double span_length, double noise_figure_db, double carrier_frequency,
                         double bandwidth)
{
    if (!(carrier_frequency > 0.0) || !(bandwidth > 0.0))
        throw DomainError("edfa_ase_variance: carrier frequency and bandwidth must be positive");
    const double nsp = db_to_linear(noise_figure_db) / 2.0;
    return 2.0 * std::expm1(attenuation * span_length) * nsp * constants::planck * carrier_frequency * bandwidth;
}

namespace
{

struct RamanState
{
    double signal;
    double pump;
};

struct RamanOde
{
    double alpha;
    double alpha_pump;
    double gain;
    double depletion; ///< (fp/fs) g Psig

    RamanState operator()(const RamanState& s) const
    {
        return {(-alpha + gain * s.pump) * s.signal, (alpha_pump + depletion * s.signal) * s.pump};
    }
};

/// RK4 march from z = 0 with a given pump value at z = 0. Fills `out` when non-null.
RamanState integrate(const RamanOde& ode, double pump0, double length, int steps, SpanPowerProfile* out)
{
    const double h = length / steps;
    RamanState s{1.0, pump0};
    if (out)
    {
        out->power(0) = s.signal;
        out->pump(0) = s.pump;
    }
    for (int i = 0; i < steps; ++i)
    {
        const RamanState k1 = ode(s);
        const RamanState k2 = ode({s.signal + 0.5 * h * k1.signal, s.pump + 0.5 * h * k1.pump});
        const RamanState k3 = ode({s.signal + 0.5 * h * k2.signal, s.pump + 0.5 * h * k2.pump});
        const RamanState k4 = ode({s.signal + h * k3.signal, s.pump + h * k3.pump});
        s.signal += h / 6.0 * (k1.signal + 2.0 * k2.signal + 2.0 * k3.signal + k4.signal);
        s.pump += h / 6.0 * (k1.pump + 2.0 * k2.pump + 2.0 * k3.pump + k4.pump);
        if (out)
        {
            out->power(i + 1) = s.signal;
            out->pump(i + 1) = s.pump;
        }
    }
    return s;
}

/// Root of an increasing function: bracket expansion, then secant steps kept inside the bracket
/// (falling back to bisection). Returns the root; throws ConvergenceError otherwise.
template <typename F>
double solve_increasing(F&& f, double guess, double tol, int max_iterations, const char* what,
                        double ceiling = INFINITY)
{
    double lo = guess, hi = guess;
    double flo = f(lo), fhi = flo;
    int it = 0;
    if (std::abs(flo) <= tol)
        return guess;
    if (flo > 0.0)
    {
        while (flo > 0.0 && it++ < max_iterations)
        {
            hi = lo;
            fhi = flo;
            lo *= 0.5;
            flo = f(lo);
        }
    }
    else
    {
        while (fhi < 0.0 && it++ < max_iterations && hi < ceiling)
        {
            lo = hi;
            flo = fhi;
            hi = std::min(2.0 * hi, ceiling);
            fhi = f(hi);
        }
    }
    if (flo > 0.0 || fhi < 0.0)
        throw ConvergenceError(std::string(what) + ": failed to bracket the root", std::min(std::abs(flo), std::abs(fhi)));

    double x = hi, fx = fhi;
    for (; it < max_iterations; ++it)
    {
        double next = hi - fhi * (hi - lo) / (fhi - flo);
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        x = next;
        fx = f(x);
        if (std::abs(fx) <= tol)
            return x;
        if (fx < 0.0)
        {
            lo = x;
            flo = fx;
        }
        else
        {
            hi = x;
            fhi = fx;
        }
        // Secant stalls when one endpoint never moves; a midpoint every so often keeps the bracket shrinking.
        if (it % 4 == 3)
        {
            const double mid = 0.5 * (lo + hi);
            const double fm = f(mid);
            if (std::abs(fm) <= tol)
                return mid;
            if (fm < 0.0)
            {
                lo = mid;
                flo = fm;
            }
            else
            {
                hi = mid;
                fhi = fm;
            }
        }
    }
    throw ConvergenceError(std::string(what) + ": no convergence within iteration limit", std::abs(fx));
}

} // namespace

SpanPowerProfile raman_power_profile(const FiberParams& fiber, const AmplifierSpec& amp,
                                     const RamanSolverOptions& options)
{
    if (!(amp.pump_power > 0.0))
        throw DomainError("raman_power_profile: pump power must be positive");
    const double length = fiber.span_length;
    const int steps = options.steps;
    const double ratio = (options.signal_frequency + amp.pump_frequency_offset) / options.signal_frequency;
    const RamanOde ode{fiber.attenuation, fiber.pump_attenuation, amp.raman_gain,
                       ratio * amp.raman_gain * amp.depleting_signal_power};

    SpanPowerProfile p;
    p.scheme = AmplifierScheme::BackwardRaman;
    p.attenuation = fiber.attenuation;
    p.z = Eigen::ArrayXd::LinSpaced(steps + 1, 0.0, length);
    p.power.resize(steps + 1);
    p.pump.resize(steps + 1);

    // Inner problem: pump launch value at z = 0 that lands on `pump_end` at z = L.
    auto shoot = [&](double pump_end) {
        const double guess = pump_end * std::exp(-fiber.pump_attenuation * length);
        auto mismatch = [&](double pump0) {
            return integrate(ode, pump0, length, steps, nullptr).pump / pump_end - 1.0;
        };
        return solve_increasing(mismatch, guess, options.tolerance, options.max_iterations, "Raman shooting");
    };

    double pump_end = amp.pump_power;
    if (options.calibrate_transparency && amp.raman_gain > 0.0)
    {
        auto log_gain = [&](double end) {
            const double pump0 = shoot(end);
            return std::log(integrate(ode, pump0, length, steps, nullptr).signal);
        };
        pump_end = solve_increasing(log_gain, pump_end, options.tolerance, options.max_iterations,
                                    "Raman transparency calibration", options.max_pump_power);
    }

    const double pump0 = shoot(pump_end);
    const RamanState end = integrate(ode, pump0, length, steps, &p);
    p.boundary_residual = std::abs(end.pump / pump_end - 1.0);
    return p;
}

double phonon_occupancy(double temperature, double frequency_offset)
{
    if (temperature <= 0.0)
        return 0.0;
    return 1.0 / std::expm1(constants::planck * frequency_offset / (constants::boltzmann * temperature));
}

AseSpec raman_ase_variance(const SpanPowerProfile& profile, const AmplifierSpec& amp, double carrier_frequency,
                           double bandwidth)
{
    if (profile.scheme != AmplifierScheme::BackwardRaman || profile.pump.size() != profile.z.size())
        throw ConfigError("raman_ase_variance: profile lacks a Raman pump solution");
    if (!(carrier_frequency > 0.0) || !(bandwidth > 0.0))
        throw DomainError("raman_ase_variance: carrier frequency and bandwidth must be positive");

    // Spontaneous photons per mode reaching the span end. Local emission g Pp(z) is carried to z = L by the
    // path gain G(z -> L) = P(L) / P(z). This is our reading of the distributed-noise photon count; the
    // closed form is not reproduced here.
    const Eigen::ArrayXd local = amp.raman_gain * profile.pump * (profile.net_gain() / profile.power);
    double photons = 0.0;
    for (Eigen::Index i = 1; i < profile.size(); ++i)
        photons += 0.5 * (profile.z(i) - profile.z(i - 1)) * (local(i) + local(i - 1));

    AseSpec out;
    out.scheme = AmplifierScheme::BackwardRaman;
    out.phonon_occupancy = phonon_occupancy(amp.temperature, amp.pump_frequency_offset);
    out.photon_number = photons;
    out.variance_per_span =
        2.0 * (out.phonon_occupancy + 1.0) * photons * constants::planck * carrier_frequency * bandwidth;
    return out;
}

SpanPowerProfile span_power_profile(const SystemConfig& cfg)
{
    if (cfg.amplifier.scheme == AmplifierScheme::Edfa)
        return edfa_power_profile(cfg.fiber);
    RamanSolverOptions opts;
    opts.signal_frequency = cfg.grid.carrier_frequency();
    return raman_power_profile(cfg.fiber, cfg.amplifier, opts);
}

AseSpec ase_per_span(const SystemConfig& cfg, const SpanPowerProfile& profile)
{
    const double f0 = cfg.grid.carrier_frequency();
    const double df = cfg.grid.channel_spacing;
    if (cfg.amplifier.scheme == AmplifierScheme::BackwardRaman)
        return raman_ase_variance(profile, cfg.amplifier, f0, df);
    AseSpec out;
    out.scheme = AmplifierScheme::Edfa;
    out.spontaneous_emission_factor = cfg.amplifier.spontaneous_emission_factor();
    out.variance_per_span =
        edfa_ase_variance(cfg.fiber.attenuation, cfg.fiber.span_length, cfg.amplifier.noise_figure_db, f0, df);
    return out;
}

std::vector<SpanPowerProfile> srs_tilt_profiles(const WdmGrid& grid, const FiberParams& fiber,
                                                std::span<const double> channel_powers,
                                                const SpanPowerProfile& baseline)
{
    const auto indices = grid.channel_indices();
    if (channel_powers.size() != indices.size())
        throw DomainError("srs_tilt_profiles: one power per channel required");
    std::vector<SpanPowerProfile> out(indices.size(), baseline);
    if (fiber.gain_slope == 0.0)
        return out;

    double total = 0.0;
    for (double p : channel_powers)
        total += p;

    // Running effective length of the baseline profile.
    Eigen::ArrayXd leff(baseline.size());
    leff(0) = 0.0;
    for (Eigen::Index i = 1; i < baseline.size(); ++i)
        leff(i) = leff(i - 1) + 0.5 * (baseline.z(i) - baseline.z(i - 1)) * (baseline.power(i) + baseline.power(i - 1));

    for (Eigen::Index i = 0; i < baseline.size(); ++i)
    {
        const double x = fiber.gain_slope * total * leff(i);
        double denom = 0.0;
        for (std::size_t c = 0; c < indices.size(); ++c)
            denom += channel_powers[c] * std::exp(-x * grid.center_offset(indices[c]));
        for (std::size_t c = 0; c < indices.size(); ++c)
            out[c].power(i) = baseline.power(i) * total * std::exp(-x * grid.center_offset(indices[c])) / denom;
    }
    return out;
}

void write_profile_csv(std::ostream& out, const SpanPowerProfile& profile)
{
    out << "z_km,power\n";
    char line[96];
    for (Eigen::Index i = 0; i < profile.size(); ++i)
    {
        std::snprintf(line, sizeof line, "%.17g,%.17g\n", profile.z(i) / units::km, profile.power(i));
        out << line;
    }
}

} // namespace gnair
