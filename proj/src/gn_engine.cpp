#include "gnair/gn_engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>

#include "gnair/errors.hpp"
#include "gnair/qmc.hpp"

namespace gnair
{

namespace
{

using cd = std::complex<double>;

// A = int_0^h e^{i b t} dt and C = (1/h) int_0^h t e^{i b t} dt, series near b h = 0.
void segment_moments(double dbeta, double h, cd& a, cd& c)
{
    const double theta = dbeta * h;
    if (std::abs(theta) < 0.5)
    {
        cd it{0.0, theta};
        cd power{1.0, 0.0};
        cd sa{}, sc{};
        double factorial = 1.0;
        for (int n = 0; n < 14; ++n)
        {
            if (n > 0)
            {
                power *= it;
                factorial *= n;
            }
            sa += power / (factorial * (n + 1));
            sc += power / (factorial * (n + 2));
        }
        a = h * sa;
        c = h * sc;
        return;
    }
    const cd e = std::polar(1.0, theta);
    const cd ib{0.0, dbeta};
    a = (e - 1.0) / ib;
    c = e / ib + (e - 1.0) / (dbeta * dbeta * h);
}

} // namespace

std::complex<double> fwm_efficiency(double dbeta, const SpanPowerProfile& profile)
{
    if (profile.scheme == AmplifierScheme::Edfa)
    {
        const double alpha = profile.attenuation;
        const double length = profile.span_length();
        const cd num = 1.0 - std::exp(-alpha * length) * std::polar(1.0, dbeta * length);
        const cd den{alpha, -dbeta};
        if (std::abs(den) == 0.0)
            return {length, 0.0};
        return num / den;
    }
    cd acc{};
    for (Eigen::Index j = 0; j + 1 < profile.size(); ++j)
    {
        const double h = profile.z(j + 1) - profile.z(j);
        cd a, c;
        segment_moments(dbeta, h, a, c);
        acc += std::polar(1.0, dbeta * profile.z(j)) *
               (profile.power(j) * a + (profile.power(j + 1) - profile.power(j)) * c);
    }
    return acc;
}

NliKernel::NliKernel(const FiberParams& fiber, const SpanPowerProfile& profile, int profile_segments)
    : dispersion_{fiber.beta2, fiber.beta3}, spans_(fiber.span_count), span_length_(fiber.span_length),
      analytic_(profile.scheme == AmplifierScheme::Edfa), attenuation_(profile.attenuation),
      end_power_(std::exp(-profile.attenuation * fiber.span_length))
{
    if (analytic_)
        return;
    // Resample onto a coarser uniform grid; the interpolant between knots stays piecewise linear.
    const Eigen::Index n = profile.size() - 1;
    int segments = profile_segments;
    if (n % segments != 0 || segments > n)
        segments = static_cast<int>(n);
    const Eigen::Index stride = n / segments;
    knots_.resize(segments + 1);
    for (int j = 0; j <= segments; ++j)
        knots_(j) = profile.power(j * stride);
    increments_ = knots_.tail(segments) - knots_.head(segments);
    step_ = profile.span_length() / segments;
}

double NliKernel::efficiency_squared(double dbeta) const
{
    if (analytic_)
    {
        const double num = 1.0 - 2.0 * end_power_ * std::cos(dbeta * span_length_) + end_power_ * end_power_;
        return num / (attenuation_ * attenuation_ + dbeta * dbeta);
    }
    cd a, c;
    segment_moments(dbeta, step_, a, c);
    const cd rotate = std::polar(1.0, dbeta * step_);
    cd phase{1.0, 0.0};
    cd acc{};
    for (Eigen::Index j = 0; j < increments_.size(); ++j)
    {
        acc += phase * (knots_(j) * a + increments_(j) * c);
        phase *= rotate;
    }
    return std::norm(acc);
}

double NliKernel::operator()(double f, double f1, double f2) const
{
    const double dbeta = phase_mismatch(f, f1, f2, dispersion_);
    return efficiency_squared(dbeta) * phased_array_gain(dbeta, spans_, span_length_);
}

Band integration_band(const WdmGrid& grid, int k, double b_effective)
{
    const double full = grid.total_bandwidth();
    if (b_effective >= full * (1.0 - 1e-12))
        return {-full / 2.0, full / 2.0};
    if (b_effective <= 0.0)
        return {grid.center_offset(k), grid.center_offset(k)};
    const double c = grid.center_offset(k);
    return {std::max(-full / 2.0, c - b_effective / 2.0), std::min(full / 2.0, c + b_effective / 2.0)};
}

double nli_prefactor(const FiberParams& fiber, const WdmGrid& grid)
{
    return 16.0 / 27.0 * fiber.gamma * fiber.gamma / (grid.symbol_rate * grid.symbol_rate);
}

namespace
{

std::uint64_t band_seed(std::uint64_t seed, int k, const Band& band, int replicate)
{
    std::uint64_t h = qmc::hash_combine(seed, static_cast<std::uint64_t>(static_cast<std::int64_t>(k)));
    h = qmc::hash_combine(h, std::bit_cast<std::uint64_t>(band.lo));
    h = qmc::hash_combine(h, std::bit_cast<std::uint64_t>(band.hi));
    return qmc::hash_combine(h, static_cast<std::uint64_t>(replicate));
}

QmcEstimate summarize(const std::vector<double>& means, std::uint64_t per_replicate, std::uint64_t accepted)
{
    const double r = static_cast<double>(means.size());
    double mean = 0.0;
    for (double m : means)
        mean += m;
    mean /= r;
    double var = 0.0;
    for (double m : means)
        var += (m - mean) * (m - mean);
    var /= (r - 1.0);
    return {mean, std::sqrt(var / r), per_replicate * means.size(), accepted};
}

void check_options(const QmcOptions& options)
{
    if (options.replicates < 2)
        throw DomainError("QMC needs at least two replicates");
    if (options.samples < static_cast<std::uint64_t>(options.replicates))
        throw DomainError("QMC sample count must be at least the replicate count");
}

} // namespace

QmcEstimate nli_psd(double f, const SystemConfig& cfg, const SpanPowerProfile& profile, Band band,
                    const QmcOptions& options)
{
    check_options(options);
    const std::uint64_t n = options.samples / options.replicates;
    if (cfg.fiber.gamma == 0.0 || band.width() <= 0.0)
        return {0.0, 0.0, n * options.replicates, 0};

    const NliKernel kernel(cfg.fiber, profile);
    const double scale = nli_prefactor(cfg.fiber, cfg.grid) * band.width() * band.width();
    std::vector<double> means(options.replicates);
    std::uint64_t accepted = 0;
    // Sentinel channel index keeps PSD seeds apart from the channel-averaged ones.
    const int tag = -1000003;
    for (int r = 0; r < options.replicates; ++r)
    {
        qmc::ScrambledSobol seq(2, band_seed(options.seed, tag, band, r));
        double acc = 0.0;
        double u[2];
        for (std::uint64_t i = 0; i < n; ++i)
        {
            seq.next(u);
            const double f1 = band.lo + u[0] * band.width();
            const double f2 = band.lo + u[1] * band.width();
            const double f3 = f1 + f2 - f;
            if (f3 < band.lo || f3 > band.hi)
                continue;
            ++accepted;
            acc += kernel(f, f1, f2);
        }
        means[r] = scale * acc / static_cast<double>(n);
    }
    return summarize(means, n, accepted);
}

QmcEstimate nli_psd(double f, const SystemConfig& cfg, const SpanPowerProfile& profile, double bandwidth,
                    const QmcOptions& options)
{
    if (std::abs(f) > bandwidth / 2.0)
        throw DomainError("nli_psd: frequency outside the band");
    return nli_psd(f, cfg, profile, Band{-bandwidth / 2.0, bandwidth / 2.0}, options);
}

namespace
{

QmcEstimate eta_with_kernel(int k, const SystemConfig& cfg, const NliKernel& kernel, double b_effective,
                            const QmcOptions& options, double b_removed)
{
    check_options(options);
    if (!cfg.grid.contains(k))
        throw DomainError("eta_channel: channel index outside the grid");
    const std::uint64_t n = options.samples / options.replicates;
    const Band band = integration_band(cfg.grid, k, b_effective);
    if (cfg.fiber.gamma == 0.0 || band.width() <= 0.0)
        return {0.0, 0.0, n * options.replicates, 0};

    const double df = cfg.grid.channel_spacing;
    const double f_lo = cfg.grid.center_offset(k) - df / 2.0;
    const double scale = nli_prefactor(cfg.fiber, cfg.grid) * band.width() * band.width();
    // triples entirely inside the removed band are skipped; same points as the plain estimate
    const bool removing = b_removed > 0.0;
    const Band inner = removing ? integration_band(cfg.grid, k, b_removed) : band;
    auto in_inner = [&inner](double v) { return v >= inner.lo && v <= inner.hi; };
    std::vector<double> means(options.replicates);
    std::uint64_t accepted = 0;
    for (int r = 0; r < options.replicates; ++r)
    {
        qmc::ScrambledSobol seq(3, band_seed(options.seed, k, band, r));
        double acc = 0.0;
        double u[3];
        for (std::uint64_t i = 0; i < n; ++i)
        {
            seq.next(u);
            const double f = f_lo + u[0] * df;
            const double f1 = band.lo + u[1] * band.width();
            const double f2 = band.lo + u[2] * band.width();
            const double f3 = f1 + f2 - f;
            if (f3 < band.lo || f3 > band.hi)
                continue;
            if (removing && in_inner(f1) && in_inner(f2) && in_inner(f3))
                continue;
            ++accepted;
            acc += kernel(f, f1, f2);
        }
        means[r] = scale * acc / static_cast<double>(n);
    }
    return summarize(means, n, accepted);
}

} // namespace

QmcEstimate eta_channel(int k, const SystemConfig& cfg, const SpanPowerProfile& profile, double b_effective,
                        const QmcOptions& options, double b_removed)
{
    const NliKernel kernel(cfg.fiber, profile);
    return eta_with_kernel(k, cfg, kernel, b_effective, options, b_removed);
}

const EtaEntry& NonlinearCoefficientTable::at(int k) const
{
    for (const auto& row : rows)
        if (row.channel == k)
            return row;
    throw DomainError("NonlinearCoefficientTable: unknown channel " + std::to_string(k));
}

NonlinearCoefficientTable compute_eta_table(const SystemConfig& cfg, const SpanPowerProfile& profile,
                                            double b_effective, const QmcOptions& options, int workers,
                                            double b_removed)
{
    const auto indices = cfg.grid.channel_indices();
    NonlinearCoefficientTable table;
    table.bandwidth = b_effective;
    table.removed_bandwidth = b_removed;
    table.rows.resize(indices.size());

    const NliKernel kernel(cfg.fiber, profile);
    const double f0 = cfg.grid.carrier_frequency();
    auto work = [&](std::size_t i) {
        const int k = indices[i];
        const QmcEstimate e = eta_with_kernel(k, cfg, kernel, b_effective, options, b_removed);
        table.rows[i] = {k, f0 + cfg.grid.center_offset(k), e.value, e.std_error, e.samples};
    };

    unsigned n_workers = workers > 0 ? static_cast<unsigned>(workers) : std::max(1u, std::thread::hardware_concurrency());
    n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(indices.size()));
    if (n_workers <= 1)
    {
        for (std::size_t i = 0; i < indices.size(); ++i)
            work(i);
        return table;
    }
    // Static striping: each row is computed by exactly one thread from its own seed.
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n_workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < indices.size(); i += n_workers)
                work(i);
        });
    pool.clear();
    return table;
}

NonlinearCoefficientTable nlc_table(const NonlinearCoefficientTable& full, const NonlinearCoefficientTable& residual)
{
    if (full.rows.size() != residual.rows.size())
        throw DomainError("nlc_table: tables cover different channel sets");
    NonlinearCoefficientTable t;
    t.bandwidth = residual.removed_bandwidth;
    t.rows = residual.rows;
    for (std::size_t i = 0; i < t.rows.size(); ++i)
    {
        if (full.rows[i].channel != residual.rows[i].channel)
            throw DomainError("nlc_table: tables cover different channel sets");
        t.rows[i].eta = std::max(0.0, full.rows[i].eta - residual.rows[i].eta);
    }
    return t;
}

void write_eta_csv(std::ostream& out, const NonlinearCoefficientTable& table)
{
    out << "channel_index,center_frequency_THz,eta_inv_W2,stderr,samples\n";
    char line[160];
    for (const auto& r : table.rows)
    {
        std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%llu\n", r.channel, r.center_frequency / units::THz,
                      r.eta, r.std_error, static_cast<unsigned long long>(r.samples));
        out << line;
    }
}

NonlinearCoefficientTable read_eta_csv(std::istream& in, double bandwidth)
{
    NonlinearCoefficientTable table;
    table.bandwidth = bandwidth;
    std::string line;
    if (!std::getline(in, line) || line.rfind("channel_index,", 0) != 0)
        throw IoError("eta table: missing header");
    while (std::getline(in, line))
    {
        if (line.empty())
            continue;
        EtaEntry e;
        unsigned long long samples = 0;
        double thz = 0.0;
        if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%llu", &e.channel, &thz, &e.eta, &e.std_error, &samples) != 5)
            throw IoError("eta table: malformed row '" + line + "'");
        e.center_frequency = thz * units::THz;
        e.samples = samples;
        table.rows.push_back(e);
    }
    return table;
}

std::uint64_t physics_hash(const SystemConfig& cfg, double b_effective, const QmcOptions& options, double b_removed)
{
    std::uint64_t h = qmc::mix64(0x676e6169722d7631ull); // format version tag
    auto add = [&h](double v) { h = qmc::hash_combine(h, std::bit_cast<std::uint64_t>(v)); };
    auto add_int = [&h](std::uint64_t v) { h = qmc::hash_combine(h, v); };
    const auto& f = cfg.fiber;
    for (double v : {f.attenuation, f.pump_attenuation, f.beta2, f.beta3, f.gamma, f.span_length})
        add(v);
    add_int(static_cast<std::uint64_t>(f.span_count));
    const auto& g = cfg.grid;
    for (double v : {g.carrier_wavelength, g.channel_spacing, g.symbol_rate})
        add(v);
    add_int(static_cast<std::uint64_t>(g.channel_count));
    const auto& a = cfg.amplifier;
    add_int(static_cast<std::uint64_t>(a.scheme));
    if (a.scheme == AmplifierScheme::BackwardRaman)
        for (double v : {a.pump_frequency_offset, a.pump_power, a.raman_gain, a.depleting_signal_power})
            add(v);
    add(b_effective);
    if (b_removed > 0.0)
        add(b_removed);
    add_int(options.samples);
    add_int(static_cast<std::uint64_t>(options.replicates));
    add_int(options.seed);
    return h;
}

} // namespace gnair
