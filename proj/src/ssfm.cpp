#include "gnair/ssfm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include <unsupported/Eigen/FFT>

#include "gnair/amplification.hpp"
#include "gnair/errors.hpp"
#include "gnair/performance.hpp"
#include "gnair/qmc.hpp"

namespace gnair
{

namespace
{

using Fft = Eigen::FFT<double>;

Eigen::Index wrap(Eigen::Index m, Eigen::Index n) { return ((m % n) + n) % n; }

// Angular frequency of every FFT bin (signed, bin order).
Eigen::ArrayXd angular_frequencies(Eigen::Index n, double sample_rate)
{
    Eigen::ArrayXd w(n);
    const double df = sample_rate / static_cast<double>(n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const Eigen::Index m = i < (n + 1) / 2 ? i : i - n;
        w(i) = 2.0 * std::numbers::pi * df * static_cast<double>(m);
    }
    return w;
}

Eigen::ArrayXd propagation_constant(const FiberParams& fiber, const Eigen::ArrayXd& w)
{
    return fiber.beta2 / 2.0 * w.square() + fiber.beta3 / 6.0 * w.cube();
}

Fft make_fft()
{
    Fft fft;
    fft.SetFlag(Fft::Unscaled);
    return fft;
}

// Half-width of the shaped band in DFT bins of the symbol-rate grid.
Eigen::Index rrc_half_width(Eigen::Index symbols, double roll_off)
{
    return static_cast<Eigen::Index>(std::ceil(0.5 * static_cast<double>(symbols) * (1.0 + roll_off))) + 1;
}

// A transition band narrower than one DFT bin cannot be represented; such a pulse is rectangular on this grid.
double resolved_roll_off(double roll_off, Eigen::Index symbols)
{
    return roll_off * static_cast<double>(symbols) < 1.0 ? 0.0 : roll_off;
}

double mean(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v)
        s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

} // namespace

SimulationConfig make_simulation_config(const SystemConfig& cfg, const SsfmSettings& settings, double launch_power)
{
    SimulationConfig sim;
    sim.fiber = cfg.fiber;
    sim.grid = cfg.grid;
    sim.grid.channel_count = settings.channel_count;
    sim.amplifier = cfg.amplifier;
    sim.symbols = settings.symbols;
    sim.samples_per_symbol = settings.samples_per_symbol;
    sim.roll_off = settings.roll_off;
    sim.steps_per_span = settings.steps_per_span;
    sim.seed = cfg.campaign.rng_seed;
    sim.launch_power = launch_power;
    sim.include_ase = settings.include_ase;
    return sim;
}

double rrc_response(double f, double symbol_rate, double roll_off)
{
    const double half = 0.5 * symbol_rate;
    if (roll_off <= 0.0)
        return (f >= -half && f < half) ? 1.0 : 0.0;
    const double a = std::abs(f);
    const double inner = (1.0 - roll_off) * half;
    const double outer = (1.0 + roll_off) * half;
    if (a <= inner)
        return 1.0;
    if (a > outer)
        return 0.0;
    return std::sqrt(0.5 * (1.0 + std::cos(std::numbers::pi / (roll_off * symbol_rate) * (a - inner))));
}

WdmSignal generate_wdm_signal(const SimulationConfig& sim, const ConstellationSpec& constellation)
{
    if (sim.symbols < 2 || sim.samples_per_symbol < 1)
        throw ConfigError("generate_wdm_signal: need at least 2 symbols and 1 sample per symbol");
    if (!(sim.launch_power > 0.0))
        throw ConfigError("generate_wdm_signal: launch power must be positive");
    const double occupied = sim.grid.total_bandwidth() + sim.roll_off * sim.grid.symbol_rate;
    if (occupied > sim.sample_rate())
        throw ConfigError("generate_wdm_signal: aggregate bandwidth exceeds the sample rate");

    const Eigen::Index ns = sim.symbols;
    const Eigen::Index n = sim.samples();
    const double df = sim.grid.symbol_rate / static_cast<double>(ns);
    const double roll_off = resolved_roll_off(sim.roll_off, ns);
    const Eigen::Index half = rrc_half_width(ns, roll_off);
    const Eigen::Index spacing_bins = std::llround(sim.grid.channel_spacing / df);

    Fft fft = make_fft();
    std::discrete_distribution<int> draw(constellation.pmf.data(), constellation.pmf.data() + constellation.pmf.size());

    WdmSignal out;
    out.field.sample_rate = sim.sample_rate();
    Eigen::VectorXcd spectrum_x = Eigen::VectorXcd::Zero(n);
    Eigen::VectorXcd spectrum_y = Eigen::VectorXcd::Zero(n);

    std::vector<std::pair<Eigen::Index, double>> taps;
    for (Eigen::Index m = -half; m <= half; ++m)
    {
        const double h = rrc_response(static_cast<double>(m) * df, sim.grid.symbol_rate, roll_off);
        if (h > 0.0)
            taps.emplace_back(m, h);
    }

    Eigen::VectorXcd symbols(ns), sym_spec(ns);
    for (int k : sim.grid.channel_indices())
    {
        out.tx.channels.push_back(k);
        for (int pol = 0; pol < 2; ++pol)
        {
            std::mt19937_64 rng(qmc::hash_combine(qmc::hash_combine(sim.seed, static_cast<std::uint64_t>(k + 100000)),
                                                  static_cast<std::uint64_t>(pol)));
            for (Eigen::Index s = 0; s < ns; ++s)
                symbols(s) = constellation.points(draw(rng));
            fft.fwd(sym_spec, symbols);

            double energy = 0.0;
            for (const auto& [m, h] : taps)
                energy += std::norm(sym_spec(wrap(m, ns)) * h);
            const double scale = std::sqrt(0.5 * sim.launch_power / energy);

            Eigen::VectorXcd& target = pol == 0 ? spectrum_x : spectrum_y;
            for (const auto& [m, h] : taps)
                target(wrap(k * spacing_bins + m, n)) += sym_spec(wrap(m, ns)) * (h * scale);
            (pol == 0 ? out.tx.x : out.tx.y).push_back(symbols);
        }
    }
    fft.inv(out.field.x, spectrum_x);
    fft.inv(out.field.y, spectrum_y);
    return out;
}

std::vector<double> log_step_boundaries(double attenuation, double span_length, int steps)
{
    if (steps < 1)
        throw DomainError("log_step_boundaries: steps must be >= 1");
    std::vector<double> z(steps + 1);
    const double loss = -std::expm1(-attenuation * span_length);
    for (int j = 0; j <= steps; ++j)
    {
        const double t = static_cast<double>(j) / steps;
        z[j] = attenuation > 0.0 ? -std::log1p(-t * loss) / attenuation : t * span_length;
    }
    z.back() = span_length;
    return z;
}

struct SplitStepPropagator::Impl
{
    Fft fft = make_fft();
    Eigen::ArrayXd beta;
    Eigen::VectorXcd spectrum;
    Eigen::ArrayXcd op;
    Eigen::ArrayXd phase;
    FieldBuffer* field = nullptr;
};

SplitStepPropagator::SplitStepPropagator(const FiberParams& fiber, int steps, Eigen::Index samples,
                                         double sample_rate)
    : impl_(std::make_unique<Impl>()), fiber_(fiber),
      boundaries_(log_step_boundaries(fiber.attenuation, fiber.span_length, steps))
{
    impl_->beta = propagation_constant(fiber, angular_frequencies(samples, sample_rate));
    impl_->spectrum.resize(samples);
    impl_->op.resize(samples);
    impl_->phase.resize(samples);
}

SplitStepPropagator::~SplitStepPropagator() = default;

void SplitStepPropagator::apply_linear(double length)
{
    Impl& s = *impl_;
    const double n = static_cast<double>(s.beta.size());
    const double amplitude = std::exp(-0.5 * fiber_.attenuation * length) / n;
    s.op = (s.beta * (-length)).unaryExpr([amplitude](double p) { return std::polar(amplitude, p); });
    for (Eigen::VectorXcd* a : {&s.field->x, &s.field->y})
    {
        s.fft.fwd(s.spectrum, *a);
        s.spectrum.array() *= s.op;
        s.fft.inv(*a, s.spectrum);
    }
}

void SplitStepPropagator::nonlinear(FieldBuffer& field, double length)
{
    if (fiber_.gamma == 0.0)
        return;
    const double a = fiber_.attenuation;
    const double leff = a > 0.0 ? 2.0 * std::sinh(0.5 * a * length) / a : length;
    Impl& s = *impl_;
    s.phase = (field.x.array().abs2() + field.y.array().abs2()) * (-8.0 / 9.0 * fiber_.gamma * leff);
    s.op = s.phase.unaryExpr([](double p) { return std::polar(1.0, p); });
    field.x.array() *= s.op;
    field.y.array() *= s.op;
}

void SplitStepPropagator::propagate_span(FieldBuffer& field)
{
    if (field.x.size() != impl_->beta.size() || field.y.size() != impl_->beta.size())
        throw DomainError("SplitStepPropagator: field length differs from the planned size");
    impl_->field = &field;
    step_energies_.clear();
    const int steps = static_cast<int>(boundaries_.size()) - 1;
    double pending = 0.0;
    for (int j = 0; j < steps; ++j)
    {
        const double h = boundaries_[j + 1] - boundaries_[j];
        apply_linear(pending + 0.5 * h);
        nonlinear(field, h);
        step_energies_.push_back(field.x.squaredNorm() + field.y.squaredNorm());
        pending = 0.5 * h;
    }
    apply_linear(pending);
    impl_->field = nullptr;
}

FieldBuffer propagate_span(FieldBuffer field, const FiberParams& fiber, int steps)
{
    SplitStepPropagator p(fiber, steps, field.size(), field.sample_rate);
    p.propagate_span(field);
    return field;
}

void amplify(FieldBuffer& field, double gain, double ase_variance, double bandwidth, std::mt19937_64& rng)
{
    const double g = std::sqrt(gain);
    field.x *= g;
    field.y *= g;
    if (ase_variance <= 0.0)
        return;
    const double sd = std::sqrt(0.25 * ase_variance * field.sample_rate / bandwidth);
    std::normal_distribution<double> normal(0.0, sd);
    for (Eigen::VectorXcd* a : {&field.x, &field.y})
        for (Eigen::Index i = 0; i < a->size(); ++i)
        {
            const double re = normal(rng);
            const double im = normal(rng);
            (*a)(i) += std::complex<double>(re, im);
        }
}

void compensate_dispersion(FieldBuffer& field, const FiberParams& fiber, double length)
{
    const Eigen::Index n = field.size();
    const Eigen::ArrayXd beta = propagation_constant(fiber, angular_frequencies(n, field.sample_rate));
    const double inv_n = 1.0 / static_cast<double>(n);
    const Eigen::ArrayXcd op = (beta * length).unaryExpr([inv_n](double p) { return std::polar(inv_n, p); });
    Fft fft = make_fft();
    Eigen::VectorXcd spectrum(n);
    for (Eigen::VectorXcd* a : {&field.x, &field.y})
    {
        fft.fwd(spectrum, *a);
        spectrum.array() *= op;
        fft.inv(*a, spectrum);
    }
}

namespace
{

struct SpectraPair
{
    Eigen::VectorXcd x, y;
};

ChannelEstimate estimate_channel(const SpectraPair& spectra, std::size_t slot, int k, const WdmGrid& grid,
                                 const TxRecord& tx, double nominal_roll_off, Fft& fft)
{
    const Eigen::Index ns = tx.x[slot].size();
    const double roll_off = resolved_roll_off(nominal_roll_off, ns);
    const Eigen::Index n = spectra.x.size();
    const double df = grid.symbol_rate / static_cast<double>(ns);
    const Eigen::Index spacing_bins = std::llround(grid.channel_spacing / df);
    const Eigen::Index half = rrc_half_width(ns, roll_off);

    double signal = 0.0, error = 0.0;
    Eigen::VectorXcd folded(ns), samples(ns);
    for (int pol = 0; pol < 2; ++pol)
    {
        const Eigen::VectorXcd& spec = pol == 0 ? spectra.x : spectra.y;
        const Eigen::VectorXcd& sent = pol == 0 ? tx.x[slot] : tx.y[slot];
        folded.setZero();
        for (Eigen::Index m = -half; m <= half; ++m)
        {
            const double h = rrc_response(static_cast<double>(m) * df, grid.symbol_rate, roll_off);
            if (h > 0.0)
                folded(wrap(m, ns)) += spec(wrap(k * spacing_bins + m, n)) * h;
        }
        fft.inv(samples, folded);
        const std::complex<double> gain = sent.dot(samples) / sent.squaredNorm();
        signal += sent.squaredNorm();
        error += (samples / gain - sent).squaredNorm();
    }
    ChannelEstimate e;
    e.channel = k;
    e.snr_linear = signal / error;
    e.snr_db = linear_to_db(e.snr_linear);
    return e;
}

SpectraPair field_spectra(const FieldBuffer& field, Fft& fft)
{
    SpectraPair s;
    fft.fwd(s.x, field.x);
    fft.fwd(s.y, field.y);
    return s;
}

std::size_t slot_of(const TxRecord& tx, int k)
{
    const auto it = std::find(tx.channels.begin(), tx.channels.end(), k);
    if (it == tx.channels.end())
        throw DomainError("receive_channel: channel " + std::to_string(k) + " was not transmitted");
    return static_cast<std::size_t>(it - tx.channels.begin());
}

} // namespace

ChannelEstimate receive_channel(const FieldBuffer& compensated, int k, const WdmGrid& grid, const TxRecord& tx,
                                double roll_off)
{
    const std::size_t slot = slot_of(tx, k);
    Fft fft = make_fft();
    const SpectraPair spectra = field_spectra(compensated, fft);
    return estimate_channel(spectra, slot, k, grid, tx, roll_off, fft);
}

std::vector<ChannelEstimate> receive_all(const FieldBuffer& compensated, const WdmGrid& grid, const TxRecord& tx,
                                         double roll_off)
{
    Fft fft = make_fft();
    const SpectraPair spectra = field_spectra(compensated, fft);
    std::vector<ChannelEstimate> out;
    for (std::size_t slot = 0; slot < tx.channels.size(); ++slot)
        out.push_back(estimate_channel(spectra, slot, tx.channels[slot], grid, tx, roll_off, fft));
    return out;
}

std::vector<ChannelEstimate> run_link(const SimulationConfig& sim, const ConstellationSpec& constellation)
{
    if (sim.amplifier.scheme != AmplifierScheme::Edfa)
        throw ConfigError("run_link: the split-step model supports lumped amplification only");
    WdmSignal signal = generate_wdm_signal(sim, constellation);

    const double gain = std::exp(sim.fiber.attenuation * sim.fiber.span_length);
    const double ase = sim.include_ase
                           ? edfa_ase_variance(sim.fiber.attenuation, sim.fiber.span_length,
                                               sim.amplifier.noise_figure_db, sim.grid.carrier_frequency(),
                                               sim.grid.channel_spacing)
                           : 0.0;
    std::mt19937_64 rng(qmc::hash_combine(sim.seed, 0xA5E0A5E0ull));
    SplitStepPropagator propagator(sim.fiber, sim.steps_per_span, signal.field.size(), signal.field.sample_rate);
    for (int span = 0; span < sim.fiber.span_count; ++span)
    {
        propagator.propagate_span(signal.field);
        amplify(signal.field, gain, ase, sim.grid.channel_spacing, rng);
    }
    compensate_dispersion(signal.field, sim.fiber, sim.fiber.link_length());
    return receive_all(signal.field, sim.grid, signal.tx, sim.roll_off);
}

double VerificationTable::max_abs_difference_db() const
{
    double worst = 0.0;
    for (const auto& r : rows)
        worst = std::max(worst, std::abs(r.snr_sim_db - r.snr_gn_db));
    return worst;
}

namespace
{

struct GnPrediction
{
    std::vector<double> snr_db;
    double central_optimum = 0.0;
};

GnPrediction gn_prediction(const SystemConfig& cfg, const SimulationConfig& sim, const QmcOptions& qmc,
                           double power)
{
    SystemConfig g = cfg;
    g.fiber = sim.fiber;
    g.grid = sim.grid;
    g.amplifier = sim.amplifier;
    const SpanPowerProfile profile = span_power_profile(g);
    const NonlinearCoefficientTable table = compute_eta_table(g, profile, g.grid.total_bandwidth(), qmc);
    const double ase = sim.include_ase ? accumulated_ase(g) : 0.0;

    GnPrediction out;
    out.central_optimum = optimum_launch_power(ase, table.at(0).eta);
    const double p = power > 0.0 ? power : out.central_optimum;
    for (const auto& row : table.rows)
        out.snr_db.push_back(linear_to_db(effective_snr(p, ase, row.eta)));
    return out;
}

double asymmetry(const std::vector<int>& channels, const std::vector<double>& snr_db)
{
    std::vector<double> low, high;
    for (std::size_t i = 0; i < channels.size(); ++i)
    {
        if (channels[i] < 0)
            low.push_back(snr_db[i]);
        else if (channels[i] > 0)
            high.push_back(snr_db[i]);
    }
    return mean(low) - mean(high);
}

} // namespace

VerificationTable run_verification_campaign(const SystemConfig& cfg, SimulationConfig sim, const QmcOptions& qmc,
                                            int modulation_order, bool reference)
{
    const ConstellationSpec constellation = build_constellation(modulation_order);
    const GnPrediction gn = gn_prediction(cfg, sim, qmc, sim.launch_power);
    if (!(sim.launch_power > 0.0))
        sim.launch_power = gn.central_optimum;

    VerificationTable table;
    table.launch_power = sim.launch_power;
    const std::vector<ChannelEstimate> measured = run_link(sim, constellation);
    const std::vector<int> channels = sim.grid.channel_indices();
    std::vector<double> sim_db;
    for (std::size_t i = 0; i < channels.size(); ++i)
    {
        VerificationRow r;
        r.channel = channels[i];
        r.frequency = sim.grid.carrier_frequency() + sim.grid.center_offset(channels[i]);
        r.snr_sim_db = measured[i].snr_db;
        r.snr_gn_db = gn.snr_db[i];
        table.rows.push_back(r);
        sim_db.push_back(r.snr_sim_db);
    }
    table.sim_asymmetry_db = asymmetry(channels, sim_db);
    table.gn_asymmetry_db = asymmetry(channels, gn.snr_db);

    if (reference)
    {
        SimulationConfig flat = sim;
        flat.fiber.beta3 = 0.0;
        const GnPrediction gn_flat = gn_prediction(cfg, flat, qmc, flat.launch_power);
        const std::vector<ChannelEstimate> measured_flat = run_link(flat, constellation);
        std::vector<double> flat_db;
        for (std::size_t i = 0; i < channels.size(); ++i)
        {
            table.rows[i].snr_sim_no_slope_db = measured_flat[i].snr_db;
            table.rows[i].snr_gn_no_slope_db = gn_flat.snr_db[i];
            flat_db.push_back(measured_flat[i].snr_db);
        }
        table.sim_asymmetry_no_slope_db = asymmetry(channels, flat_db);
        table.gn_asymmetry_no_slope_db = asymmetry(channels, gn_flat.snr_db);
        table.has_reference = true;
    }
    return table;
}

void write_verification_csv(std::ostream& out, const VerificationTable& table)
{
    out << "channel_index,frequency_THz,snr_sim_dB,snr_gn_dB,difference_dB";
    if (table.has_reference)
        out << ",snr_sim_no_slope_dB,snr_gn_no_slope_dB";
    out << '\n';
    char buf[256];
    for (const auto& r : table.rows)
    {
        std::snprintf(buf, sizeof buf, "%d,%.9f,%.6f,%.6f,%.6f", r.channel, r.frequency / units::THz, r.snr_sim_db,
                      r.snr_gn_db, r.snr_sim_db - r.snr_gn_db);
        out << buf;
        if (table.has_reference)
        {
            std::snprintf(buf, sizeof buf, ",%.6f,%.6f", r.snr_sim_no_slope_db, r.snr_gn_no_slope_db);
            out << buf;
        }
        out << '\n';
    }
}

} // namespace gnair
