#include "gnair/performance.hpp"

#include <limits>

#include "gnair/amplification.hpp"

namespace gnair
{

double delta_eta(const NonlinearCoefficientTable& full, const NonlinearCoefficientTable* nlc, int k)
{
    const double eta = full.at(k).eta;
    return nlc ? eta - nlc->at(k).eta : eta;
}

double accumulated_ase(const SystemConfig& cfg)
{
    const SpanPowerProfile profile = span_power_profile(cfg);
    return cfg.fiber.span_count * ase_per_span(cfg, profile).variance_per_span;
}

std::vector<ChannelSnr> per_channel_report(const NonlinearCoefficientTable& full, const NonlinearCoefficientTable* nlc,
                                           double ase_total, PowerPolicy policy, std::optional<double> fixed_power)
{
    if (nlc)
    {
        if (nlc->rows.size() != full.rows.size())
            throw ConfigError("per_channel_report: NLC and full tables cover different channel sets");
        for (std::size_t i = 0; i < full.rows.size(); ++i)
            if (nlc->rows[i].channel != full.rows[i].channel)
                throw ConfigError("per_channel_report: NLC and full tables cover different channel sets");
    }

    std::optional<double> common;
    if (policy == PowerPolicy::Fixed)
    {
        if (!fixed_power)
            throw ConfigError("per_channel_report: fixed power policy without a launch power");
        common = *fixed_power;
    }
    else if (policy == PowerPolicy::CentralOptimum)
    {
        common = optimum_launch_power(ase_total, delta_eta(full, nlc, 0));
    }

    std::vector<ChannelSnr> out;
    out.reserve(full.rows.size());
    for (const auto& row : full.rows)
    {
        ChannelSnr c;
        c.channel = row.channel;
        c.ase_total = ase_total;
        c.eta_full = row.eta;
        c.eta_nlc = nlc ? nlc->at(row.channel).eta : 0.0;
        c.delta_eta = c.eta_full - c.eta_nlc;
        c.optimum_power = c.delta_eta > 0.0 ? optimum_launch_power(ase_total, c.delta_eta)
                                            : std::numeric_limits<double>::infinity();
        c.launch_power = common ? *common : optimum_launch_power(ase_total, c.delta_eta);
        c.snr_linear = effective_snr(c.launch_power, c.ase_total, c.delta_eta);
        c.snr_db = linear_to_db(c.snr_linear);
        out.push_back(c);
    }
    return out;
}

std::vector<ChannelSnr> per_channel_report(const SystemConfig& cfg, const NonlinearCoefficientTable& full,
                                           const NonlinearCoefficientTable* nlc)
{
    return per_channel_report(full, nlc, accumulated_ase(cfg), cfg.campaign.power_policy, cfg.campaign.launch_power);
}

std::vector<ChannelSnr> srs_adjusted_report(const SystemConfig& cfg, const NonlinearCoefficientTable& full,
                                            std::span<const double> channel_powers,
                                            const std::vector<SpanPowerProfile>& tilted)
{
    if (cfg.amplifier.scheme != AmplifierScheme::Edfa)
        throw ConfigError("srs_adjusted_report: lumped amplification only");
    if (channel_powers.size() != full.rows.size() || tilted.size() != full.rows.size())
        throw ConfigError("srs_adjusted_report: one power and one profile per channel required");

    const double f0 = cfg.grid.carrier_frequency();
    std::vector<ChannelSnr> out;
    out.reserve(full.rows.size());
    for (std::size_t i = 0; i < full.rows.size(); ++i)
    {
        ChannelSnr c;
        c.channel = full.rows[i].channel;
        c.launch_power = channel_powers[i];
        const double gain = 1.0 / tilted[i].net_gain();
        c.ase_total = cfg.fiber.span_count *
                      edfa_ase_variance_for_gain(gain, cfg.amplifier.noise_figure_db, f0, cfg.grid.channel_spacing);
        c.eta_full = full.rows[i].eta;
        c.delta_eta = c.eta_full;
        c.optimum_power = optimum_launch_power(c.ase_total, c.delta_eta);
        c.snr_linear = effective_snr(c.launch_power, c.ase_total, c.delta_eta);
        c.snr_db = linear_to_db(c.snr_linear);
        out.push_back(c);
    }
    return out;
}

} // namespace gnair
