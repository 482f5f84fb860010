#include "gnair/system_model.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gnair/errors.hpp"

namespace gnair
{

using nlohmann::json;

std::vector<int> WdmGrid::channel_indices() const
{
    std::vector<int> out;
    out.reserve(channel_count);
    for (int k = -max_index(); k <= max_index(); ++k)
        out.push_back(k);
    return out;
}

namespace
{

void reject_unknown_keys(const json& section, const std::string& name, std::initializer_list<const char*> allowed)
{
    if (!section.is_object())
        throw ConfigError("section '" + name + "' must be an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& item : section.items())
        if (!keys.contains(item.key()))
            throw ConfigError("unknown key '" + name + "." + item.key() + "'");
}

const json& require(const json& section, const std::string& name, const char* key)
{
    if (!section.contains(key))
        throw ConfigError("missing required field '" + name + "." + key + "'");
    return section.at(key);
}

double number(const json& value, const std::string& field)
{
    if (!value.is_number())
        throw ConfigError("field '" + field + "' must be a number");
    return value.get<double>();
}

long long integer(const json& value, const std::string& field)
{
    if (!value.is_number_integer() && !value.is_number_unsigned())
        throw ConfigError("field '" + field + "' must be an integer");
    return value.get<long long>();
}

double get_number(const json& section, const std::string& name, const char* key)
{
    return number(require(section, name, key), name + "." + key);
}

double get_number_or(const json& section, const std::string& name, const char* key, double fallback)
{
    return section.contains(key) ? number(section.at(key), name + "." + key) : fallback;
}

long long get_integer(const json& section, const std::string& name, const char* key)
{
    return integer(require(section, name, key), name + "." + key);
}

long long get_integer_or(const json& section, const std::string& name, const char* key, long long fallback)
{
    return section.contains(key) ? integer(section.at(key), name + "." + key) : fallback;
}

std::string get_string_or(const json& section, const std::string& name, const char* key, std::string fallback)
{
    if (!section.contains(key))
        return fallback;
    if (!section.at(key).is_string())
        throw ConfigError("field '" + name + "." + key + "' must be a string");
    return section.at(key).get<std::string>();
}

bool within_relative(double a, double b, double tol)
{
    const double scale = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) <= tol * scale;
}

FiberParams parse_fiber(const json& s, double lambda)
{
    const std::string n = "fiber";
    reject_unknown_keys(s, n,
                        {"attenuation_dB_per_km", "pump_attenuation_dB_per_km", "dispersion_ps_per_nm_km",
                         "dispersion_slope_ps_per_nm2_km", "beta2_ps2_per_km", "beta3_ps3_per_km", "gamma_per_W_km",
                         "gain_slope_per_W_km_THz", "span_length_km", "span_count"});
    FiberParams f;
    const double att_db = get_number(s, n, "attenuation_dB_per_km");
    f.attenuation = units::attenuation_from_db_per_km(att_db);
    f.pump_attenuation = units::attenuation_from_db_per_km(get_number_or(s, n, "pump_attenuation_dB_per_km", att_db));
    f.dispersion = get_number(s, n, "dispersion_ps_per_nm_km") * units::ps / (units::nm * units::km);
    f.dispersion_slope =
        get_number(s, n, "dispersion_slope_ps_per_nm2_km") * units::ps / (units::nm * units::nm * units::km);
    f.gamma = get_number(s, n, "gamma_per_W_km") / units::km;
    f.gain_slope = get_number_or(s, n, "gain_slope_per_W_km_THz", 0.0) / (units::km * units::THz);
    f.span_length = get_number(s, n, "span_length_km") * units::km;
    f.span_count = static_cast<int>(get_integer(s, n, "span_count"));

    const auto derived = dispersion_coeffs(f.dispersion, f.dispersion_slope, lambda);
    f.beta2 = derived.beta2;
    f.beta3 = derived.beta3;
    const double ps2_km = units::ps * units::ps / units::km;
    const double ps3_km = ps2_km * units::ps;
    if (s.contains("beta2_ps2_per_km"))
    {
        const double b2 = number(s.at("beta2_ps2_per_km"), "fiber.beta2_ps2_per_km") * ps2_km;
        if (!within_relative(b2, derived.beta2, 0.005))
            throw ConfigError("invariant violated: beta2 inconsistent with D at the carrier wavelength (> 0.5%)");
        f.beta2 = b2;
    }
    if (s.contains("beta3_ps3_per_km"))
    {
        const double b3 = number(s.at("beta3_ps3_per_km"), "fiber.beta3_ps3_per_km") * ps3_km;
        if (!within_relative(b3, derived.beta3, 0.005))
            throw ConfigError("invariant violated: beta3 inconsistent with (D, S) at the carrier wavelength (> 0.5%)");
        f.beta3 = b3;
    }
    return f;
}

WdmGrid parse_grid(const json& s)
{
    const std::string n = "grid";
    reject_unknown_keys(s, n, {"carrier_wavelength_nm", "channel_spacing_GHz", "symbol_rate_GBd", "channel_count"});
    WdmGrid g;
    g.carrier_wavelength = get_number(s, n, "carrier_wavelength_nm") * units::nm;
    g.channel_spacing = get_number(s, n, "channel_spacing_GHz") * units::GHz;
    g.symbol_rate = get_number(s, n, "symbol_rate_GBd") * units::GHz;
    g.channel_count = static_cast<int>(get_integer(s, n, "channel_count"));
    return g;
}

AmplifierSpec parse_amplifier(const json& s)
{
    const std::string n = "amplifier";
    reject_unknown_keys(s, n,
                        {"scheme", "noise_figure_dB", "temperature_K", "pump_frequency_offset_THz", "pump_power_W",
                         "raman_gain_per_W_km", "depleting_signal_power_W"});
    AmplifierSpec a;
    const std::string scheme = get_string_or(s, n, "scheme", "");
    if (scheme == "edfa")
    {
        a.scheme = AmplifierScheme::Edfa;
        a.noise_figure_db = get_number(s, n, "noise_figure_dB");
    }
    else if (scheme == "raman")
    {
        a.scheme = AmplifierScheme::BackwardRaman;
        for (const char* key : {"temperature_K", "pump_frequency_offset_THz", "pump_power_W", "raman_gain_per_W_km"})
            if (!s.contains(key))
                throw ConfigError(std::string("missing Raman-only field 'amplifier.") + key + "'");
        a.temperature = get_number(s, n, "temperature_K");
        a.pump_frequency_offset = get_number(s, n, "pump_frequency_offset_THz") * units::THz;
        a.pump_power = get_number(s, n, "pump_power_W");
        a.raman_gain = get_number(s, n, "raman_gain_per_W_km") / units::km;
        a.depleting_signal_power = get_number_or(s, n, "depleting_signal_power_W", 0.0);
        a.noise_figure_db = get_number_or(s, n, "noise_figure_dB", a.noise_figure_db);
    }
    else
    {
        throw ConfigError("field 'amplifier.scheme' must be \"edfa\" or \"raman\"");
    }
    return a;
}

NlcConfig parse_nlc(const json& s)
{
    const std::string n = "nlc";
    reject_unknown_keys(s, n, {"bandwidth_GHz"});
    NlcConfig c;
    if (!s.contains("bandwidth_GHz"))
        return c;
    const json& v = s.at("bandwidth_GHz");
    c.bandwidths.clear();
    if (v.is_array())
    {
        for (const auto& b : v)
            c.bandwidths.push_back(number(b, "nlc.bandwidth_GHz") * units::GHz);
    }
    else
    {
        c.bandwidths.push_back(number(v, "nlc.bandwidth_GHz") * units::GHz);
    }
    return c;
}

SsfmSettings parse_ssfm(const json& s)
{
    const std::string n = "campaign.ssfm";
    reject_unknown_keys(s, n,
                        {"channel_count", "symbols", "samples_per_symbol", "roll_off", "steps_per_span",
                         "modulation_order", "include_ase"});
    SsfmSettings t;
    t.channel_count = static_cast<int>(get_integer_or(s, n, "channel_count", t.channel_count));
    t.symbols = static_cast<int>(get_integer_or(s, n, "symbols", t.symbols));
    t.samples_per_symbol = static_cast<int>(get_integer_or(s, n, "samples_per_symbol", t.samples_per_symbol));
    t.roll_off = get_number_or(s, n, "roll_off", t.roll_off);
    t.steps_per_span = static_cast<int>(get_integer_or(s, n, "steps_per_span", t.steps_per_span));
    t.modulation_order = static_cast<int>(get_integer_or(s, n, "modulation_order", t.modulation_order));
    if (s.contains("include_ase"))
    {
        if (!s.at("include_ase").is_boolean())
            throw ConfigError("field 'campaign.ssfm.include_ase' must be a boolean");
        t.include_ase = s.at("include_ase").get<bool>();
    }
    return t;
}

CampaignConfig parse_campaign(const json& s)
{
    const std::string n = "campaign";
    reject_unknown_keys(s, n,
                        {"modulation_formats", "shaping", "qmc_samples", "qmc_replicates", "rng_seed",
                         "launch_power_dBm", "power_policy", "output_dir", "desk_channel_count", "ssfm"});
    CampaignConfig c;
    if (s.contains("modulation_formats"))
    {
        const json& v = s.at("modulation_formats");
        if (!v.is_array())
            throw ConfigError("field 'campaign.modulation_formats' must be an array");
        c.modulation_formats.clear();
        for (const auto& m : v)
            c.modulation_formats.push_back(static_cast<int>(integer(m, "campaign.modulation_formats")));
    }
    const std::string shaping = get_string_or(s, n, "shaping", "both");
    if (shaping == "uniform")
        c.shaping = ShapingSelection::Uniform;
    else if (shaping == "maxwell-boltzmann" || shaping == "mb")
        c.shaping = ShapingSelection::MaxwellBoltzmann;
    else if (shaping == "both")
        c.shaping = ShapingSelection::Both;
    else
        throw ConfigError("field 'campaign.shaping' must be uniform, maxwell-boltzmann or both");

    const long long samples = get_integer_or(s, n, "qmc_samples", static_cast<long long>(c.qmc_samples));
    if (samples <= 0)
        throw ConfigError("field 'campaign.qmc_samples' must be positive");
    c.qmc_samples = static_cast<std::uint64_t>(samples);
    c.qmc_replicates = static_cast<int>(get_integer_or(s, n, "qmc_replicates", c.qmc_replicates));
    c.rng_seed = static_cast<std::uint64_t>(get_integer_or(s, n, "rng_seed", static_cast<long long>(c.rng_seed)));
    if (s.contains("launch_power_dBm"))
        c.launch_power = dbm_to_watt(number(s.at("launch_power_dBm"), "campaign.launch_power_dBm"));

    const std::string policy = get_string_or(s, n, "power_policy", "per-channel-optimum");
    if (policy == "per-channel-optimum")
        c.power_policy = PowerPolicy::PerChannelOptimum;
    else if (policy == "central-optimum")
        c.power_policy = PowerPolicy::CentralOptimum;
    else if (policy == "fixed")
        c.power_policy = PowerPolicy::Fixed;
    else
        throw ConfigError("field 'campaign.power_policy' must be per-channel-optimum, central-optimum or fixed");

    c.output_dir = get_string_or(s, n, "output_dir", c.output_dir);
    c.desk_channel_count = static_cast<int>(get_integer_or(s, n, "desk_channel_count", c.desk_channel_count));
    if (s.contains("ssfm"))
        c.ssfm = parse_ssfm(s.at("ssfm"));
    return c;
}

bool is_square_qam(int m)
{
    if (m < 4 || !std::has_single_bit(static_cast<unsigned>(m)))
        return false;
    return std::countr_zero(static_cast<unsigned>(m)) % 2 == 0;
}

} // namespace

void validate(const SystemConfig& cfg)
{
    const auto& f = cfg.fiber;
    const auto& g = cfg.grid;
    if (!(f.attenuation > 0.0))
        throw ConfigError("invariant violated: fiber attenuation must be > 0");
    if (!(f.span_length > 0.0))
        throw ConfigError("invariant violated: span length must be > 0");
    if (f.span_count < 1)
        throw ConfigError("invariant violated: span count must be >= 1");
    if (f.gamma < 0.0)
        throw ConfigError("invariant violated: gamma must be >= 0");
    if (f.pump_attenuation < 0.0 || f.gain_slope < 0.0)
        throw ConfigError("invariant violated: pump attenuation and gain slope must be >= 0");
    if (!(g.carrier_wavelength > 0.0))
        throw ConfigError("invariant violated: carrier wavelength must be > 0");
    if (g.channel_count < 1 || g.channel_count % 2 == 0)
        throw ConfigError("invariant violated: channel count must be odd so the channel index set is symmetric");
    if (!(g.symbol_rate > 0.0) || !within_relative(g.channel_spacing, g.symbol_rate, 1e-12))
        throw ConfigError("invariant violated: Nyquist grid requires channel spacing == symbol rate");

    const auto& a = cfg.amplifier;
    if (a.scheme == AmplifierScheme::Edfa && a.noise_figure_db < 10.0 * std::log10(2.0))
        throw ConfigError("invariant violated: EDFA noise figure must be >= 3 dB (n_sp >= 1)");
    if (a.scheme == AmplifierScheme::BackwardRaman)
    {
        if (!(a.temperature >= 0.0) || !(a.pump_frequency_offset > 0.0) || !(a.pump_power > 0.0) || a.raman_gain < 0.0 ||
            a.depleting_signal_power < 0.0)
            throw ConfigError("invariant violated: Raman parameters out of range");
    }

    for (double b : cfg.nlc.bandwidths)
        if (b < 0.0 || b > g.total_bandwidth() * (1.0 + 1e-12))
            throw ConfigError("invariant violated: 0 <= NLC bandwidth <= total bandwidth");

    const auto& c = cfg.campaign;
    if (c.modulation_formats.empty())
        throw ConfigError("invariant violated: at least one modulation format required");
    for (int m : c.modulation_formats)
        if (!is_square_qam(m))
            throw ConfigError("invariant violated: modulation order " + std::to_string(m) +
                              " is not an even power of 2 (square QAM)");
    if (c.qmc_replicates < 2)
        throw ConfigError("invariant violated: at least 2 QMC replicates are needed for an error estimate");
    if (c.qmc_samples < static_cast<std::uint64_t>(c.qmc_replicates))
        throw ConfigError("invariant violated: qmc_samples must be >= qmc_replicates");
    if (c.power_policy == PowerPolicy::Fixed && !c.launch_power)
        throw ConfigError("invariant violated: power_policy 'fixed' requires campaign.launch_power_dBm");
    if (c.desk_channel_count < 1 || c.desk_channel_count % 2 == 0)
        throw ConfigError("invariant violated: desk channel count must be odd");

    const auto& s = c.ssfm;
    if (s.channel_count < 1 || s.channel_count % 2 == 0)
        throw ConfigError("invariant violated: simulated channel count must be odd");
    if (s.symbols < (1 << 12))
        throw ConfigError("invariant violated: at least 2^12 simulated symbols per channel");
    if (s.samples_per_symbol < 2 || s.steps_per_span < 1)
        throw ConfigError("invariant violated: samples_per_symbol >= 2 and steps_per_span >= 1");
    if (s.roll_off < 0.0 || s.roll_off > 1.0)
        throw ConfigError("invariant violated: roll-off must lie in [0, 1]");
    if (!is_square_qam(s.modulation_order))
        throw ConfigError("invariant violated: simulated modulation order must be square QAM");
}

SystemConfig parse_config(const std::string& document)
{
    json root;
    try
    {
        root = json::parse(document);
    }
    catch (const json::parse_error& e)
    {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    reject_unknown_keys(root, "<root>", {"fiber", "grid", "amplifier", "nlc", "campaign"});
    for (const char* section : {"fiber", "grid", "amplifier"})
        if (!root.contains(section))
            throw ConfigError(std::string("missing required section '") + section + "'");

    SystemConfig cfg;
    cfg.grid = parse_grid(root.at("grid"));
    if (!(cfg.grid.carrier_wavelength > 0.0))
        throw ConfigError("invariant violated: carrier wavelength must be > 0");
    cfg.fiber = parse_fiber(root.at("fiber"), cfg.grid.carrier_wavelength);
    cfg.amplifier = parse_amplifier(root.at("amplifier"));
    if (root.contains("nlc"))
        cfg.nlc = parse_nlc(root.at("nlc"));
    if (root.contains("campaign"))
        cfg.campaign = parse_campaign(root.at("campaign"));
    validate(cfg);
    return cfg;
}

SystemConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_to_json(const SystemConfig& cfg)
{
    const auto& f = cfg.fiber;
    const double ps2_km = units::ps * units::ps / units::km;
    json j;
    j["fiber"] = {
        {"attenuation_dB_per_km", units::attenuation_to_db_per_km(f.attenuation)},
        {"pump_attenuation_dB_per_km", units::attenuation_to_db_per_km(f.pump_attenuation)},
        {"dispersion_ps_per_nm_km", f.dispersion / (units::ps / (units::nm * units::km))},
        {"dispersion_slope_ps_per_nm2_km", f.dispersion_slope / (units::ps / (units::nm * units::nm * units::km))},
        {"beta2_ps2_per_km", f.beta2 / ps2_km},
        {"beta3_ps3_per_km", f.beta3 / (ps2_km * units::ps)},
        {"gamma_per_W_km", f.gamma * units::km},
        {"gain_slope_per_W_km_THz", f.gain_slope * units::km * units::THz},
        {"span_length_km", f.span_length / units::km},
        {"span_count", f.span_count},
    };
    const auto& g = cfg.grid;
    j["grid"] = {
        {"carrier_wavelength_nm", g.carrier_wavelength / units::nm},
        {"channel_spacing_GHz", g.channel_spacing / units::GHz},
        {"symbol_rate_GBd", g.symbol_rate / units::GHz},
        {"channel_count", g.channel_count},
    };
    const auto& a = cfg.amplifier;
    if (a.scheme == AmplifierScheme::Edfa)
    {
        j["amplifier"] = {{"scheme", "edfa"}, {"noise_figure_dB", a.noise_figure_db}};
    }
    else
    {
        j["amplifier"] = {
            {"scheme", "raman"},
            {"temperature_K", a.temperature},
            {"pump_frequency_offset_THz", a.pump_frequency_offset / units::THz},
            {"pump_power_W", a.pump_power},
            {"raman_gain_per_W_km", a.raman_gain * units::km},
            {"depleting_signal_power_W", a.depleting_signal_power},
        };
    }
    json nlc = json::array();
    for (double b : cfg.nlc.bandwidths)
        nlc.push_back(b / units::GHz);
    j["nlc"] = {{"bandwidth_GHz", nlc}};

    const auto& c = cfg.campaign;
    const char* shaping = c.shaping == ShapingSelection::Uniform ? "uniform"
                          : c.shaping == ShapingSelection::MaxwellBoltzmann ? "maxwell-boltzmann"
                                                                              : "both";
    const char* policy = c.power_policy == PowerPolicy::PerChannelOptimum ? "per-channel-optimum"
                         : c.power_policy == PowerPolicy::CentralOptimum ? "central-optimum"
                                                                          : "fixed";
    j["campaign"] = {
        {"modulation_formats", c.modulation_formats},
        {"shaping", shaping},
        {"qmc_samples", c.qmc_samples},
        {"qmc_replicates", c.qmc_replicates},
        {"rng_seed", c.rng_seed},
        {"power_policy", policy},
        {"output_dir", c.output_dir},
        {"desk_channel_count", c.desk_channel_count},
        {"ssfm",
         {{"channel_count", c.ssfm.channel_count},
          {"symbols", c.ssfm.symbols},
          {"samples_per_symbol", c.ssfm.samples_per_symbol},
          {"roll_off", c.ssfm.roll_off},
          {"steps_per_span", c.ssfm.steps_per_span},
          {"modulation_order", c.ssfm.modulation_order},
          {"include_ase", c.ssfm.include_ase}}},
    };
    if (c.launch_power)
        j["campaign"]["launch_power_dBm"] = watt_to_dbm(*c.launch_power);
    return j.dump(2);
}

} // namespace gnair
