#ifndef GNAIR_SYSTEM_MODEL_HPP
#define GNAIR_SYSTEM_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "gnair/units.hpp"

namespace gnair
{

// ---------------------------------------------------------------------------
// Physical description of a link. All members are SI.
// ---------------------------------------------------------------------------

struct FiberParams
{
    double attenuation = 0.0;      ///< signal power attenuation, 1/m
    double pump_attenuation = 0.0; ///< Raman pump power attenuation, 1/m
    double dispersion = 0.0;       ///< D, s/m^2
    double dispersion_slope = 0.0; ///< S, s/m^3
    double beta2 = 0.0;            ///< s^2/m
    double beta3 = 0.0;            ///< s^3/m
    double gamma = 0.0;            ///< 1/(W m)
    double gain_slope = 0.0;       ///< Raman gain slope, 1/(W m Hz)
    double span_length = 0.0;      ///< m
    int span_count = 1;

    double link_length() const { return span_length * span_count; }
    double effective_length() const
    {
        return attenuation > 0.0 ? -std::expm1(-attenuation * span_length) / attenuation : span_length;
    }
};

/// Nyquist WDM grid. Channel k sits at baseband offset k * spacing, k symmetric around 0.
struct WdmGrid
{
    double carrier_wavelength = 1550.0 * units::nm;
    double channel_spacing = 32.0 * units::GHz;
    double symbol_rate = 32.0 * units::GHz;
    int channel_count = 1;

    double carrier_frequency() const { return wavelength_to_frequency(carrier_wavelength); }
    double total_bandwidth() const { return channel_count * channel_spacing; }
    int max_index() const { return (channel_count - 1) / 2; }
    double center_offset(int k) const { return k * channel_spacing; }
    bool contains(int k) const { return k >= -max_index() && k <= max_index(); }
    std::vector<int> channel_indices() const;
};

enum class AmplifierScheme
{
    Edfa,
    BackwardRaman
};

struct AmplifierSpec
{
    AmplifierScheme scheme = AmplifierScheme::Edfa;
    double noise_figure_db = 4.5;

    // Backward-pumped Raman only.
    double temperature = 300.0;                    ///< K
    double pump_frequency_offset = 13.2 * units::THz;
    double pump_power = 0.5;                       ///< W at z = L, starting guess for transparency calibration
    double raman_gain = 0.0;                       ///< g_R / A_eff, 1/(W m)
    double depleting_signal_power = 0.0;           ///< total signal power in the pump equation, W (0 = undepleted)

    double spontaneous_emission_factor() const { return db_to_linear(noise_figure_db) / 2.0; }
};

/// Receiver nonlinearity compensation bandwidths in Hz. 0 means EDC only.
struct NlcConfig
{
    std::vector<double> bandwidths{0.0};
};

enum class ShapingSelection
{
    Uniform,
    MaxwellBoltzmann,
    Both
};

enum class PowerPolicy
{
    PerChannelOptimum,
    CentralOptimum,
    Fixed
};

/// Split-step simulation controls (desk-scale defaults).
struct SsfmSettings
{
    int channel_count = 9;
    int symbols = 1 << 16;
    int samples_per_symbol = 32;
    double roll_off = 1e-4;
    int steps_per_span = 200;
    int modulation_order = 256;
    bool include_ase = true;
};

struct CampaignConfig
{
    std::vector<int> modulation_formats{64, 256, 1024};
    ShapingSelection shaping = ShapingSelection::Both;
    std::uint64_t qmc_samples = 1u << 20;
    int qmc_replicates = 16;
    std::uint64_t rng_seed = 1;
    std::optional<double> launch_power; ///< W per channel
    PowerPolicy power_policy = PowerPolicy::PerChannelOptimum;
    std::string output_dir = "out";
    int desk_channel_count = 41;
    SsfmSettings ssfm;
};

struct SystemConfig
{
    FiberParams fiber;
    WdmGrid grid;
    AmplifierSpec amplifier;
    NlcConfig nlc;
    CampaignConfig campaign;
};

// ---------------------------------------------------------------------------
// Dispersion conversions. Any coherent unit system works; SI is used internally.
// ---------------------------------------------------------------------------

template <typename Scalar>
struct DispersionTaylor
{
    Scalar beta2;
    Scalar beta3;
};

template <typename Scalar>
struct DispersionParameter
{
    Scalar dispersion;
    Scalar slope;
};

/// (D, S) at wavelength lambda to the Taylor coefficients (beta2, beta3) at the carrier.
template <typename Scalar>
DispersionTaylor<Scalar> dispersion_coeffs(Scalar dispersion, Scalar slope, Scalar lambda,
                                           Scalar light_speed = Scalar(constants::speed_of_light))
{
    const Scalar k = lambda * lambda / (Scalar(2) * std::numbers::pi_v<Scalar> * light_speed);
    return {-dispersion * k, k * k * (slope + Scalar(2) * dispersion / lambda)};
}

template <typename Scalar>
DispersionParameter<Scalar> dispersion_params(Scalar beta2, Scalar beta3, Scalar lambda,
                                              Scalar light_speed = Scalar(constants::speed_of_light))
{
    const Scalar k = lambda * lambda / (Scalar(2) * std::numbers::pi_v<Scalar> * light_speed);
    const Scalar d = -beta2 / k;
    return {d, beta3 / (k * k) - Scalar(2) * d / lambda};
}

// ---------------------------------------------------------------------------
// Configuration documents
// ---------------------------------------------------------------------------

/// Parses and validates a JSON configuration document (engineering units) into SI.
SystemConfig parse_config(const std::string& document);

/// Reads `path` and forwards to parse_config. Throws IoError if unreadable.
SystemConfig load_config(const std::string& path);

/// Throws ConfigError naming the first violated invariant.
void validate(const SystemConfig& cfg);

/// Echo of the configuration in the same engineering-unit schema parse_config accepts.
std::string config_to_json(const SystemConfig& cfg);

} // namespace gnair

#endif // GNAIR_SYSTEM_MODEL_HPP
