#ifndef GNAIR_PERFORMANCE_HPP
#define GNAIR_PERFORMANCE_HPP

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "gnair/errors.hpp"
#include "gnair/gn_engine.hpp"
#include "gnair/system_model.hpp"

namespace gnair
{

/// SNR = P / (ase_total + delta_eta P^3).
template <typename Scalar>
Scalar effective_snr(Scalar power, Scalar ase_total, Scalar delta_eta)
{
    if (!(power > Scalar(0)))
        throw DomainError("effective_snr: launch power must be positive");
    return power / (ase_total + delta_eta * power * power * power);
}

/// Maximizer of effective_snr: P* = (ase_total / (2 delta_eta))^(1/3).
template <typename Scalar>
Scalar optimum_launch_power(Scalar ase_total, Scalar delta_eta)
{
    if (!(delta_eta > Scalar(0)))
        throw DomainError("optimum_launch_power: delta_eta = 0 has no finite optimum (linear regime)");
    return std::cbrt(ase_total / (Scalar(2) * delta_eta));
}

struct ChannelSnr
{
    int channel = 0;
    double launch_power = 0.0; ///< W
    double ase_total = 0.0;    ///< N_s sigma^2_ASE, W
    double eta_full = 0.0;
    double eta_nlc = 0.0;
    double delta_eta = 0.0; ///< 1/W^2
    double snr_linear = 0.0;
    double snr_db = 0.0;
    double optimum_power = 0.0; ///< W; infinite when delta_eta = 0
};

/// delta_eta = eta(B) - eta(B_NLC), with the NLC table optional (EDC).
double delta_eta(const NonlinearCoefficientTable& full, const NonlinearCoefficientTable* nlc, int k);

/// Total accumulated ASE, N_s sigma^2 per span.
double accumulated_ase(const SystemConfig& cfg);

/**
 * One ChannelSnr per channel of `full`. Power follows `policy`: each channel's optimum, the central channel's
 * optimum for everyone, or `fixed_power`. Throws ConfigError when the tables cover different channels.
 */
std::vector<ChannelSnr> per_channel_report(const NonlinearCoefficientTable& full, const NonlinearCoefficientTable* nlc,
                                           double ase_total, PowerPolicy policy,
                                           std::optional<double> fixed_power = std::nullopt);

/// Convenience overload using the configuration's ASE and power policy.
std::vector<ChannelSnr> per_channel_report(const SystemConfig& cfg, const NonlinearCoefficientTable& full,
                                           const NonlinearCoefficientTable* nlc);

/**
 * SNR per channel when amplifiers restore each channel's launch power after an SRS-tilted span.
 * The tilt changes each amplifier's gain, hence its ASE; the NLI coefficients are left untouched.
 */
std::vector<ChannelSnr> srs_adjusted_report(const SystemConfig& cfg, const NonlinearCoefficientTable& full,
                                            std::span<const double> channel_powers,
                                            const std::vector<SpanPowerProfile>& tilted);

} // namespace gnair

#endif // GNAIR_PERFORMANCE_HPP
