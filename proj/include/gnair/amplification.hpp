#ifndef GNAIR_AMPLIFICATION_HPP
#define GNAIR_AMPLIFICATION_HPP

#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gnair/system_model.hpp"

namespace gnair
{

/// Signal power along one span, normalized so that P(0) = 1.
struct SpanPowerProfile
{
    Eigen::ArrayXd z;     ///< m, ascending, z(0) = 0, z(last) = span length
    Eigen::ArrayXd power; ///< P(z) / P(0)
    Eigen::ArrayXd pump;  ///< Raman pump power in W; empty for EDFA
    AmplifierScheme scheme = AmplifierScheme::Edfa;
    double attenuation = 0.0;       ///< signal attenuation used to build the profile, 1/m
    double boundary_residual = 0.0; ///< relative pump boundary mismatch after shooting (Raman)

    Eigen::Index size() const { return z.size(); }
    double span_length() const { return z(z.size() - 1); }
    double net_gain() const { return power(power.size() - 1); }
    /// Trapezoidal area under P(z), in m.
    double area() const;
};

struct AseSpec
{
    double variance_per_span = 0.0; ///< W, dual polarization, over one channel bandwidth
    AmplifierScheme scheme = AmplifierScheme::Edfa;
    double spontaneous_emission_factor = 0.0; ///< n_sp (EDFA)
    double phonon_occupancy = 0.0;            ///< kappa_T (Raman)
    double photon_number = 0.0;               ///< spontaneous photons per mode, N_phot (Raman)
};

struct RamanSolverOptions
{
    int steps = 2000;
    bool calibrate_transparency = true;
    int max_iterations = 200;
    double tolerance = 1e-12;
    double max_pump_power = 10.0; ///< W at z = L; calibration giving up beyond this is a non-convergence
    double signal_frequency = 193.4145e12; ///< only enters the pump depletion term
};

/// P(z) = exp(-alpha z) sampled on `steps` uniform intervals.
SpanPowerProfile edfa_power_profile(const FiberParams& fiber, int steps = 2000);

/// Lumped ASE variance per span: 2 (G - 1) n_sp h f0 df with G = exp(alpha L) and n_sp = NF/2.
double edfa_ase_variance(double attenuation, double span_length, double noise_figure_db, double carrier_frequency,
                         double bandwidth);

/// Same as edfa_ase_variance but for an arbitrary linear gain.
double edfa_ase_variance_for_gain(double gain, double noise_figure_db, double carrier_frequency, double bandwidth);

/**
 * Backward-pumped distributed Raman amplification.
 *
 * Solves
 *   dPs/dz = -alpha Ps + g Pp Ps
 *   dPp/dz = +alpha_p Pp + (fp/fs) g Psig Ps Pp
 * with Ps(0) = 1 and Pp(L) fixed, by shooting on Pp(0). When calibration is on, Pp(L) is then adjusted
 * until Ps(L) = 1 (transparent span). With g = 0 the result is plain attenuation.
 *
 * Throws ConvergenceError when either iteration misses its tolerance.
 */
SpanPowerProfile raman_power_profile(const FiberParams& fiber, const AmplifierSpec& amp,
                                     const RamanSolverOptions& options = {});

/// Bose-Einstein phonon occupancy at the pump-signal offset.
double phonon_occupancy(double temperature, double frequency_offset);

/// Raman ASE variance per span: 2 (kappa_T + 1) N_phot h f0 df.
AseSpec raman_ase_variance(const SpanPowerProfile& profile, const AmplifierSpec& amp, double carrier_frequency,
                           double bandwidth);

/// Profile of the configured amplification scheme.
SpanPowerProfile span_power_profile(const SystemConfig& cfg);

/// ASE per span for the configured scheme (profile is ignored for EDFA).
AseSpec ase_per_span(const SystemConfig& cfg, const SpanPowerProfile& profile);

/**
 * First-order inter-channel SRS under the triangular gain approximation:
 *   P_i(z) = P_i(0) base(z) Ptot exp(-Cr Ptot Leff(z) f_i) / sum_j P_j exp(-Cr Ptot Leff(z) f_j)
 * with Cr = gain_slope and Leff(z) the running integral of the baseline profile.
 * Returns one normalized profile per channel in grid order.
 */
std::vector<SpanPowerProfile> srs_tilt_profiles(const WdmGrid& grid, const FiberParams& fiber,
                                                std::span<const double> channel_powers,
                                                const SpanPowerProfile& baseline);

/// Two-column CSV: z_km,power
void write_profile_csv(std::ostream& out, const SpanPowerProfile& profile);

} // namespace gnair

#endif // GNAIR_AMPLIFICATION_HPP
