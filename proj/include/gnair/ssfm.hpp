#ifndef GNAIR_SSFM_HPP
#define GNAIR_SSFM_HPP

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gnair/gn_engine.hpp"
#include "gnair/infotheory.hpp"
#include "gnair/system_model.hpp"

namespace gnair
{

/// Inputs of one split-step run. The grid's channel count is the simulated count.
struct SimulationConfig
{
    FiberParams fiber;
    WdmGrid grid;
    AmplifierSpec amplifier;
    int symbols = 1 << 16;
    int samples_per_symbol = 32;
    double roll_off = 1e-4;
    int steps_per_span = 200;
    std::uint64_t seed = 1;
    double launch_power = 1e-3; ///< W per channel, both polarizations
    bool include_ase = true;

    Eigen::Index samples() const { return static_cast<Eigen::Index>(symbols) * samples_per_symbol; }
    double sample_rate() const { return samples_per_symbol * grid.symbol_rate; }
};

/// SimulationConfig for a system description and simulation controls.
SimulationConfig make_simulation_config(const SystemConfig& cfg, const SsfmSettings& settings, double launch_power);

/// Dual-polarization complex baseband field.
struct FieldBuffer
{
    Eigen::VectorXcd x;
    Eigen::VectorXcd y;
    double sample_rate = 0.0;

    Eigen::Index size() const { return x.size(); }
    /// Mean power summed over both polarizations, W.
    double mean_power() const { return (x.squaredNorm() + y.squaredNorm()) / static_cast<double>(x.size()); }
};

/// Transmitted symbols per channel (grid order) and polarization.
struct TxRecord
{
    std::vector<int> channels;
    std::vector<Eigen::VectorXcd> x;
    std::vector<Eigen::VectorXcd> y;
};

struct WdmSignal
{
    FieldBuffer field;
    TxRecord tx;
};

/// Root-raised-cosine amplitude response with unit passband gain.
double rrc_response(double f, double symbol_rate, double roll_off);

/// RRC-shaped, Nyquist-multiplexed WDM field with symbols drawn from the constellation PMF.
/// Throws ConfigError if the sample rate cannot hold the aggregate spectrum and its mixing products.
WdmSignal generate_wdm_signal(const SimulationConfig& sim, const ConstellationSpec& constellation);

/// Step boundaries uniform in accumulated effective length: z_j = -ln(1 - (j/J)(1 - e^{-aL})) / a.
std::vector<double> log_step_boundaries(double attenuation, double span_length, int steps);

/**
 * Symmetric split-step solver of the Manakov equation over one fiber span.
 * Linear half steps (loss, beta2, beta3) in the frequency domain around a full Kerr step
 * with the 8/9 polarization-averaged coefficient. FFT plans are reused across spans.
 */
class SplitStepPropagator
{
  public:
    SplitStepPropagator(const FiberParams& fiber, int steps, Eigen::Index samples, double sample_rate);
    ~SplitStepPropagator();
    SplitStepPropagator(const SplitStepPropagator&) = delete;
    SplitStepPropagator& operator=(const SplitStepPropagator&) = delete;

    void propagate_span(FieldBuffer& field);

    /// Energy (sum |A|^2 over both polarizations) observed after each nonlinear step of the last span.
    const std::vector<double>& step_energies() const { return step_energies_; }

  private:
    void apply_linear(double length);
    void nonlinear(FieldBuffer& field, double length);

    struct Impl;
    std::unique_ptr<Impl> impl_;
    FiberParams fiber_;
    std::vector<double> boundaries_;
    std::vector<double> step_energies_;
};

/// One span of propagation (convenience wrapper creating a propagator).
FieldBuffer propagate_span(FieldBuffer field, const FiberParams& fiber, int steps);

/// Lumped amplifier: field gain sqrt(gain) then complex Gaussian ASE whose variance over `bandwidth` equals
/// `ase_variance` (dual polarization), spread white over the simulated band.
void amplify(FieldBuffer& field, double gain, double ase_variance, double bandwidth, std::mt19937_64& rng);

/// Ideal full-band EDC of `length` meters of fiber (inverts the beta2/beta3 phase).
void compensate_dispersion(FieldBuffer& field, const FiberParams& fiber, double length);

struct ChannelEstimate
{
    int channel = 0;
    double snr_linear = 0.0;
    double snr_db = 0.0;
};

/// Data-aided SNR of channel k from a dispersion-compensated field: LO shift, matched RRC filter, symbol-rate
/// sampling, least-squares channel gain, then E|x|^2 / E|y/h - x|^2 pooled over both polarizations.
ChannelEstimate receive_channel(const FieldBuffer& compensated, int k, const WdmGrid& grid, const TxRecord& tx,
                                double roll_off);

/// All channels at once (one forward transform per polarization).
std::vector<ChannelEstimate> receive_all(const FieldBuffer& compensated, const WdmGrid& grid, const TxRecord& tx,
                                         double roll_off);

/// Transmit, propagate over every span with amplification, compensate, receive. Returns per-channel SNR.
std::vector<ChannelEstimate> run_link(const SimulationConfig& sim, const ConstellationSpec& constellation);

struct VerificationRow
{
    int channel = 0;
    double frequency = 0.0; ///< absolute, Hz
    double snr_sim_db = 0.0;
    double snr_gn_db = 0.0;
    double snr_sim_no_slope_db = 0.0; ///< beta3 = 0 reference runs
    double snr_gn_no_slope_db = 0.0;
};

struct VerificationTable
{
    double launch_power = 0.0; ///< W per channel
    std::vector<VerificationRow> rows;
    /// Mean SNR of the low-frequency half minus the high-frequency half, dB.
    double sim_asymmetry_db = 0.0;
    double gn_asymmetry_db = 0.0;
    double sim_asymmetry_no_slope_db = 0.0;
    double gn_asymmetry_no_slope_db = 0.0;
    bool has_reference = false;

    double max_abs_difference_db() const;
};

/**
 * Runs the split-step model and the GN model on the same physics and launch power. When the simulation's launch
 * power is not positive the GN central-channel optimum is used. With `reference` both engines also run at
 * beta3 = 0 for the asymmetry comparison.
 */
VerificationTable run_verification_campaign(const SystemConfig& cfg, SimulationConfig sim, const QmcOptions& qmc,
                                            int modulation_order, bool reference = true);

/// CSV: channel_index,frequency_THz,snr_sim_dB,snr_gn_dB,difference_dB[,snr_sim_no_slope_dB,snr_gn_no_slope_dB]
void write_verification_csv(std::ostream& out, const VerificationTable& table);

} // namespace gnair

#endif // GNAIR_SSFM_HPP
