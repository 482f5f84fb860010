#ifndef GNAIR_GN_ENGINE_HPP
#define GNAIR_GN_ENGINE_HPP

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "gnair/amplification.hpp"
#include "gnair/system_model.hpp"

namespace gnair
{

struct PhaseMismatchParams
{
    double beta2; ///< s^2/m
    double beta3; ///< s^3/m
};

/// FWM phase mismatch with third-order dispersion, rad/m. Frequencies are baseband offsets in Hz.
template <typename Scalar>
Scalar phase_mismatch(Scalar f, Scalar f1, Scalar f2, Scalar beta2, Scalar beta3)
{
    constexpr Scalar pi = std::numbers::pi_v<Scalar>;
    return Scalar(4) * pi * pi * (beta2 + pi * (f1 + f2) * beta3) * (f1 - f) * (f2 - f);
}

inline double phase_mismatch(double f, double f1, double f2, const PhaseMismatchParams& p)
{
    return phase_mismatch(f, f1, f2, p.beta2, p.beta3);
}

/// Coherent multi-span build-up: sum_{m=1}^{spans} exp(i dbeta L (m - 1)).
template <typename Scalar>
std::complex<Scalar> phased_array_factor(Scalar dbeta, int spans, Scalar span_length)
{
    const Scalar x = dbeta * span_length;
    if (spans == 1)
        return {Scalar(1), Scalar(0)};
    if (std::abs(std::sin(x / Scalar(2))) < Scalar(1e-12))
    {
        std::complex<Scalar> acc{};
        for (int m = 0; m < spans; ++m)
            acc += std::polar(Scalar(1), x * Scalar(m));
        return acc;
    }
    const std::complex<Scalar> i{Scalar(0), Scalar(1)};
    return (Scalar(1) - std::exp(i * (x * Scalar(spans)))) / (Scalar(1) - std::exp(i * x));
}

/// |phased_array_factor|^2 = sin^2(N x / 2) / sin^2(x / 2), with the removable singularity handled.
template <typename Scalar>
Scalar phased_array_gain(Scalar dbeta, int spans, Scalar span_length)
{
    const Scalar half = dbeta * span_length / Scalar(2);
    const Scalar s = std::sin(half);
    if (std::abs(s) < Scalar(1e-12))
        return std::norm(phased_array_factor(dbeta, spans, span_length));
    const Scalar t = std::sin(half * Scalar(spans));
    return (t * t) / (s * s);
}

/// FWM efficiency over one span: integral of exp(i dbeta z) P(z) dz, in m.
/// EDFA profiles use the closed form; other profiles integrate the piecewise-linear interpolant exactly.
std::complex<double> fwm_efficiency(double dbeta, const SpanPowerProfile& profile);

/// |mu(f, f1, f2)|^2 = |rho|^2 |phi|^2, prepared once per configuration for fast repeated evaluation.
class NliKernel
{
  public:
    NliKernel(const FiberParams& fiber, const SpanPowerProfile& profile, int profile_segments = 250);

    double operator()(double f, double f1, double f2) const;
    double efficiency_squared(double dbeta) const;

  private:
    PhaseMismatchParams dispersion_;
    int spans_;
    double span_length_;
    bool analytic_;
    double attenuation_;
    double end_power_; ///< exp(-alpha L)
    double step_ = 0.0;
    Eigen::ArrayXd knots_;      ///< P at uniform knots
    Eigen::ArrayXd increments_; ///< P(j+1) - P(j)
};

/// Frequency interval [lo, hi] in Hz (baseband).
struct Band
{
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
};

/// Integration band for channel k: the full WDM band when b_effective >= B, otherwise b_effective centered
/// on the channel and clipped to the transmitted band. b_effective = 0 gives an empty band.
Band integration_band(const WdmGrid& grid, int k, double b_effective);

struct QmcOptions
{
    std::uint64_t samples = 1u << 20; ///< total points, split evenly across replicates
    int replicates = 16;
    std::uint64_t seed = 1;
};

struct QmcEstimate
{
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t accepted = 0;
};

/// Prefactor 16 gamma^2 / (27 Rs^2) of the NLI spectral density.
double nli_prefactor(const FiberParams& fiber, const WdmGrid& grid);

/// NLI spectral density at offset f (per unit P^3) over the band, by QMC over (f1, f2).
QmcEstimate nli_psd(double f, const SystemConfig& cfg, const SpanPowerProfile& profile, Band band,
                    const QmcOptions& options);

/// Same over the band [-B/2, B/2].
QmcEstimate nli_psd(double f, const SystemConfig& cfg, const SpanPowerProfile& profile, double bandwidth,
                    const QmcOptions& options);

/// Nonlinear coefficient of channel k in 1/W^2, by QMC over (f, f1, f2).
/// With b_removed > 0, mixing triples lying entirely inside the b_removed band around channel k are left out:
/// the estimate is eta(b_effective) - eta(b_removed) on the very points of the plain estimate, so it is never
/// negative and never exceeds it.
QmcEstimate eta_channel(int k, const SystemConfig& cfg, const SpanPowerProfile& profile, double b_effective,
                        const QmcOptions& options, double b_removed = 0.0);

struct EtaEntry
{
    int channel = 0;
    double center_frequency = 0.0; ///< absolute, Hz
    double eta = 0.0;              ///< 1/W^2
    double std_error = 0.0;
    std::uint64_t samples = 0;
};

struct NonlinearCoefficientTable
{
    double bandwidth = 0.0;         ///< B_effective used
    double removed_bandwidth = 0.0; ///< residual tables: the band left out
    std::vector<EtaEntry> rows;

    const EtaEntry& at(int k) const;
};

/// eta for every channel of the grid; channels are distributed over `workers` threads (0 = hardware).
/// Output is bit-identical for any worker count.
NonlinearCoefficientTable compute_eta_table(const SystemConfig& cfg, const SpanPowerProfile& profile,
                                            double b_effective, const QmcOptions& options, int workers = 0,
                                            double b_removed = 0.0);

/// eta inside the NLC band from a full table and the matching residual table (same band, seed and samples):
/// full - residual, so eta_nlc <= eta_full and nested NLC bands stay ordered.
NonlinearCoefficientTable nlc_table(const NonlinearCoefficientTable& full, const NonlinearCoefficientTable& residual);

/// CSV with columns channel_index,center_frequency_THz,eta_inv_W2,stderr,samples.
void write_eta_csv(std::ostream& out, const NonlinearCoefficientTable& table);
NonlinearCoefficientTable read_eta_csv(std::istream& in, double bandwidth);

/// Hash of everything that determines an eta table.
std::uint64_t physics_hash(const SystemConfig& cfg, double b_effective, const QmcOptions& options,
                           double b_removed = 0.0);

} // namespace gnair

#endif // GNAIR_GN_ENGINE_HPP
