#ifndef GNAIR_INFOTHEORY_HPP
#define GNAIR_INFOTHEORY_HPP

#include <Eigen/Dense>

namespace gnair
{

enum class Shaping
{
    Uniform,
    MaxwellBoltzmann
};

/**
 * Constellation with an input PMF, normalized to unit average energy under that PMF.
 *
 * Square QAM built by build_constellation also carries its per-quadrature PAM description
 * (levels, level_pmf), which is what the separable MI path uses.
 */
struct ConstellationSpec
{
    int order = 0;
    Eigen::ArrayXcd points;
    Eigen::ArrayXd pmf;
    Eigen::ArrayXi labels; ///< binary-reflected Gray labels
    Shaping shaping = Shaping::Uniform;
    double zeta = 0.0; ///< MB parameter on the odd-integer grid (+-1, +-3, ...)

    Eigen::ArrayXd levels;    ///< scaled PAM amplitudes per quadrature (empty for generic sets)
    Eigen::ArrayXd level_pmf; ///< PMF over `levels`

    bool separable() const { return levels.size() > 0; }
};

/// Square M-QAM, Gray labeled, uniform or Maxwell-Boltzmann with p ~ exp(-zeta |x|^2) on the integer grid.
/// Throws DomainError for non-square orders or negative zeta.
ConstellationSpec build_constellation(int order, Shaping shaping = Shaping::Uniform, double zeta = 0.0);

/// Arbitrary point set with PMF (renormalized to unit energy). No separable description.
ConstellationSpec make_constellation(const Eigen::ArrayXcd& points, const Eigen::ArrayXd& pmf);

double entropy_bits(const Eigen::ArrayXd& pmf);

/// Gauss-Hermite rule for weight exp(-x^2) (Golub-Welsch).
struct GaussHermiteRule
{
    Eigen::ArrayXd nodes;
    Eigen::ArrayXd weights;
};

GaussHermiteRule gauss_hermite_rule(int order);

enum class MiMethod
{
    GaussHermite2D,
    GaussHermiteSeparable
};

struct MiResult
{
    double mi_bits = 0.0;
    MiMethod method = MiMethod::GaussHermite2D;
    int order = 0; ///< Hermite order of the returned estimate
    double snr = 0.0;
};

inline constexpr int default_hermite_order = 16;
inline constexpr double hermite_tolerance = 1e-4;

/// Mutual information (bit/symbol, one polarization) of the Gaussian channel with sigma^2 = 1/snr,
/// by 2-D Gauss-Hermite tensor quadrature at a fixed order.
double mi_gauss_hermite_fixed(const ConstellationSpec& c, double snr, int order);

/// As above with the order doubled from `order` until successive estimates differ by < hermite_tolerance.
MiResult mi_gauss_hermite(const ConstellationSpec& c, double snr, int order = default_hermite_order);

/// Square-QAM shortcut: the complex channel splits into two identical PAM channels, I = 2 I_PAM.
double mi_separable_fixed(const ConstellationSpec& c, double snr, int order);
MiResult mi_separable(const ConstellationSpec& c, double snr, int order = default_hermite_order);

struct ZetaOptimum
{
    double zeta = 0.0;
    double mi = 0.0;
    double mi_uniform = 0.0;
};

/// zeta >= 0 maximizing the MB-shaped MI of square M-QAM at the given SNR.
ZetaOptimum optimize_zeta(int order, double snr);

/// Smallest zeta (doubling search) with PMF entropy below 2.01 bit; the upper end of the zeta search.
double zeta_upper_bound(int order);

/// Equivalent-SNR gain in dB: the uniform-input SNR reaching `mi` minus `snr`, both in dB.
double shaping_gain_db(int order, double snr, double mi);

struct RateMetrics
{
    double air = 0.0;          ///< bit/s, both polarizations
    double se = 0.0;           ///< bit/s/Hz
    double code_rate = 0.0;    ///< R* = mi / log2 M
    double overhead_pct = 0.0; ///< (1/R* - 1) * 100
};

RateMetrics air_and_code_rate(double mi, double symbol_rate, int order, double channel_spacing);

} // namespace gnair

#endif // GNAIR_INFOTHEORY_HPP
