#ifndef GNAIR_UNITS_HPP
#define GNAIR_UNITS_HPP

#include <cmath>
#include <numbers>

namespace gnair
{

namespace constants
{
inline constexpr double planck = 6.62607015e-34;      // J s
inline constexpr double boltzmann = 1.380649e-23;     // J/K
inline constexpr double speed_of_light = 299792458.0; // m/s
} // namespace constants

// Everything past the config loader is SI: W, m, s, Hz.
namespace units
{
inline constexpr double km = 1e3;
inline constexpr double nm = 1e-9;
inline constexpr double ps = 1e-12;
inline constexpr double GHz = 1e9;
inline constexpr double THz = 1e12;
inline constexpr double mW = 1e-3;

/// dB/km of power loss to the SI power attenuation coefficient in 1/m.
template <typename Scalar>
constexpr Scalar attenuation_from_db_per_km(Scalar db_per_km)
{
    return db_per_km * Scalar(std::numbers::ln10 / 10.0) / Scalar(km);
}

template <typename Scalar>
constexpr Scalar attenuation_to_db_per_km(Scalar per_m)
{
    return per_m * Scalar(km) / Scalar(std::numbers::ln10 / 10.0);
}
} // namespace units

template <typename Scalar>
Scalar db_to_linear(Scalar db)
{
    return std::pow(Scalar(10), db / Scalar(10));
}

template <typename Scalar>
Scalar linear_to_db(Scalar lin)
{
    return Scalar(10) * std::log10(lin);
}

template <typename Scalar>
Scalar dbm_to_watt(Scalar dbm)
{
    return Scalar(units::mW) * db_to_linear(dbm);
}

template <typename Scalar>
Scalar watt_to_dbm(Scalar w)
{
    return linear_to_db(w / Scalar(units::mW));
}

inline double wavelength_to_frequency(double wavelength) { return constants::speed_of_light / wavelength; }

} // namespace gnair

#endif // GNAIR_UNITS_HPP
